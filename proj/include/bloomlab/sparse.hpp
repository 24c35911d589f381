#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bloomlab/dyadic.hpp"
#include "bloomlab/weights.hpp"

namespace bloom {

// Tree cubes with disjoint witness cell sets E_S inside each S.
struct SparseFamily {
    TreePtr tree;
    std::vector<Cube> cubes;
    std::vector<std::vector<std::uint64_t>> witnesses;  // sorted finest-cell indices
    double gamma = 0.5;
    std::optional<Weight> measure;  // Lebesgue when empty

    double measure_of(const Cube& q) const;
    double measure_of(const std::vector<std::uint64_t>& cells) const;
};

struct SparseCheck {
    bool ok = false;
    bool disjoint = false;
    double worst_ratio = 1.0;  // min measure(E_S) / measure(S); 1 for the empty family
};

// Throws DomainError when a witness escapes its cube.
SparseCheck verify_sparse(const SparseFamily& s, double gamma);

// Greedy witness assignment, smallest cubes first; each cube takes just enough
// free cells (heaviest first) for gamma of its mass. Returns nullopt if some
// cube cannot be served.
std::optional<SparseFamily> assign_witnesses(const TreePtr& tree, std::vector<Cube> cubes, double gamma,
                                             const std::optional<Weight>& measure = std::nullopt);

// Carleson norm of the family's indicator; throws NumericalError if it exceeds 1/gamma
// (only checked when `enforce` and the family was verified sparse).
double carleson_from_sparse(const SparseFamily& s, const Weight& mu, bool enforce = true);

struct DominationResult {
    SparseFamily family;
    std::vector<Cube> stopping_roots;  // the cubes the recursion started from
    double max_stop_ratio = 0.0;       // max over nodes of sum |P_k| / |Q|
    int stop_violations = 0;           // nodes where that ratio exceeds 1/2
};

// Stopping-time sparse domination of the paraproduct, exact on the finite tree.
DominationResult paraproduct_sparse_dominate(const GridFunction& b, const GridFunction& f, const Cube& q0);

double domination_constant(int dim);  // 2^{d+5}

// sum_{Q in S} <|b - <b>_Q|>_Q <|f|>_Q 1_Q
GridFunction sparse_majorant(const GridFunction& b, const GridFunction& f, const std::vector<Cube>& cubes);

struct DominationCheck {
    bool ok = false;
    double max_violation = 0.0;  // max over cells of |lhs| - constant * rhs
};
DominationCheck domination_check(const GridFunction& lhs, const SparseFamily& s, const GridFunction& b,
                                 const GridFunction& f, double constant);

// Text format, one cube per line: "level i_1 .. i_d : a-b c-d ..." where a-b are
// half-open ranges of finest-cell indices forming the witness set.
void write_sparse_family(std::ostream& os, const SparseFamily& s);
SparseFamily read_sparse_family(std::istream& is, const TreePtr& tree);

}  // namespace bloom
