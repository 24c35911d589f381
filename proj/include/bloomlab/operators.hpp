#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bloomlab/dyadic.hpp"
#include "bloomlab/sparse.hpp"
#include "bloomlab/weights.hpp"

namespace bloom {

// sup over cubes Q containing the cell of <|f|>^mu_Q.
GridFunction maximal(const GridFunction& f, const Weight& mu, Scope scope = Scope::dyadic);

// sup over cubes Q containing the cell of nu(Q)^{-1} \int_Q |b - <b>_Q| dx.
// Scope::grid_intervals (d = 1) takes every interval of whole cells.
GridFunction sharp_maximal(const GridFunction& b, const Weight& nu, Scope scope = Scope::dyadic);

// sum over non-finest Q of D_Q b <f>_Q, over the whole tree or the cubes of `only`.
GridFunction paraproduct(const GridFunction& b, const GridFunction& f);
GridFunction paraproduct(const GridFunction& b, const GridFunction& f, const CubeSet& only);
// Adjoint in L^2(dx): sum_Q |Q|^{-1} (\int D_Q b g) 1_Q.
GridFunction paraproduct_adjoint(const GridFunction& b, const GridFunction& g);

enum class SparseVariant { plain, adjoint, exponent };
// plain: sum |b - <b>_Q| <f>_Q 1_Q; adjoint: sum <|b - <b>_Q| f>_Q 1_Q;
// exponent: sum <|f|^s>_Q^{1/s} 1_Q (b unused).
GridFunction sparse_op(const GridFunction& b, const GridFunction& f, const std::vector<Cube>& cubes,
                       SparseVariant variant, double s = 1.0);

// sum_Q v_Q D_Q f over non-finest cubes.
GridFunction martingale_transform(const GridFunction& f, const LevelArray& v);

struct WeakTypeCheck {
    double worst_ratio = 0.0;  // max_t t |{|out| > t}| / (C ||f||_1 sup|v|)
    double worst_t = 0.0;
};
WeakTypeCheck weak_type_check(const GridFunction& out, const GridFunction& f, double sup_v, double constant = 2.0,
                              int points = 100);

// Discrete Hilbert transform on midpoint nodes, diagonal cell excluded:
// (Hf)_i = sum_{j != i} f_j |cell| / (x_i - x_j). d = 1 only.
GridFunction hilbert_transform(const GridFunction& f);
// b Hf - H(bf).
GridFunction commutator(const GridFunction& b, const GridFunction& f);

// Linear operator on grid functions with its L^2(dx) adjoint.
struct LinearOperator {
    std::string name;
    std::function<GridFunction(const GridFunction&)> apply;
    std::function<GridFunction(const GridFunction&)> adjoint;
};

LinearOperator identity_operator();
LinearOperator multiplication_operator(const GridFunction& b);
LinearOperator paraproduct_operator(const GridFunction& b);
LinearOperator commutator_operator(const GridFunction& b);
LinearOperator sparse_operator(const GridFunction& b, const std::vector<Cube>& cubes);

}  // namespace bloom
