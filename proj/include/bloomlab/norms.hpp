#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bloomlab/dyadic.hpp"
#include "bloomlab/operators.hpp"
#include "bloomlab/sparse.hpp"
#include "bloomlab/weights.hpp"

namespace bloom {

enum class Method { exact_sum, golden_section, gradient_ascent, sparse_sup };
const char* method_name(Method m);

using Certificate = std::variant<std::monostate, double, GridFunction, SparseFamily>;

struct NormReport {
    double value = 0.0;
    Method method = Method::exact_sum;
    Certificate certificate;
    std::vector<double> trace;
};

// JSON object {schema, value, method, certificate-ref, trace}.
std::string report_json(const NormReport& r, const std::string& certificate_ref);
// "cell,x_1[,x_2,x_3],value" rows, cell midpoints as coordinates.
void write_grid_csv(const GridFunction& f, const std::string& path);

double lp_norm(const GridFunction& f, const Weight& w, double p);

double bmo_alpha_norm(const GridFunction& b, const Weight& nu, double alpha, Scope scope = Scope::dyadic);

// ||M^#_nu b||_{L^r(nu)}; the certificate is the sharp maximal function.
NormReport sharp_maximal_r_norm(const GridFunction& b, const Weight& nu, double r, Scope scope = Scope::dyadic);

// h(c) = sum_i |b_i - c|^r (nu^{1-r})(cell_i) = ||(b - c) nu^{-1}||^r_{L^r(nu)}.
double multiplier_objective(const GridFunction& b, const Weight& nu_1mr, double r, double c);
// inf_c h(c)^{1/r}: a grid scan over [min b - range, max b + range] followed by
// golden-section refinement. Certificate: the minimizing c. Trace: c, h(c) pairs.
NormReport multiplier_norm(const GridFunction& b, const Weight& nu, double r, int grid_points = 33,
                           int iterations = 200);
NormReport multiplier_norm(const GridFunction& b, const BloomTriple& t);

// Principal-cube family (threshold on inf_c \int_Q |b - c| / nu(Q)) and its sum
// (sum_S (nu(S)^{-1} \int_S |b - <b>_S|)^r nu(S))^{1/r}. Certificate: the family.
NormReport discretized_sharp_sup(const GridFunction& b, const Weight& nu, double r, double gamma);
double discretized_sum(const GridFunction& b, const Weight& nu, double r, const std::vector<Cube>& cubes);

struct AscentBudget {
    int restarts = 64;
    int iterations = 100;
    std::uint64_t seed = 0x5EED;
    int structured_levels = 3;     // indicator / Haar / dual-weight starts on cubes up to this level
    int polish = 8;                // structured starts refined by ascent (best initial ratios)
    std::vector<GridFunction> starts;  // extra caller-supplied starts
};

// ||Uf||_{L^q(lambda)} / ||f||_{L^p(mu)}.
double operator_ratio(const LinearOperator& u, const GridFunction& f, const Weight& mu, const Weight& lambda,
                      double p, double q);
// Certified lower bound on ||U||_{L^p(mu) -> L^q(lambda)} by normalized gradient
// ascent with backtracking. Certificate: the best test function. Trace: best
// ratio after each start.
NormReport empirical_operator_norm(const LinearOperator& u, const Weight& mu, const Weight& lambda, double p,
                                   double q, const AscentBudget& budget = {});

// Bilinear-form test pair attached to a family cube S; f lives on q_box, g on r_box.
struct TestPair {
    Cube s;
    GridFunction f, g;
    Box q_box, r_box;
};

// (sum_S |nu(S)^{-1} \int g U f|^r nu(S))^{1/r}. Throws DomainError when a pair
// violates the geometry: sides within [side(S)/4, 4 side(S)], distance <= 4 side(S),
// supports inside their boxes.
double sequential_testing_functional(const LinearOperator& u, const std::vector<TestPair>& pairs, const Weight& nu,
                                     double r);

// Median-split pairs for the Hilbert commutator at cube S (d = 1): S~ is S
// moved by two sides (right if it fits, else left); m is a median of b on S~;
// pairs (1_{b >= m on S}, 1_{b <= m on S~}) and (1_{b < m on S}, 1_{b >= m on S~}).
struct CommutatorPairs {
    std::vector<TestPair> pairs;
    double oscillation = 0.0;  // \int_S |b - <b>_S|
    double tested = 0.0;       // sum of |<g, [b,H] f>| over the pairs
    double constant() const { return tested > 0.0 ? oscillation / tested : 0.0; }
};
CommutatorPairs commutator_test_pairs(const GridFunction& b, const Cube& s);

// sup_Q nu(Q)^{-(1/p + 1/q')} \int_Q |U 1_Q|, p <= q.
double q_ge_p_testing(const LinearOperator& u, const BloomTriple& t);

struct NecessityBound {
    double joint_at_cube = 0.0;  // <mu'>^{1/p'} <lambda>^{1/q} <nu>^{1/p+1/q'} at Q: a lower bound for the joint characteristic
    double b_functional = 0.0;   // |Q| / nu(Q)^{1/p+1/q'}, times r' when q < p
    double implied = 0.0;        // norm estimate / b_functional
    double exact_norm = 0.0;     // ||Pi_b|| for the half-split b (rank one, closed form)
    double test_ratio = 0.0;     // ||Pi_b f|| / ||f|| at f = 1_Q mu' (cell averages)
};
// Half-split test of the paraproduct at Q with f = 1_Q mu'.
NecessityBound weight_necessity_bound(double norm_estimate, const BloomTriple& t, const Cube& q);

struct CauchyDiagnostic {
    std::vector<double> averages;  // <b>_{Q_j} along a chain of growing cubes
    std::vector<double> bounds;    // 2 C nu^{1-r}(Q_j)^{-1/r} bounds on later increments
    bool consistent = true;
};

struct FeffermanSteinReport {
    double sharp_norm = 0.0;        // ||M^#_nu b||_{L^r(nu)}
    double multiplier_inf = 0.0;    // inf_c ||(b - c) nu^{-1}||_{L^r(nu)}
    double argmin_c = 0.0;
    double ratio_i = 0.0;           // sharp / multiplier
    double ratio_ii = 0.0;          // multiplier / sharp
    double ar_dual = 0.0;           // [nu]_{A_{r'}}
    double ainfty = 0.0;            // [nu]_{A_inf}
    double bound_ii_factor = 0.0;   // [nu]_{A_{r'}}^{r-1} [nu]_{A_inf}
    bool pointwise_bound_ok = true; // M^# b <= 2 M^nu((b - c) nu^{-1}) at the argmin c
    CauchyDiagnostic cauchy;
};
FeffermanSteinReport fefferman_stein_equivalence_check(const GridFunction& b, const Weight& nu, double r,
                                                       Scope scope = Scope::dyadic);

}  // namespace bloom
