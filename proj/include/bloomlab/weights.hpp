#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bloomlab/dyadic.hpp"

namespace bloom {

// \int_box |x|^gamma dx. Exact in d = 1; adaptive Gauss-Legendre in d >= 2
// (relative tolerance 1e-8). Returns nullopt when the box touches the origin
// and gamma <= -d (not integrable).
std::optional<double> power_box_integral(const Box& box, double gamma);

// Density c_cell * |x|^gamma: a per-cell coefficient times one power of |x|.
// The form is closed under powers and products, which covers dual weights and
// the Bloom weight. Cells where the density is not integrable (origin corner,
// gamma <= -d) are truncated to density(midpoint) * volume.
class Weight {
public:
    static Weight lebesgue(TreePtr tree);
    static Weight power(TreePtr tree, double gamma);
    // Constant density per finest cell.
    static Weight piecewise(TreePtr tree, std::vector<double> densities);
    static Weight from_law(TreePtr tree, std::vector<double> coefficients, double gamma);

    Weight pow(double s) const;
    friend Weight operator*(const Weight& a, const Weight& b);

    const DyadicTree& tree() const { return *tree_; }
    const TreePtr& tree_ptr() const { return tree_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& coefficients() const { return coeff_; }
    bool is_lebesgue() const { return lebesgue_; }

    double density(std::uint64_t cell, const Point& x) const;
    // Density at the cell midpoint.
    double representative_density(std::uint64_t cell) const;
    double mass(std::uint64_t cell) const { return levels_.back()[cell]; }
    double mass(const Cube& q) const;
    const std::vector<double>& masses() const { return levels_.back(); }
    const LevelArray& level_masses() const { return levels_; }
    // Mass of a sub-box of one cell.
    double box_mass(std::uint64_t cell, const Box& part) const;
    bool truncated(std::uint64_t cell) const { return truncated_[cell] != 0; }
    std::size_t truncated_count() const;

private:
    Weight(TreePtr tree, std::vector<double> coeff, double gamma, bool lebesgue);

    TreePtr tree_;
    std::vector<double> coeff_;
    double gamma_ = 0.0;
    bool lebesgue_ = false;
    std::vector<std::uint8_t> truncated_;
    LevelArray levels_;
};

double average(const GridFunction& f, const Cube& q, const Weight& mu);
LevelArray level_weighted_averages(const GridFunction& f, const Weight& mu);

struct ExponentConfig {
    double p = 2.0;
    double q = 2.0;
    int dim = 1;

    ExponentConfig() = default;
    ExponentConfig(double p_, double q_, int dim_ = 1);

    double p_dual() const { return p / (p - 1.0); }
    double q_dual() const { return q / (q - 1.0); }
    bool has_r() const { return q < p; }
    double r() const;        // 1/r = 1/q - 1/p, q < p only
    double r_dual() const;   // 1/r' = 1/p + 1/q'
    double alpha() const { return dim * (1.0 / p - 1.0 / q); }
    // Exponent s of the Bloom relation nu^s = mu^{1/p} lambda^{-1/q}.
    double bloom_exponent() const { return 1.0 / p + 1.0 / q_dual(); }
};

struct BloomTriple {
    ExponentConfig cfg;
    Weight mu, lambda;
    Weight mu_dual, lambda_dual;
    Weight nu;
};

Weight dual_weight(const Weight& w, double p);
BloomTriple bloom_triple(const Weight& mu, const Weight& lambda, const ExponentConfig& cfg);

enum class Scope { dyadic, one_third, grid_intervals };

double ap_characteristic(const Weight& w, double p, Scope scope = Scope::dyadic);
double fujii_wilson_ainfty(const Weight& w, const Weight& mu);
double carleson_norm(const LevelArray& s, const Weight& mu);

struct CarlesonRatio {
    double ratio = 0.0;        // largest sampled ||s||_Car(w) / ||s||_Car(mu)
    double fujii_wilson = 0.0; // the upper bound it must respect
};
// Sampled lower bound for [w]_{A_inf(mu)} via Carleson ratios; throws
// NumericalError if the sample exceeds the Fujii-Wilson value.
CarlesonRatio relative_ainfty_carleson_ratio(const Weight& w, const Weight& mu, std::uint64_t seed,
                                             int trials = 200);

double upper_joint_characteristic(const BloomTriple& t);
double lower_joint_characteristic(const BloomTriple& t);

struct CubeLowerBound {
    double constant = 0.0;  // smallest C with side^{gamma+d} <= C nu(Q)
    Box worst;
};
// For nu = |x|^gamma: checks side(Q)^{gamma+d} <= C nu(Q) over the tree and
// its shifted lattices.
CubeLowerBound power_weight_cube_lower_bound(const TreePtr& tree, double gamma);

// True when each of the last `steps` consecutive ratios is at least `factor`.
bool is_divergent(const std::vector<double>& values, double factor = 1.5, int steps = 3);

// Mass of a shifted-lattice cube under w (partial cells integrated exactly).
double lattice_mass(const ShiftedLattice& lattice, const LatticeCube& q, const Weight& w);

}  // namespace bloom
