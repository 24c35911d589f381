#include "bloomlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bloom {

namespace {

// ---- |x|^gamma integrals ----

std::optional<double> line_integral(double a, double b, double g) {
    if (b <= a) return 0.0;
    if (g == 0.0) return b - a;
    if (a < 0.0 && b > 0.0) {
        auto l = line_integral(0.0, -a, g);
        auto r = line_integral(0.0, b, g);
        if (!l || !r) return std::nullopt;
        return *l + *r;
    }
    if (b <= 0.0) return line_integral(-b, -a, g);
    if (a == 0.0) {
        if (g <= -1.0) return std::nullopt;
        return std::pow(b, g + 1.0) / (g + 1.0);
    }
    const double rel = (b - a) / a;
    if (g == -1.0) return std::log1p(rel);
    return std::pow(a, g + 1.0) * std::expm1((g + 1.0) * std::log1p(rel)) / (g + 1.0);
}

constexpr int kGaussOrder = 8;
constexpr double kGaussNodes[kGaussOrder] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                             0.7966664774136267,  0.9602898564975363};
constexpr double kGaussWeights[kGaussOrder] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                               0.2223810344533745, 0.1012285362903763};

double gauss_box(const Box& box, double g) {
    const int d = box.dim;
    std::array<int, kMaxDim> idx{};
    double total = 0.0;
    while (true) {
        double r2 = 0.0, w = 1.0;
        for (int j = 0; j < d; ++j) {
            const double half = 0.5 * (box.hi[j] - box.lo[j]);
            const double x = box.lo[j] + half * (1.0 + kGaussNodes[idx[j]]);
            r2 += x * x;
            w *= half * kGaussWeights[idx[j]];
        }
        total += w * std::pow(r2, 0.5 * g);
        int j = 0;
        while (j < d) {
            if (++idx[j] < kGaussOrder) break;
            idx[j] = 0;
            ++j;
        }
        if (j == d) return total;
    }
}

std::vector<Box> split(const Box& box) {
    std::vector<Box> out;
    const int d = box.dim;
    for (unsigned c = 0; c < (1u << d); ++c) {
        Box b = box;
        for (int j = 0; j < d; ++j) {
            const double mid = 0.5 * (box.lo[j] + box.hi[j]);
            if ((c >> j) & 1u) b.lo[j] = mid;
            else b.hi[j] = mid;
        }
        out.push_back(b);
    }
    return out;
}

double distance_to_origin(const Box& box) {
    double r2 = 0.0;
    for (int j = 0; j < box.dim; ++j) {
        double t = 0.0;
        if (box.lo[j] > 0.0) t = box.lo[j];
        else if (box.hi[j] < 0.0) t = -box.hi[j];
        r2 += t * t;
    }
    return std::sqrt(r2);
}

double diagonal(const Box& box) {
    double r2 = 0.0;
    for (int j = 0; j < box.dim; ++j) r2 += box.side(j) * box.side(j);
    return std::sqrt(r2);
}

double adaptive(const Box& box, double g, double coarse, int depth) {
    double fine = 0.0;
    const auto parts = split(box);
    std::vector<double> est(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) fine += est[i] = gauss_box(parts[i], g);
    if (std::fabs(fine - coarse) <= 1e-11 * std::fabs(fine) || depth >= 30) return fine;
    double sum = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) sum += adaptive(parts[i], g, est[i], depth + 1);
    return sum;
}

// Box away from the origin.
double smooth_integral(const Box& box, double g) {
    const double coarse = gauss_box(box, g);
    if (distance_to_origin(box) > 4.0 * diagonal(box)) return coarse;
    return adaptive(box, g, coarse, 0);
}

// Box [0, w_1) x ... x [0, w_d) with the origin as a corner.
double corner_integral(const Box& box, double g) {
    const int d = box.dim;
    double rest = 0.0;
    const auto parts = split(box);
    for (std::size_t c = 1; c < parts.size(); ++c) rest += smooth_integral(parts[c], g);
    return rest / (1.0 - std::pow(2.0, -(g + d)));
}

}  // namespace

std::optional<double> power_box_integral(const Box& box, double g) {
    const int d = box.dim;
    if (d == 1) return line_integral(box.lo[0], box.hi[0], g);
    if (g == 0.0) return box.volume();
    bool touches = true;
    for (int j = 0; j < d; ++j) touches = touches && box.lo[j] <= 0.0 && box.hi[j] >= 0.0;
    if (!touches) return smooth_integral(box, g);
    if (g <= -static_cast<double>(d)) return std::nullopt;
    // Split into orthant pieces, reflect each to the positive orthant.
    double total = 0.0;
    for (unsigned c = 0; c < (1u << d); ++c) {
        Box piece;
        piece.dim = d;
        bool empty = false;
        for (int j = 0; j < d; ++j) {
            const double w = ((c >> j) & 1u) ? box.hi[j] : -box.lo[j];
            if (w <= 0.0) empty = true;
            piece.lo[j] = 0.0;
            piece.hi[j] = w;
        }
        if (!empty) total += corner_integral(piece, g);
    }
    return total;
}

// ---- Weight ----

Weight::Weight(TreePtr tree, std::vector<double> coeff, double gamma, bool lebesgue)
    : tree_(std::move(tree)), coeff_(std::move(coeff)), gamma_(gamma), lebesgue_(lebesgue) {
    const auto& t = *tree_;
    const std::uint64_t n = t.cell_count();
    if (coeff_.size() != n) throw DomainError("weight needs one coefficient per cell");
    truncated_.assign(n, 0);
    std::vector<double> m(n);
    const double vol = t.cell_volume();
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!(coeff_[i] > 0.0) || !std::isfinite(coeff_[i])) throw DomainError("weights must be strictly positive");
        if (gamma_ == 0.0) {
            m[i] = coeff_[i] * vol;
            continue;
        }
        const Box b = t.box(t.cell(i));
        if (auto v = power_box_integral(b, gamma_)) {
            m[i] = coeff_[i] * *v;
        } else {
            truncated_[i] = 1;
            m[i] = representative_density(i) * vol;
        }
        if (!(m[i] > 0.0) || !std::isfinite(m[i])) throw NumericalError("non-positive cell mass");
    }
    levels_ = level_sums(t, m);
}

Weight Weight::lebesgue(TreePtr tree) {
    const auto n = tree->cell_count();
    return Weight(std::move(tree), std::vector<double>(n, 1.0), 0.0, true);
}

Weight Weight::power(TreePtr tree, double gamma) {
    const auto n = tree->cell_count();
    return Weight(std::move(tree), std::vector<double>(n, 1.0), gamma, gamma == 0.0);
}

Weight Weight::piecewise(TreePtr tree, std::vector<double> densities) {
    return Weight(std::move(tree), std::move(densities), 0.0, false);
}

Weight Weight::from_law(TreePtr tree, std::vector<double> coefficients, double gamma) {
    return Weight(std::move(tree), std::move(coefficients), gamma, false);
}

Weight Weight::pow(double s) const {
    if (lebesgue_) return *this;
    std::vector<double> c(coeff_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::pow(coeff_[i], s);
    return Weight(tree_, std::move(c), gamma_ * s, false);
}

Weight operator*(const Weight& a, const Weight& b) {
    if (!(a.tree() == b.tree())) throw DomainError("weights live on different trees");
    if (a.lebesgue_) return b;
    if (b.lebesgue_) return a;
    std::vector<double> c(a.coeff_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff_[i] * b.coeff_[i];
    return Weight(a.tree_, std::move(c), a.gamma_ + b.gamma_, false);
}

double Weight::density(std::uint64_t cell, const Point& x) const {
    if (gamma_ == 0.0) return coeff_[cell];
    double r2 = 0.0;
    for (int j = 0; j < tree_->dim(); ++j) r2 += x[j] * x[j];
    return coeff_[cell] * std::pow(r2, 0.5 * gamma_);
}

double Weight::representative_density(std::uint64_t cell) const {
    return density(cell, tree_->midpoint(cell));
}

double Weight::mass(const Cube& q) const {
    tree_->require(q);
    return levels_[q.level][q.index];
}

double Weight::box_mass(std::uint64_t cell, const Box& part) const {
    if (gamma_ == 0.0) return coeff_[cell] * part.volume();
    if (auto v = power_box_integral(part, gamma_)) return coeff_[cell] * *v;
    Point mid{};
    for (int j = 0; j < part.dim; ++j) mid[j] = 0.5 * (part.lo[j] + part.hi[j]);
    return density(cell, mid) * part.volume();
}

std::size_t Weight::truncated_count() const {
    return static_cast<std::size_t>(std::count(truncated_.begin(), truncated_.end(), std::uint8_t{1}));
}

double average(const GridFunction& f, const Cube& q, const Weight& mu) {
    const auto& t = f.tree();
    t.require(q);
    const double m = mu.mass(q);
    if (!(m > 0.0)) throw NumericalError("zero-mass cube");
    double s = 0.0;
    t.for_each_cell(q, [&](std::uint64_t i) { s += f[i] * mu.mass(i); });
    return s / m;
}

LevelArray level_weighted_averages(const GridFunction& f, const Weight& mu) {
    const auto& t = f.tree();
    std::vector<double> fm(t.cell_count());
    for (std::uint64_t i = 0; i < fm.size(); ++i) fm[i] = f[i] * mu.mass(i);
    LevelArray a = level_sums(t, fm);
    for (int k = 0; k <= t.depth(); ++k)
        for (std::uint64_t i = 0; i < a[k].size(); ++i) a[k][i] /= mu.level_masses()[k][i];
    return a;
}

// ---- exponents and the Bloom weight ----

ExponentConfig::ExponentConfig(double p_, double q_, int dim_) : p(p_), q(q_), dim(dim_) {
    if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
        throw DomainError("exponents must lie in (1, inf)");
}

double ExponentConfig::r() const {
    if (!has_r()) throw DomainError("r is defined only for q < p");
    return 1.0 / (1.0 / q - 1.0 / p);
}

double ExponentConfig::r_dual() const { return 1.0 / bloom_exponent(); }

Weight dual_weight(const Weight& w, double p) {
    if (!(p > 1.0)) throw DomainError("dual weight needs p > 1");
    return w.pow(-1.0 / (p - 1.0));
}

BloomTriple bloom_triple(const Weight& mu, const Weight& lambda, const ExponentConfig& cfg) {
    if (!(mu.tree() == lambda.tree())) throw DomainError("weights live on different trees");
    const double s = cfg.bloom_exponent();
    Weight nu = (mu.pow(1.0 / cfg.p) * lambda.pow(-1.0 / cfg.q)).pow(1.0 / s);
    return BloomTriple{cfg, mu, lambda, dual_weight(mu, cfg.p), dual_weight(lambda, cfg.q), std::move(nu)};
}

double lattice_mass(const ShiftedLattice& lattice, const LatticeCube& q, const Weight& w) {
    double m = 0.0;
    lattice.for_each_overlap(q, [&](std::uint64_t cell, double frac, const Box& part) {
        m += frac == 1.0 ? w.mass(cell) : (w.is_lebesgue() ? frac * w.mass(cell) : w.box_mass(cell, part));
    });
    return m;
}

// ---- characteristics ----

double ap_characteristic(const Weight& w, double p, Scope scope) {
    if (!(p > 1.0)) throw DomainError("A_p needs p > 1");
    const auto& t = w.tree();
    const Weight wd = dual_weight(w, p);
    auto value = [&](double m, double md, double vol) { return (m / vol) * std::pow(md / vol, p - 1.0); };
    double best = 0.0;
    if (scope == Scope::dyadic) {
        for (int k = 0; k <= t.depth(); ++k)
            for (std::uint64_t i = 0; i < t.cubes_at(k); ++i)
                best = std::max(best, value(w.level_masses()[k][i], wd.level_masses()[k][i], t.volume(k)));
    } else if (scope == Scope::one_third) {
        for (const auto& lat : ShiftedLattice::all(w.tree_ptr()))
            for (const auto& q : lat.cubes())
                best = std::max(best, value(lattice_mass(lat, q, w), lattice_mass(lat, q, wd), lat.box(q).volume()));
    } else {
        if (t.dim() != 1) throw DomainError("grid-interval scope needs dimension 1");
        const std::uint64_t n = t.cell_count();
        std::vector<double> a(n + 1, 0.0), b(n + 1, 0.0);
        for (std::uint64_t i = 0; i < n; ++i) {
            a[i + 1] = a[i] + w.mass(i);
            b[i + 1] = b[i] + wd.mass(i);
        }
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = i + 1; j <= n; ++j)
                best = std::max(best, value(a[j] - a[i], b[j] - b[i], t.cell_volume() * static_cast<double>(j - i)));
    }
    return best;
}

double fujii_wilson_ainfty(const Weight& w, const Weight& mu) {
    const auto& t = w.tree();
    const int n = t.depth();
    const auto& W = w.level_masses();
    const auto& M = mu.level_masses();
    double best = 0.0;
    for (int k0 = 0; k0 <= n; ++k0) {
        // Running max of w(R)/mu(R) from level k0 down to the cells.
        std::vector<double> run(W[k0].size());
        for (std::uint64_t i = 0; i < run.size(); ++i) run[i] = W[k0][i] / M[k0][i];
        for (int k = k0 + 1; k <= n; ++k) {
            std::vector<double> next(W[k].size());
            for (std::uint64_t i = 0; i < next.size(); ++i) {
                const std::uint64_t par = t.parent(Cube{k, i}).index;
                next[i] = std::max(run[par], W[k][i] / M[k][i]);
            }
            run.swap(next);
        }
        std::vector<double> acc(W[k0].size(), 0.0);
        for (std::uint64_t c = 0; c < t.cell_count(); ++c) acc[t.ancestor_index(c, k0)] += mu.mass(c) * run[c];
        for (std::uint64_t i = 0; i < acc.size(); ++i) best = std::max(best, acc[i] / W[k0][i]);
    }
    return best;
}

double carleson_norm(const LevelArray& s, const Weight& mu) {
    const auto& t = mu.tree();
    const auto& M = mu.level_masses();
    if (s.size() != M.size()) throw DomainError("coefficient family does not match the tree");
    LevelArray acc = zero_levels(t);
    double best = 0.0;
    for (int k = t.depth(); k >= 0; --k) {
        for (std::uint64_t i = 0; i < acc[k].size(); ++i) {
            acc[k][i] += std::fabs(s[k][i]) * M[k][i];
            best = std::max(best, acc[k][i] / M[k][i]);
            if (k > 0) acc[k - 1][t.parent(Cube{k, i}).index] += acc[k][i];
        }
    }
    return best;
}

CarlesonRatio relative_ainfty_carleson_ratio(const Weight& w, const Weight& mu, std::uint64_t seed, int trials) {
    const auto& t = w.tree();
    CarlesonRatio out;
    out.fujii_wilson = fujii_wilson_ainfty(w, mu);
    auto consider = [&](const LevelArray& s) {
        const double cm = carleson_norm(s, mu);
        if (cm > 0.0) out.ratio = std::max(out.ratio, carleson_norm(s, w) / cm);
    };
    // Single cubes: both packings equal 1, attained at the cube itself.
    out.ratio = std::max(out.ratio, 1.0);

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double densities[] = {0.02, 0.1, 0.3, 1.0};
    for (int trial = 0; trial < trials; ++trial) {
        LevelArray s = zero_levels(t);
        const double dens = densities[trial % 4];
        for (auto& level : s)
            for (double& v : level)
                if (unif(gen) < dens) v = unif(gen);
        consider(s);
    }
    // Chains of cubes containing a cell: these follow the growth of w/mu.
    const std::uint64_t stride = std::max<std::uint64_t>(1, t.cell_count() / 64);
    for (std::uint64_t c = 0; c < t.cell_count(); c += stride) {
        LevelArray s = zero_levels(t);
        for (int k = 0; k <= t.depth(); ++k) s[k][t.ancestor_index(c, k)] = 1.0;
        consider(s);
    }
    if (out.ratio > out.fujii_wilson * (1.0 + 1e-9))
        throw NumericalError("sampled Carleson ratio exceeds the Fujii-Wilson characteristic");
    return out;
}

double upper_joint_characteristic(const BloomTriple& tr) {
    const auto& t = tr.mu.tree();
    const double p1 = 1.0 / tr.cfg.p_dual(), q1 = 1.0 / tr.cfg.q, s = tr.cfg.bloom_exponent();
    double best = 0.0;
    for (int k = 0; k <= t.depth(); ++k) {
        const double v = t.volume(k);
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            const double val = std::pow(tr.mu_dual.level_masses()[k][i] / v, p1) *
                               std::pow(tr.lambda.level_masses()[k][i] / v, q1) *
                               std::pow(tr.nu.level_masses()[k][i] / v, s);
            best = std::max(best, val);
        }
    }
    return best;
}

double lower_joint_characteristic(const BloomTriple& tr) {
    const auto& t = tr.mu.tree();
    const double a = 1.0 / tr.cfg.p, b = 1.0 / tr.cfg.q_dual();
    double best = 0.0;
    for (int k = 0; k <= t.depth(); ++k)
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            const double nu = tr.nu.level_masses()[k][i];
            best = std::max(best, std::pow(tr.mu.level_masses()[k][i] / nu, a) *
                                      std::pow(tr.lambda_dual.level_masses()[k][i] / nu, b));
        }
    return best;
}

CubeLowerBound power_weight_cube_lower_bound(const TreePtr& tree, double gamma) {
    if (gamma < 0.0) throw DomainError("cube lower bound needs gamma >= 0");
    const Weight nu = Weight::power(tree, gamma);
    const int d = tree->dim();
    CubeLowerBound out;
    for (const auto& lat : ShiftedLattice::all(tree))
        for (const auto& q : lat.cubes()) {
            const Box b = lat.box(q);
            const double c = std::pow(b.side(0), gamma + d) / lattice_mass(lat, q, nu);
            if (c > out.constant) {
                out.constant = c;
                out.worst = b;
            }
        }
    return out;
}

bool is_divergent(const std::vector<double>& v, double factor, int steps) {
    if (static_cast<int>(v.size()) < steps + 1) return false;
    for (std::size_t i = v.size() - steps; i < v.size(); ++i)
        if (!(v[i] >= factor * v[i - 1])) return false;
    return true;
}

}  // namespace bloom
