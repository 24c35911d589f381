#include "bloomlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

namespace bloom {

const char* method_name(Method m) {
    switch (m) {
        case Method::exact_sum: return "exact-sum";
        case Method::golden_section: return "golden-section";
        case Method::gradient_ascent: return "gradient-ascent";
        case Method::sparse_sup: return "sparse-sup";
    }
    return "unknown";
}

std::string report_json(const NormReport& r, const std::string& certificate_ref) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["value"] = r.value;
    j["method"] = method_name(r.method);
    j["certificate-ref"] = certificate_ref;
    if (const double* c = std::get_if<double>(&r.certificate)) j["certificate-value"] = *c;
    j["trace"] = r.trace;
    return j.dump(2);
}

void write_grid_csv(const GridFunction& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    const auto& t = f.tree();
    os << "cell";
    for (int j = 0; j < t.dim(); ++j) os << ",x_" << (j + 1);
    os << ",value\n" << std::setprecision(17);
    for (std::uint64_t i = 0; i < f.size(); ++i) {
        const Point x = t.midpoint(i);
        os << i;
        for (int j = 0; j < t.dim(); ++j) os << ',' << x[j];
        os << ',' << f[i] << '\n';
    }
}

double lp_norm(const GridFunction& f, const Weight& w, double p) {
    if (!(p > 0.0)) throw DomainError("lp_norm needs p > 0");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] != 0.0) s += std::pow(std::fabs(f[i]), p) * w.mass(i);
    return std::pow(s, 1.0 / p);
}

double bmo_alpha_norm(const GridFunction& b, const Weight& nu, double alpha, Scope scope) {
    const auto& t = b.tree();
    const double e = 1.0 + alpha / t.dim();
    double best = 0.0;
    if (scope == Scope::dyadic) {
        const LevelArray osc = level_oscillations(b);
        for (int k = 0; k <= t.depth(); ++k)
            for (std::uint64_t i = 0; i < osc[k].size(); ++i)
                if (osc[k][i] > 0.0) best = std::max(best, osc[k][i] / std::pow(nu.level_masses()[k][i], e));
        return best;
    }
    if (scope != Scope::one_third) throw DomainError("BMO norm supports the dyadic and one-third scopes");
    const double vol = t.cell_volume();
    std::vector<std::pair<std::uint64_t, double>> parts;
    for (const auto& lat : ShiftedLattice::all(b.tree_ptr()))
        for (const auto& q : lat.cubes()) {
            parts.clear();
            double sum = 0.0, weight = 0.0;
            lat.for_each_overlap(q, [&](std::uint64_t c, double frac, const Box&) {
                parts.emplace_back(c, frac);
                sum += frac * b[c];
                weight += frac;
            });
            const double m = sum / weight;
            double osc = 0.0;
            for (const auto& [c, frac] : parts) osc += frac * std::fabs(b[c] - m);
            if (osc > 0.0) best = std::max(best, osc * vol / std::pow(lattice_mass(lat, q, nu), e));
        }
    return best;
}

NormReport sharp_maximal_r_norm(const GridFunction& b, const Weight& nu, double r, Scope scope) {
    if (!(r > 1.0)) throw DomainError("sharp maximal norm needs r > 1");
    NormReport out;
    GridFunction m = sharp_maximal(b, nu, scope);
    out.value = lp_norm(m, nu, r);
    out.method = Method::exact_sum;
    out.certificate = std::move(m);
    return out;
}

double multiplier_objective(const GridFunction& b, const Weight& nu_1mr, double r, double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = std::fabs(b[i] - c);
        if (d != 0.0) s += std::pow(d, r) * nu_1mr.mass(i);
    }
    return s;
}

NormReport multiplier_norm(const GridFunction& b, const Weight& nu, double r, int grid_points, int iterations) {
    if (!(r > 1.0)) throw DomainError("multiplier norm needs r > 1");
    if (grid_points < 3) throw DomainError("multiplier grid needs at least 3 points");
    NormReport out;
    out.method = Method::golden_section;
    const auto [lo_it, hi_it] = std::minmax_element(b.values().begin(), b.values().end());
    const double lo = *lo_it, hi = *hi_it, range = hi - lo;
    if (range == 0.0) {
        out.certificate = lo;
        out.trace = {lo, 0.0};
        return out;
    }
    const Weight w = nu.pow(1.0 - r);
    auto h = [&](double c) {
        const double v = multiplier_objective(b, w, r, c);
        out.trace.push_back(c);
        out.trace.push_back(v);
        return v;
    };
    const double a0 = lo - range, b0 = hi + range;
    const double step = (b0 - a0) / (grid_points - 1);
    int best_k = 0;
    double best_c = a0, best_h = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
        const double c = a0 + k * step;
        const double v = h(c);
        if (v < best_h) best_h = v, best_c = c, best_k = k;
    }
    double a = a0 + std::max(best_k - 1, 0) * step;
    double z = a0 + std::min(best_k + 1, grid_points - 1) * step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = z - g * (z - a), x2 = a + g * (z - a);
    double h1 = h(x1), h2 = h(x2);
    for (int it = 0; it < iterations && z - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
        if (h1 <= h2) {
            z = x2, x2 = x1, h2 = h1;
            x1 = z - g * (z - a);
            h1 = h(x1);
        } else {
            a = x1, x1 = x2, h1 = h2;
            x2 = a + g * (z - a);
            h2 = h(x2);
        }
    }
    if (h1 < best_h) best_h = h1, best_c = x1;
    if (h2 < best_h) best_h = h2, best_c = x2;
    out.value = std::pow(best_h, 1.0 / r);
    out.certificate = best_c;
    return out;
}

NormReport multiplier_norm(const GridFunction& b, const BloomTriple& t) {
    if (!t.cfg.has_r()) throw DomainError("multiplier norm needs q < p");
    return multiplier_norm(b, t.nu, t.cfg.r());
}

namespace {

// inf_c \int_Q |b - c| dx for every tree cube (c = a median of b on Q).
LevelArray median_oscillations(const GridFunction& b) {
    const auto& t = b.tree();
    LevelArray out = zero_levels(t);
    const double vol = t.cell_volume();
    std::vector<double> vals;
    for (int k = 0; k <= t.depth(); ++k)
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            vals.clear();
            t.for_each_cell({k, i}, [&](std::uint64_t c) { vals.push_back(b[c]); });
            auto mid = vals.begin() + static_cast<std::ptrdiff_t>((vals.size() - 1) / 2);
            std::nth_element(vals.begin(), mid, vals.end());
            const double m = *mid;
            double s = 0.0;
            for (double v : vals) s += std::fabs(v - m);
            out[k][i] = s * vol;
        }
    return out;
}

}  // namespace

double discretized_sum(const GridFunction& b, const Weight& nu, double r, const std::vector<Cube>& cubes) {
    const LevelArray osc = level_oscillations(b);
    double s = 0.0;
    for (const Cube& q : cubes) {
        b.tree().require(q);
        const double m = nu.level_masses()[q.level][q.index];
        const double o = osc[q.level][q.index];
        if (o > 0.0) s += std::pow(o / m, r) * m;
    }
    return std::pow(s, 1.0 / r);
}

NormReport discretized_sharp_sup(const GridFunction& b, const Weight& nu, double r, double gamma) {
    if (!(r > 1.0)) throw DomainError("discretized sum needs r > 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("sparseness parameter must lie in (0, 1)");
    const auto& t = b.tree();
    const LevelArray tau = median_oscillations(b);
    const auto& mass = nu.level_masses();
    const double threshold = std::max(2.0, 1.0 / (1.0 - gamma));

    NormReport out;
    out.method = Method::sparse_sup;
    SparseFamily fam;
    fam.tree = b.tree_ptr();
    fam.gamma = gamma;
    fam.measure = nu;
    if (tau[0][0] > 0.0) {
        std::vector<Cube> work{t.root()};
        while (!work.empty()) {
            const Cube s = work.back();
            work.pop_back();
            const double a_s = tau[s.level][s.index] / mass[s.level][s.index];
            std::vector<Cube> principal;
            if (a_s > 0.0 && !t.is_finest(s)) {
                std::vector<Cube> stack = t.children(s);
                while (!stack.empty()) {
                    const Cube q = stack.back();
                    stack.pop_back();
                    if (tau[q.level][q.index] / mass[q.level][q.index] > threshold * a_s) {
                        principal.push_back(q);
                    } else if (!t.is_finest(q)) {
                        for (const Cube& c : t.children(q)) stack.push_back(c);
                    }
                }
            }
            std::vector<std::uint64_t> witness;
            t.for_each_cell(s, [&](std::uint64_t c) { witness.push_back(c); });
            if (!principal.empty()) {
                std::vector<std::uint8_t> drop(t.cell_count(), 0);
                for (const Cube& q : principal) t.for_each_cell(q, [&](std::uint64_t c) { drop[c] = 1; });
                std::erase_if(witness, [&](std::uint64_t c) { return drop[c] != 0; });
            }
            std::sort(witness.begin(), witness.end());
            fam.cubes.push_back(s);
            fam.witnesses.push_back(std::move(witness));
            for (const Cube& q : principal) work.push_back(q);
        }
    }
    const SparseCheck check = verify_sparse(fam, gamma);
    if (!check.ok)
        throw NumericalError("principal-cube family is not sparse (worst witness ratio " +
                             std::to_string(check.worst_ratio) + ")");
    out.value = discretized_sum(b, nu, r, fam.cubes);
    const double sharp = lp_norm(sharp_maximal(b, nu, Scope::dyadic), nu, r);
    const double constant = std::pow(check.worst_ratio, -1.0 / r);
    if (out.value > constant * sharp * (1.0 + 1e-9) + 1e-300)
        throw NumericalError("discretized sum exceeds its sharp-maximal bound");
    out.trace = {sharp, constant};
    out.certificate = std::move(fam);
    return out;
}

// ---- empirical operator norms ----

double operator_ratio(const LinearOperator& u, const GridFunction& f, const Weight& mu, const Weight& lambda,
                      double p, double q) {
    const double den = lp_norm(f, mu, p);
    if (!(den > 0.0)) return 0.0;
    return lp_norm(u.apply(f), lambda, q) / den;
}

namespace {

struct Ascent {
    const LinearOperator& u;
    const Weight& mu;
    const Weight& lambda;
    double p, q;

    double ratio(const GridFunction& f) const { return operator_ratio(u, f, mu, lambda, p, q); }

    // Gradient of log ||Uf||_q - log ||f||_p with respect to the cell values.
    std::vector<double> gradient(const GridFunction& f, const GridFunction& uf) const {
        double nq = 0.0, dp = 0.0;
        GridFunction psi(f.tree_ptr());
        for (std::size_t j = 0; j < uf.size(); ++j) {
            const double a = std::fabs(uf[j]);
            if (a == 0.0) continue;
            const double pw = std::pow(a, q - 1.0) * lambda.mass(j);
            nq += pw * a;
            psi[j] = std::copysign(pw, uf[j]) / f.tree().cell_volume();
        }
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] != 0.0) dp += std::pow(std::fabs(f[i]), p) * mu.mass(i);
        std::vector<double> g(f.size(), 0.0);
        if (!(nq > 0.0) || !(dp > 0.0)) return g;
        const GridFunction back = u.adjoint(psi);
        const double h = f.tree().cell_volume();
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double a = std::fabs(f[i]);
            const double dterm = a == 0.0 ? 0.0 : std::copysign(std::pow(a, p - 1.0), f[i]) * mu.mass(i) / dp;
            g[i] = h * back[i] / nq - dterm;
        }
        return g;
    }

    // Returns the final ratio; f is updated in place.
    double run(GridFunction& f, int iterations) const {
        double best = ratio(f);
        double step = 0.5;
        for (int it = 0; it < iterations; ++it) {
            const std::vector<double> g = gradient(f, u.apply(f));
            double gmax = 0.0, fmax = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                gmax = std::max(gmax, std::fabs(g[i]));
                fmax = std::max(fmax, std::fabs(f[i]));
            }
            if (!(gmax > 0.0) || !(fmax > 0.0)) break;
            bool moved = false;
            for (int tries = 0; tries < 30; ++tries) {
                GridFunction trial = f;
                const double s = step * fmax / gmax;
                for (std::size_t i = 0; i < g.size(); ++i) trial[i] += s * g[i];
                const double r = ratio(trial);
                if (r > best) {
                    f = std::move(trial);
                    best = r;
                    step = std::min(step * 1.5, 1.0);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return best;
    }
};

}  // namespace

NormReport empirical_operator_norm(const LinearOperator& u, const Weight& mu, const Weight& lambda, double p,
                                   double q, const AscentBudget& budget) {
    if (!(p > 1.0) || !(q > 1.0)) throw DomainError("operator norm needs p, q > 1");
    const TreePtr& tp = mu.tree_ptr();
    const auto& t = *tp;
    const Ascent ascent{u, mu, lambda, p, q};

    std::vector<GridFunction> starts;
    starts.emplace_back(tp, 1.0);
    const Weight dual = dual_weight(mu, p);
    const int top = std::min(budget.structured_levels, t.depth());
    for (int k = 0; k <= top; ++k)
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            const Cube q0{k, i};
            starts.push_back(indicator(tp, q0));
            if (k < t.depth()) starts.push_back(half_split(tp, q0));
            GridFunction g(tp);
            t.for_each_cell(q0, [&](std::uint64_t c) { g[c] = dual.mass(c) / t.cell_volume(); });
            starts.push_back(std::move(g));
        }
    for (const auto& s : budget.starts) starts.push_back(s);

    NormReport out;
    out.method = Method::gradient_ascent;
    GridFunction best_f(tp, 1.0);
    double best = -1.0;
    auto record = [&](const GridFunction& f, double r) {
        if (r > best) best = r, best_f = f;
        out.trace.push_back(std::max(best, 0.0));
    };

    std::vector<std::pair<double, std::size_t>> screened;
    for (std::size_t n = 0; n < starts.size(); ++n) {
        const double r = ascent.ratio(starts[n]);
        screened.emplace_back(r, n);
        record(starts[n], r);
    }
    std::stable_sort(screened.begin(), screened.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t polish = std::min<std::size_t>(static_cast<std::size_t>(std::max(budget.polish, 0)), screened.size());
    for (std::size_t n = 0; n < polish; ++n) {
        GridFunction f = starts[screened[n].second];
        const double r = ascent.run(f, budget.iterations);
        record(f, r);
    }
    for (int k = 0; k < budget.restarts; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(budget.seed), static_cast<std::uint32_t>(budget.seed >> 32),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> normal;
        GridFunction f(tp);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = normal(gen);
        const double r = ascent.run(f, budget.iterations);
        record(f, r);
    }
    out.value = std::max(best, 0.0);
    out.certificate = std::move(best_f);
    return out;
}

// ---- testing functionals ----

namespace {

double box_distance(const Box& a, const Box& b) {
    double s = 0.0;
    for (int j = 0; j < a.dim; ++j) {
        const double gap = std::max({0.0, a.lo[j] - b.hi[j], b.lo[j] - a.hi[j]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

void check_support(const GridFunction& f, const Box& box, const char* what) {
    const auto& t = f.tree();
    for (std::uint64_t i = 0; i < f.size(); ++i)
        if (f[i] != 0.0 && !box.contains(t.midpoint(i)))
            throw DomainError(std::string(what) + " leaves its box");
}

double pairing(const GridFunction& g, const GridFunction& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * v[i];
    return s * g.tree().cell_volume();
}

}  // namespace

double sequential_testing_functional(const LinearOperator& u, const std::vector<TestPair>& pairs, const Weight& nu,
                                     double r) {
    if (!(r > 1.0)) throw DomainError("testing functional needs r > 1");
    double s = 0.0;
    for (const auto& pr : pairs) {
        const auto& t = pr.f.tree();
        t.require(pr.s);
        const double l = t.side(pr.s.level);
        for (const Box* b : {&pr.q_box, &pr.r_box})
            for (int j = 0; j < t.dim(); ++j)
                if (b->side(j) < l / 4.0 * (1.0 - 1e-12) || b->side(j) > 4.0 * l * (1.0 + 1e-12))
                    throw DomainError("test box side is not comparable to its cube");
        if (box_distance(pr.q_box, pr.r_box) > 4.0 * l * (1.0 + 1e-12))
            throw DomainError("test boxes are too far apart");
        check_support(pr.f, pr.q_box, "test function f");
        check_support(pr.g, pr.r_box, "test function g");
        const double m = nu.mass(pr.s);
        const double v = std::fabs(pairing(pr.g, u.apply(pr.f))) / m;
        if (v > 0.0) s += std::pow(v, r) * m;
    }
    return std::pow(s, 1.0 / r);
}

CommutatorPairs commutator_test_pairs(const GridFunction& b, const Cube& s) {
    const auto& t = b.tree();
    if (t.dim() != 1) throw DomainError("commutator test pairs are one-dimensional");
    t.require(s);
    const std::uint64_t m = std::uint64_t{1} << (t.depth() - s.level);
    const std::uint64_t a = s.index * m;
    std::uint64_t far;
    if (a + 3 * m <= t.cell_count())
        far = a + 2 * m;
    else if (a >= 2 * m)
        far = a - 2 * m;
    else
        throw DomainError("no room for the partner interval");

    std::vector<double> vals(b.values().begin() + static_cast<std::ptrdiff_t>(far),
                             b.values().begin() + static_cast<std::ptrdiff_t>(far + m));
    auto mid = vals.begin() + static_cast<std::ptrdiff_t>((m - 1) / 2);
    std::nth_element(vals.begin(), mid, vals.end());
    const double med = *mid;

    const auto tp = b.tree_ptr();
    GridFunction f_hi(tp), f_lo(tp), g_lo(tp), g_hi(tp);
    for (std::uint64_t i = a; i < a + m; ++i) (b[i] >= med ? f_hi[i] : f_lo[i]) = 1.0;
    for (std::uint64_t i = far; i < far + m; ++i) {
        if (b[i] <= med) g_lo[i] = 1.0;
        if (b[i] >= med) g_hi[i] = 1.0;
    }
    const Box qb = t.box(s);
    Box rb = qb;
    const double shift = (static_cast<double>(far) - static_cast<double>(a)) * t.side(t.depth());
    rb.lo[0] += shift;
    rb.hi[0] += shift;

    CommutatorPairs out;
    out.pairs.push_back({s, f_hi, g_lo, qb, rb});
    out.pairs.push_back({s, f_lo, g_hi, qb, rb});
    out.oscillation = level_oscillations(b)[s.level][s.index];
    for (const auto& pr : out.pairs) out.tested += std::fabs(pairing(pr.g, commutator(b, pr.f)));
    return out;
}

double q_ge_p_testing(const LinearOperator& u, const BloomTriple& tr) {
    if (tr.cfg.q < tr.cfg.p) throw DomainError("this testing condition needs p <= q");
    const auto& t = tr.nu.tree();
    const double e = tr.cfg.bloom_exponent();
    double best = 0.0;
    for (const Cube& q : t.all_cubes()) {
        const GridFunction out = u.apply(indicator(tr.nu.tree_ptr(), q));
        double s = 0.0;
        t.for_each_cell(q, [&](std::uint64_t c) { s += std::fabs(out[c]); });
        s *= t.cell_volume();
        if (s > 0.0) best = std::max(best, s / std::pow(tr.nu.mass(q), e));
    }
    return best;
}

NecessityBound weight_necessity_bound(double norm_estimate, const BloomTriple& tr, const Cube& q) {
    const auto& t = tr.nu.tree();
    t.require(q);
    if (t.is_finest(q)) throw DomainError("a finest cell cannot be split");
    const auto& c = tr.cfg;
    const double vol = t.volume(q.level);
    const double e = c.bloom_exponent();
    NecessityBound out;
    out.joint_at_cube = std::pow(tr.mu_dual.mass(q) / vol, 1.0 / c.p_dual()) *
                        std::pow(tr.lambda.mass(q) / vol, 1.0 / c.q) * std::pow(tr.nu.mass(q) / vol, e);
    out.b_functional = vol / std::pow(tr.nu.mass(q), e) * (c.has_r() ? c.r_dual() : 1.0);
    out.implied = norm_estimate / out.b_functional;

    const double h = t.cell_volume();
    const double pd = c.p_dual();
    double s = 0.0;
    t.for_each_cell(q, [&](std::uint64_t i) { s += std::pow(tr.mu.mass(i), 1.0 - pd); });
    out.exact_norm = std::pow(tr.lambda.mass(q), 1.0 / c.q) * h * std::pow(s, 1.0 / pd) / vol;

    const auto tp = tr.nu.tree_ptr();
    GridFunction f(tp);
    t.for_each_cell(q, [&](std::uint64_t i) { f[i] = tr.mu_dual.mass(i) / h; });
    out.test_ratio = operator_ratio(paraproduct_operator(half_split(tp, q)), f, tr.mu, tr.lambda, c.p, c.q);
    return out;
}

FeffermanSteinReport fefferman_stein_equivalence_check(const GridFunction& b, const Weight& nu, double r, Scope scope) {
    if (!(r > 1.0)) throw DomainError("Fefferman-Stein check needs r > 1");
    const auto& t = b.tree();
    FeffermanSteinReport out;
    out.sharp_norm = sharp_maximal_r_norm(b, nu, r, scope).value;
    const NormReport mult = multiplier_norm(b, nu, r);
    out.multiplier_inf = mult.value;
    out.argmin_c = std::get<double>(mult.certificate);
    out.ratio_i = out.multiplier_inf > 0.0 ? out.sharp_norm / out.multiplier_inf : 0.0;
    out.ratio_ii = out.sharp_norm > 0.0 ? out.multiplier_inf / out.sharp_norm : 0.0;
    const double rd = r / (r - 1.0);
    out.ar_dual = ap_characteristic(nu, rd, scope);
    out.ainfty = fujii_wilson_ainfty(nu, Weight::lebesgue(b.tree_ptr()));
    out.bound_ii_factor = std::pow(out.ar_dual, r - 1.0) * out.ainfty;

    const double h = t.cell_volume();
    GridFunction g(b.tree_ptr());
    for (std::size_t i = 0; i < b.size(); ++i) g[i] = (b[i] - out.argmin_c) * h / nu.mass(i);
    const GridFunction lhs = sharp_maximal(b, nu, Scope::dyadic);
    const GridFunction rhs = maximal(g, nu, Scope::dyadic);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (lhs[i] > 2.0 * rhs[i] * (1.0 + 1e-9) + 1e-300) out.pointwise_bound_ok = false;

    // Uniform local bound C over tree cubes, then the chain of ancestors of the central cell.
    const Weight w = nu.pow(1.0 - r);
    const LevelArray avg = level_averages(b);
    double big_c = 0.0;
    for (int k = 0; k <= t.depth(); ++k)
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            double s = 0.0;
            t.for_each_cell({k, i}, [&](std::uint64_t c) {
                const double d = std::fabs(b[c] - avg[k][i]);
                if (d != 0.0) s += std::pow(d, r) * w.mass(c);
            });
            big_c = std::max(big_c, std::pow(s, 1.0 / r));
        }
    Point centre{};
    for (int j = 0; j < t.dim(); ++j) centre[j] = t.corner()[j] + t.root_side() / 2.0;
    const std::uint64_t cell = t.locate(centre);
    auto& ch = out.cauchy;
    for (int k = t.depth(); k >= 0; --k) {
        const std::uint64_t i = t.ancestor_index(cell, k);
        ch.averages.push_back(avg[k][i]);
        ch.bounds.push_back(2.0 * big_c * std::pow(w.level_masses()[k][i], -1.0 / r));
    }
    for (std::size_t j = 0; j < ch.averages.size(); ++j)
        for (std::size_t k = j + 1; k < ch.averages.size(); ++k)
            if (std::fabs(ch.averages[k] - ch.averages[j]) > ch.bounds[j] * (1.0 + 1e-9) + 1e-12 * big_c)
                ch.consistent = false;
    return out;
}

}  // namespace bloom
