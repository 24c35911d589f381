#include "bloomlab/operators.hpp"

#include <algorithm>
#include <cmath>

namespace bloom {

namespace {

// Downward sweep: each cell gets the max of `value` over the cubes containing it.
GridFunction running_max(const DyadicTree& t, const TreePtr& tp, const LevelArray& value) {
    std::vector<double> run = value[0];
    for (int k = 1; k <= t.depth(); ++k) {
        std::vector<double> next(value[k].size());
        for (std::uint64_t i = 0; i < next.size(); ++i)
            next[i] = std::max(run[t.parent(Cube{k, i}).index], value[k][i]);
        run.swap(next);
    }
    return GridFunction(tp, std::move(run));
}

void require_1d(const DyadicTree& t, const char* what) {
    if (t.dim() != 1) throw DomainError(std::string(what) + " is implemented for dimension 1 only");
}

// Max over all intervals [i, j) of whole cells of value(i, j), assigned to each covered cell.
template <class V>
GridFunction interval_sup(const GridFunction& proto, V&& value_row) {
    const std::size_t n = proto.size();
    GridFunction out(proto.tree_ptr(), 0.0);
    std::vector<double> row(n + 1), suffix(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        value_row(i, row);  // row[j] = value on [i, j), j = i+1..n
        suffix[n + 1] = 0.0;
        for (std::size_t j = n; j > i; --j) suffix[j] = std::max(suffix[j + 1], row[j]);
        for (std::size_t c = i; c < n; ++c) out[c] = std::max(out[c], suffix[c + 1]);
    }
    return out;
}

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : cnt_(n + 1, 0.0), sum_(n + 1, 0.0) {}
    void reset() {
        std::fill(cnt_.begin(), cnt_.end(), 0.0);
        std::fill(sum_.begin(), sum_.end(), 0.0);
    }
    void add(std::size_t pos, double v) {
        for (std::size_t i = pos + 1; i < cnt_.size(); i += i & (~i + 1)) {
            cnt_[i] += 1.0;
            sum_[i] += v;
        }
    }
    // count and sum of entries with rank < pos
    void prefix(std::size_t pos, double& c, double& s) const {
        c = s = 0.0;
        for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) {
            c += cnt_[i];
            s += sum_[i];
        }
    }

private:
    std::vector<double> cnt_, sum_;
};

}  // namespace

GridFunction maximal(const GridFunction& f, const Weight& mu, Scope scope) {
    const auto& t = f.tree();
    const GridFunction af = f.abs();
    if (scope == Scope::dyadic) return running_max(t, f.tree_ptr(), level_weighted_averages(af, mu));
    if (scope == Scope::one_third) {
        GridFunction out(f.tree_ptr(), 0.0);
        for (const auto& lat : ShiftedLattice::all(f.tree_ptr()))
            for (const auto& q : lat.cubes()) {
                double num = 0.0, den = 0.0;
                lat.for_each_overlap(q, [&](std::uint64_t c, double frac, const Box& part) {
                    const double m = frac == 1.0 ? mu.mass(c) : mu.box_mass(c, part);
                    num += af[c] * m;
                    den += m;
                });
                const double v = num / den;
                lat.for_each_member_cell(q, [&](std::uint64_t c) { out[c] = std::max(out[c], v); });
            }
        return out;
    }
    require_1d(t, "grid-interval maximal function");
    const std::size_t n = f.size();
    std::vector<double> num(n + 1, 0.0), den(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        num[i + 1] = num[i] + af[i] * mu.mass(i);
        den[i + 1] = den[i] + mu.mass(i);
    }
    return interval_sup(f, [&](std::size_t i, std::vector<double>& row) {
        for (std::size_t j = i + 1; j <= n; ++j) row[j] = (num[j] - num[i]) / (den[j] - den[i]);
    });
}

GridFunction sharp_maximal(const GridFunction& b, const Weight& nu, Scope scope) {
    const auto& t = b.tree();
    if (scope == Scope::dyadic) {
        LevelArray v = level_oscillations(b);
        for (int k = 0; k <= t.depth(); ++k)
            for (std::uint64_t i = 0; i < v[k].size(); ++i) v[k][i] /= nu.level_masses()[k][i];
        return running_max(t, b.tree_ptr(), v);
    }
    const double vol = t.cell_volume();
    if (scope == Scope::one_third) {
        GridFunction out(b.tree_ptr(), 0.0);
        std::vector<std::pair<std::uint64_t, double>> parts;
        for (const auto& lat : ShiftedLattice::all(b.tree_ptr()))
            for (const auto& q : lat.cubes()) {
                parts.clear();
                double sum = 0.0, weight = 0.0, mass = 0.0;
                lat.for_each_overlap(q, [&](std::uint64_t c, double frac, const Box& part) {
                    parts.emplace_back(c, frac);
                    sum += frac * b[c];
                    weight += frac;
                    mass += frac == 1.0 ? nu.mass(c) : (nu.is_lebesgue() ? frac * nu.mass(c) : nu.box_mass(c, part));
                });
                const double m = sum / weight;
                double osc = 0.0;
                for (const auto& [c, frac] : parts) osc += frac * std::fabs(b[c] - m);
                const double v = osc * vol / mass;
                lat.for_each_member_cell(q, [&](std::uint64_t c) { out[c] = std::max(out[c], v); });
            }
        return out;
    }
    require_1d(t, "grid-interval sharp maximal function");
    const std::size_t n = b.size();
    std::vector<double> sorted(b.values());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i)
        rank[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), b[i]) - sorted.begin());
    std::vector<double> mass(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) mass[i + 1] = mass[i] + nu.mass(i);
    Fenwick fw(sorted.size());
    return interval_sup(b, [&](std::size_t i, std::vector<double>& row) {
        fw.reset();
        double total = 0.0;
        for (std::size_t j = i + 1; j <= n; ++j) {
            fw.add(rank[j - 1], b[j - 1]);
            total += b[j - 1];
            const double len = static_cast<double>(j - i);
            const double m = total / len;
            const auto le = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), m) - sorted.begin());
            double c_le, s_le;
            fw.prefix(le, c_le, s_le);
            const double osc = (m * c_le - s_le) + ((total - s_le) - m * (len - c_le));
            row[j] = std::max(osc, 0.0) * vol / (mass[j] - mass[i]);
        }
    });
}

GridFunction paraproduct(const GridFunction& b, const GridFunction& f, const CubeSet& only) {
    const auto& t = b.tree();
    if (!(t == f.tree())) throw DomainError("b and f live on different trees");
    const LevelArray ab = level_averages(b);
    const LevelArray af = level_averages(f);
    const bool all = only.mask().empty();
    GridFunction out(b.tree_ptr());
    for (std::uint64_t c = 0; c < t.cell_count(); ++c) {
        double s = 0.0;
        std::uint64_t below = t.ancestor_index(c, 0);
        for (int k = 0; k < t.depth(); ++k) {
            const std::uint64_t q = below;
            below = t.ancestor_index(c, k + 1);
            if (!all && !only.mask()[k][q]) continue;
            s += (ab[k + 1][below] - ab[k][q]) * af[k][q];
        }
        out[c] = s;
    }
    return out;
}

GridFunction paraproduct(const GridFunction& b, const GridFunction& f) { return paraproduct(b, f, CubeSet()); }

GridFunction paraproduct_adjoint(const GridFunction& b, const GridFunction& g) {
    const auto& t = b.tree();
    const LevelArray ab = level_averages(b);
    const LevelArray sg = level_sums(t, g.values());
    const double h = t.cell_volume();
    LevelArray coef = zero_levels(t);
    for (int k = 0; k < t.depth(); ++k)
        for (std::uint64_t i = 0; i < t.cubes_at(k); ++i) {
            double s = 0.0;
            for (const Cube& c : t.children(Cube{k, i})) s += (ab[k + 1][c.index] - ab[k][i]) * sg[k + 1][c.index];
            coef[k][i] = s * h / t.volume(k);
        }
    GridFunction out(b.tree_ptr());
    for (std::uint64_t c = 0; c < t.cell_count(); ++c) {
        double s = 0.0;
        for (int k = 0; k < t.depth(); ++k) s += coef[k][t.ancestor_index(c, k)];
        out[c] = s;
    }
    return out;
}

GridFunction sparse_op(const GridFunction& b, const GridFunction& f, const std::vector<Cube>& cubes,
                       SparseVariant variant, double s) {
    const auto& t = b.tree();
    if (!(t == f.tree())) throw DomainError("b and f live on different trees");
    if (variant == SparseVariant::exponent && !(s > 0.0 && s <= 1.0)) throw DomainError("exponent must lie in (0, 1]");
    const LevelArray ab = level_averages(b);
    const LevelArray af = level_averages(f);
    GridFunction out(b.tree_ptr());
    for (const Cube& q : cubes) {
        t.require(q);
        const double m = ab[q.level][q.index];
        if (variant == SparseVariant::plain) {
            const double avg = af[q.level][q.index];
            t.for_each_cell(q, [&](std::uint64_t c) { out[c] += std::fabs(b[c] - m) * avg; });
        } else if (variant == SparseVariant::adjoint) {
            double acc = 0.0;
            std::uint64_t n = 0;
            t.for_each_cell(q, [&](std::uint64_t c) {
                acc += std::fabs(b[c] - m) * f[c];
                ++n;
            });
            const double v = acc / static_cast<double>(n);
            t.for_each_cell(q, [&](std::uint64_t c) { out[c] += v; });
        } else {
            double acc = 0.0;
            std::uint64_t n = 0;
            t.for_each_cell(q, [&](std::uint64_t c) {
                acc += std::pow(std::fabs(f[c]), s);
                ++n;
            });
            const double v = std::pow(acc / static_cast<double>(n), 1.0 / s);
            t.for_each_cell(q, [&](std::uint64_t c) { out[c] += v; });
        }
    }
    return out;
}

GridFunction martingale_transform(const GridFunction& f, const LevelArray& v) {
    const auto& t = f.tree();
    if (v.size() != static_cast<std::size_t>(t.depth() + 1)) throw DomainError("coefficients do not match the tree");
    const LevelArray af = level_averages(f);
    GridFunction out(f.tree_ptr());
    for (std::uint64_t c = 0; c < t.cell_count(); ++c) {
        double s = 0.0;
        for (int k = 0; k < t.depth(); ++k) {
            const std::uint64_t q = t.ancestor_index(c, k);
            if (v[k][q] != 0.0) s += v[k][q] * (af[k + 1][t.ancestor_index(c, k + 1)] - af[k][q]);
        }
        out[c] = s;
    }
    return out;
}

WeakTypeCheck weak_type_check(const GridFunction& out, const GridFunction& f, double sup_v, double constant,
                              int points) {
    const double h = out.tree().cell_volume();
    double l1 = 0.0, top = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) l1 += std::fabs(f[i]) * h;
    for (std::size_t i = 0; i < out.size(); ++i) top = std::max(top, std::fabs(out[i]));
    WeakTypeCheck res;
    const double scale = constant * l1 * sup_v;
    if (top == 0.0 || scale == 0.0) return res;
    std::vector<double> mags(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) mags[i] = std::fabs(out[i]);
    std::sort(mags.begin(), mags.end());
    for (int k = 1; k <= points; ++k) {
        const double tval = top * static_cast<double>(k) / (points + 1);
        const auto above = static_cast<double>(mags.end() - std::upper_bound(mags.begin(), mags.end(), tval));
        const double ratio = tval * above * h / scale;
        if (ratio > res.worst_ratio) {
            res.worst_ratio = ratio;
            res.worst_t = tval;
        }
    }
    return res;
}

GridFunction hilbert_transform(const GridFunction& f) {
    const auto& t = f.tree();
    require_1d(t, "Hilbert transform");
    const std::size_t n = f.size();
    // h / (x_i - x_j) = 1 / (i - j); kr[j + n - 1 - i] = 1 / (i - j).
    std::vector<double> kr(2 * n - 1, 0.0);
    for (std::size_t u = 0; u + 1 < 2 * n; ++u) {
        const auto m = static_cast<double>(static_cast<std::int64_t>(n) - 1 - static_cast<std::int64_t>(u));
        kr[u] = m == 0.0 ? 0.0 : 1.0 / m;
    }
    GridFunction out(f.tree_ptr());
    const double* fv = f.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* k = kr.data() + (n - 1 - i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += fv[j] * k[j];
        out[i] = s;
    }
    return out;
}

GridFunction commutator(const GridFunction& b, const GridFunction& f) {
    return b * hilbert_transform(f) - hilbert_transform(b * f);
}

LinearOperator identity_operator() {
    auto id = [](const GridFunction& f) { return f; };
    return {"identity", id, id};
}

LinearOperator multiplication_operator(const GridFunction& b) {
    auto m = [b](const GridFunction& f) { return b * f; };
    return {"multiplication", m, m};
}

LinearOperator paraproduct_operator(const GridFunction& b) {
    return {"paraproduct", [b](const GridFunction& f) { return paraproduct(b, f); },
            [b](const GridFunction& g) { return paraproduct_adjoint(b, g); }};
}

LinearOperator commutator_operator(const GridFunction& b) {
    require_1d(b.tree(), "commutator");
    auto c = [b](const GridFunction& f) { return commutator(b, f); };
    return {"commutator", c, c};
}

LinearOperator sparse_operator(const GridFunction& b, const std::vector<Cube>& cubes) {
    return {"sparse", [b, cubes](const GridFunction& f) { return sparse_op(b, f, cubes, SparseVariant::plain); },
            [b, cubes](const GridFunction& g) { return sparse_op(b, g, cubes, SparseVariant::adjoint); }};
}

}  // namespace bloom
