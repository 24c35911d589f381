#include "bloomlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace bloom {

double SparseFamily::measure_of(const Cube& q) const {
    return measure ? measure->mass(q) : tree->volume(q.level);
}

double SparseFamily::measure_of(const std::vector<std::uint64_t>& cells) const {
    if (!measure) return static_cast<double>(cells.size()) * tree->cell_volume();
    double m = 0.0;
    for (auto c : cells) m += measure->mass(c);
    return m;
}

SparseCheck verify_sparse(const SparseFamily& s, double gamma) {
    const auto& t = *s.tree;
    if (s.witnesses.size() != s.cubes.size()) throw DomainError("one witness set per cube is required");
    SparseCheck out;
    out.disjoint = true;
    std::vector<std::uint8_t> used(t.cell_count(), 0);
    for (std::size_t n = 0; n < s.cubes.size(); ++n) {
        const Cube& q = s.cubes[n];
        t.require(q);
        for (auto c : s.witnesses[n]) {
            if (c >= t.cell_count() || t.ancestor_index(c, q.level) != q.index)
                throw DomainError("witness cell escapes its cube");
            if (used[c]) out.disjoint = false;
            used[c] = 1;
        }
        out.worst_ratio = std::min(out.worst_ratio, s.measure_of(s.witnesses[n]) / s.measure_of(q));
    }
    out.ok = out.disjoint && out.worst_ratio >= gamma * (1.0 - 1e-12);
    return out;
}

namespace {

SparseFamily greedy_witnesses(const TreePtr& tree, std::vector<Cube> cubes, double gamma,
                              const std::optional<Weight>& measure, bool& complete) {
    const auto& t = *tree;
    std::sort(cubes.begin(), cubes.end(), [](const Cube& a, const Cube& b) {
        return a.level != b.level ? a.level > b.level : a.index < b.index;
    });
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    SparseFamily s;
    s.tree = tree;
    s.gamma = gamma;
    s.measure = measure;
    s.cubes = cubes;
    s.witnesses.resize(cubes.size());
    std::vector<std::uint8_t> used(t.cell_count(), 0);
    complete = true;
    for (std::size_t n = 0; n < cubes.size(); ++n) {
        const Cube& q = cubes[n];
        std::vector<std::uint64_t> free;
        t.for_each_cell(q, [&](std::uint64_t c) {
            if (!used[c]) free.push_back(c);
        });
        const double target = gamma * s.measure_of(q);
        std::vector<std::uint64_t> take;
        if (!measure) {
            const double cells = std::ceil(target / t.cell_volume() * (1.0 - 1e-12));
            const auto need = static_cast<std::size_t>(std::max(cells, 0.0));
            if (need > free.size()) complete = false;
            take.assign(free.begin(), free.begin() + static_cast<std::ptrdiff_t>(std::min(need, free.size())));
        } else {
            std::stable_sort(free.begin(), free.end(),
                             [&](auto a, auto b) { return measure->mass(a) > measure->mass(b); });
            double got = 0.0;
            for (auto c : free) {
                if (got >= target * (1.0 - 1e-12)) break;
                take.push_back(c);
                got += measure->mass(c);
            }
            if (got < target * (1.0 - 1e-12)) complete = false;
        }
        for (auto c : take) used[c] = 1;
        std::sort(take.begin(), take.end());
        s.witnesses[n] = std::move(take);
    }
    return s;
}

}  // namespace

std::optional<SparseFamily> assign_witnesses(const TreePtr& tree, std::vector<Cube> cubes, double gamma,
                                             const std::optional<Weight>& measure) {
    for (const auto& q : cubes) tree->require(q);
    bool complete = false;
    SparseFamily s = greedy_witnesses(tree, std::move(cubes), gamma, measure, complete);
    if (!complete) return std::nullopt;
    return s;
}

double carleson_from_sparse(const SparseFamily& s, const Weight& mu, bool enforce) {
    LevelArray ind = zero_levels(*s.tree);
    for (const auto& q : s.cubes) ind[q.level][q.index] = 1.0;
    const double value = carleson_norm(ind, mu);
    if (enforce) {
        const bool same_measure = s.measure ? s.measure->masses() == mu.masses() : mu.is_lebesgue();
        if (same_measure && verify_sparse(s, s.gamma).ok && value > (1.0 + 1e-9) / s.gamma)
            throw NumericalError("sparse family violates the Carleson packing bound");
    }
    return value;
}

double domination_constant(int dim) { return std::ldexp(1.0, dim + 5); }

DominationResult paraproduct_sparse_dominate(const GridFunction& b, const GridFunction& f, const Cube& q0) {
    const auto& t = b.tree();
    t.require(q0);
    if (!(t == f.tree())) throw DomainError("b and f live on different trees");
    const LevelArray avg_b = level_averages(b);
    const LevelArray avg_f = level_averages(f);
    const LevelArray avg_abs_f = level_averages(f.abs());
    const LevelArray osc = level_oscillations(b);
    {
        bool nonzero = false;
        t.for_each_cell(q0, [&](std::uint64_t c) { nonzero = nonzero || f[c] != 0.0; });
        if (nonzero && !(avg_abs_f[q0.level][q0.index] > 0.0))
            throw NumericalError("<|f|> vanishes on the starting cube although f does not");
    }

    DominationResult out;
    CubeSet family(t);
    std::vector<Cube> work{q0};
    struct Node {
        Cube r;
        double pos, neg;
    };
    while (!work.empty()) {
        const Cube q = work.back();
        work.pop_back();
        family.insert(q);
        out.stopping_roots.push_back(q);
        const double mean_osc = osc[q.level][q.index] / t.volume(q.level);
        const double af = avg_abs_f[q.level][q.index];
        if (mean_osc == 0.0 || t.is_finest(q)) continue;
        const double a_q = 32.0 * mean_osc * af;

        std::vector<Cube> stopped;
        std::vector<Node> stack{{q, 0.0, 0.0}};
        while (!stack.empty()) {
            const Node node = stack.back();
            stack.pop_back();
            const double br = avg_b[node.r.level][node.r.index];
            const double fr = avg_f[node.r.level][node.r.index];
            for (const Cube& c : t.children(node.r)) {
                const double term = (avg_b[c.level][c.index] - br) * fr;
                const double pos = node.pos + std::max(term, 0.0);
                const double neg = node.neg + std::max(-term, 0.0);
                if (std::max(pos, neg) > a_q || avg_abs_f[c.level][c.index] > 4.0 * af) {
                    stopped.push_back(c);
                } else if (!t.is_finest(c)) {
                    stack.push_back({c, pos, neg});
                }
            }
        }
        double stop_mass = 0.0;
        for (const Cube& p : stopped) {
            stop_mass += t.volume(p.level);
            family.insert(t.parent(p));
            // A finest stopping cube carries no differences below it; its parent covers the jump.
            if (!t.is_finest(p)) work.push_back(p);
        }
        const double ratio = stop_mass / t.volume(q.level);
        out.max_stop_ratio = std::max(out.max_stop_ratio, ratio);
        if (ratio > 0.5) ++out.stop_violations;
    }
    bool complete = false;
    out.family = greedy_witnesses(b.tree_ptr(), family.list(), std::ldexp(1.0, -(t.dim() + 2)), std::nullopt,
                                  complete);
    return out;
}

GridFunction sparse_majorant(const GridFunction& b, const GridFunction& f, const std::vector<Cube>& cubes) {
    const auto& t = b.tree();
    const LevelArray osc = level_oscillations(b);
    const LevelArray avg_abs_f = level_averages(f.abs());
    GridFunction out(b.tree_ptr());
    for (const Cube& q : cubes) {
        t.require(q);
        const double v = osc[q.level][q.index] / t.volume(q.level) * avg_abs_f[q.level][q.index];
        if (v == 0.0) continue;
        t.for_each_cell(q, [&](std::uint64_t c) { out[c] += v; });
    }
    return out;
}

DominationCheck domination_check(const GridFunction& lhs, const SparseFamily& s, const GridFunction& b,
                                 const GridFunction& f, double constant) {
    const GridFunction rhs = sparse_majorant(b, f, s.cubes);
    DominationCheck out;
    out.ok = true;
    out.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double l = std::fabs(lhs[i]);
        const double r = constant * rhs[i];
        out.max_violation = std::max(out.max_violation, l - r);
        if (l > r * (1.0 + 1e-12) + 1e-13) out.ok = false;
    }
    return out;
}

void write_sparse_family(std::ostream& os, const SparseFamily& s) {
    const auto& t = *s.tree;
    os << "# sparse-family v1 dim=" << t.dim() << " depth=" << t.depth() << " gamma=" << s.gamma
       << " measure=" << (s.measure ? "weighted" : "lebesgue") << '\n';
    for (std::size_t n = 0; n < s.cubes.size(); ++n) {
        const Cube& q = s.cubes[n];
        os << q.level;
        const Coord x = t.coords(q);
        for (int j = 0; j < t.dim(); ++j) os << ' ' << x[j];
        os << " :";
        const auto& w = s.witnesses[n];
        for (std::size_t i = 0; i < w.size();) {
            std::size_t j = i + 1;
            while (j < w.size() && w[j] == w[j - 1] + 1) ++j;
            os << ' ' << w[i] << '-' << (w[j - 1] + 1);
            i = j;
        }
        os << '\n';
    }
}

SparseFamily read_sparse_family(std::istream& is, const TreePtr& tree) {
    const auto& t = *tree;
    SparseFamily s;
    s.tree = tree;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("gamma=");
            if (pos != std::string::npos) s.gamma = std::stod(line.substr(pos + 6));
            continue;
        }
        std::istringstream ls(line);
        Cube q;
        Coord x{};
        if (!(ls >> q.level)) throw ConfigError("malformed sparse-family line", lineno);
        for (int j = 0; j < t.dim(); ++j)
            if (!(ls >> x[j])) throw ConfigError("missing cube coordinate", lineno);
        std::string colon;
        if (!(ls >> colon) || colon != ":") throw ConfigError("expected ':' before witness ranges", lineno);
        try {
            if (q.level < 0 || q.level > t.depth()) throw DomainError("cube level outside the tree");
            q = t.cube(q.level, x);
            t.require(q);
        } catch (const DomainError& e) {
            throw ConfigError(e.what(), lineno);
        }
        std::vector<std::uint64_t> cells;
        std::string range;
        while (ls >> range) {
            const auto dash = range.find('-');
            if (dash == std::string::npos) throw ConfigError("witness range must look like a-b", lineno);
            const std::uint64_t a = std::stoull(range.substr(0, dash));
            const std::uint64_t b = std::stoull(range.substr(dash + 1));
            if (a >= b || b > t.cell_count()) throw ConfigError("witness range outside the tree", lineno);
            for (std::uint64_t c = a; c < b; ++c) cells.push_back(c);
        }
        s.cubes.push_back(q);
        s.witnesses.push_back(std::move(cells));
    }
    return s;
}

}  // namespace bloom
