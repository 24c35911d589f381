#include <doctest.h>

#include <cmath>
#include <random>

#include "bloomlab/operators.hpp"
#include "oracles.hpp"

using namespace bloom;

namespace {

TreePtr unit_tree(int depth) { return make_tree(1, depth, Point{0.0, 0.0, 0.0}, 1.0); }

double dot(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.tree().cell_volume();
}

}  // namespace

TEST_CASE("dyadic maximal function of a half indicator") {
    auto t = unit_tree(1);
    GridFunction f(t, {1.0, 0.0});
    const GridFunction m = maximal(f, Weight::lebesgue(t));
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(0.5));
}

TEST_CASE("maximal functions match the oracle on random data") {
    std::mt19937_64 gen(31);
    for (int d = 1; d <= 2; ++d) {
        auto t = make_tree(d, d == 1 ? 5 : 3, 1.0);
        const GridFunction f = oracle::random_function(t, gen);
        const Weight mu = oracle::random_piecewise(t, gen);
        const GridFunction m = maximal(f, mu);
        const auto o = oracle::maximal(f, mu.masses());
        for (std::size_t i = 0; i < o.size(); ++i) CHECK(m[i] == doctest::Approx(o[i]).epsilon(1e-9));
        const GridFunction s = sharp_maximal(f, mu);
        const auto os = oracle::sharp(f, mu.masses());
        for (std::size_t i = 0; i < os.size(); ++i) CHECK(s[i] == doctest::Approx(os[i]).epsilon(1e-9));
    }
}

TEST_CASE("sharp maximal function of a half indicator is 1/2") {
    auto t = unit_tree(1);
    GridFunction b(t, {1.0, 0.0});
    const GridFunction s = sharp_maximal(b, Weight::lebesgue(t));
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(0.5));
}

TEST_CASE("grid-interval sharp maximal function matches the cubic oracle") {
    std::mt19937_64 gen(32);
    auto t = make_tree(1, 5, 2.0);
    const GridFunction b = oracle::random_function(t, gen);
    const Weight nu = Weight::power(t, 1.0 / 3.0);
    const GridFunction s = sharp_maximal(b, nu, Scope::grid_intervals);
    const auto o = oracle::sharp_intervals(b, nu.masses());
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(s[i] == doctest::Approx(o[i]).epsilon(1e-9));
}

TEST_CASE("paraproduct of half indicators is plus or minus 1/4") {
    auto t = unit_tree(1);
    GridFunction b(t, {1.0, 0.0}), f(t, {1.0, 0.0});
    const GridFunction p = paraproduct(b, f);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(-0.25));
}

TEST_CASE("paraproduct and its adjoint match direct summation") {
    std::mt19937_64 gen(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d = 1; d <= 2; ++d) {
        auto t = make_tree(d, d == 1 ? 5 : 3, 1.0);
        const GridFunction b = oracle::random_function(t, gen), f = oracle::random_function(t, gen);
        const GridFunction g = oracle::random_function(t, gen);
        const auto o = oracle::paraproduct(b, f, [](const Cube&) { return true; });
        const GridFunction p = paraproduct(b, f);
        for (std::size_t i = 0; i < o.size(); ++i) CHECK(p[i] == doctest::Approx(o[i]).epsilon(1e-9));
        CubeSet only(*t);
        for (const Cube& q : t->all_cubes())
            if (u(gen) < 0.4) only.insert(q);
        const auto os = oracle::paraproduct(b, f, [&](const Cube& q) { return only.contains(q); });
        const GridFunction ps = paraproduct(b, f, only);
        for (std::size_t i = 0; i < os.size(); ++i) CHECK(ps[i] == doctest::Approx(os[i]).epsilon(1e-9));
        CHECK(dot(p, g) == doctest::Approx(dot(f, paraproduct_adjoint(b, g))).epsilon(1e-9));
    }
}

TEST_CASE("single-cube sparse operators") {
    std::mt19937_64 gen(34);
    auto t = unit_tree(4);
    const GridFunction b = oracle::random_function(t, gen);
    const GridFunction one(t, 1.0);
    const Cube q{1, 1};
    const GridFunction a = sparse_op(b, one, {q}, SparseVariant::plain);
    const GridFunction as = sparse_op(b, one, {q}, SparseVariant::adjoint);
    const double osc = oracle::oscillation(b, oracle::cells(*t, q)) / t->volume(1);
    for (auto c : oracle::cells(*t, q)) CHECK(as[c] == doctest::Approx(osc).epsilon(1e-12));
    CHECK(a.integral() == doctest::Approx(as.integral()).epsilon(1e-12));
    CHECK(a.integral(q) == doctest::Approx(osc * t->volume(1)).epsilon(1e-12));

    const GridFunction f = oracle::random_function(t, gen), g = oracle::random_function(t, gen);
    const std::vector<Cube> cubes{{0, 0}, {2, 1}, {3, 6}};
    CHECK(dot(sparse_op(b, f, cubes, SparseVariant::plain), g) ==
          doctest::Approx(dot(f, sparse_op(b, g, cubes, SparseVariant::adjoint))).epsilon(1e-9));
    const GridFunction e = sparse_op(b, f, {q}, SparseVariant::exponent, 0.5);
    double acc = 0.0;
    for (auto c : oracle::cells(*t, q)) acc += std::sqrt(std::fabs(f[c]));
    CHECK(e[t->cells_of(q)[0]] == doctest::Approx(std::pow(acc / 8.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("martingale transform matches Haar summation") {
    std::mt19937_64 gen(35);
    std::uniform_int_distribution<int> coin(0, 1);
    auto t = make_tree(2, 3, 1.0);
    const GridFunction f = oracle::random_function(t, gen);
    LevelArray v = zero_levels(*t);
    for (auto& lv : v)
        for (auto& x : lv) x = coin(gen) ? 1.0 : -1.0;
    const GridFunction m = martingale_transform(f, v);
    std::vector<double> o(f.size(), 0.0);
    for (const Cube& q : oracle::cubes(*t)) {
        if (t->is_finest(q)) continue;
        const auto d = oracle::haar(f, q);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += v[q.level][q.index] * d[i];
    }
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(m[i] == doctest::Approx(o[i]).epsilon(1e-9));
}

TEST_CASE("weak-type battery for random sign transforms") {
    std::mt19937_64 gen(36);
    std::uniform_int_distribution<int> coin(0, 1);
    auto t = unit_tree(7);
    const double h = t->cell_volume();
    for (int trial = 0; trial < 50; ++trial) {
        const GridFunction f = oracle::random_function(t, gen, true);
        LevelArray v = zero_levels(*t);
        for (auto& lv : v)
            for (auto& x : lv) x = coin(gen) ? 1.0 : -1.0;
        const GridFunction out = martingale_transform(f, v);
        const WeakTypeCheck w = weak_type_check(out, f, 1.0, 2.0, 100);
        CHECK(w.worst_ratio <= 1.0);
        double top = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) top = std::max(top, std::fabs(out[i])), l1 += f[i] * h;
        double worst = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double tv = top * k / 101.0;
            double m = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i)
                if (std::fabs(out[i]) > tv) m += h;
            worst = std::max(worst, tv * m / (2.0 * l1));
        }
        CHECK(w.worst_ratio == doctest::Approx(worst).epsilon(1e-12));
    }
}

TEST_CASE("Hilbert transform matches the direct double sum") {
    std::mt19937_64 gen(37);
    auto t = make_tree(1, 7, 3.0);
    const GridFunction f = oracle::random_function(t, gen);
    const GridFunction h = hilbert_transform(f);
    const auto o = oracle::hilbert(f);
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(h[i] == doctest::Approx(o[i]).epsilon(1e-9));
    CHECK_THROWS_AS(hilbert_transform(GridFunction(make_tree(2, 2, 1.0))), DomainError);
}

TEST_CASE("Hilbert transform of the unit indicator at x = 2 is ln 2") {
    for (int depth : {8, 10, 12}) {
        auto t = make_tree(1, depth, 4.0);
        Box unit;
        unit.lo[0] = 0.0;
        unit.hi[0] = 1.0;
        const GridFunction h = hilbert_transform(indicator(t, unit));
        Point left{2.0 - 0.5 * t->side(depth), 0.0, 0.0}, right{2.0 + 0.5 * t->side(depth), 0.0, 0.0};
        const double v = 0.5 * (h[t->locate(left)] + h[t->locate(right)]);
        CHECK(v == doctest::Approx(std::log(2.0)).epsilon(0.01));
    }
}

TEST_CASE("commutator pairing off the support is the kernel double sum") {
    std::mt19937_64 gen(38);
    auto t = make_tree(1, 6, 2.0);
    const GridFunction b = oracle::random_function(t, gen);
    GridFunction f(t), g(t);
    const double h = t->cell_volume();
    for (std::uint64_t c = 0; c < t->cell_count(); ++c) {
        const double x = t->midpoint(c)[0];
        if (x < -1.0) f[c] = std::fabs(b[c]) + 0.5;
        if (x > 1.0) g[c] = b[c] * b[c];
    }
    const double lhs = dot(g, commutator(b, f));
    double rhs = 0.0;
    for (std::uint64_t y = 0; y < t->cell_count(); ++y)
        for (std::uint64_t x = 0; x < t->cell_count(); ++x)
            if (x != y && f[x] != 0.0 && g[y] != 0.0)
                rhs += (b[y] - b[x]) / (t->midpoint(y)[0] - t->midpoint(x)[0]) * f[x] * g[y] * h * h;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("half-split commutator is nonzero and constants commute") {
    auto t = make_tree(1, 6, 2.0);
    const Cube q{2, 1};
    const GridFunction b = half_split(t, q);
    const GridFunction c = commutator(b, indicator(t, q));
    double norm = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) norm += c[i] * c[i];
    CHECK(norm > 1e-3);
    const GridFunction k = commutator(GridFunction(t, 3.0), indicator(t, q));
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("linear operators come with matching adjoints") {
    std::mt19937_64 gen(39);
    auto t = make_tree(1, 5, 2.0);
    const GridFunction b = oracle::random_function(t, gen);
    const GridFunction f = oracle::random_function(t, gen), g = oracle::random_function(t, gen);
    for (const LinearOperator& u : {identity_operator(), multiplication_operator(b), paraproduct_operator(b),
                                    commutator_operator(b), sparse_operator(b, {{0, 0}, {2, 3}})})
        CHECK(dot(u.apply(f), g) == doctest::Approx(dot(f, u.adjoint(g))).epsilon(1e-9));
}
