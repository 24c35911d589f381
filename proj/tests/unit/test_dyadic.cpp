#include <doctest.h>

#include <cmath>
#include <random>

#include "bloomlab/dyadic.hpp"
#include "oracles.hpp"

using namespace bloom;

namespace {

TreePtr unit_tree(int depth) { return make_tree(1, depth, Point{0.0, 0.0, 0.0}, 1.0); }

}  // namespace

TEST_CASE("tree geometry") {
    auto t = make_tree(2, 3, 2.0);
    CHECK(t->cell_count() == 64);
    CHECK(t->cube_count() == 1 + 4 + 16 + 64);
    CHECK(t->side(3) == doctest::Approx(0.5));
    for (const Cube& q : t->all_cubes()) {
        if (q.level == 0) continue;
        const Cube p = t->parent(q);
        CHECK(t->contains(p, q));
        const auto ch = t->children(p);
        CHECK(std::find(ch.begin(), ch.end(), q) != ch.end());
        CHECK(t->box(p).contains(t->box(q)));
    }
    for (std::uint64_t c = 0; c < t->cell_count(); ++c) CHECK(t->locate(t->midpoint(c)) == c);
    CHECK_THROWS_AS(t->require({4, 0}), DomainError);
    CHECK_THROWS_AS(t->require({1, 4}), DomainError);
}

TEST_CASE("cells_of agrees with the midpoint membership oracle") {
    for (int d = 1; d <= 3; ++d) {
        auto t = make_tree(d, 3, 1.0);
        for (const Cube& q : t->all_cubes()) {
            auto a = t->cells_of(q);
            std::sort(a.begin(), a.end());
            CHECK(a == oracle::cells(*t, q));
        }
    }
}

TEST_CASE("weighted average of a two-cell indicator is 2/3") {
    auto t = unit_tree(1);
    GridFunction f(t, {1.0, 0.0});
    const Weight mu = Weight::piecewise(t, {2.0, 1.0});
    const double v = average(f, t->root(), mu);
    CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(v == doctest::Approx(oracle::average(f, oracle::cells(*t, t->root()), mu.masses())).epsilon(1e-12));
}

TEST_CASE("Haar difference of a two-cell indicator") {
    auto t = unit_tree(1);
    GridFunction b(t, {1.0, 0.0});
    const GridFunction d = haar_difference(b, t->root());
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(-0.5));
    const auto o = oracle::haar(b, t->root());
    CHECK(d[0] == doctest::Approx(o[0]));
    CHECK(d[1] == doctest::Approx(o[1]));
}

TEST_CASE("Haar differences match the children-average oracle on random data") {
    std::mt19937_64 gen(11);
    auto t = make_tree(2, 3, 1.0);
    const GridFunction b = oracle::random_function(t, gen);
    for (const Cube& q : t->all_cubes()) {
        if (t->is_finest(q)) continue;
        const GridFunction d = haar_difference(b, q);
        const auto o = oracle::haar(b, q);
        for (std::size_t c = 0; c < o.size(); ++c) CHECK(d[c] == doctest::Approx(o[c]).epsilon(1e-9));
    }
    const LevelArray osc = level_oscillations(b);
    for (const Cube& q : t->all_cubes())
        CHECK(osc[q.level][q.index] == doctest::Approx(oracle::oscillation(b, oracle::cells(*t, q))).epsilon(1e-9));
}

namespace {

// Smallest side of a cube of the three shifted lattices (side_k (i + (-1)^k a) + corner,
// a in {0, 1/3, 2/3}) inside the root that contains q; enumerated directly.
double smallest_cover_side(const DyadicTree& t, const Box& q) {
    const double lo0 = t.corner()[0], hi0 = lo0 + t.root_side();
    for (int k = t.depth(); k >= 0; --k) {
        const double s = t.side(k);
        for (int a = 0; a < 3; ++a) {
            const double shift = (k % 2 == 0 ? 1.0 : -1.0) * a / 3.0;
            for (long i = -2; i <= (1L << k) + 2; ++i) {
                const double lo = lo0 + s * (static_cast<double>(i) + shift), hi = lo + s;
                if (lo < lo0 - 1e-12 || hi > hi0 + 1e-12) continue;
                if (lo <= q.lo[0] + 1e-12 && q.hi[0] <= hi + 1e-12) return s;
            }
        }
    }
    return 0.0;
}

Box interval(double lo, double hi) {
    Box b;
    b.dim = 1;
    b.lo[0] = lo;
    b.hi[0] = hi;
    return b;
}

}  // namespace

TEST_CASE("one-third cover of [0.4, 0.9)") {
    auto t = make_tree(1, 7, 4.0);
    const Box q = interval(0.4, 0.9);
    const Cover c = one_third_cover(t, q);
    CHECK(c.box.contains(q));
    CHECK(c.box.side() <= 1.5);
    const double k = std::log2(c.box.side() / 0.5);
    CHECK(k == doctest::Approx(std::round(k)));
    CHECK(c.box.side() == doctest::Approx(smallest_cover_side(*t, q)));
}

TEST_CASE("one-third covers of random cubes match exhaustive search") {
    auto t = make_tree(1, 7, 4.0);
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = t->cell_volume();
    for (int trial = 0; trial < 100; ++trial) {
        const double side = h + u(gen) * (0.5 - h);
        const double lo = -1.0 + u(gen) * (2.0 - side);
        const Box q = interval(lo, lo + side);
        const Cover c = one_third_cover(t, q);
        CHECK(c.box.contains(q));
        CHECK(c.box.side() <= 3.0 * side * (1 + 1e-12));
        CHECK(c.box.side() == doctest::Approx(smallest_cover_side(*t, q)));
    }
}

TEST_CASE("one-third cover refuses cubes it cannot serve") {
    auto t = make_tree(1, 4, 1.0);
    CHECK_THROWS_AS(one_third_cover(t, interval(0.0, 0.01)), DomainError);
    CHECK_THROWS_AS(one_third_cover(t, interval(0.5, 1.5)), DomainError);
}

TEST_CASE("restrict then integrate equals integrating over the subtree root") {
    std::mt19937_64 gen(7);
    for (int d = 1; d <= 2; ++d) {
        auto t = make_tree(d, 4, 2.0);
        const GridFunction f = oracle::random_function(t, gen);
        for (const Cube& q : t->all_cubes()) {
            const GridFunction r = restrict_function(f, q);
            double direct = 0.0;
            for (auto c : oracle::cells(*t, q)) direct += f[c] * t->cell_volume();
            CHECK(r.integral() == doctest::Approx(direct).epsilon(1e-9));
            CHECK(f.integral(q) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("cube sets and level sums") {
    auto t = make_tree(1, 3, 1.0);
    CubeSet s(*t, {{0, 0}, {2, 3}});
    CHECK(s.size() == 2);
    CHECK(s.contains({2, 3}));
    s.erase({2, 3});
    CHECK_FALSE(s.contains({2, 3}));
    std::vector<double> v(8);
    for (int i = 0; i < 8; ++i) v[i] = i;
    const LevelArray sums = level_sums(*t, v);
    CHECK(sums[0][0] == 28.0);
    CHECK(sums[2][1] == 5.0);
}
