#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "bloomlab/norms.hpp"
#include "oracles.hpp"

using namespace bloom;

namespace {

TreePtr unit_tree(int depth) { return make_tree(1, depth, Point{0.0, 0.0, 0.0}, 1.0); }

}  // namespace

TEST_CASE("L^1 mass of a power weight is 1.5") {
    auto t = make_tree(1, 6, 1.0);
    const Weight w = Weight::power(t, 1.0 / 3.0);
    CHECK(lp_norm(GridFunction(t, 1.0), w, 1.0) == doctest::Approx(1.5).epsilon(1e-9));
    std::mt19937_64 gen(51);
    const GridFunction f = oracle::random_function(t, gen);
    CHECK(lp_norm(f, w, 3.0) == doctest::Approx(oracle::lp(f, w.masses(), 3.0)).epsilon(1e-9));
}

TEST_CASE("BMO norm of the Haar function is 1") {
    auto t = unit_tree(3);
    GridFunction b(t);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = i < 4 ? 1.0 : -1.0;
    CHECK(bmo_alpha_norm(b, Weight::lebesgue(t), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("BMO^alpha matches enumeration over cubes") {
    std::mt19937_64 gen(52);
    auto t = make_tree(1, 5, 1.0);
    const GridFunction b = oracle::random_function(t, gen);
    const Weight nu = oracle::random_piecewise(t, gen);
    for (double alpha : {-0.25, 0.0, 0.5}) {
        double best = 0.0;
        for (const Cube& q : oracle::cubes(*t)) {
            const auto cs = oracle::cells(*t, q);
            best = std::max(best, oracle::oscillation(b, cs) / std::pow(oracle::mass(nu.masses(), cs), 1.0 + alpha));
        }
        CHECK(bmo_alpha_norm(b, nu, alpha) == doctest::Approx(best).epsilon(1e-9));
        CHECK(bmo_alpha_norm(b, nu, alpha, Scope::one_third) >= best * (1 - 1e-12));
    }
    CHECK_THROWS_AS(bmo_alpha_norm(b, nu, 0.0, Scope::grid_intervals), DomainError);
}

TEST_CASE("multiplier norm of the unit ball indicator: c = 1/2, value 1") {
    auto t = make_tree(1, 6, 2.0);
    Box ball;
    ball.lo[0] = -1.0;
    ball.hi[0] = 1.0;
    const GridFunction b = indicator(t, ball);
    const NormReport r = multiplier_norm(b, Weight::lebesgue(t), 2.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::get<double>(r.certificate) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.method == Method::golden_section);
    CHECK(r.trace.size() % 2 == 0);
}

TEST_CASE("sharp maximal norm and certificate") {
    std::mt19937_64 gen(53);
    auto t = make_tree(1, 5, 2.0);
    const GridFunction b = oracle::random_function(t, gen);
    const Weight nu = Weight::power(t, 1.0 / 3.0);
    const NormReport r = sharp_maximal_r_norm(b, nu, 4.0);
    const auto o = oracle::sharp(b, nu.masses());
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += std::pow(o[i], 4.0) * nu.mass(i);
    CHECK(r.value == doctest::Approx(std::pow(s, 0.25)).epsilon(1e-9));
    const auto& cert = std::get<GridFunction>(r.certificate);
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(cert[i] == doctest::Approx(o[i]).epsilon(1e-9));
}

TEST_CASE("discretized sharp sup of a half indicator is 1/2") {
    auto t = unit_tree(1);
    GridFunction b(t, {1.0, 0.0});
    const Weight nu = Weight::lebesgue(t);
    const double gamma = 0.5;
    const NormReport r = discretized_sharp_sup(b, nu, 2.0, gamma);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
    const auto all = oracle::cubes(*t);
    double brute = 0.0;
    for (unsigned mask = 1; mask < (1u << all.size()); ++mask) {
        std::vector<Cube> fam;
        for (std::size_t k = 0; k < all.size(); ++k)
            if (mask >> k & 1u) fam.push_back(all[k]);
        if (!assign_witnesses(t, fam, gamma)) continue;
        double s = 0.0;
        for (const Cube& q : fam) {
            const auto cs = oracle::cells(*t, q);
            const double m = oracle::mass(nu.masses(), cs);
            s += std::pow(oracle::oscillation(b, cs) / m, 2.0) * m;
        }
        CHECK(discretized_sum(b, nu, 2.0, fam) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
        brute = std::max(brute, std::sqrt(s));
    }
    CHECK(r.value == doctest::Approx(brute).epsilon(1e-12));
    CHECK(sharp_maximal_r_norm(b, nu, 2.0).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discretized sup over sharp norm stays in a fixed band for random b") {
    std::mt19937_64 gen(41);
    auto t = make_tree(1, 6, 2.0);
    double lo = 1e300, hi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const GridFunction b = oracle::random_function(t, gen);
        const Weight nu = trial % 2 ? Weight::power(t, 1.0 / 3.0) : Weight::lebesgue(t);
        const double r = trial % 3 == 0 ? 2.0 : 4.0;
        const NormReport d = discretized_sharp_sup(b, nu, r, 0.5);
        CHECK(verify_sparse(std::get<SparseFamily>(d.certificate), 0.5).ok);
        const double ratio = d.value / sharp_maximal_r_norm(b, nu, r).value;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    // calibrated band 0.73 .. 0.94
    CHECK(lo >= 0.65);
    CHECK(hi <= 1.05);
}

TEST_CASE("multiplication operator norm: ascent, closed form and multiplier at c = 0") {
    std::mt19937_64 gen(54);
    auto t = make_tree(1, 6, 2.0);
    const ExponentConfig cfg(4.0, 2.0);
    const BloomTriple tr = bloom_triple(Weight::power(t, 1.0), Weight::lebesgue(t), cfg);
    for (int trial = 0; trial < 3; ++trial) {
        const GridFunction b = oracle::random_function(t, gen);
        double exact = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i)
            exact += std::pow(std::fabs(b[i]), cfg.r()) * std::pow(tr.lambda.mass(i), cfg.r() / cfg.q) *
                     std::pow(tr.mu.mass(i), -cfg.r() / cfg.p);
        exact = std::pow(exact, 1.0 / cfg.r());
        AscentBudget budget;
        budget.restarts = 4;
        budget.iterations = 200;
        const NormReport e = empirical_operator_norm(multiplication_operator(b), tr.mu, tr.lambda, cfg.p, cfg.q, budget);
        CHECK(e.value <= exact * (1 + 1e-9));
        CHECK(e.value == doctest::Approx(exact).epsilon(1e-4));
        const auto& f = std::get<GridFunction>(e.certificate);
        CHECK(operator_ratio(multiplication_operator(b), f, tr.mu, tr.lambda, cfg.p, cfg.q) ==
              doctest::Approx(e.value).epsilon(1e-12));
        const double c0 = std::pow(multiplier_objective(b, tr.nu.pow(1.0 - cfg.r()), cfg.r(), 0.0), 1.0 / cfg.r());
        CHECK(c0 == doctest::Approx(exact).epsilon(0.02));
    }
}

TEST_CASE("ascent trace is monotone and never beats an exact norm") {
    auto t = make_tree(1, 5, 1.0);
    const Weight leb = Weight::lebesgue(t);
    AscentBudget budget;
    budget.restarts = 3;
    const NormReport e = empirical_operator_norm(identity_operator(), leb, leb, 2.0, 2.0, budget);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 1; i < e.trace.size(); ++i) CHECK(e.trace[i] >= e.trace[i - 1]);
    CHECK(e.method == Method::gradient_ascent);
}

TEST_CASE("single-pair testing functional equals its hand expansion") {
    std::mt19937_64 gen(55);
    auto t = make_tree(1, 6, 2.0);
    const GridFunction b = oracle::random_function(t, gen);
    const LinearOperator u = paraproduct_operator(b);
    const Weight nu = Weight::power(t, 1.0 / 3.0);
    TestPair pr;
    pr.s = {4, 4};
    pr.q_box = t->box({4, 4});
    pr.r_box = t->box({4, 6});
    pr.f = indicator(t, Cube{4, 4});
    pr.g = indicator(t, Cube{4, 6});
    const double r = 4.0;
    const GridFunction uf = u.apply(pr.f);
    double pairing = 0.0;
    for (auto c : oracle::cells(*t, {4, 6})) pairing += uf[c] * t->cell_volume();
    const double ns = oracle::mass(nu.masses(), oracle::cells(*t, {4, 4}));
    const double hand = std::fabs(pairing / ns) * std::pow(ns, 1.0 / r);
    CHECK(sequential_testing_functional(u, {pr}, nu, r) == doctest::Approx(hand).epsilon(1e-12));
    TestPair far = pr;
    far.r_box = t->box({4, 15});
    far.g = indicator(t, Cube{4, 15});
    CHECK_THROWS_AS(sequential_testing_functional(u, {far}, nu, r), DomainError);
}

TEST_CASE("commutator median-split pairs control the oscillation with constant 12") {
    std::mt19937_64 gen(56);
    auto t = make_tree(1, 6, 2.0);
    const Weight leb = Weight::lebesgue(t);
    for (int trial = 0; trial < 5; ++trial) {
        const GridFunction b = oracle::random_function(t, gen);
        for (const Cube& s : t->all_cubes()) {
            if (s.level < 2) continue;
            const CommutatorPairs cp = commutator_test_pairs(b, s);
            CHECK(cp.oscillation == doctest::Approx(oracle::oscillation(b, oracle::cells(*t, s))).epsilon(1e-9));
            CHECK(cp.oscillation <= 12.0 * cp.tested * (1 + 1e-9));
            CHECK_NOTHROW(sequential_testing_functional(commutator_operator(b), cp.pairs, leb, 2.0));
        }
    }
}

TEST_CASE("q >= p testing condition matches enumeration up to depth 2") {
    std::mt19937_64 gen(57);
    for (int depth = 1; depth <= 2; ++depth) {
        auto t = make_tree(1, depth, 1.0);
        const BloomTriple tr =
            bloom_triple(oracle::random_piecewise(t, gen), oracle::random_piecewise(t, gen), ExponentConfig(2.0, 3.0));
        const GridFunction b = oracle::random_function(t, gen);
        double best = 0.0;
        for (const Cube& q : oracle::cubes(*t)) {
            const auto cs = oracle::cells(*t, q);
            GridFunction one(t);
            for (auto c : cs) one[c] = 1.0;
            const auto out = oracle::paraproduct(b, one, [](const Cube&) { return true; });
            double s = 0.0;
            for (auto c : cs) s += std::fabs(out[c]) * t->cell_volume();
            best = std::max(best, s / std::pow(oracle::mass(tr.nu.masses(), cs), tr.cfg.bloom_exponent()));
        }
        CHECK(q_ge_p_testing(paraproduct_operator(b), tr) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("weight necessity bound on a two-cell weight") {
    auto t = make_tree(1, 1, Point{0.0, 0.0, 0.0}, 1.0);
    const BloomTriple tr =
        bloom_triple(Weight::piecewise(t, {2.0, 1.0}), Weight::lebesgue(t), ExponentConfig(2.0, 2.0));
    const NecessityBound nb = weight_necessity_bound(1.0, tr, t->root());
    const double nu_root = std::sqrt(2.0) / 2.0 + 0.5;
    CHECK(nb.joint_at_cube == doctest::Approx(std::sqrt(0.75) * nu_root).epsilon(1e-12));
    CHECK(nb.b_functional == doctest::Approx(1.0 / nu_root).epsilon(1e-12));
    CHECK(nb.implied == doctest::Approx(nu_root).epsilon(1e-12));
    CHECK(nb.exact_norm == doctest::Approx(0.5 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(nb.test_ratio == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK_THROWS_AS(weight_necessity_bound(1.0, tr, t->cell(0)), DomainError);
}

TEST_CASE("Fefferman-Stein check on a power weight inside the window") {
    auto t = make_tree(1, 7, 4.0);
    Box ball;
    ball.lo[0] = -1.0;
    ball.hi[0] = 1.0;
    const FeffermanSteinReport fs =
        fefferman_stein_equivalence_check(indicator(t, ball), Weight::power(t, 0.1), 4.0, Scope::grid_intervals);
    CHECK(fs.pointwise_bound_ok);
    CHECK(fs.cauchy.consistent);
    CHECK(fs.ratio_i * fs.ratio_ii == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fs.ar_dual > 1.0);
}

TEST_CASE("report JSON and grid CSV") {
    auto t = make_tree(1, 2, 1.0);
    NormReport r;
    r.value = 0.25;
    r.method = Method::sparse_sup;
    r.certificate = 0.5;
    r.trace = {1.0, 2.0};
    const auto j = nlohmann::json::parse(report_json(r, "cert.csv"));
    CHECK(j["schema"] == 1);
    CHECK(j["value"] == 0.25);
    CHECK(j["method"] == method_name(Method::sparse_sup));
    CHECK(j["certificate-ref"] == "cert.csv");
    CHECK(j["trace"].size() == 2);
    const std::string path = "test_norms_grid.csv";
    write_grid_csv(GridFunction(t, {1.0, 2.0, 3.0, 4.0}), path);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "cell,x_1,value");
    CHECK(first == "0,-0.75,1");
}
