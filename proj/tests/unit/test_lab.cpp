#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bloomlab/lab.hpp"

using namespace bloom;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int config_error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bloomlab_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing reads every section") {
    const ScenarioConfig c = parse_config(
        "[scenario]\nname = demo\nseed = 17\n[grid]\ndim = 1\nhalf_width_exp = 1\ndepths = 4, 6\n"
        "scope = grid-intervals\n[exponents]\np = 4\nq = 2\n[weights]\nmu = power(1)\n"
        "[generators]\nb = ball(1)\n[sweep]\ndeltas = -1, 0.5\n[ascent]\nrestarts = 3\n");
    CHECK(c.name == "demo");
    CHECK(c.seed == 17);
    CHECK(c.depth_list() == std::vector<int>{4, 6});
    CHECK(c.scope == Scope::grid_intervals);
    CHECK(c.p == 4.0);
    CHECK(c.mu == "power(1)");
    CHECK(c.deltas.size() == 2);
    CHECK(c.budget.restarts == 3);
    CHECK(c.half_width() == 2.0);
}

TEST_CASE("config errors carry the offending line") {
    CHECK(config_error_line("[grid]\ndepth = 5\nbogus = 1\n") == 3);
    CHECK(config_error_line("[grid]\n\ndepth = five\n") == 3);
    CHECK(config_error_line("[exponents]\np = 0.5\n") == 2);
    CHECK(config_error_line("[grid]\nscope = sideways\n") == 2);
    CHECK(config_error_line("[grid]\ndepth = 5\ndepth = 6\n") > 0);
    CHECK_THROWS_AS(parse_config("[grid]\ndim = 2\ndepth = 12\n").validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/bloomlab.ini"), ConfigError);
}

TEST_CASE("weight and generator grammars") {
    auto t = make_tree(1, 4, 1.0);
    CHECK(parse_weight("lebesgue", t).is_lebesgue());
    CHECK(parse_weight("power(0.5)", t).gamma() == 0.5);
    CHECK(parse_weight("dual(power(0.5), 2)", t).gamma() == doctest::Approx(-0.5));
    CHECK(parse_weight("pow(power(1), 3)", t).gamma() == doctest::Approx(3.0));
    CHECK(parse_weight("product(power(1), power(2))", t).gamma() == doctest::Approx(3.0));
    CHECK_THROWS_AS(parse_weight("power(", t), ConfigError);
    CHECK_THROWS_AS(parse_weight("cauchy(1)", t), ConfigError);
    const GridFunction ball = parse_generator("ball(0.5)", t, 0);
    CHECK(ball.integral() == doctest::Approx(1.0));
    const GridFunction a = parse_generator("random", t, 9), b = parse_generator("random", t, 9);
    CHECK(a.values() == b.values());
    CHECK(parse_generator("constant(2)", t, 0).integral() == doctest::Approx(4.0));
    CHECK_THROWS_AS(parse_generator("half-split(9,0)", t, 0), Error);
}

TEST_CASE("CSV quoting") {
    Table tb;
    tb.header = {"a", "b"};
    tb.rows = {{"x,y", "1"}};
    CHECK(tb.csv() == "a,b\n\"x,y\",1\n");
}

TEST_CASE("domination runs are byte-identical across reruns") {
    ScenarioConfig c;
    c.depth = 5;
    c.trials = 5;
    c.subcollections = 5;
    c.b = "random";
    const fs::path d1 = scratch("dom1"), d2 = scratch("dom2");
    DominationStats st;
    write_report(run_domination(c, &st), d1.string());
    write_report(run_domination(c), d2.string());
    CHECK(st.failures == 0);
    CHECK(st.stop_violations == 0);
    CHECK(slurp(d1 / "dominate.csv") == slurp(d2 / "dominate.csv"));
    CHECK(slurp(d1 / "dominate.json") == slurp(d2 / "dominate.json"));
    const auto j = nlohmann::json::parse(slurp(d1 / "dominate.json"));
    CHECK(j["schema"] == 1);
    CHECK(j["rows"].size() == 5);
}

TEST_CASE("counterexample series are monotone and plot files are written") {
    ScenarioConfig c;
    c.depths = {4, 6, 8};
    c.depth = 6;
    c.scope = Scope::grid_intervals;
    c.budget.restarts = 1;
    c.budget.iterations = 10;
    c.budget.structured_levels = 1;
    c.budget.polish = 1;
    CounterexampleStats st;
    const Report r = run_counterexample(c, &st);
    REQUIRE(st.rows.size() == 3);
    for (std::size_t i = 1; i < st.rows.size(); ++i) {
        CHECK(st.rows[i].sharp >= st.rows[i - 1].sharp);
        CHECK(st.rows[i].multiplier >= st.rows[i - 1].multiplier);
        CHECK(st.rows[i].multiplier_c0 >= st.rows[i - 1].multiplier_c0);
    }
    CHECK(st.c_grid.size() == 33);
    const fs::path d = scratch("plots");
    const auto paths = emit_plots(r, d.string());
    CHECK(!paths.empty());
    for (const auto& p : paths) CHECK(fs::exists(p));
    CHECK(fs::exists(d / "counterexample_sharp_norm.dat"));
}

TEST_CASE("characteristics sweep flags the window") {
    ScenarioConfig c;
    c.half_width_exp = 0;
    c.depths = {6, 8, 10, 12};
    c.deltas = {-2.0, 0.0, 2.0};
    const Report r = run_characteristics(c);
    int flagged = 0;
    for (const auto& row : r.table.rows)
        if (row[1] == "A_2" && row[2] == "12" && row.back() == "1") ++flagged;
    CHECK(flagged == 2);
}
