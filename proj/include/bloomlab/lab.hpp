#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bloomlab/dyadic.hpp"
#include "bloomlab/norms.hpp"
#include "bloomlab/weights.hpp"

namespace bloom {

// Exit codes of the lab runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitConfig = 3;

struct ScenarioConfig {
    std::string name = "scenario";
    int dim = 1;
    int half_width_exp = 2;  // root [-2^K, 2^K)^d
    int depth = 8;
    double p = 2.0;
    double q = 2.0;
    std::string mu = "lebesgue";
    std::string lambda = "lebesgue";
    std::string b = "half-split(1,0)";
    std::string f = "random";
    std::uint64_t seed = 0x5EED;
    std::string out = "out";
    Scope scope = Scope::dyadic;

    std::vector<int> depths;     // sweeps; empty means {depth}
    std::vector<double> deltas;  // power exponents for the characteristics sweep
    int trials = 200;
    int subcollections = 50;
    int members = 20;
    AscentBudget budget;

    double half_width() const;
    std::vector<int> depth_list() const;
    // Range checks and the size guard rails; throws ConfigError.
    void validate() const;
};

// Flat INI file with sections; unknown keys and bad values are ConfigErrors
// carrying the line number.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

// Weight grammar: lebesgue | power(g) | piecewise(csv-path) | product(w1,w2)
// | dual(w,p) | pow(w,s). A piecewise CSV lists one density per line; the
// count must divide the number of cells (each value covers a block).
Weight parse_weight(const std::string& spec, const TreePtr& tree);

// Generators: constant(c) | indicator(lo,hi) | ball(r) | half-split(level,index)
// | random-haar(terms) | power-bump(g,r) | random. `seed` feeds the random ones.
GridFunction parse_generator(const std::string& spec, const TreePtr& tree, std::uint64_t seed);

// Plain CSV table: header plus rows of already formatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;
};

std::string fmt(double v);

struct Report {
    std::string kind;
    Table table;
    std::vector<std::pair<std::string, std::string>> summary;  // key, JSON literal
    std::vector<std::string> violations;
    int exit_code() const { return violations.empty() ? kExitOk : kExitViolation; }
    std::string json() const;
};

// Characteristic sweep: columns weight,characteristic,depth,value,divergent.
Report run_characteristics(const ScenarioConfig& cfg);

struct DominationStats {
    int trials = 0;
    int failures = 0;            // sparseness or domination failures
    double worst_sparse_ratio = 1.0;
    double worst_slack = -1e300;  // max over cells of |lhs| - C rhs
    double max_stop_ratio = 0.0;
    int stop_violations = 0;
};
// Columns trial,cubes,sparse_ratio,sparse_ok,worst_slack,domination_ok,max_stop_ratio.
Report run_domination(const ScenarioConfig& cfg, DominationStats* stats = nullptr);

struct ComparabilityRow {
    std::string member;
    double phi = 0.0;          // ||M^#_nu b||_{L^r(nu)} (q < p) or ||b||_{BMO^alpha_nu}
    double paraproduct = 0.0;  // ||Pi_b||_emp
    double commutator = 0.0;   // ||[b,H]||_emp, d = 1
};
struct ComparabilityStats {
    std::vector<ComparabilityRow> rows;
    double pi_min = 0, pi_max = 0, comm_min = 0, comm_max = 0;
};
// b-family of translated/scaled half-splits and random Haar sums.
std::vector<std::pair<std::string, GridFunction>> comparability_family(const TreePtr& tree, int members,
                                                                       std::uint64_t seed);
Report run_bloom_comparability(const ScenarioConfig& cfg, ComparabilityStats* stats = nullptr);

struct CounterexampleRow {
    int depth = 0;
    double half_width = 0.0;
    double sharp = 0.0;         // ||M^#_nu b||_{L^r(nu)}
    double multiplier = 0.0;    // inf over c
    double argmin_c = 0.0;
    double multiplier_c0 = 0.0; // at c = 0
    double paraproduct = 0.0;
    double commutator = 0.0;
    double tail_slope = 0.0;    // log-log slope of (M^# b)^r nu on 2 <= |x| <= 4
};
struct CounterexampleStats {
    std::vector<CounterexampleRow> rows;        // the depth sweep at the configured window
    std::vector<CounterexampleRow> window_rows; // window sweep at the configured depth
    std::vector<double> c_grid;
    std::vector<bool> c_divergent;  // per c: the c-value sequence over the depth sweep diverges
    bool sharp_converges = false;
    bool multiplier_diverges = false;
    bool operators_bounded = false;
};
// Fixed instance: d = 1, p = 4, q = 2, mu = |x|, lambda = 1 (nu = |x|^{1/3}), b = 1_{B(0,1)}.
Report run_counterexample(const ScenarioConfig& cfg, CounterexampleStats* stats = nullptr);

// All norm functionals for the configured b, f and weights; certificates
// are written under cfg.out.
Report run_norms(const ScenarioConfig& cfg);

// Tail slope of (M^# b)^r nu against |x| over cells with lo <= |x| <= hi.
double tail_slope(const GridFunction& sharp, const Weight& nu, double r, double lo, double hi);

// Writes <dir>/<kind>.csv and <dir>/<kind>.json.
void write_report(const Report& r, const std::string& dir);
// Two-column .dat files (one per numeric column against the first) and a
// gnuplot script; returns the written paths.
std::vector<std::string> emit_plots(const Report& r, const std::string& dir);

}  // namespace bloom
