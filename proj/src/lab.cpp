#include "bloomlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "bloomlab/operators.hpp"
#include "bloomlab/sparse.hpp"

namespace bloom {

namespace fs = std::filesystem;

// ---- config ----

double ScenarioConfig::half_width() const { return std::ldexp(1.0, half_width_exp); }

std::vector<int> ScenarioConfig::depth_list() const { return depths.empty() ? std::vector<int>{depth} : depths; }

void ScenarioConfig::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("dim must be 1, 2 or 3");
    if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
        throw ConfigError("exponents must satisfy 1 < p, q < inf");
    const int cap = dim == 1 ? 14 : dim == 2 ? 8 : 5;
    for (int n : depth_list())
        if (n < 1 || n > cap)
            throw ConfigError("depth " + std::to_string(n) + " outside 1.." + std::to_string(cap) + " for dim " +
                              std::to_string(dim));
    if (half_width_exp < -20 || half_width_exp > 20) throw ConfigError("half_width_exp out of range");
    if (trials < 1 || subcollections < 0 || members < 1) throw ConfigError("counts must be positive");
    if (budget.restarts < 0 || budget.iterations < 0) throw ConfigError("ascent budget must be non-negative");
}

namespace {

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& v, int line) {
    std::istringstream is(v);
    T x{};
    if constexpr (std::is_same_v<T, std::uint64_t>) {
        try {
            std::size_t used = 0;
            x = std::stoull(v, &used, 0);
            if (trim(v.substr(used)).empty()) return x;
        } catch (const std::exception&) {
        }
        throw ConfigError("expected an unsigned integer, got '" + v + "'", line);
    } else {
        if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("expected a number, got '" + v + "'", line);
    }
    return x;
}

template <class T>
std::vector<T> parse_list(const std::string& v, int line) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(item, line));
    }
    return out;
}

Scope parse_scope(const std::string& v, int line) {
    if (v == "dyadic") return Scope::dyadic;
    if (v == "one-third") return Scope::one_third;
    if (v == "grid-intervals") return Scope::grid_intervals;
    throw ConfigError("scope must be dyadic, one-third or grid-intervals", line);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.message(), static_cast<int>(e.line()));
    }
    // Line of every section.key, for error messages.
    std::map<std::string, int> lines;
    {
        std::istringstream ls(text);
        std::string line, section;
        int n = 0;
        while (std::getline(ls, line)) {
            ++n;
            line = trim(line);
            if (line.empty() || line[0] == ';' || line[0] == '#') continue;
            if (line[0] == '[') {
                section = trim(line.substr(1, line.find(']') - 1));
                lines.emplace(section, n);
                continue;
            }
            const auto eq = line.find('=');
            if (eq != std::string::npos) lines.emplace(section + "." + trim(line.substr(0, eq)), n);
        }
    }

    ScenarioConfig c;
    for (const auto& [section, body] : tree) {
        const int sline = lines.count(section) ? lines[section] : 0;
        if (body.empty() && !body.data().empty()) throw ConfigError("key outside any section: " + section, sline);
        for (const auto& [key, node] : body) {
            const std::string v = trim(node.data());
            const int l = lines.count(section + "." + key) ? lines[section + "." + key] : sline;
            const std::string k = section + "." + key;
            if (k == "scenario.name") c.name = v;
            else if (k == "scenario.seed") c.seed = parse_number<std::uint64_t>(v, l);
            else if (k == "scenario.out") c.out = v;
            else if (k == "grid.dim") c.dim = parse_number<int>(v, l);
            else if (k == "grid.half_width_exp") c.half_width_exp = parse_number<int>(v, l);
            else if (k == "grid.depth") c.depth = parse_number<int>(v, l);
            else if (k == "grid.depths") c.depths = parse_list<int>(v, l);
            else if (k == "grid.scope") c.scope = parse_scope(v, l);
            else if (k == "exponents.p") c.p = parse_number<double>(v, l);
            else if (k == "exponents.q") c.q = parse_number<double>(v, l);
            else if (k == "weights.mu") c.mu = v;
            else if (k == "weights.lambda") c.lambda = v;
            else if (k == "generators.b") c.b = v;
            else if (k == "generators.f") c.f = v;
            else if (k == "sweep.deltas") c.deltas = parse_list<double>(v, l);
            else if (k == "sweep.trials") c.trials = parse_number<int>(v, l);
            else if (k == "sweep.subcollections") c.subcollections = parse_number<int>(v, l);
            else if (k == "sweep.members") c.members = parse_number<int>(v, l);
            else if (k == "ascent.restarts") c.budget.restarts = parse_number<int>(v, l);
            else if (k == "ascent.iterations") c.budget.iterations = parse_number<int>(v, l);
            else if (k == "ascent.structured_levels") c.budget.structured_levels = parse_number<int>(v, l);
            else if (k == "ascent.polish") c.budget.polish = parse_number<int>(v, l);
            else if (k == "ascent.seed") c.budget.seed = parse_number<std::uint64_t>(v, l);
            else throw ConfigError("unknown key '" + k + "'", l);
        }
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        int l = 0;
        for (const char* key : {"grid.depth", "grid.depths", "grid.dim", "exponents.p", "exponents.q"})
            if (lines.count(key)) l = std::max(l, lines[key]);
        throw ConfigError(e.what(), e.line() ? e.line() : l);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

// ---- weight and generator grammar ----

namespace {

struct Call {
    std::string name;
    std::vector<std::string> args;
};

Call parse_call(const std::string& spec) {
    const std::string s = trim(spec);
    Call c;
    const auto open = s.find('(');
    if (open == std::string::npos) {
        c.name = s;
        return c;
    }
    if (s.back() != ')') throw ConfigError("unbalanced parentheses in '" + s + "'");
    c.name = trim(s.substr(0, open));
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    int depth = 0;
    std::string cur;
    for (char ch : inner) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (depth < 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
        if (ch == ',' && depth == 0) {
            c.args.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (depth != 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
    if (!trim(cur).empty() || !c.args.empty()) c.args.push_back(trim(cur));
    return c;
}

double arg_number(const Call& c, std::size_t i) {
    if (i >= c.args.size()) throw ConfigError(c.name + ": missing argument " + std::to_string(i + 1));
    try {
        std::size_t used = 0;
        const double v = std::stod(c.args[i], &used);
        if (used == c.args[i].size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(c.name + ": argument '" + c.args[i] + "' is not a number");
}

void arity(const Call& c, std::size_t n) {
    if (c.args.size() != n)
        throw ConfigError(c.name + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
}

double radius(const Point& x, int d) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += x[j] * x[j];
    return std::sqrt(r2);
}

}  // namespace

Weight parse_weight(const std::string& spec, const TreePtr& tree) {
    const Call c = parse_call(spec);
    if (c.name == "lebesgue") {
        arity(c, 0);
        return Weight::lebesgue(tree);
    }
    if (c.name == "power") {
        arity(c, 1);
        return Weight::power(tree, arg_number(c, 0));
    }
    if (c.name == "piecewise") {
        arity(c, 1);
        std::ifstream is(c.args[0]);
        if (!is) throw ConfigError("cannot read density file " + c.args[0]);
        std::vector<double> vals;
        std::string line;
        int n = 0;
        while (std::getline(is, line)) {
            ++n;
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const double v = parse_number<double>(line.substr(0, line.find(',')), n);
            if (!(v > 0.0)) throw ConfigError("densities must be positive", n);
            vals.push_back(v);
        }
        const std::uint64_t cells = tree->cell_count();
        if (vals.empty() || cells % vals.size() != 0)
            throw ConfigError("density count must divide the number of cells (" + std::to_string(cells) + ")");
        std::vector<double> dens(cells);
        const std::uint64_t block = cells / vals.size();
        for (std::uint64_t i = 0; i < cells; ++i) dens[i] = vals[i / block];
        return Weight::piecewise(tree, std::move(dens));
    }
    if (c.name == "product") {
        arity(c, 2);
        return parse_weight(c.args[0], tree) * parse_weight(c.args[1], tree);
    }
    if (c.name == "dual") {
        arity(c, 2);
        const double p = arg_number(c, 1);
        if (!(p > 1.0)) throw ConfigError("dual weight needs p > 1");
        return dual_weight(parse_weight(c.args[0], tree), p);
    }
    if (c.name == "pow") {
        arity(c, 2);
        return parse_weight(c.args[0], tree).pow(arg_number(c, 1));
    }
    throw ConfigError("unknown weight '" + c.name + "'");
}

GridFunction parse_generator(const std::string& spec, const TreePtr& tree, std::uint64_t seed) {
    const Call c = parse_call(spec);
    const auto& t = *tree;
    const int d = t.dim();
    GridFunction g(tree);
    if (c.name == "constant") {
        arity(c, 1);
        return GridFunction(tree, arg_number(c, 0));
    }
    if (c.name == "indicator") {
        arity(c, 2);
        Box b;
        b.dim = d;
        for (int j = 0; j < d; ++j) b.lo[j] = arg_number(c, 0), b.hi[j] = arg_number(c, 1);
        return indicator(tree, b);
    }
    if (c.name == "ball") {
        arity(c, 1);
        const double r = arg_number(c, 0);
        for (std::uint64_t i = 0; i < g.size(); ++i) g[i] = radius(t.midpoint(i), d) < r ? 1.0 : 0.0;
        return g;
    }
    if (c.name == "half-split") {
        arity(c, 2);
        const Cube q{static_cast<int>(arg_number(c, 0)), static_cast<std::uint64_t>(arg_number(c, 1))};
        if (!t.valid(q) || t.is_finest(q)) throw ConfigError("half-split cube is not a splittable tree cube");
        return half_split(tree, q);
    }
    if (c.name == "power-bump") {
        arity(c, 2);
        const double gam = arg_number(c, 0), r = arg_number(c, 1);
        for (std::uint64_t i = 0; i < g.size(); ++i) {
            const double x = radius(t.midpoint(i), d);
            g[i] = x < r ? std::pow(x, gam) : 0.0;
        }
        return g;
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    if (c.name == "random") {
        arity(c, 0);
        for (std::uint64_t i = 0; i < g.size(); ++i) g[i] = normal(gen);
        return g;
    }
    if (c.name == "random-haar") {
        arity(c, 1);
        const int terms = static_cast<int>(arg_number(c, 0));
        if (terms < 1) throw ConfigError("random-haar needs at least one term");
        for (int n = 0; n < terms; ++n) {
            std::uniform_int_distribution<int> lev(0, t.depth() - 1);
            const int k = lev(gen);
            std::uniform_int_distribution<std::uint64_t> idx(0, t.cubes_at(k) - 1);
            const Cube q{k, idx(gen)};
            g += half_split(tree, q) * normal(gen);
        }
        return g;
    }
    throw ConfigError("unknown generator '" + c.name + "'");
}

// ---- reports ----

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string Table::csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            const std::string& v = cells[i];
            if (v.find_first_of(",\"\n") == std::string::npos) {
                out += v;
                continue;
            }
            out += '"';
            for (char ch : v) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            out += '"';
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::string Report::json() const {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = kind;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : summary) s[k] = nlohmann::ordered_json::parse(v);
    j["summary"] = s;
    j["violations"] = violations;
    j["columns"] = table.header;
    j["rows"] = table.rows;
    return j.dump(2) + "\n";
}

namespace {

std::string jbool(bool b) { return b ? "true" : "false"; }
std::string jstr(const std::string& s) { return nlohmann::json(s).dump(); }
std::string jnum(double v) { return std::isfinite(v) ? fmt(v) : "null"; }

std::uint64_t mix(std::uint64_t seed, std::uint64_t n) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

}  // namespace

void write_report(const Report& r, const std::string& dir) {
    fs::create_directories(dir);
    write_text(fs::path(dir) / (r.kind + ".csv"), r.table.csv());
    write_text(fs::path(dir) / (r.kind + ".json"), r.json());
}

std::vector<std::string> emit_plots(const Report& r, const std::string& dir) {
    fs::create_directories(dir);
    std::vector<std::string> paths;
    std::vector<std::size_t> numeric;
    for (std::size_t c = 1; c < r.table.header.size(); ++c) {
        bool ok = !r.table.rows.empty();
        for (const auto& row : r.table.rows) {
            char* end = nullptr;
            std::strtod(row[c].c_str(), &end);
            ok = ok && !row[c].empty() && *end == '\0';
        }
        if (ok) numeric.push_back(c);
    }
    const std::string x = r.table.header.empty() ? "x" : r.table.header[0];
    if (numeric.empty()) {
        const fs::path p = fs::path(dir) / (r.kind + ".dat");
        write_text(p, "# " + x + " value\n");
        paths.push_back(p.string());
    }
    std::string script = "set terminal pngcairo size 900,600\nset output '" + r.kind + ".png'\nset logscale y\n";
    script += "set xlabel '" + x + "'\nplot";
    for (std::size_t n = 0; n < numeric.size(); ++n) {
        const std::string col = r.table.header[numeric[n]];
        const fs::path p = fs::path(dir) / (r.kind + "_" + col + ".dat");
        std::string text = "# " + x + " " + col + "\n";
        for (const auto& row : r.table.rows) text += row[0] + " " + row[numeric[n]] + "\n";
        write_text(p, text);
        paths.push_back(p.string());
        script += std::string(n ? "," : "") + " '" + p.filename().string() + "' using 1:2 with linespoints title '" +
                  col + "'";
    }
    script += "\n";
    const fs::path gp = fs::path(dir) / (r.kind + ".gp");
    write_text(gp, numeric.empty() ? "# no numeric series\n" : script);
    paths.push_back(gp.string());
    return paths;
}

// ---- characteristics ----

Report run_characteristics(const ScenarioConfig& cfg) {
    cfg.validate();
    Report rep;
    rep.kind = "char";
    rep.table.header = {"weight", "characteristic", "depth", "value", "divergent"};
    std::vector<std::string> specs;
    for (double d : cfg.deltas) specs.push_back("power(" + fmt(d) + ")");
    if (specs.empty()) {
        specs.push_back(cfg.mu);
        if (cfg.lambda != cfg.mu) specs.push_back(cfg.lambda);
    }
    const std::vector<int> depths = cfg.depth_list();
    const std::string ap = "A_" + fmt(cfg.p);
    const std::vector<std::string> names = {ap, ap + "-one-third", "A_inf"};
    int divergent = 0;
    for (const auto& spec : specs) {
        std::vector<std::vector<double>> series(names.size());
        for (int n : depths) {
            const TreePtr tree = make_tree(cfg.dim, n, cfg.half_width());
            const Weight w = parse_weight(spec, tree);
            series[0].push_back(ap_characteristic(w, cfg.p, Scope::dyadic));
            series[1].push_back(ap_characteristic(w, cfg.p, Scope::one_third));
            series[2].push_back(fujii_wilson_ainfty(w, Weight::lebesgue(tree)));
        }
        for (std::size_t c = 0; c < names.size(); ++c) {
            const bool known = series[c].size() >= 4;
            const bool div = known && is_divergent(series[c], 1.5, 3);
            divergent += div;
            for (std::size_t k = 0; k < depths.size(); ++k)
                rep.table.rows.push_back({spec, names[c],
                                          std::to_string(depths[k]), fmt(series[c][k]),
                                          known ? (div ? "1" : "0") : "n/a"});
        }
    }
    rep.summary = {{"scenario", jstr(cfg.name)}, {"p", jnum(cfg.p)}, {"weights", std::to_string(specs.size())},
                   {"divergent_series", std::to_string(divergent)}};
    return rep;
}

// ---- domination ----

Report run_domination(const ScenarioConfig& cfg, DominationStats* stats) {
    cfg.validate();
    Report rep;
    rep.kind = "dominate";
    rep.table.header = {"trial", "cubes", "sparse_ratio", "sparse_ok", "worst_slack", "domination_ok",
                        "max_stop_ratio"};
    const TreePtr tree = make_tree(cfg.dim, cfg.depth, cfg.half_width());
    const auto& t = *tree;
    const double gamma = std::ldexp(1.0, -(t.dim() + 2));
    const double constant = domination_constant(t.dim());
    DominationStats st;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t s = mix(cfg.seed, static_cast<std::uint64_t>(trial));
        const GridFunction b = parse_generator(cfg.b, tree, mix(s, 1));
        const GridFunction f = parse_generator(cfg.f, tree, mix(s, 2));
        const DominationResult res = paraproduct_sparse_dominate(b, f, t.root());
        const SparseCheck sc = verify_sparse(res.family, gamma);
        std::mt19937_64 gen(mix(s, 3));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double slack = -1e300;
        bool dom_ok = true;
        const double dens[] = {0.1, 0.5, 0.9};
        for (int n = 0; n < cfg.subcollections; ++n) {
            CubeSet fam(t);
            for (const Cube& q : t.all_cubes())
                if (!t.is_finest(q) && unif(gen) < dens[n % 3]) fam.insert(q);
            const DominationCheck dc = domination_check(paraproduct(b, f, fam), res.family, b, f, constant);
            slack = std::max(slack, dc.max_violation);
            dom_ok = dom_ok && dc.ok;
        }
        ++st.trials;
        if (!sc.ok || !dom_ok) ++st.failures;
        st.worst_sparse_ratio = std::min(st.worst_sparse_ratio, sc.worst_ratio);
        st.worst_slack = std::max(st.worst_slack, slack);
        st.max_stop_ratio = std::max(st.max_stop_ratio, res.max_stop_ratio);
        st.stop_violations += res.stop_violations;
        if (!sc.ok) rep.violations.push_back("trial " + std::to_string(trial) + ": family is not sparse");
        if (!dom_ok) rep.violations.push_back("trial " + std::to_string(trial) + ": pointwise domination fails");
        if (res.stop_violations)
            rep.violations.push_back("trial " + std::to_string(trial) + ": stopping mass exceeds half the cube");
        rep.table.rows.push_back({std::to_string(trial), std::to_string(res.family.cubes.size()),
                                  fmt(sc.worst_ratio), sc.ok ? "1" : "0", fmt(slack), dom_ok ? "1" : "0",
                                  fmt(res.max_stop_ratio)});
    }
    rep.summary = {{"scenario", jstr(cfg.name)},
                   {"trials", std::to_string(st.trials)},
                   {"failures", std::to_string(st.failures)},
                   {"gamma", jnum(gamma)},
                   {"constant", jnum(constant)},
                   {"worst_sparse_ratio", jnum(st.worst_sparse_ratio)},
                   {"worst_slack", jnum(st.worst_slack)},
                   {"max_stop_ratio", jnum(st.max_stop_ratio)},
                   {"stop_violations", std::to_string(st.stop_violations)}};
    if (stats) *stats = st;
    return rep;
}

// ---- comparability ----

std::vector<std::pair<std::string, GridFunction>> comparability_family(const TreePtr& tree, int members,
                                                                       std::uint64_t seed) {
    const auto& t = *tree;
    std::vector<std::pair<std::string, GridFunction>> out;
    std::mt19937_64 gen(seed);
    const int top = std::max(1, std::min(4, t.depth() - 1));
    for (int m = 0; m < members; ++m) {
        if (m % 2 == 0) {
            const int k = 1 + (m / 2) % top;
            std::uniform_int_distribution<std::uint64_t> idx(0, t.cubes_at(k) - 1);
            const Cube q{k, idx(gen)};
            const double scale = std::ldexp(1.0, (m / 2) % 3);
            out.emplace_back("half-split(" + std::to_string(k) + "," + std::to_string(q.index) + ")x" + fmt(scale),
                             half_split(tree, q) * scale);
        } else {
            const int terms = 2 + m % 7;
            const std::string spec = "random-haar(" + std::to_string(terms) + ")";
            out.emplace_back(spec + "#" + std::to_string(m), parse_generator(spec, tree, gen()));
        }
    }
    return out;
}

Report run_bloom_comparability(const ScenarioConfig& cfg, ComparabilityStats* stats) {
    cfg.validate();
    Report rep;
    rep.kind = "bloom";
    const TreePtr tree = make_tree(cfg.dim, cfg.depth, cfg.half_width());
    const ExponentConfig ec(cfg.p, cfg.q, cfg.dim);
    const BloomTriple tr = bloom_triple(parse_weight(cfg.mu, tree), parse_weight(cfg.lambda, tree), ec);
    const bool upper = ec.has_r();
    const bool line = cfg.dim == 1;
    rep.table.header = {"member", upper ? "sharp_norm" : "bmo_norm", "paraproduct", "ratio_paraproduct"};
    if (line) rep.table.header.insert(rep.table.header.end(), {"commutator", "ratio_commutator"});

    ComparabilityStats st;
    st.pi_min = st.comm_min = 1e300;
    for (const auto& [name, b] : comparability_family(tree, cfg.members, cfg.seed)) {
        ComparabilityRow row;
        row.member = name;
        row.phi = upper ? sharp_maximal_r_norm(b, tr.nu, ec.r(), cfg.scope).value
                        : bmo_alpha_norm(b, tr.nu, ec.alpha(), cfg.scope == Scope::one_third ? Scope::one_third
                                                                                             : Scope::dyadic);
        row.paraproduct = empirical_operator_norm(paraproduct_operator(b), tr.mu, tr.lambda, ec.p, ec.q,
                                                  cfg.budget).value;
        if (line)
            row.commutator = empirical_operator_norm(commutator_operator(b), tr.mu, tr.lambda, ec.p, ec.q,
                                                     cfg.budget).value;
        std::vector<std::string> cells{name, fmt(row.phi), fmt(row.paraproduct)};
        if (row.phi > 0.0) {
            const double rp = row.paraproduct / row.phi, rc = row.commutator / row.phi;
            st.pi_min = std::min(st.pi_min, rp), st.pi_max = std::max(st.pi_max, rp);
            if (line) st.comm_min = std::min(st.comm_min, rc), st.comm_max = std::max(st.comm_max, rc);
            cells.push_back(fmt(rp));
            if (line) cells.insert(cells.end(), {fmt(row.commutator), fmt(rc)});
        } else {
            cells.push_back("excluded");
            if (line) cells.insert(cells.end(), {fmt(row.commutator), "excluded"});
        }
        rep.table.rows.push_back(cells);
        st.rows.push_back(row);
    }
    const Weight leb = Weight::lebesgue(tree);
    const double joint = upper_joint_characteristic(tr);
    const double a_mu = fujii_wilson_ainfty(tr.mu_dual, leb), a_la = fujii_wilson_ainfty(tr.lambda, leb),
                 a_nu = fujii_wilson_ainfty(tr.nu, leb);
    rep.summary = {{"scenario", jstr(cfg.name)},
                   {"regime", jstr(upper ? "q<p" : "p<=q")},
                   {"ratio_paraproduct_min", jnum(st.pi_min)},
                   {"ratio_paraproduct_max", jnum(st.pi_max)},
                   {"upper_joint", jnum(joint)},
                   {"lower_joint", jnum(lower_joint_characteristic(tr))},
                   {"ainfty_mu_dual", jnum(a_mu)},
                   {"ainfty_lambda", jnum(a_la)},
                   {"ainfty_nu", jnum(a_nu)}};
    if (upper)
        rep.summary.emplace_back("upper_bound_factor", jnum(joint * std::pow(a_mu, 1.0 / ec.p) *
                                                            std::pow(a_la, 1.0 / ec.q_dual()) *
                                                            std::pow(a_nu, 1.0 / ec.r())));
    if (line) {
        rep.summary.emplace_back("ratio_commutator_min", jnum(st.comm_min));
        rep.summary.emplace_back("ratio_commutator_max", jnum(st.comm_max));
    }
    if (stats) *stats = st;
    return rep;
}

// ---- counterexample ----

double tail_slope(const GridFunction& sharp, const Weight& nu, double r, double lo, double hi) {
    const auto& t = sharp.tree();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::uint64_t i = 0; i < sharp.size(); ++i) {
        const double x = std::fabs(t.midpoint(i)[0]);
        if (x < lo || x > hi || !(sharp[i] > 0.0)) continue;
        const double lx = std::log(x);
        const double ly = std::log(std::pow(sharp[i], r) * nu.mass(i) / t.cell_volume());
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

namespace {

// value(2N) >= 1.5 value(N) for every depth pair (N, 2N) in the sweep.
bool doubling_divergent(const std::vector<int>& depths, const std::vector<double>& v) {
    int pairs = 0;
    for (std::size_t a = 0; a < depths.size(); ++a)
        for (std::size_t b = 0; b < depths.size(); ++b)
            if (depths[b] == 2 * depths[a]) {
                ++pairs;
                if (!(v[b] >= 1.5 * v[a])) return false;
            }
    return pairs > 0;
}

CounterexampleRow counterexample_row(int depth, double h, const ScenarioConfig& cfg, bool operators,
                                     const std::vector<double>& c_grid, std::vector<double>* c_values) {
    const TreePtr tree = make_tree(1, depth, h);
    const ExponentConfig ec(4.0, 2.0, 1);
    const BloomTriple tr = bloom_triple(Weight::power(tree, 1.0), Weight::lebesgue(tree), ec);
    const double r = ec.r();
    const GridFunction b = parse_generator("ball(1)", tree, 0);
    CounterexampleRow row;
    row.depth = depth;
    row.half_width = h;
    const NormReport sharp = sharp_maximal_r_norm(b, tr.nu, r, cfg.scope);
    row.sharp = sharp.value;
    row.tail_slope = h >= 4.0 ? tail_slope(std::get<GridFunction>(sharp.certificate), tr.nu, r, 2.0, 4.0) : 0.0;
    const NormReport mult = multiplier_norm(b, tr);
    row.multiplier = mult.value;
    row.argmin_c = std::get<double>(mult.certificate);
    const Weight w = tr.nu.pow(1.0 - r);
    row.multiplier_c0 = std::pow(multiplier_objective(b, w, r, 0.0), 1.0 / r);
    if (c_values)
        for (double c : c_grid) c_values->push_back(std::pow(multiplier_objective(b, w, r, c), 1.0 / r));
    if (operators) {
        row.paraproduct = empirical_operator_norm(paraproduct_operator(b), tr.mu, tr.lambda, 4.0, 2.0,
                                                  cfg.budget).value;
        row.commutator = empirical_operator_norm(commutator_operator(b), tr.mu, tr.lambda, 4.0, 2.0,
                                                 cfg.budget).value;
    }
    return row;
}

}  // namespace

Report run_counterexample(const ScenarioConfig& cfg, CounterexampleStats* stats) {
    cfg.validate();
    if (cfg.dim != 1) throw ConfigError("the counterexample lives in dimension 1");
    Report rep;
    rep.kind = "counterexample";
    rep.table.header = {"depth", "half_width", "sharp_norm", "multiplier_inf", "argmin_c", "multiplier_c0",
                        "paraproduct", "commutator", "tail_slope"};
    CounterexampleStats st;
    std::vector<int> depths = cfg.depth_list();
    std::sort(depths.begin(), depths.end());
    for (int k = 0; k < 33; ++k) st.c_grid.push_back(-1.0 + 3.0 * k / 32.0);
    std::vector<std::vector<double>> cvals;
    auto add = [&](const CounterexampleRow& row) {
        rep.table.rows.push_back({std::to_string(row.depth), fmt(row.half_width), fmt(row.sharp),
                                  fmt(row.multiplier), fmt(row.argmin_c), fmt(row.multiplier_c0),
                                  fmt(row.paraproduct), fmt(row.commutator), fmt(row.tail_slope)});
    };
    for (int n : depths) {
        cvals.emplace_back();
        st.rows.push_back(counterexample_row(n, cfg.half_width(), cfg, true, st.c_grid, &cvals.back()));
        add(st.rows.back());
    }
    // Window sweep at fixed cell size.
    for (int dk = -1; dk <= 1; ++dk) {
        const int n = cfg.depth + dk;
        if (dk == 0 || n < 1 || n > 14) continue;
        st.window_rows.push_back(
            counterexample_row(n, std::ldexp(1.0, cfg.half_width_exp + dk), cfg, false, st.c_grid, nullptr));
        add(st.window_rows.back());
    }

    std::vector<double> sharp, mult, pi, comm;
    for (const auto& r : st.rows) {
        sharp.push_back(r.sharp);
        mult.push_back(r.multiplier);
        if (r.depth >= 8) pi.push_back(r.paraproduct), comm.push_back(r.commutator);
    }
    st.sharp_converges = sharp.size() >= 2 && std::fabs(sharp.back() / sharp[sharp.size() - 2] - 1.0) < 0.05;
    st.multiplier_diverges = doubling_divergent(depths, mult);
    for (std::size_t c = 0; c < st.c_grid.size(); ++c) {
        std::vector<double> seq;
        for (const auto& v : cvals) seq.push_back(v[c]);
        st.c_divergent.push_back(doubling_divergent(depths, seq));
    }
    auto spread = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        const auto [a, b] = std::minmax_element(v.begin(), v.end());
        return *a > 0.0 ? *b / *a - 1.0 : 1e300;
    };
    st.operators_bounded = !pi.empty() && spread(pi) < 0.2 && spread(comm) < 0.2;
    const bool every_c = std::all_of(st.c_divergent.begin(), st.c_divergent.end(), [](bool b) { return b; });
    rep.summary = {{"scenario", jstr(cfg.name)},
                   {"sharp_converges", jbool(st.sharp_converges)},
                   {"multiplier_diverges", jbool(st.multiplier_diverges)},
                   {"multiplier_diverges_every_c", jbool(every_c)},
                   {"operators_bounded", jbool(st.operators_bounded)},
                   {"paraproduct_spread", jnum(spread(pi))},
                   {"commutator_spread", jnum(spread(comm))}};
    if (!st.sharp_converges) rep.violations.push_back("sharp-maximal norm does not settle");
    if (!st.multiplier_diverges) rep.violations.push_back("multiplier norm does not diverge by the doubling rule");
    if (!every_c) rep.violations.push_back("some c on the grid escapes the divergence verdict");
    if (!st.operators_bounded) rep.violations.push_back("operator norms drift across depths");
    if (stats) *stats = st;
    return rep;
}

// ---- norms ----

Report run_norms(const ScenarioConfig& cfg) {
    cfg.validate();
    Report rep;
    rep.kind = "norms";
    rep.table.header = {"functional", "value", "method", "certificate"};
    const TreePtr tree = make_tree(cfg.dim, cfg.depth, cfg.half_width());
    const ExponentConfig ec(cfg.p, cfg.q, cfg.dim);
    const BloomTriple tr = bloom_triple(parse_weight(cfg.mu, tree), parse_weight(cfg.lambda, tree), ec);
    const GridFunction b = parse_generator(cfg.b, tree, mix(cfg.seed, 1));
    const GridFunction f = parse_generator(cfg.f, tree, mix(cfg.seed, 2));
    fs::create_directories(cfg.out);

    auto emit = [&](const std::string& name, const NormReport& r) {
        std::string ref;
        if (const auto* g = std::get_if<GridFunction>(&r.certificate)) {
            ref = name + ".csv";
            write_grid_csv(*g, (fs::path(cfg.out) / ref).string());
        } else if (const auto* s = std::get_if<SparseFamily>(&r.certificate)) {
            ref = name + ".sparse";
            std::ofstream os(fs::path(cfg.out) / ref);
            write_sparse_family(os, *s);
        } else if (const auto* c = std::get_if<double>(&r.certificate)) {
            ref = "c=" + fmt(*c);
        }
        write_text(fs::path(cfg.out) / (name + ".json"), report_json(r, ref) + "\n");
        rep.table.rows.push_back({name, fmt(r.value), method_name(r.method), ref});
    };
    auto scalar = [&](const std::string& name, double v) {
        rep.table.rows.push_back({name, fmt(v), method_name(Method::exact_sum), ""});
    };
    scalar("lp_f_mu", lp_norm(f, tr.mu, ec.p));
    scalar("lp_b_nu", lp_norm(b, tr.nu, 2.0));
    scalar("bmo_alpha_b", bmo_alpha_norm(b, tr.nu, ec.alpha()));
    if (ec.has_r()) {
        emit("sharp_maximal", sharp_maximal_r_norm(b, tr.nu, ec.r(), cfg.scope));
        emit("multiplier", multiplier_norm(b, tr));
        emit("discretized_sharp_sup", discretized_sharp_sup(b, tr.nu, ec.r(), 0.5));
    } else {
        scalar("q_ge_p_testing_paraproduct", q_ge_p_testing(paraproduct_operator(b), tr));
    }
    emit("paraproduct_emp", empirical_operator_norm(paraproduct_operator(b), tr.mu, tr.lambda, ec.p, ec.q, cfg.budget));
    if (cfg.dim == 1)
        emit("commutator_emp", empirical_operator_norm(commutator_operator(b), tr.mu, tr.lambda, ec.p, ec.q, cfg.budget));
    scalar("upper_joint", upper_joint_characteristic(tr));
    rep.summary = {{"scenario", jstr(cfg.name)}, {"functionals", std::to_string(rep.table.rows.size())}};
    return rep;
}

}  // namespace bloom
