// Python module _bloomlab: trees, grid functions, weights, operators and the
// norm functionals. Grid values cross the boundary as lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bloomlab/lab.hpp"
#include "bloomlab/norms.hpp"
#include "bloomlab/operators.hpp"
#include "bloomlab/sparse.hpp"
#include "bloomlab/weights.hpp"

namespace py = pybind11;
using namespace bloom;

namespace {

Scope to_scope(const std::string& s) {
    if (s == "dyadic") return Scope::dyadic;
    if (s == "one-third") return Scope::one_third;
    if (s == "grid-intervals") return Scope::grid_intervals;
    throw DomainError("scope must be dyadic, one-third or grid-intervals");
}

LinearOperator to_operator(const std::string& name, const GridFunction& b) {
    if (name == "paraproduct") return paraproduct_operator(b);
    if (name == "commutator") return commutator_operator(b);
    if (name == "multiplication") return multiplication_operator(b);
    if (name == "identity") return identity_operator();
    throw DomainError("operator must be paraproduct, commutator, multiplication or identity");
}

py::dict summary_dict(const Report& r) {
    py::dict d;
    py::module_ json = py::module_::import("json");
    for (const auto& [k, v] : r.summary) d[py::str(k)] = json.attr("loads")(v);
    return d;
}

}  // namespace

PYBIND11_MODULE(_bloomlab, m) {
    m.doc() = "Two-weight Bloom experiments on dyadic grids";

    // Translators run newest first, so the base class goes in first.
    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<DyadicTree, std::shared_ptr<DyadicTree>>(m, "Tree")
        .def(py::init([](int dim, int depth, double half_width) {
                 return std::const_pointer_cast<DyadicTree>(make_tree(dim, depth, half_width));
             }),
             py::arg("dim"), py::arg("depth"), py::arg("half_width") = 1.0)
        .def_property_readonly("dim", &DyadicTree::dim)
        .def_property_readonly("depth", &DyadicTree::depth)
        .def_property_readonly("cell_count", &DyadicTree::cell_count)
        .def_property_readonly("cell_volume", &DyadicTree::cell_volume)
        .def("midpoints", [](const DyadicTree& t) {
            std::vector<std::vector<double>> out;
            for (std::uint64_t c = 0; c < t.cell_count(); ++c) {
                const Point x = t.midpoint(c);
                out.emplace_back(x.begin(), x.begin() + t.dim());
            }
            return out;
        });

    py::class_<GridFunction>(m, "GridFunction")
        .def(py::init([](std::shared_ptr<DyadicTree> t, std::vector<double> values) {
                 return GridFunction(TreePtr(t), std::move(values));
             }),
             py::arg("tree"), py::arg("values"))
        .def_static("generate",
                    [](std::shared_ptr<DyadicTree> t, const std::string& spec, std::uint64_t seed) {
                        return parse_generator(spec, TreePtr(t), seed);
                    },
                    py::arg("tree"), py::arg("spec"), py::arg("seed") = 0x5EED)
        .def_property_readonly("values", [](const GridFunction& f) { return f.values(); })
        .def("integral", py::overload_cast<>(&GridFunction::integral, py::const_))
        .def("__len__", &GridFunction::size);

    py::class_<Weight>(m, "Weight")
        .def_static("lebesgue", [](std::shared_ptr<DyadicTree> t) { return Weight::lebesgue(TreePtr(t)); })
        .def_static("power", [](std::shared_ptr<DyadicTree> t, double g) { return Weight::power(TreePtr(t), g); })
        .def_static("piecewise",
                    [](std::shared_ptr<DyadicTree> t, std::vector<double> d) {
                        return Weight::piecewise(TreePtr(t), std::move(d));
                    })
        .def_static("parse",
                    [](std::shared_ptr<DyadicTree> t, const std::string& spec) { return parse_weight(spec, TreePtr(t)); })
        .def("pow", &Weight::pow)
        .def_property_readonly("gamma", &Weight::gamma)
        .def_property_readonly("masses", [](const Weight& w) { return w.masses(); })
        .def("total", [](const Weight& w) { return w.mass(w.tree().root()); });

    m.def("ap_characteristic",
          [](const Weight& w, double p, const std::string& scope) { return ap_characteristic(w, p, to_scope(scope)); },
          py::arg("w"), py::arg("p"), py::arg("scope") = "dyadic");
    m.def("fujii_wilson_ainfty", &fujii_wilson_ainfty, py::arg("w"), py::arg("mu"));
    m.def("dual_weight", &dual_weight);
    m.def("joint_characteristics", [](const Weight& mu, const Weight& lambda, double p, double q) {
        const BloomTriple t = bloom_triple(mu, lambda, ExponentConfig(p, q, mu.tree().dim()));
        return py::make_tuple(upper_joint_characteristic(t), lower_joint_characteristic(t), t.nu);
    });

    m.def("maximal",
          [](const GridFunction& f, const Weight& mu, const std::string& s) { return maximal(f, mu, to_scope(s)); },
          py::arg("f"), py::arg("mu"), py::arg("scope") = "dyadic");
    m.def("sharp_maximal",
          [](const GridFunction& b, const Weight& nu, const std::string& s) { return sharp_maximal(b, nu, to_scope(s)); },
          py::arg("b"), py::arg("nu"), py::arg("scope") = "dyadic");
    m.def("paraproduct", py::overload_cast<const GridFunction&, const GridFunction&>(&paraproduct));
    m.def("paraproduct_adjoint", &paraproduct_adjoint);
    m.def("hilbert_transform", &hilbert_transform);
    m.def("commutator", &commutator);

    m.def("lp_norm", &lp_norm);
    m.def("sharp_maximal_r_norm",
          [](const GridFunction& b, const Weight& nu, double r, const std::string& s) {
              return sharp_maximal_r_norm(b, nu, r, to_scope(s)).value;
          },
          py::arg("b"), py::arg("nu"), py::arg("r"), py::arg("scope") = "dyadic");
    m.def("multiplier_norm",
          [](const GridFunction& b, const Weight& nu, double r) {
              const NormReport n = multiplier_norm(b, nu, r);
              return py::make_tuple(n.value, std::get<double>(n.certificate));
          },
          "returns (value, minimizing c)");
    m.def("discretized_sharp_sup",
          [](const GridFunction& b, const Weight& nu, double r, double gamma) {
              const NormReport n = discretized_sharp_sup(b, nu, r, gamma);
              std::vector<std::pair<int, std::uint64_t>> cubes;
              for (const Cube& q : std::get<SparseFamily>(n.certificate).cubes) cubes.emplace_back(q.level, q.index);
              return py::make_tuple(n.value, cubes);
          },
          "returns (value, [(level, index), ...])");
    m.def("empirical_operator_norm",
          [](const std::string& op, const GridFunction& b, const Weight& mu, const Weight& lambda, double p, double q,
             int restarts, int iterations, std::uint64_t seed) {
              AscentBudget budget;
              budget.restarts = restarts;
              budget.iterations = iterations;
              budget.seed = seed;
              return empirical_operator_norm(to_operator(op, b), mu, lambda, p, q, budget).value;
          },
          py::arg("op"), py::arg("b"), py::arg("mu"), py::arg("lambda_"), py::arg("p"), py::arg("q"),
          py::arg("restarts") = 8, py::arg("iterations") = 60, py::arg("seed") = 0x5EED);
    m.def("sparse_dominate",
          [](const GridFunction& b, const GridFunction& f) {
              const DominationResult d = paraproduct_sparse_dominate(b, f, b.tree().root());
              const double gamma = 1.0 / std::pow(2.0, b.tree().dim() + 2);
              const DominationCheck c =
                  domination_check(paraproduct(b, f), d.family, b, f, domination_constant(b.tree().dim()));
              py::dict out;
              out["cubes"] = d.family.cubes.size();
              out["sparse"] = verify_sparse(d.family, gamma).ok;
              out["dominated"] = c.ok;
              out["max_stop_ratio"] = d.max_stop_ratio;
              std::ostringstream ss;
              write_sparse_family(ss, d.family);
              out["family"] = ss.str();
              return out;
          });

    m.def("run_scenario",
          [](const std::string& kind, const std::string& config_text) {
              const ScenarioConfig cfg = parse_config(config_text);
              Report r;
              if (kind == "char") r = run_characteristics(cfg);
              else if (kind == "dominate") r = run_domination(cfg);
              else if (kind == "bloom") r = run_bloom_comparability(cfg);
              else if (kind == "counterexample") r = run_counterexample(cfg);
              else throw ConfigError("unknown scenario kind '" + kind + "'");
              return py::make_tuple(summary_dict(r), r.table.csv(), r.violations);
          },
          py::arg("kind"), py::arg("config_text"), "returns (summary, csv, violations)");
}
