#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "clusterkit/cancellation.hpp"
#include "clusterkit/closures.hpp"
#include "clusterkit/errors.hpp"
#include "clusterkit/expansion.hpp"
#include "clusterkit/graphs.hpp"
#include "clusterkit/oz.hpp"
#include "clusterkit/potentials.hpp"
#include "clusterkit/version.hpp"

namespace py = pybind11;
using namespace clusterkit;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

ColoredGraph graph_of(int n_white, int n_black, const std::vector<std::pair<int, int>>& edges) {
  return ColoredGraph::from_edges(n_white, n_black, edges);
}

py::dict estimate_dict(const MayerEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["n_samples"] = e.n_samples;
  d["method"] = to_string(e.method);
  d["exact"] = e.exact;
  if (e.exact_value) d["exact_value"] = e.exact_value->str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mayer-graph series, Ornstein-Zernike checks and the Percus-Yevick closure";
  m.attr("__version__") = kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SizeLimitError>(m, "SizeLimitError", PyExc_OverflowError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<PairPotential>(m, "PairPotential")
      .def_static("hard_rod", &PairPotential::hard_rod, py::arg("sigma") = 1.0, py::arg("beta") = 1.0)
      .def_static("hard_sphere", &PairPotential::hard_sphere, py::arg("sigma") = 1.0,
                  py::arg("beta") = 1.0)
      .def_static("square_well", &PairPotential::square_well, py::arg("sigma"), py::arg("epsilon"),
                  py::arg("lambda_range"), py::arg("beta"), py::arg("stability_B"),
                  py::arg("dimension") = 3)
      .def_property_readonly("kind", [](const PairPotential& p) { return to_string(p.kind()); })
      .def_property_readonly("dimension", &PairPotential::dimension)
      .def_property_readonly("sigma", &PairPotential::sigma)
      .def_property_readonly("beta", &PairPotential::beta)
      .def("mayer_f", [](const PairPotential& p, double r) { return mayer_f(p, r); })
      .def("c_beta", [](const PairPotential& p) { return c_beta(p); });

  py::class_<McConfig>(m, "McConfig")
      .def(py::init<>())
      .def_readwrite("seed", &McConfig::seed)
      .def_readwrite("n_samples", &McConfig::n_samples)
      .def_readwrite("strata", &McConfig::strata)
      .def_readwrite("threads", &McConfig::threads);

  m.def("count", [](int w, int b, const std::string& cls) {
    return count(w, b, graph_class_from_string(cls));
  }, py::arg("n_white"), py::arg("n_black"), py::arg("graph_class"));

  m.def("enumerate", [](int w, int b, const std::string& cls) {
    std::vector<std::vector<std::pair<int, int>>> out;
    for (const auto& g : enumerate(w, b, graph_class_from_string(cls))) {
      std::vector<std::pair<int, int>> e;
      for (auto [i, j] : g.edges()) e.emplace_back(i + 1, j + 1);
      out.push_back(e);
    }
    return out;
  }, py::arg("n_white"), py::arg("n_black"), py::arg("graph_class"),
        "Edge lists with 1-based labels.");

  m.def("cancellation_sum", [](int w, int b, const std::vector<std::pair<int, int>>& edges) {
    return multiindex_cancellation_sum(graph_of(w, b, edges));
  });

  m.def("census_identity", [](int k) {
    const auto c = oz_census_identity(k);
    py::dict d;
    d["articulation_free"] = c.articulation_free;
    d["two_connected"] = c.two_connected;
    d["nodal_split"] = c.nodal_split;
    d["nodal_split_without_label_factor"] = c.nodal_split_without_label_factor;
    d["holds"] = c.holds;
    return d;
  });

  m.def("virial_beta", [](int mm, const PairPotential& p, const McConfig& cfg) {
    return estimate_dict(virial_beta(mm, p, cfg));
  }, py::arg("m"), py::arg("potential"), py::arg("cfg") = McConfig{});

  m.def("c2_coefficient", [](int k, double r, const PairPotential& p, const McConfig& cfg) {
    return estimate_dict(c2_coefficient(k, pair_anchors(r), p, cfg));
  }, py::arg("k"), py::arg("r"), py::arg("potential"), py::arg("cfg") = McConfig{});

  m.def("h_coefficient", [](int k, double r, const PairPotential& p, const McConfig& cfg) {
    return estimate_dict(h_coefficient(2, k, pair_anchors(r), p, cfg));
  }, py::arg("k"), py::arg("r"), py::arg("potential"), py::arg("cfg") = McConfig{});

  m.def("dissymmetry_exact_hard_rod", [](int K) {
    std::vector<std::string> out;
    for (const auto& r : dissymmetry_check(K, PairPotential::hard_rod(1.0), McConfig{}, true))
      out.push_back(r.exact_residual ? r.exact_residual->str() : "");
    return out;
  });

  m.def("oz_solve_h", [](const std::vector<double>& c, double dr, double rho, int dimension) {
    return to_array(oz_solve_h(RadialFunction(dr, c, dimension), rho).values());
  }, py::arg("c"), py::arg("dr"), py::arg("rho"), py::arg("dimension") = 3);

  m.def("py_solve", [](const PairPotential& p, double rho, double dr, std::size_t n_points,
                       double mixing, double tol, int max_iter) {
    PyOptions o;
    o.mixing = mixing;
    o.tol = tol;
    o.max_iter = max_iter;
    const auto res = py_solve(p, rho, GridSpec{dr, n_points}, o);
    std::vector<double> r(n_points);
    for (std::size_t j = 0; j < n_points; ++j) r[j] = res.fields.g.r(j);
    py::dict d;
    d["r"] = to_array(r);
    d["g"] = to_array(res.fields.g.values());
    d["h"] = to_array(res.fields.h.values());
    d["c"] = to_array(res.fields.c.values());
    d["t"] = to_array(res.fields.t.values());
    d["y"] = to_array(res.fields.y.values());
    d["iterations"] = res.diagnostics.iterations;
    d["residual"] = res.diagnostics.residual;
    return d;
  }, py::arg("potential"), py::arg("rho"), py::arg("dr") = 0.01, py::arg("n_points") = 1024,
        py::arg("mixing") = 0.5, py::arg("tol") = 1e-10, py::arg("max_iter") = 10000);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "Run a command line in-process; returns (exit_code, stdout, stderr).");
}
