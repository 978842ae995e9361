#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ddreach/harness.hpp"

namespace py = pybind11;
using namespace ddreach;

namespace {

py::dict right_inverse_dict(const RightInverseResult& r) {
  py::dict d;
  d["H"] = r.H;
  d["method"] = to_string(r.method);
  d["row_norm_sum"] = r.row_norm_sum;
  d["frob_norm"] = r.frob_norm;
  d["residual"] = r.residual;
  d["iterations"] = r.iterations;
  d["lower_bound"] = r.lower_bound;
  return d;
}

json parse(const std::string& s) { return json::parse(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data-driven reachability core";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<RankDeficientError>(m, "RankDeficientError", PyExc_ValueError);

  py::class_<Zonotope>(m, "Zonotope")
      .def(py::init<Vector, Matrix>(), py::arg("center"), py::arg("generators"))
      .def_readwrite("c", &Zonotope::c)
      .def_readwrite("G", &Zonotope::G)
      .def_property_readonly("dim", &Zonotope::dim)
      .def_property_readonly("num_generators", &Zonotope::num_generators)
      .def("volume", [](const Zonotope& z) { return volume(z); })
      .def("reduce_girard", [](const Zonotope& z, double order) { return reduce_girard(z, order); },
           py::arg("max_order"))
      .def("__repr__", [](const Zonotope& z) {
        return "Zonotope(dim=" + std::to_string(z.dim()) + ", generators=" + std::to_string(z.num_generators()) + ")";
      });

  py::class_<ConstrainedZonotope>(m, "ConstrainedZonotope")
      .def(py::init<Vector, Matrix, Matrix, Vector>(), py::arg("center"), py::arg("generators"), py::arg("A"),
           py::arg("b"))
      .def(py::init<const Zonotope&>())
      .def_readwrite("c", &ConstrainedZonotope::c)
      .def_readwrite("G", &ConstrainedZonotope::G)
      .def_readwrite("A", &ConstrainedZonotope::A)
      .def_readwrite("b", &ConstrainedZonotope::b)
      .def_property_readonly("dim", &ConstrainedZonotope::dim)
      .def("is_empty", [](const ConstrainedZonotope& z) { return is_empty(z); })
      .def("support", [](const ConstrainedZonotope& z, const Vector& d) { return support(z, d); })
      .def("contains", [](const ConstrainedZonotope& z, const Vector& x, double tol) { return contains_point(z, x, tol); },
           py::arg("x"), py::arg("tol") = 1e-9)
      .def("interval_hull", [](const ConstrainedZonotope& z) {
        const Interval iv = interval_hull(z);
        return std::make_pair(iv.lower, iv.upper);
      });
  py::implicitly_convertible<Zonotope, ConstrainedZonotope>();

  m.def("minkowski_sum", py::overload_cast<const ConstrainedZonotope&, const ConstrainedZonotope&>(&minkowski_sum));
  m.def("linear_map", py::overload_cast<const Matrix&, const ConstrainedZonotope&>(&linear_map));
  m.def("cartesian_product",
        py::overload_cast<const ConstrainedZonotope&, const ConstrainedZonotope&>(&cartesian_product));
  m.def("halfspace_intersection", &halfspace_intersection, py::arg("z"), py::arg("h"), py::arg("c"));

  m.def("discretize", &discretize, py::arg("A_c"), py::arg("B_c"), py::arg("dt"));
  m.def("pinv_right_inverse", [](const Matrix& Phi) { return right_inverse_dict(pinv_right_inverse(Phi)); });
  m.def(
      "row_norm_right_inverse",
      [](const Matrix& Phi, double tol, Index max_iter) {
        RowNormOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        return right_inverse_dict(row_norm_right_inverse(Phi, opt));
      },
      py::arg("Phi"), py::arg("tol") = 1e-7, py::arg("max_iter") = 200000);
  m.def("row_norm_dual_bound", &row_norm_dual_bound, py::arg("Phi"), py::arg("Y"));

  m.def(
      "model_set_proxy",
      [](const Matrix& X_plus, const Matrix& X_minus, const Matrix& U_minus, const Zonotope& W, const Matrix& H) {
        DataSet d;
        d.X_plus = X_plus;
        d.X_minus = X_minus;
        d.U_minus = U_minus;
        const ModelSetBundle b = build_model_sets(d, W, H);
        py::dict out;
        out["center"] = b.mz.C;
        out["proxy"] = generator_norm_proxy(b.mz);
        out["num_generators"] = b.mz.num_generators();
        out["kernel_rows"] = b.cmz.num_constraints();
        out["A_cmz"] = b.cmz.A;
        out["b_cmz"] = b.cmz.b;
        return out;
      },
      py::arg("X_plus"), py::arg("X_minus"), py::arg("U_minus"), py::arg("W"), py::arg("H"));

  py::class_<InfoState>(m, "InfoState")
      .def(py::init([](Index d, double delta) { return info_init(d, delta); }), py::arg("d"),
           py::arg("delta") = 1e-3)
      .def_readonly("S", &InfoState::S)
      .def_readonly("S_inv", &InfoState::S_inv)
      .def("trace_inv", &InfoState::trace_inv)
      .def("update", [](InfoState& s, const Vector& v) { info_update(s, v); })
      .def("delta_A", [](const InfoState& s, const Vector& v) { return delta_A(s, v); });

  m.def("default_config", [](const std::string& kind) {
    if (kind == "lti") return default_lti_config().dump();
    if (kind == "pwa") return default_pwa_config().dump();
    throw std::invalid_argument("kind must be 'lti' or 'pwa'");
  });
  m.def(
      "run_experiment",
      [](const std::string& config) {
        const ExperimentConfig cfg = config_from_json(parse(config));
        py::gil_scoped_release release;
        const ExperimentResult r = cfg.kind == "pwa" ? run_pwa_experiment(cfg) : run_lti_experiment(cfg);
        return std::make_pair(r.report.dump(), r.timings.dump());
      },
      py::arg("config"));
  m.def("selftest", [](std::uint64_t seed) {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const SelftestCase& c : run_selftest(seed)) out.emplace_back(c.name, c.passed, c.detail);
    return out;
  }, py::arg("seed") = 0);
}
