#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "echodyn/acceptance.hpp"
#include "echodyn/contour.hpp"
#include "echodyn/echo.hpp"
#include "echodyn/experiment.hpp"
#include "echodyn/platform.hpp"
#include "echodyn/scenario2.hpp"

namespace py = pybind11;
using namespace echodyn;

namespace {

PyObject* g_error = nullptr;

Deformation to_deformation(const py::object& d) {
  if (py::isinstance<Deformation>(d)) return d.cast<Deformation>();
  py::array a = py::array::ensure(d);
  if (a.ndim() == 1) return Deformation::diagonal(d.cast<VecD>());
  return Deformation(d.cast<MatC>());
}

SamplingOptions sampling(const std::string& symmetry, const std::string& law, int workers) {
  SamplingOptions o;
  o.symmetry_class = symmetry == "real" ? SymmetryClass::RealSymmetric : SymmetryClass::ComplexHermitian;
  o.entry_law = law == "rademacher" ? EntryLaw::Rademacher : EntryLaw::Gaussian;
  o.workers = workers;
  return o;
}

py::dict curve_dict(const EchoCurve& c) {
  py::dict d;
  d["times"] = c.times;
  d["amplitude"] = c.amplitude;
  d["modulus2"] = c.modulus2;
  d["stderr"] = c.stderr_;
  d["n_samples"] = c.n_samples;
  d["per_sample"] = c.per_sample;
  d["params"] = c.params;
  return d;
}

}  // namespace

PYBIND11_MODULE(_echodyn, m) {
  m.doc() = "Echo dynamics of deformed Wigner matrices";

  static py::exception<Error> exc(m, "EchodynError");
  g_error = exc.ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(g_error)(e.what());
      err.attr("kind") = error_kind_name(e.kind());
      PyErr_SetObject(g_error, err.ptr());
    }
  });

  m.def("blas_kernel_ok", &blas_kernel_ok);

  py::class_<Deformation>(m, "Deformation")
      .def(py::init([](const MatC& a) { return Deformation(a); }))
      .def_static("diagonal", [](const VecD& d) { return Deformation::diagonal(d); })
      .def_static("zero", [](int n) { return Deformation::zero(n); })
      .def_property_readonly("size", &Deformation::size)
      .def_property_readonly("matrix", &Deformation::matrix)
      .def_property_readonly("eigenvalues", &Deformation::eigenvalues)
      .def("trace", &Deformation::trace)
      .def("norm", &Deformation::norm);

  py::class_<MdeSolution>(m, "MdeSolution")
      .def_readonly("m_trace", &MdeSolution::m_trace)
      .def_readonly("rho", &MdeSolution::rho)
      .def_readonly("residual", &MdeSolution::residual)
      .def_readonly("iterations", &MdeSolution::iterations)
      .def_readonly("boundary", &MdeSolution::boundary)
      .def_property_readonly("z", &MdeSolution::z)
      .def_property_readonly("matrix", &MdeSolution::m_matrix);

  m.def("solve_mde", [](const py::object& D, cplx z, double tol, int max_iter) {
    MdeOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return solve_mde(to_deformation(D), SpectralPoint::from(z), o);
  }, py::arg("D"), py::arg("z"), py::arg("tol") = 1e-12, py::arg("max_iter") = 10000);
  m.def("scdos", [](const py::object& D, double e, double eta) { return scdos(to_deformation(D), e, eta); },
        py::arg("D"), py::arg("e"), py::arg("eta"));
  m.def("boundary_m", [](const py::object& D, double e) { return boundary_m(to_deformation(D), e); },
        py::arg("D"), py::arg("e"));
  m.def("kappa_bulk", [](const py::object& D, double kappa, double grid) {
    std::vector<std::pair<double, double>> out;
    for (const auto& iv : kappa_bulk(to_deformation(D), kappa, grid).intervals) out.emplace_back(iv.lo, iv.hi);
    return out;
  }, py::arg("D"), py::arg("kappa"), py::arg("grid") = 1e-3);
  m.def("m_semicircle", &m_semicircle);

  m.def("m12_trace", [](const MdeSolution& a, const MdeSolution& b) { return m12(a, b).trace; });
  m.def("stability_eigenvalue", [](const MdeSolution& a, const MdeSolution& b) {
    const auto s = stability_eigenvalue(a, b);
    return py::dict(py::arg("eigenvalue") = s.eigenvalue, py::arg("bound_rhs") = s.bound_rhs,
                    py::arg("ratio") = s.ratio);
  });
  m.def("shift", [](const MdeSolution& a, const MdeSolution& b) { return shift(a, b).value; });
  m.def("m_identity_residual", [](const MdeSolution& a, const MdeSolution& b) {
    return m_identity_residual(a, b, a.z(), b.z(), a.D, b.D);
  });
  m.def("one_body_stability_integral", [](const py::object& D, double eta, double lo, double hi) {
    return one_body_stability_integral(to_deformation(D), eta, lo, hi).value;
  }, py::arg("D"), py::arg("eta"), py::arg("lo"), py::arg("hi"));

  m.def("energy_renormalization", [](const py::object& D1, const py::object& D2, double E2, double eta1, double eta2) {
    const auto r = energy_renormalization(to_deformation(D1), to_deformation(D2), E2, eta1, eta2);
    return py::dict(py::arg("f") = r.f_value, py::arg("s0") = r.s0, py::arg("residual") = r.residual);
  });
  m.def("inverse_renormalization", [](const py::object& D1, const py::object& D2, double E0, double eta1, double eta2) {
    return inverse_renormalization(to_deformation(D1), to_deformation(D2), E0, eta1, eta2);
  });
  m.def("gamma_rate", [](const py::object& D1, const py::object& D2, double E0) {
    return gamma_rate(to_deformation(D1), to_deformation(D2), E0).Gamma;
  });
  m.def("parabolic_coefficient", [](const py::object& D1, const py::object& D2, double E0, double eta0) {
    return parabolic_coefficient(to_deformation(D1), to_deformation(D2), E0, eta0).gamma;
  });

  m.def("deterministic_echo_amplitude", [](const py::object& D1, const py::object& D2, double E0, double eta0, double t) {
    const Deformation a = to_deformation(D1), b = to_deformation(D2);
    const auto r = deterministic_echo_amplitude(a, b, E0, eta0, t, build_contours(a, b, t, eta0));
    return py::dict(py::arg("value") = r.value, py::arg("error") = r.quadrature_error_estimate,
                    py::arg("regime") = r.regime_tag);
  });
  m.def("phase_prediction", [](const py::object& D1, const py::object& D2, double E0, double eta0, double t) {
    return phase_prediction(to_deformation(D1), to_deformation(D2), E0, eta0, t).value;
  });
  m.def("cauchy_convolution", &cauchy_convolution);

  m.def("sample_wigner", [](int N, const std::string& symmetry, std::uint64_t seed, const std::string& law) {
    return sample_wigner(N, sampling(symmetry, law, 1).symmetry_class, seed, sampling(symmetry, law, 1).entry_law).matrix;
  }, py::arg("N"), py::arg("symmetry") = "complex", py::arg("seed") = 0, py::arg("law") = "gaussian");
  m.def("sample_seed", &sample_seed);
  m.def("sample_deformation_pair", [](const std::string& shape, double delta, int N, std::uint64_t seed) {
    return sample_deformation_pair(pair_shape_from_name(shape), delta, N, seed);
  }, py::arg("shape"), py::arg("delta"), py::arg("N"), py::arg("seed") = 0);

  m.def("averaged_echo", [](const py::object& D1, const py::object& D2, double E0, double eta0,
                            const std::vector<double>& times, int n, std::uint64_t seed, int workers) {
    return curve_dict(averaged_echo(to_deformation(D1), to_deformation(D2), E0, eta0, times, n, seed,
                                    sampling("complex", "gaussian", workers)));
  }, py::arg("D1"), py::arg("D2"), py::arg("E0"), py::arg("eta0"), py::arg("times"), py::arg("n_samples"),
        py::arg("seed"), py::arg("workers") = 1);
  m.def("echo_process", [](const py::object& D1, const py::object& D2, double E0, double eta0, double t,
                           const std::vector<double>& s, int n, std::uint64_t seed) {
    return curve_dict(echo_process(to_deformation(D1), to_deformation(D2), E0, eta0, t, s, n, seed));
  });
  m.def("scrambled_averaged_echo", [](const py::object& D1, const py::object& D2, double delta, double E0,
                                      double eta0, const std::vector<double>& times, int n, std::uint64_t seed) {
    return curve_dict(scrambled_averaged_echo(to_deformation(D1), to_deformation(D2), delta, E0, eta0, times, n, seed));
  });
  m.def("fidelity_echo", [](const VecD& h0_diagonal, double lambda, double E0, double window,
                            const std::vector<double>& times, int n, std::uint64_t seed, std::uint64_t state_seed) {
    SpectralData S0;
    S0.eigenvalues = h0_diagonal;
    S0.eigenvectors = MatC::Identity(h0_diagonal.size(), h0_diagonal.size());
    const auto psi = prepare_localized_state(S0, E0, window, state_seed);
    return curve_dict(fidelity_echo(S0, lambda, psi, times, n, seed));
  });
  m.def("bessel_phi", &bessel_phi);

  m.def("semicircle_quantiles", [](int N) { return density_quantiles(LimitingDensity::semicircle(), N); });
  m.def("stieltjes_semicircle", [](cplx z) { return stieltjes_m0(LimitingDensity::semicircle(), z); });
  m.def("stieltjes_table", [](const std::vector<double>& xs, const std::vector<double>& ys, cplx z) {
    return stieltjes_m0(LimitingDensity::tabulated(xs, ys, true), z);
  });
  m.def("predicted_decay", [](double E0, double lambda, double t) {
    return predicted_decay(LimitingDensity::semicircle(), E0, lambda, t);
  });
  m.def("error_budget", &error_budget);

  m.def("run_experiment", [](const std::map<std::string, std::string>& values) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : values) set_config_value(cfg, k, v);
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run(cfg);
    }
    std::vector<py::dict> checks;
    for (const auto& c : r.checks)
      checks.push_back(py::dict(py::arg("name") = c.name, py::arg("measured") = c.measured,
                                py::arg("predicted") = c.predicted, py::arg("tolerance") = c.tolerance,
                                py::arg("passed") = c.passed));
    return py::dict(py::arg("directory") = r.directory, py::arg("files") = r.files,
                    py::arg("manifest") = r.manifest, py::arg("summary") = r.summary, py::arg("checks") = checks);
  });
  m.def("validate_config", [](const std::map<std::string, std::string>& values) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : values) set_config_value(cfg, k, v);
    std::vector<std::string> names;
    for (const auto& v : validate(cfg)) names.push_back(v.name);
    return names;
  });
  m.def("run_acceptance", [](const std::vector<int>& only, int workers) {
    AcceptanceOptions o;
    o.only = only;
    o.workers = workers;
    std::vector<CriterionResult> results;
    {
      py::gil_scoped_release release;
      results = run_acceptance(o);
    }
    std::vector<py::dict> out;
    for (const auto& r : results)
      out.push_back(py::dict(py::arg("id") = r.id, py::arg("name") = r.name, py::arg("passed") = r.passed,
                             py::arg("detail") = r.detail, py::arg("seconds") = r.seconds));
    return out;
  }, py::arg("only") = std::vector<int>{}, py::arg("workers") = 1);
}
