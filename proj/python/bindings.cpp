#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>

#include "dhym/bochner.hpp"
#include "dhym/flows.hpp"
#include "dhym/hermitian.hpp"
#include "dhym/newton.hpp"
#include "dhym/shrinker.hpp"
#include "dhym/torus.hpp"

namespace py = pybind11;
using namespace dhym;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// 1-D input is a diagonal, 2-D input a full Hermitian matrix.
HermitianMatrix to_matrix(const py::object& obj) {
  const CArray a = CArray::ensure(obj);
  if (!a) throw std::invalid_argument("expected a numeric array");
  if (a.ndim() == 1) {
    const auto n = static_cast<int>(a.shape(0));
    HermitianMatrix m(n);
    for (int i = 0; i < n; ++i) {
      if (a.at(i).imag() != 0.0) throw NotHermitianError("diagonal entries must be real");
      m(i, i) = a.at(i).real();
    }
    return m;
  }
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("expected a square matrix");
  const auto n = static_cast<int>(a.shape(0));
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a.at(i, j);
  if (!m.is_hermitian(1e-12)) throw NotHermitianError("matrix is not Hermitian");
  m.symmetrize();
  return m;
}

CArray from_matrix(const HermitianMatrix& m) {
  const int n = m.dim();
  CArray out({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.mutable_at(i, j) = m(i, j);
  return out;
}

std::vector<py::ssize_t> grid_shape(const GridSpec& s) { return std::vector<py::ssize_t>(s.axes(), s.N); }

RArray to_numpy(const ScalarGridField& f) {
  RArray out(grid_shape(f.spec()));
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

ScalarGridField to_field(const GridSpec& s, const py::object& obj) {
  const RArray a = RArray::ensure(obj);
  if (!a) throw std::invalid_argument("expected a real array");
  if (static_cast<std::size_t>(a.size()) != s.points())
    throw std::invalid_argument("field has " + std::to_string(a.size()) + " values, grid has " + std::to_string(s.points()));
  return ScalarGridField(s, std::vector<double>(a.data(), a.data() + a.size()));
}

GridSpec make_grid(int n, int N, int order) {
  GridSpec s{n, N, order};
  s.validate();
  return s;
}

py::dict flow_result(const FlowReport& r) {
  py::dict d;
  d["verdict"] = to_string(r.verdict);
  d["message"] = r.message;
  d["target"] = r.target;
  d["t"] = r.final_state.t;
  d["steps"] = r.final_state.steps;
  d["residual_sup"] = r.final_state.monitors.residual_sup;
  d["eigen_mean"] = r.final_state.monitors.eigen_mean;
  d["eigen_deviation"] = r.final_state.monitors.eigen_variance;
  d["phi"] = to_numpy(r.final_state.phi);
  py::list hist;
  for (const auto& h : r.history) {
    py::dict row;
    row["t"] = h.t;
    row["dt"] = h.dt;
    row["residual_sup"] = h.residual_sup;
    row["positivity_margin"] = h.positivity_margin;
    hist.append(row);
  }
  d["history"] = hist;
  return d;
}

py::dict newton_result(const NewtonResult& r) {
  py::dict d;
  d["verdict"] = to_string(r.report.verdict);
  d["message"] = r.report.message;
  d["iterations"] = r.report.iterations;
  d["final_residual"] = r.report.final_residual;
  d["phi"] = to_numpy(r.phi);
  return d;
}

NewtonConfig newton_config(int max_iters, double tol) {
  NewtonConfig c;
  c.max_iters = max_iters;
  c.newton_tol = tol;
  return c;
}

ShrinkerParams shrinker_params(const std::string& equation, int n, std::optional<double> theta0,
                               std::optional<double> c, double delta) {
  ShrinkerParams p;
  p.n = n;
  p.delta = delta;
  if (equation == "dhym") {
    p.equation = ShrinkerEquation::DHYM;
    p.theta0 = theta0.value_or(n * std::numbers::pi / 4);
  } else if (equation == "j") {
    p.equation = ShrinkerEquation::J;
    p.c = c.value_or(static_cast<double>(n));
  } else {
    throw std::invalid_argument("equation must be 'dhym' or 'j'");
  }
  return p;
}

py::dict shoot_result(const ShootResult& r) {
  py::dict d;
  d["classification"] = to_string(r.classification);
  d["q0"] = r.q0;
  d["p0"] = r.p0;
  d["s_reached"] = r.s_reached;
  d["max_abs_psi2"] = r.max_abs_psi2;
  d["growth_condition_held"] = r.growth_condition_held;
  d["note"] = r.note;
  const auto& smp = r.profile.samples;
  RArray prof({static_cast<py::ssize_t>(smp.size()), py::ssize_t{4}});
  for (std::size_t k = 0; k < smp.size(); ++k) {
    prof.mutable_at(k, 0) = smp[k].s;
    prof.mutable_at(k, 1) = smp[k].psi;
    prof.mutable_at(k, 2) = smp[k].psi1;
    prof.mutable_at(k, 3) = smp[k].psi2;
  }
  d["profile"] = prof;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical laboratory for the deformed Hermitian-Yang-Mills and J equations";

  py::register_exception<NotHermitianError>(m, "NotHermitianError", PyExc_ValueError);
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);
  py::register_exception<PositivityError>(m, "PositivityError", PyExc_RuntimeError);
  py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_ValueError);

  // Pointwise algebra.
  m.def("eigenvalues", [](const py::object& a) { return eigenvalues(to_matrix(a)); }, py::arg("a"),
        "Ascending eigenvalues of a Hermitian matrix.");
  m.def("generalized_eigenvalues",
        [](const py::object& g, const py::object& f) { return generalized_eigenvalues(to_matrix(g), to_matrix(f)); },
        py::arg("g"), py::arg("f"), "Eigenvalues of g^{-1} f for positive definite g.");
  m.def("lagrangian_angle", [](const std::vector<double>& lam) { return lagrangian_angle(lam); }, py::arg("lam"));
  m.def("zeta_det", [](const py::object& g, const py::object& f) { return zeta_det(to_matrix(g), to_matrix(f)); },
        py::arg("g"), py::arg("f"), "det(I + i g^{-1} f).");
  m.def("eta_form", [](const py::object& g, const py::object& f) { return from_matrix(eta_form(to_matrix(g), to_matrix(f))); },
        py::arg("g"), py::arg("f"), "g + f g^{-1} f.");
  m.def("j_trace", [](const std::vector<double>& lam) { return j_trace(lam); }, py::arg("lam"));
  m.def("dhym_to_j_limit", [](const std::vector<double>& lam, double k) { return dhym_to_j_limit(lam, k); },
        py::arg("lam"), py::arg("k"));
  m.def("arctan_concavity", &arctan_concavity, py::arg("lam"));
  m.def("glz_condition2_value", &glz_condition2_value, py::arg("lam_n"));
  m.def(
      "real_embedding_probe",
      [](double a, double c) {
        const RealEmbeddingProbe p = real_embedding_probe(a, c);
        return py::dict(py::arg("b") = p.b, py::arg("b_norm") = p.b_norm, py::arg("probe_norm") = p.probe_norm);
      },
      py::arg("a"), py::arg("c"));

  // Grid fields.
  m.def(
      "random_potential",
      [](int n, int N, double amplitude, std::uint64_t seed, int order) {
        return to_numpy(TrigPolynomial::random(n, amplitude, seed).sample(make_grid(n, N, order)));
      },
      py::arg("n"), py::arg("N"), py::arg("amplitude"), py::arg("seed"), py::arg("order") = 2,
      "Sampled random trigonometric potential with sum of |amplitudes| equal to `amplitude`.");
  m.def(
      "complex_hessian",
      [](const py::object& phi, int n, int N, int order) {
        const GridSpec s = make_grid(n, N, order);
        const HermitianGridField h = complex_hessian(to_field(s, phi));
        std::vector<py::ssize_t> shape = grid_shape(s);
        shape.push_back(n);
        shape.push_back(n);
        CArray out(shape);
        cplx* dst = out.mutable_data();
        for (std::size_t p = 0; p < h.size(); ++p)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) *dst++ = h[p](i, j);
        return out;
      },
      py::arg("phi"), py::arg("n"), py::arg("N"), py::arg("order") = 2);
  m.def(
      "central_charge",
      [](const py::object& g0, const py::object& f0, const py::object& phi, int N, int order) {
        const HermitianMatrix g = to_matrix(g0), f = to_matrix(f0);
        const GridSpec s = make_grid(g.dim(), N, order);
        const CentralCharge c = central_charge(g, f, to_field(s, phi));
        return py::dict(py::arg("Z") = c.Z, py::arg("hat_theta") = c.hat_theta, py::arg("arg_mismatch") = c.arg_mismatch,
                        py::arg("consistent") = c.consistent);
      },
      py::arg("g0"), py::arg("f0"), py::arg("phi"), py::arg("N"), py::arg("order") = 2);
  m.def(
      "bianchi_residual",
      [](const py::object& phi, int n, int N, int order) { return bianchi_residual(to_field(make_grid(n, N, order), phi)); },
      py::arg("phi"), py::arg("n"), py::arg("N"), py::arg("order") = 2);

  // Flows.
  m.def(
      "flow_dhym",
      [](const py::object& f0, const py::object& phi0, int N, int order, std::optional<double> hat_theta, double sigma,
         double t_max, double residual_tol) {
        FlowConfig c;
        c.kind = FlowKind::LBMCF;
        c.f0 = to_matrix(f0);
        c.spec = make_grid(c.f0.dim(), N, order);
        c.phi0 = to_field(c.spec, phi0);
        c.target = hat_theta;
        c.sigma = sigma;
        c.t_max = t_max;
        c.residual_tol = residual_tol;
        FlowReport r;
        {
          py::gil_scoped_release release;
          r = run_flow(c);
        }
        return flow_result(r);
      },
      py::arg("f0"), py::arg("phi0"), py::arg("N"), py::arg("order") = 2, py::arg("hat_theta") = py::none(),
      py::arg("sigma") = 0.2, py::arg("t_max") = 200.0, py::arg("residual_tol") = 1e-8);
  m.def(
      "flow_j",
      [](const py::object& chi0, const py::object& omega0, const py::object& phi0, int N, int order, std::optional<double> c_target,
         double sigma, double t_max, double residual_tol) {
        FlowConfig c;
        c.kind = FlowKind::JFLOW;
        c.chi0 = to_matrix(chi0);
        c.omega0 = to_matrix(omega0);
        c.spec = make_grid(c.chi0.dim(), N, order);
        c.phi0 = to_field(c.spec, phi0);
        c.target = c_target;
        c.sigma = sigma;
        c.t_max = t_max;
        c.residual_tol = residual_tol;
        FlowReport r;
        {
          py::gil_scoped_release release;
          r = run_flow(c);
        }
        return flow_result(r);
      },
      py::arg("chi0"), py::arg("omega0"), py::arg("phi0"), py::arg("N"), py::arg("order") = 2, py::arg("c") = py::none(),
      py::arg("sigma") = 0.2, py::arg("t_max") = 200.0, py::arg("residual_tol") = 1e-8);

  // Newton.
  m.def(
      "newton_dhym",
      [](const py::object& f0, double hat_theta, const py::object& phi_init, int N, int order, int max_iters, double tol) {
        const HermitianMatrix f = to_matrix(f0);
        const GridSpec s = make_grid(f.dim(), N, order);
        return newton_result(newton_dhym(f, hat_theta, to_field(s, phi_init), newton_config(max_iters, tol)));
      },
      py::arg("f0"), py::arg("hat_theta"), py::arg("phi_init"), py::arg("N"), py::arg("order") = 2, py::arg("max_iters") = 50,
      py::arg("tol") = 1e-10);
  m.def(
      "newton_j",
      [](const py::object& chi0, const py::object& omega0, double c, const py::object& phi_init, int N, int order,
         int max_iters, double tol) {
        const HermitianMatrix chi = to_matrix(chi0), om = to_matrix(omega0);
        const GridSpec s = make_grid(chi.dim(), N, order);
        return newton_result(newton_j(chi, om, c, to_field(s, phi_init), newton_config(max_iters, tol)));
      },
      py::arg("chi0"), py::arg("omega0"), py::arg("c"), py::arg("phi_init"), py::arg("N"), py::arg("order") = 2,
      py::arg("max_iters") = 50, py::arg("tol") = 1e-10);

  // Laplacian identities.
  m.def(
      "identity_trials",
      [](const std::string& kind, int n, int trials, std::uint64_t seed, bool curvature) {
        TrialKind k;
        if (kind == "general") k = TrialKind::GENERAL;
        else if (kind == "at_solution") k = TrialKind::AT_SOLUTION;
        else if (kind == "j_at_solution") k = TrialKind::J_AT_SOLUTION;
        else throw std::invalid_argument("kind must be general, at_solution or j_at_solution");
        return py::module_::import("json").attr("loads")(run_identity_trials(k, n, trials, seed, curvature).to_json().dump());
      },
      py::arg("kind"), py::arg("n"), py::arg("trials"), py::arg("seed"), py::arg("curvature") = true);
  m.def(
      "grid_bochner_check",
      [](const py::object& phi, const py::object& f0, int N, int order) {
        const HermitianMatrix f = to_matrix(f0);
        const GridBochnerReport r = grid_bochner_check(to_field(make_grid(f.dim(), N, order), phi), f);
        return py::dict(py::arg("discrepancy") = r.discrepancy, py::arg("rel_discrepancy") = r.rel_discrepancy,
                        py::arg("lhs_min") = r.lhs_min);
      },
      py::arg("phi"), py::arg("f0"), py::arg("N"), py::arg("order") = 2);

  // Radial shrinkers.
  m.def(
      "shoot",
      [](const std::string& equation, double q0, int n, std::optional<double> theta0, std::optional<double> c, double delta,
         double s_max, double kick) {
        ShootOptions o;
        o.s_max = s_max;
        o.kick = kick;
        return shoot_result(shoot(shrinker_params(equation, n, theta0, c, delta), q0, o));
      },
      py::arg("equation"), py::arg("q0"), py::arg("n") = 2, py::arg("theta0") = py::none(), py::arg("c") = py::none(),
      py::arg("delta") = 0.5, py::arg("s_max") = 200.0, py::arg("kick") = 0.0);
  m.def(
      "rigidity_scan",
      [](const std::string& equation, const std::vector<double>& q0, int n, std::optional<double> theta0,
         std::optional<double> c, double delta, double s_max) {
        ShootOptions o;
        o.s_max = s_max;
        const ScanTable t = rigidity_scan(shrinker_params(equation, n, theta0, c, delta), q0, o);
        py::list rows;
        for (const auto& r : t.rows) rows.append(shoot_result(r));
        return py::dict(py::arg("rows") = rows, py::arg("quadratic_count") = t.quadratic_count,
                        py::arg("property_holds") = t.property_holds, py::arg("csv") = t.to_csv());
      },
      py::arg("equation"), py::arg("q0"), py::arg("n") = 2, py::arg("theta0") = py::none(), py::arg("c") = py::none(),
      py::arg("delta") = 0.5, py::arg("s_max") = 200.0);
}
