#include "dhym/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dhym/bochner.hpp"

namespace dhym {

std::string to_string(FlowKind k) { return k == FlowKind::LBMCF ? "LBMCF" : "JFLOW"; }

std::string to_string(FlowVerdict v) {
  switch (v) {
    case FlowVerdict::CONVERGED_RIGID: return "CONVERGED_RIGID";
    case FlowVerdict::CONVERGED_NONRIGID: return "CONVERGED_NONRIGID";
    case FlowVerdict::NON_CONVERGED: return "NON_CONVERGED";
    case FlowVerdict::TIMEOUT: return "TIMEOUT";
    case FlowVerdict::ABORTED: return "ABORTED";
  }
  return "UNKNOWN";
}

void FlowConfig::validate() const {
  spec.validate();
  if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("FlowConfig: dt_safety must lie in (0, 1]");
  if (!(t_max > 0.0)) throw std::invalid_argument("FlowConfig: t_max must be positive");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("FlowConfig: residual_tol must be positive");
  if (history_stride < 1) throw std::invalid_argument("FlowConfig: history_stride must be >= 1");
  if (phi0.size() != spec.points() || !(phi0.spec() == spec))
    throw std::invalid_argument("FlowConfig: phi0 does not live on the configured grid");
  if (kind == FlowKind::LBMCF) {
    if (f0.dim() != spec.n) throw std::invalid_argument("FlowConfig: F0 dimension differs from grid n");
    if (!f0.is_hermitian()) throw NotHermitianError("FlowConfig: F0 is not Hermitian");
  } else {
    if (chi0.dim() != spec.n || omega0.dim() != spec.n)
      throw std::invalid_argument("FlowConfig: chi0/omega0 dimension differs from grid n");
    if (!chi0.is_hermitian() || !omega0.is_hermitian())
      throw NotHermitianError("FlowConfig: chi0/omega0 not Hermitian");
    if (!is_positive_definite(chi0)) throw std::invalid_argument("FlowConfig: chi0 must be positive definite");
    if (!is_positive_definite(omega0)) throw std::invalid_argument("FlowConfig: omega0 must be positive definite");
  }
}

double FlowConfig::resolved_target() const {
  if (target) return *target;
  if (kind == FlowKind::LBMCF) return lagrangian_angle(eigenvalues(f0));
  return j_trace(generalized_eigenvalues(chi0, omega0));
}

namespace {

std::string describe_point(const GridSpec& spec, std::size_t idx) {
  std::ostringstream os;
  os << "grid index " << idx << " (";
  for (int a = 0; a < spec.axes(); ++a) os << (a ? ", " : "") << spec.coord(idx, a) * spec.h();
  os << ")";
  return os.str();
}

void finish_monitors(FlowEvaluation& ev) {
  const std::size_t m = ev.rhs.size();
  const double mean = average(ev.rhs);
  ev.monitors.residual_sup = ev.rhs.sup_norm();
  double osc = 0.0;
  for (std::size_t p = 0; p < m; ++p) osc = std::max(osc, std::abs(ev.rhs[p] - mean));
  ev.monitors.oscillation_sup = osc;
  ev.monitors.eigen_variance.assign(ev.eigenvalue_fields.size(), 0.0);
  ev.monitors.eigen_mean.assign(ev.eigenvalue_fields.size(), 0.0);
  for (std::size_t i = 0; i < ev.eigenvalue_fields.size(); ++i) {
    const auto& f = ev.eigenvalue_fields[i];
    double s = 0.0;
    for (double v : f) s += v;
    const double mu = s / static_cast<double>(m);
    double dev = 0.0;
    for (double v : f) dev = std::max(dev, std::abs(v - mu));
    ev.monitors.eigen_mean[i] = mu;
    ev.monitors.eigen_variance[i] = dev;
  }
}

FlowEvaluation evaluate_lbmcf(const ScalarGridField& phi, const HermitianMatrix& f0, double hat_theta) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  const std::size_t m = spec.points();
  const HermitianGridField F = curvature_field(f0, phi);
  FlowEvaluation ev;
  ev.rhs = ScalarGridField(spec);
  ev.eigenvalue_fields.assign(n, std::vector<double>(m));
  double cmax = 0.0;
  double min_theta = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(max : cmax) reduction(min : min_theta) schedule(static)
  for (std::size_t p = 0; p < m; ++p) {
    const auto lams = eigenvalues(F[p]);
    const double th = lagrangian_angle(lams);
    ev.rhs[p] = th - hat_theta;
    min_theta = std::min(min_theta, th);
    for (int i = 0; i < n; ++i) {
      ev.eigenvalue_fields[i][p] = lams[i];
      cmax = std::max(cmax, 1.0 / (1.0 + lams[i] * lams[i]));
    }
  }
  ev.monitors.coefficient_max = cmax;
  ev.monitors.min_theta = min_theta;
  finish_monitors(ev);
  return ev;
}

FlowEvaluation evaluate_jflow(const ScalarGridField& phi, const HermitianMatrix& chi0, const HermitianMatrix& omega0,
                              double c) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  const std::size_t m = spec.points();
  const HermitianGridField W = curvature_field(omega0, phi);
  // Eigenvalues of chi^{-1} omega via chi = L L^H: eig(L^{-1} omega L^{-H}).
  const HermitianMatrix linv = inverse(cholesky(chi0));
  const HermitianMatrix linv_h = linv.adjoint();
  FlowEvaluation ev;
  ev.rhs = ScalarGridField(spec);
  ev.eigenvalue_fields.assign(n, std::vector<double>(m));
  double cmax = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  std::size_t bad = m;
#pragma omp parallel for reduction(max : cmax) reduction(min : margin) schedule(static)
  for (std::size_t p = 0; p < m; ++p) {
    HermitianMatrix k = linv * W[p] * linv_h;
    k.symmetrize();
    const auto kap = eigenvalues(k);
    margin = std::min(margin, kap[0]);
    if (!(kap[0] > 0.0)) {
#pragma omp critical
      bad = std::min(bad, p);
      continue;
    }
    double tr = 0.0;
    for (int i = 0; i < n; ++i) {
      ev.eigenvalue_fields[i][p] = kap[i];
      tr += 1.0 / kap[i];
    }
    ev.rhs[p] = c - tr;
    const HermitianMatrix winv = inverse(W[p]);
    HermitianMatrix coef = winv * chi0 * winv;
    coef.symmetrize();
    cmax = std::max(cmax, eigenvalues(coef).back());
  }
  if (bad < m) {
    std::ostringstream os;
    os << "omega_phi lost positivity at " << describe_point(spec, bad) << " (min eigenvalue of chi^{-1} omega "
       << margin << ")";
    throw PositivityError(os.str());
  }
  ev.monitors.coefficient_max = cmax;
  ev.monitors.positivity_margin = margin;
  finish_monitors(ev);
  return ev;
}

bool all_finite(const ScalarGridField& f) {
  for (std::size_t p = 0; p < f.size(); ++p)
    if (!std::isfinite(f[p])) return false;
  return true;
}

}  // namespace

ScalarGridField lbmcf_rhs(const ScalarGridField& phi, const HermitianMatrix& f0, double hat_theta) {
  return evaluate_lbmcf(phi, f0, hat_theta).rhs;
}

ScalarGridField jflow_rhs(const ScalarGridField& phi, const HermitianMatrix& chi0, const HermitianMatrix& omega0,
                          double c) {
  return evaluate_jflow(phi, chi0, omega0, c).rhs;
}

FlowEvaluation evaluate_flow(const ScalarGridField& phi, const FlowConfig& config) {
  const double target = config.resolved_target();
  if (config.kind == FlowKind::LBMCF) return evaluate_lbmcf(phi, config.f0, target);
  return evaluate_jflow(phi, config.chi0, config.omega0, target);
}

double stable_dt(const GridSpec& spec, double coefficient_max, double sigma) {
  // Largest symbol of the discrete second difference is 4/h^2 (order 2) or 16/(3h^2) (order 4).
  const double rho = spec.stencil_order == 2 ? 1.0 : 4.0 / 3.0;
  const double h = spec.h();
  if (!(coefficient_max > 0.0)) return std::numeric_limits<double>::infinity();
  // sigma * 2h^2 / c_max, capped below the linear Euler limit h^2 / (n rho c_max).
  const double cap = 0.9 * h * h / (spec.n * rho * coefficient_max);
  return std::min(sigma * 2.0 * h * h / (rho * coefficient_max), cap);
}

namespace {

ScalarGridField advance(const ScalarGridField& phi, const FlowEvaluation& ev, double dt) {
  ScalarGridField next = phi;
  next.axpy(dt, ev.rhs);
  next = mean_zero(next);
  if (!all_finite(next)) throw std::runtime_error("non-finite potential after Euler step");
  return next;
}

}  // namespace

FlowState step_with_dt(const FlowState& state, const FlowConfig& config, double dt) {
  const FlowEvaluation ev = evaluate_flow(state.phi, config);
  if (!all_finite(ev.rhs)) throw std::runtime_error("non-finite flow right-hand side");
  FlowState out;
  out.phi = advance(state.phi, ev, dt);
  out.t = state.t + dt;
  out.steps = state.steps + 1;
  out.dt = dt;
  out.monitors = evaluate_flow(out.phi, config).monitors;
  return out;
}

FlowState step(const FlowState& state, const FlowConfig& config) {
  const FlowEvaluation ev = evaluate_flow(state.phi, config);
  const double dt = stable_dt(config.spec, ev.monitors.coefficient_max, config.sigma);
  if (!std::isfinite(dt)) throw std::runtime_error("degenerate linearization coefficient");
  return step_with_dt(state, config, dt);
}

FlowReport run_flow(const FlowConfig& config) {
  config.validate();
  FlowReport report;
  report.target = config.resolved_target();
  const int n = config.spec.n;

  FlowState state;
  state.phi = mean_zero(config.phi0);

  auto record = [&](const FlowMonitors& mon, double dt) {
    report.history.push_back({state.t, dt, mon.residual_sup, mon.eigen_variance, mon.positivity_margin});
  };

  FlowEvaluation ev;
  bool done = false;
  try {
    ev = evaluate_flow(state.phi, config);
    if (config.kind == FlowKind::LBMCF)
      report.hypercritical_initial = ev.monitors.min_theta > (n - 1) * std::numbers::pi / 2.0;
    while (!done) {
      state.monitors = ev.monitors;
      if (!all_finite(ev.rhs)) {
        report.verdict = FlowVerdict::ABORTED;
        report.message = "non-finite right-hand side";
        record(ev.monitors, 0.0);
        break;
      }
      const double dt_stable = stable_dt(config.spec, ev.monitors.coefficient_max, config.sigma);
      const bool converged = ev.monitors.residual_sup < config.residual_tol;
      const bool stuck = !converged && ev.monitors.oscillation_sup < config.residual_tol;
      const bool out_of_time = state.t >= config.t_max || state.steps >= config.max_steps;
      if (converged || stuck || out_of_time) {
        record(ev.monitors, 0.0);
        if (converged) {
          report.verdict = FlowVerdict::CONVERGED_RIGID;  // refined below
        } else if (stuck) {
          report.verdict = FlowVerdict::NON_CONVERGED;
          std::ostringstream os;
          os << "right-hand side settled to the constant " << average(ev.rhs)
             << "; the target is inconsistent with the class";
          report.message = os.str();
        } else {
          report.verdict = FlowVerdict::TIMEOUT;
          report.message = "t_max or step budget reached";
        }
        break;
      }
      const double dt = std::min(dt_stable, config.t_max - state.t);
      if (state.steps % config.history_stride == 0) record(ev.monitors, dt);
      state.phi = advance(state.phi, ev, dt);
      state.t += dt;
      state.dt = dt;
      ++state.steps;
      ev = evaluate_flow(state.phi, config);
    }
  } catch (const PositivityError& e) {
    report.verdict = FlowVerdict::ABORTED;
    report.message = e.what();
    done = true;
  } catch (const std::runtime_error& e) {
    report.verdict = FlowVerdict::ABORTED;
    report.message = e.what();
    done = true;
  }

  report.final_state = state;
  if (report.verdict == FlowVerdict::ABORTED) return report;

  // Final diagnostics on the last accepted potential.
  const HermitianGridField hess = complex_hessian(state.phi);
  report.final_hessian_sup = hess.max_abs();
  const std::size_t m = config.spec.points();
  if (config.kind == FlowKind::LBMCF) {
    const HermitianGridField F = curvature_field(config.f0, state.phi);
    HermitianGridField eta(config.spec, HermitianMatrix::identity(n));
    const HermitianMatrix g = HermitianMatrix::identity(n);
    for (std::size_t p = 0; p < m; ++p) eta[p] = eta_form(g, F[p]);
    report.first_derivative_residual = first_derivative_residual(g, F, eta);
    const SubharmonicityReport sub = subharmonicity_monitor(state.phi, config.f0);
    report.subharmonic_min = sub.min_value;
    report.subharmonic_regime_ok = sub.regime_ok;
  } else {
    const HermitianGridField W = curvature_field(config.omega0, state.phi);
    HermitianGridField eta(config.spec, HermitianMatrix::identity(n));
    const HermitianMatrix chi_inv = inverse(config.chi0);
    for (std::size_t p = 0; p < m; ++p) {
      eta[p] = W[p] * chi_inv * W[p];
      eta[p].symmetrize();
    }
    report.first_derivative_residual = first_derivative_residual(HermitianMatrix::identity(n), W, eta);
  }

  if (report.verdict == FlowVerdict::CONVERGED_RIGID) {
    double var = 0.0;
    for (double v : state.monitors.eigen_variance) var = std::max(var, v);
    if (var <= config.rigid_tol && report.first_derivative_residual <= config.rigid_tol) {
      report.message = "eigenvalue fields constant to tolerance";
    } else {
      report.verdict = FlowVerdict::CONVERGED_NONRIGID;
      std::ostringstream os;
      os << "residual below tolerance but eigen_variance " << var << ", first-derivative residual "
         << report.first_derivative_residual;
      report.message = os.str();
    }
  }
  return report;
}

}  // namespace dhym
