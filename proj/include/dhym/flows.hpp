#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dhym/hermitian.hpp"
#include "dhym/torus.hpp"

namespace dhym {

enum class FlowKind { LBMCF, JFLOW };

enum class FlowVerdict {
  CONVERGED_RIGID,
  CONVERGED_NONRIGID,  // residual below tolerance but eigenvalue fields not constant
  NON_CONVERGED,       // rhs became spatially constant but nonzero: target inconsistent with the class
  TIMEOUT,
  ABORTED,
};

std::string to_string(FlowKind k);
std::string to_string(FlowVerdict v);

struct FlowConfig {
  FlowKind kind = FlowKind::LBMCF;
  GridSpec spec;
  HermitianMatrix f0;      // LBMCF
  HermitianMatrix chi0;    // JFLOW
  HermitianMatrix omega0;  // JFLOW
  /// hat_theta (LBMCF) or c (JFLOW).  Defaults to the constant-representative value.
  std::optional<double> target;
  ScalarGridField phi0;
  double sigma = 0.2;  // dt = sigma * 2h^2 / c_max, capped below the Euler stability limit
  double t_max = 200.0;
  double residual_tol = 1e-8;
  double rigid_tol = 1e-6;
  long max_steps = 2'000'000;
  int history_stride = 10;

  /// Throws std::invalid_argument on invalid combinations.
  void validate() const;
  double resolved_target() const;
};

struct FlowMonitors {
  double residual_sup = 0.0;     // sup |rhs|
  double oscillation_sup = 0.0;  // sup |rhs - mean(rhs)|
  std::vector<double> eigen_variance;
  std::vector<double> eigen_mean;
  double positivity_margin = 0.0;  // JFLOW: min eigenvalue of chi^{-1} omega_phi; LBMCF: unused (0)
  double coefficient_max = 0.0;    // largest eigenvalue of the linearization coefficient
  double min_theta = 0.0;          // LBMCF: min over grid of the angle
};

struct FlowState {
  double t = 0.0;
  long steps = 0;
  double dt = 0.0;
  ScalarGridField phi;
  FlowMonitors monitors;
};

/// Pointwise evaluation of a flow right-hand side together with its monitors.
struct FlowEvaluation {
  ScalarGridField rhs;
  FlowMonitors monitors;
  std::vector<std::vector<double>> eigenvalue_fields;  // [i][point]
};

/// x -> lagrangian_angle(eig(F0 + ddbar phi)(x)) - hat_theta.
ScalarGridField lbmcf_rhs(const ScalarGridField& phi, const HermitianMatrix& f0, double hat_theta);
/// x -> c - tr(omega_phi^{-1} chi0); throws PositivityError naming the grid point on failure.
ScalarGridField jflow_rhs(const ScalarGridField& phi, const HermitianMatrix& chi0, const HermitianMatrix& omega0,
                          double c);

FlowEvaluation evaluate_flow(const ScalarGridField& phi, const FlowConfig& config);

/// Stable forward-Euler step size for the current coefficient bound.
double stable_dt(const GridSpec& spec, double coefficient_max, double sigma);

/// One forward-Euler step: phi <- mean_zero(phi + dt * rhs).  Throws on NaN/Inf or positivity loss.
FlowState step(const FlowState& state, const FlowConfig& config);
/// Euler step with a prescribed dt (used for consistency checks).
FlowState step_with_dt(const FlowState& state, const FlowConfig& config, double dt);

struct FlowHistoryRow {
  double t = 0.0;
  double dt = 0.0;
  double residual_sup = 0.0;
  std::vector<double> eigen_variance;
  double positivity_margin = 0.0;
};

struct FlowReport {
  FlowVerdict verdict = FlowVerdict::TIMEOUT;
  std::string message;
  double target = 0.0;
  bool hypercritical_initial = false;
  FlowState final_state;
  std::vector<FlowHistoryRow> history;
  double final_hessian_sup = 0.0;
  double first_derivative_residual = 0.0;
  double subharmonic_min = 0.0;  // LBMCF only
  bool subharmonic_regime_ok = true;
};

FlowReport run_flow(const FlowConfig& config);

}  // namespace dhym
