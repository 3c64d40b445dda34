#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dhym/hermitian.hpp"
#include "dhym/torus.hpp"

namespace dhym {

struct NewtonConfig {
  int max_iters = 50;
  double newton_tol = 1e-10;
  double damping = 1.0;
  double linear_tol = 1e-10;  // relative residual of the inner solve
  int linear_max_iters = 400;
  int restart = 60;
  double min_step = 1.0 / 256.0;

  void validate() const;
};

enum class EquationKind { DHYM, J };
std::string to_string(EquationKind k);

/// Residual map R(phi) = Theta(F0 + ddbar phi) - target (dHYM) or
/// tr(omega_phi^{-1} chi0) - target (J).  The target is a field so that
/// manufactured solutions can be posed; constant targets are the usual case.
struct NewtonProblem {
  EquationKind kind = EquationKind::DHYM;
  HermitianMatrix f0;
  HermitianMatrix chi0;
  HermitianMatrix omega0;
  ScalarGridField target;

  static NewtonProblem dhym(const HermitianMatrix& f0, const ScalarGridField& target);
  static NewtonProblem j(const HermitianMatrix& chi0, const HermitianMatrix& omega0, const ScalarGridField& target);
};

/// Throws PositivityError when omega_phi is not positive definite (J).
ScalarGridField newton_residual(const NewtonProblem& problem, const ScalarGridField& phi);

/// psi -> sign * tr(coef(x) Hess_c psi(x)), coef Hermitian positive definite.
struct LinearizedOperator {
  GridSpec spec;
  std::vector<HermitianMatrix> coef;
  double sign = 1.0;

  /// Pointwise average of the coefficient, used by the preconditioner.
  HermitianMatrix mean_coefficient() const;
};

LinearizedOperator linearize(const NewtonProblem& problem, const ScalarGridField& phi);
ScalarGridField apply_linearized(const LinearizedOperator& op, const ScalarGridField& psi);

/// Exact inverse of the constant-coefficient operator psi -> sign tr(C Hess_c psi)
/// on mean-zero fields, diagonalized by FFT with the discrete stencil symbols.
class FlatPreconditioner {
 public:
  FlatPreconditioner(const GridSpec& spec, const HermitianMatrix& coef, double sign);
  ~FlatPreconditioner();
  FlatPreconditioner(const FlatPreconditioner&) = delete;
  FlatPreconditioner& operator=(const FlatPreconditioner&) = delete;

  ScalarGridField apply(const ScalarGridField& r) const;
  /// Forward constant-coefficient operator via the same symbols (for testing).
  ScalarGridField apply_forward(const ScalarGridField& psi) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct LinearSolveResult {
  ScalarGridField x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning on the mean-zero subspace.
LinearSolveResult gmres_solve(const std::function<ScalarGridField(const ScalarGridField&)>& op,
                              const std::function<ScalarGridField(const ScalarGridField&)>& precond,
                              const ScalarGridField& b, double rel_tol, int max_iters, int restart);

enum class NewtonVerdict { CONVERGED, NON_CONVERGED, ABORTED };
std::string to_string(NewtonVerdict v);

struct NewtonHistoryRow {
  int iter = 0;
  double residual_sup = 0.0;
  double step_norm = 0.0;
  int linear_iters = 0;
  double step_length = 0.0;
  bool linear_converged = true;
};

struct NewtonReport {
  NewtonVerdict verdict = NewtonVerdict::NON_CONVERGED;
  std::string message;
  int iterations = 0;
  double final_residual = 0.0;
  bool linear_stagnation = false;
  std::vector<NewtonHistoryRow> history;
};

struct NewtonResult {
  ScalarGridField phi;
  NewtonReport report;
};

NewtonResult newton_solve(const NewtonProblem& problem, const ScalarGridField& phi_init, const NewtonConfig& cfg);
NewtonResult newton_dhym(const HermitianMatrix& f0, double hat_theta, const ScalarGridField& phi_init,
                         const NewtonConfig& cfg);
NewtonResult newton_j(const HermitianMatrix& chi0, const HermitianMatrix& omega0, double c,
                      const ScalarGridField& phi_init, const NewtonConfig& cfg);

struct LinearizationCheck {
  std::vector<double> eps;
  std::vector<double> errors;  // sup |(R(phi+eps psi) - R(phi-eps psi))/(2 eps) - L psi|
  std::vector<double> orders;
};

LinearizationCheck linearization_check(const NewtonProblem& problem, const ScalarGridField& phi,
                                       const ScalarGridField& psi, std::span<const double> eps);

}  // namespace dhym
