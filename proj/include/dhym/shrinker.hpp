#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhym/hermitian.hpp"

namespace dhym {

enum class ShrinkerEquation { DHYM, J };
std::string to_string(ShrinkerEquation e);

struct ShrinkerParams {
  ShrinkerEquation equation = ShrinkerEquation::DHYM;
  int n = 2;
  double theta0 = 0.0;  // dHYM
  double c = 0.0;       // J
  double delta = 0.5;   // J growth exponent
};

struct RadialSample {
  double s = 0.0;
  double psi = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
};

/// Samples of u(z) = psi(|z|^2) along s = |z|^2.
struct RadialProfile {
  ShrinkerParams params;
  std::vector<RadialSample> samples;
};

/// {psi' (n-1 times), psi' + s psi''} in ascending order.
std::vector<double> radial_eigs(double psi1, double psi2, double s, int n);
/// psi' delta_ij + psi'' conj(z_i) z_j, the complex Hessian of psi(|z|^2).
HermitianMatrix radial_hessian(double psi1, double psi2, std::span<const cplx> z);

double dhym_shrinker_residual(double s, double psi, double psi1, double psi2, double theta0, int n);
/// Throws PositivityError if the Hessian is not positive.
double j_shrinker_residual(double s, double psi, double psi1, double psi2, double c, int n);

enum class ShrinkerClass { QUADRATIC, HESSIAN_BLOWUP, PSH_EXIT, INTEGRATION_FAILURE, INDETERMINATE };
std::string to_string(ShrinkerClass c);

struct ShootOptions {
  double s_max = 200.0;
  double tol = 1e-12;        // local error per step (step doubling)
  double max_step = 1.0;
  double s_start = 1e-6;     // series start off the origin
  double kick = 0.0;         // psi''(0) of the two-term start; 0 gives the regular series
  double blowup = 1e8;
  double quad_tol = 1e-10;
  long max_steps = 2'000'000;
  std::optional<double> p0;  // psi(0); must match the s = 0 relation when given
};

struct ShootResult {
  RadialProfile profile;
  ShrinkerClass classification = ShrinkerClass::INDETERMINATE;
  double q0 = 0.0;
  double p0 = 0.0;
  double s_reached = 0.0;
  double max_abs_psi2 = 0.0;
  bool growth_condition_held = true;  // J only: min eig >= sqrt(2n-1+delta)/|z| on the outer half
  std::string note;
};

/// psi(0) forced by the s = 0 relation.
double consistent_p0(const ShrinkerParams& params, double q0);

ShootResult shoot(const ShrinkerParams& params, double q0, const ShootOptions& options = {});

struct ScanTable {
  std::vector<ShootResult> rows;
  int quadratic_count = 0;
  /// No entry is non-quadratic yet regular with bounded Hessian up to s_max.
  bool property_holds = true;
  std::string to_csv() const;
};

ScanTable rigidity_scan(const ShrinkerParams& params, std::span<const double> q0_grid, const ShootOptions& options = {});

struct BarrierReport {
  double eps = 0.0;
  double r0 = 0.0;
  double boundary_max = 0.0;      // max of the compared scalar on the sphere r = r0
  double min_gap = 0.0;           // min over r >= r0 of w(r) - Theta(r)
  bool dominates = true;          // min_gap >= 0
  double max_drift = 0.0;         // max over r >= r0 of the drift expression
  bool drift_nonpositive = true;
  bool eta_bound_held = true;     // J only
  int samples_checked = 0;
};

/// Throws std::invalid_argument if the profile does not extend past r0.
BarrierReport barrier_compare(const RadialProfile& profile, double eps);

/// d_t v - (flow speed) for v(z,t) = -t u(z / sqrt(-t)), evaluated from the profile.
double selfsimilar_residual(const RadialProfile& profile, std::span<const cplx> z, double t);

}  // namespace dhym
