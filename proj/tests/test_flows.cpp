#include <cmath>
#include <numbers>
#include <random>

#include "dhym/flows.hpp"
#include "doctest.h"

using namespace dhym;

namespace {

FlowConfig lbmcf_config(int n, int N, std::vector<double> f, double amp, std::uint64_t seed = 1) {
  FlowConfig c;
  c.kind = FlowKind::LBMCF;
  c.spec = GridSpec{n, N, 2};
  c.f0 = HermitianMatrix::diagonal(f);
  c.phi0 = amp == 0.0 ? ScalarGridField(c.spec) : TrigPolynomial::random(n, amp, seed).sample(c.spec);
  return c;
}

FlowConfig jflow_config(int N, double c_value, double amp) {
  FlowConfig c;
  c.kind = FlowKind::JFLOW;
  c.spec = GridSpec{2, N, 2};
  const double w[] = {2.0, 4.0};
  c.omega0 = HermitianMatrix::diagonal(w);
  c.chi0 = HermitianMatrix::identity(2);
  c.target = c_value;
  c.phi0 = amp == 0.0 ? ScalarGridField(c.spec) : TrigPolynomial::random(2, amp, 3).sample(c.spec);
  return c;
}

}  // namespace

TEST_CASE("lbmcf_rhs vanishes at the constant representative") {
  const double f[] = {3.0, 5.0};
  const ScalarGridField r =
      lbmcf_rhs(ScalarGridField(GridSpec{2, 8, 2}), HermitianMatrix::diagonal(f), std::atan(3.0) + std::atan(5.0));
  CHECK(r.sup_norm() <= 1e-15);
}

TEST_CASE("lbmcf_rhs linearizes to half the complex Hessian for F0 = 1") {
  const GridSpec s{1, 32, 2};
  const TrigPolynomial tp = TrigPolynomial::random(1, 1.0, 4);
  double prev = 0.0;
  for (double amp : {1e-2, 5e-3}) {
    const ScalarGridField phi = tp.sample(s) * amp;
    const ScalarGridField r = lbmcf_rhs(phi, HermitianMatrix::identity(1), std::atan(1.0));
    const HermitianGridField H = complex_hessian(phi);
    double err = 0.0;
    for (std::size_t p = 0; p < s.points(); ++p) err = std::max(err, std::abs(r[p] - 0.5 * H[p](0, 0).real()));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));  // quadratic remainder
    prev = err;
  }
}

TEST_CASE("lbmcf_rhs mean is second order in the data") {
  double prev = 0.0;
  for (double amp : {0.004, 0.002}) {
    const FlowConfig c = lbmcf_config(2, 16, {3.0, 5.0}, amp);
    const ScalarGridField r = lbmcf_rhs(c.phi0, c.f0, c.resolved_target());
    CHECK(std::abs(average(r)) <= 0.05 * r.sup_norm());
    if (prev > 0.0) CHECK(prev / std::abs(average(r)) == doctest::Approx(4.0).epsilon(0.1));
    prev = std::abs(average(r));
  }
}

TEST_CASE("jflow_rhs examples") {
  const FlowConfig c = jflow_config(8, 0.75, 0.0);
  CHECK(jflow_rhs(c.phi0, c.chi0, c.omega0, 0.75).sup_norm() <= 1e-15);
  const HermitianMatrix w = HermitianMatrix::scaled_identity(2, 1.5);
  CHECK(jflow_rhs(c.phi0, w, w, 2.0).sup_norm() <= 1e-15);
  CHECK(jflow_rhs(c.phi0, w, w, 1.0).sup_norm() == doctest::Approx(1.0));

  // Increasing omega decreases the trace, so the rhs increases.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    HermitianMatrix a(2);
    a(0, 0) = nd(rng);
    a(1, 1) = nd(rng);
    a(0, 1) = cplx(nd(rng), nd(rng));
    a(1, 0) = std::conj(a(0, 1));
    HermitianMatrix P = a * a.adjoint();
    P.symmetrize();
    const double base = jflow_rhs(c.phi0, c.chi0, c.omega0, 0.0)[0];
    CHECK(jflow_rhs(c.phi0, c.chi0, c.omega0 + P, 0.0)[0] >= base);
  }
}

TEST_CASE("jflow_rhs reports positivity loss") {
  FlowConfig c = jflow_config(8, 0.75, 0.0);
  c.omega0 = HermitianMatrix::scaled_identity(2, 0.01);
  const ScalarGridField phi = TrigPolynomial::random(2, 1.0, 2).sample(c.spec);
  CHECK_THROWS_AS(jflow_rhs(phi, c.chi0, c.omega0, 1.0), PositivityError);
}

TEST_CASE("config validation") {
  FlowConfig c = jflow_config(8, 0.75, 0.0);
  CHECK_NOTHROW(c.validate());
  c.chi0 = HermitianMatrix::scaled_identity(2, -1.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  FlowConfig l = lbmcf_config(2, 8, {3.0, 5.0}, 0.0);
  l.sigma = 1.5;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
  l.sigma = 0.2;
  l.phi0 = ScalarGridField(GridSpec{2, 10, 2});
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
}

TEST_CASE("Euler step: stationarity, gauge and consistency") {
  const FlowConfig c0 = lbmcf_config(2, 8, {3.0, 5.0}, 0.0);
  FlowState s0;
  s0.phi = c0.phi0;
  const FlowState s1 = step(s0, c0);
  CHECK(s1.phi.sup_norm() <= 1e-15);
  CHECK(s1.dt > 0.0);

  const FlowConfig c = lbmcf_config(2, 8, {3.0, 5.0}, 0.05);
  FlowState s;
  s.phi = mean_zero(c.phi0);
  const ScalarGridField rhs = mean_zero(lbmcf_rhs(s.phi, c.f0, c.resolved_target()));
  const FlowState a = step(s, c);
  CHECK(std::abs(average(a.phi)) <= 1e-15);
  const double dt = 1e-7;
  const FlowState d = step_with_dt(s, c, dt);
  CHECK(((d.phi - s.phi) * (1.0 / dt) - rhs).sup_norm() <= 1e-9);

  // Two half steps against one full step: defect O(dt^2).
  auto defect = [&](double h) {
    const FlowState one = step_with_dt(s, c, h);
    const FlowState two = step_with_dt(step_with_dt(s, c, h / 2), c, h / 2);
    return (one.phi - two.phi).sup_norm();
  };
  const double h = a.dt;
  CHECK(defect(h) / defect(h / 2) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("stable_dt scales with h^2") {
  const double a = stable_dt(GridSpec{2, 8, 2}, 1.0, 0.5);
  const double b = stable_dt(GridSpec{2, 16, 2}, 1.0, 0.5);
  CHECK(a / b == doctest::Approx(4.0));
  CHECK(stable_dt(GridSpec{2, 8, 4}, 1.0, 0.5) < a);
}

TEST_CASE("constant data converges immediately") {
  const FlowReport r = run_flow(lbmcf_config(2, 8, {3.0, 5.0}, 0.0));
  CHECK(r.verdict == FlowVerdict::CONVERGED_RIGID);
  CHECK(r.final_state.steps == 0);
  for (double v : r.final_state.monitors.eigen_variance) CHECK(v == 0.0);
  CHECK(r.subharmonic_min == 0.0);
}

TEST_CASE("LBMCF converges to constant eigenvalues") {
  FlowConfig c = lbmcf_config(2, 8, {3.0, 5.0}, 0.05);
  const FlowReport r = run_flow(c);
  CHECK(r.verdict == FlowVerdict::CONVERGED_RIGID);
  CHECK(r.final_state.monitors.residual_sup < 1e-8);
  for (double v : r.final_state.monitors.eigen_variance) CHECK(v <= 1e-6);
  CHECK(r.final_state.monitors.eigen_mean[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.final_state.monitors.eigen_mean[1] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(r.first_derivative_residual <= 1e-6);
  CHECK(r.subharmonic_min >= -1e-6);
  CHECK(r.history.size() >= 2);
  CHECK(r.history.front().residual_sup > r.history.back().residual_sup);
}

TEST_CASE("hypercritical initial data is recorded") {
  const FlowReport r = run_flow(lbmcf_config(2, 8, {3.0, 5.0}, 0.0));
  CHECK(r.hypercritical_initial);  // atan 3 + atan 5 > pi/2
  const FlowReport s = run_flow(lbmcf_config(2, 8, {0.1, 0.2}, 0.0));
  CHECK_FALSE(s.hypercritical_initial);
}

TEST_CASE("J-flow converges back to omega0") {
  const FlowReport r = run_flow(jflow_config(8, 0.75, 0.05));
  CHECK(r.verdict == FlowVerdict::CONVERGED_RIGID);
  CHECK(r.final_state.phi.sup_norm() <= 1e-6);
  for (const auto& h : r.history) CHECK(h.positivity_margin > 0.0);
  CHECK(r.first_derivative_residual <= 1e-6);
}

TEST_CASE("J-flow with an inconsistent constant does not converge") {
  FlowConfig c = jflow_config(8, 9.99, 0.0);
  const FlowReport r = run_flow(c);
  CHECK(r.verdict == FlowVerdict::NON_CONVERGED);
  CHECK(to_string(r.verdict) == "NON_CONVERGED");
}
