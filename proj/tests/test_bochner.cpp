#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dhym/bochner.hpp"
#include "doctest.h"

using namespace dhym;

namespace {

using Mat = Eigen::MatrixXcd;

// F(z) = diag(lam) + sum_k (T_k z_k + T_k^H zbar_k) + sum_{k,l} Q_kl z_k zbar_l on a flat
// chart; its derivatives at 0 are exactly the jet entries when R = 0.
Mat local_F(const PointwiseJet& jet, const std::vector<double>& x) {
  const int n = jet.n;
  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k) z[k] = cplx(x[2 * k], x[2 * k + 1]);
  Mat F = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    F(i, i) = jet.lam[i];
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        F(i, j) += jet.t(i, j, k) * z[k] + std::conj(jet.t(j, i, k)) * std::conj(z[k]);
        for (int l = 0; l < n; ++l) F(i, j) += jet.q(i, j, k, l) * z[k] * std::conj(z[l]);
      }
    }
  }
  return F;
}

double log_det_eta(const PointwiseJet& jet, SolutionKind kind, const std::vector<double>& x) {
  const Mat F = local_F(jet, x);
  Mat eta = F * F;
  if (kind == SolutionKind::DHYM) eta += Mat::Identity(jet.n, jet.n);
  return std::log(eta.determinant().real());
}

// eta^{p pbar} d_p d_pbar log det eta at 0 by Richardson-extrapolated central differences.
double fd_laplacian(const PointwiseJet& jet, SolutionKind kind) {
  const int n = jet.n;
  const auto th = jet_weights(jet.lam, kind);
  std::vector<double> x(2 * n, 0.0);
  const double f0 = log_det_eta(jet, kind, x);
  auto second = [&](int axis, double h) {
    x[axis] = h;
    const double fp = log_det_eta(jet, kind, x);
    x[axis] = -h;
    const double fm = log_det_eta(jet, kind, x);
    x[axis] = 0.0;
    return (fp - 2.0 * f0 + fm) / (h * h);
  };
  double s = 0.0;
  for (int p = 0; p < n; ++p)
    for (int axis : {2 * p, 2 * p + 1}) {
      const double h = 2e-3;
      s += th[p] * 0.25 * (4.0 * second(axis, h / 2) - second(axis, h)) / 3.0;
    }
  return s;
}

std::vector<double> draw_lam(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> l(n);
  for (auto& v : l) v = u(rng);
  return l;
}

}  // namespace

TEST_CASE("zero jets give zero on every form") {
  for (int n = 1; n <= 3; ++n) {
    PointwiseJet jet(n);
    for (int i = 0; i < n; ++i) jet.lam[i] = 1.0 + i;
    const IdentityPair g = lap_expansion_general(jet);
    CHECK(g.a == 0.0);
    CHECK(g.b == 0.0);
    const IdentityPair s = lap_at_solution(jet);
    CHECK(s.a == 0.0);
    CHECK(s.b == 0.0);
    const IdentityPair j = j_lap_at_solution(jet);
    CHECK(j.a == 0.0);
    CHECK(j.b == 0.0);
  }
}

TEST_CASE("random jets carry exact symmetries") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 4; ++n) {
    CurvatureInput R(n);
    for (int i = 0; i < n; ++i)
      for (int p = i + 1; p < n; ++p) R(i, p) = R(p, i) = 0.3 * (i + p);
    const PointwiseJet jet = random_jet(draw_lam(n, -0.5, 2.0, rng), R, rng);
    CHECK(jet.symmetry_defect() == 0.0);
  }
  PointwiseJet bad = random_jet(draw_lam(2, 0.5, 1.0, rng), CurvatureInput(2), rng);
  bad.t(0, 1, 1) += 1.0;
  CHECK_THROWS_AS(lap_expansion_general(bad), std::invalid_argument);
}

TEST_CASE("direct expression matches finite differences of log det eta") {
  std::mt19937_64 rng(3);
  for (SolutionKind kind : {SolutionKind::DHYM, SolutionKind::J}) {
    for (int n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto lam = kind == SolutionKind::J ? draw_lam(n, 0.5, 4.0, rng) : draw_lam(n, -0.5, 2.0, rng);
        PointwiseJet jet = random_jet(lam, CurvatureInput(n), rng);
        const IdentityPair g = lap_expansion_general(jet, kind);
        const double fd = fd_laplacian(jet, kind);
        CAPTURE(n);
        CHECK(std::abs(g.a - fd) <= 1e-6 * g.scale);
        CHECK(g.rel_error() <= 1e-10);
      }
    }
  }
}

TEST_CASE("projections enforce the constraints orthogonally") {
  std::mt19937_64 rng(5);
  for (SolutionKind kind : {SolutionKind::DHYM, SolutionKind::J}) {
    for (int n = 2; n <= 3; ++n) {
      PointwiseJet jet = random_jet(draw_lam(n, 0.5, 3.0, rng), CurvatureInput(n), rng);
      const PointwiseJet orig = jet;
      CHECK(first_constraint_residual(jet, kind) > 1e-3);
      project_first_derivative(jet, kind);
      CHECK(jet.first_constraint_projected);
      CHECK(first_constraint_residual(jet, kind) <= 1e-12);
      CHECK(jet.symmetry_defect() <= 1e-14);
      double inner = 0.0, norm = 0.0;
      for (std::size_t k = 0; k < jet.T.size(); ++k) {
        inner += std::real(std::conj(orig.T[k] - jet.T[k]) * jet.T[k]);
        norm += std::norm(orig.T[k]);
      }
      CHECK(std::abs(inner) <= 1e-12 * norm);
      const PointwiseJet once = jet;
      project_first_derivative(jet, kind);
      for (std::size_t k = 0; k < jet.T.size(); ++k) CHECK(std::abs(jet.T[k] - once.T[k]) <= 1e-14);

      project_second_derivative(jet, kind);
      CHECK(second_constraint_residual(jet, kind) <= 1e-12);
      CHECK(jet.symmetry_defect() <= 1e-13);
    }
  }
}

TEST_CASE("final forms agree with finite differences at projected jets") {
  std::mt19937_64 rng(7);
  for (SolutionKind kind : {SolutionKind::DHYM, SolutionKind::J}) {
    for (int n = 2; n <= 3; ++n) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto lam = kind == SolutionKind::J ? draw_lam(n, 0.5, 4.0, rng) : draw_lam(n, -0.5, 2.0, rng);
        PointwiseJet jet = random_jet(lam, CurvatureInput(n), rng);
        project_first_derivative(jet, kind);
        project_second_derivative(jet, kind);
        const IdentityPair s = kind == SolutionKind::J ? j_lap_at_solution(jet) : lap_at_solution(jet);
        CHECK(s.rel_error() <= 1e-10);
        CHECK(std::abs(s.b - fd_laplacian(jet, kind)) <= 1e-6 * s.scale);
        CHECK(s.b >= 0.0);
      }
    }
  }
}

TEST_CASE("final form computed independently from the closed formula") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const auto lam = draw_lam(n, -0.5, 2.0, rng);
    CurvatureInput R(n);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < n; ++i)
      for (int p = i + 1; p < n; ++p) R(i, p) = R(p, i) = u(rng);
    PointwiseJet jet = random_jet(lam, R, rng);
    project_first_derivative(jet, SolutionKind::DHYM);
    std::vector<double> th(n);
    for (int i = 0; i < n; ++i) th[i] = 1.0 / (1.0 + lam[i] * lam[i]);
    double ref = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p) ref += 2 * th[i] * th[j] * th[p] * (1 + lam[i] * lam[j]) * std::norm(jet.t(j, p, i));
    for (int i = 0; i < n; ++i)
      for (int p = i + 1; p < n; ++p) ref += 2 * th[i] * th[p] * R(i, p) * (lam[i] - lam[p]) * (lam[i] - lam[p]);
    const IdentityPair s = lap_at_solution(jet);
    CHECK(s.b == doctest::Approx(ref).epsilon(1e-12));
    CHECK(s.rel_error() <= 1e-10);
  }
}

TEST_CASE("curvature spot values") {
  PointwiseJet d(2);
  d.lam = {3.0, 5.0};
  d.R(0, 1) = d.R(1, 0) = 1.0;
  // Each unordered pair contributes once: 2 (1/10)(1/26)(3-5)^2.
  CHECK(lap_at_solution(d).b == doctest::Approx(2.0 / 65.0).epsilon(1e-15));
  CHECK(lap_at_solution(d).rel_error() <= 1e-14);

  PointwiseJet j(2);
  j.lam = {2.0, 4.0};
  j.R(0, 1) = j.R(1, 0) = 1.0;
  CHECK(j_lap_at_solution(j).b == doctest::Approx(2.0 / (4.0 * 16.0) * 4.0).epsilon(1e-15));
  CHECK(j_lap_at_solution(j).rel_error() <= 1e-14);
}

TEST_CASE("at-solution forms reject unconstrained or invalid jets") {
  std::mt19937_64 rng(11);
  PointwiseJet jet = random_jet(draw_lam(2, 0.5, 2.0, rng), CurvatureInput(2), rng);
  CHECK_THROWS_AS(lap_at_solution(jet), ConstraintError);
  CHECK_THROWS_AS(j_lap_at_solution(jet), ConstraintError);
  PointwiseJet neg(2);
  neg.lam = {-1.0, 2.0};
  CHECK_THROWS_AS(j_lap_at_solution(neg), std::domain_error);
}

TEST_CASE("subharmonicity regime and constant fields") {
  PointwiseJet jet(2);
  jet.lam = {-2.0, 2.0};
  const SubharmonicityReport r = subharmonicity_point(jet);
  CHECK(r.status == RegimeStatus::REGIME_EXIT);
  CHECK_FALSE(r.regime_ok);
  CHECK(to_string(r.status) == "REGIME_EXIT");

  const double f[] = {3.0, 5.0};
  const SubharmonicityReport c = subharmonicity_monitor(ScalarGridField(GridSpec{2, 8, 2}), HermitianMatrix::diagonal(f));
  CHECK(c.regime_ok);
  CHECK(c.min_value == 0.0);
  CHECK(c.min_final == 0.0);
  CHECK(c.constraint_residual == 0.0);
}

TEST_CASE("randomized trial batches") {
  for (int n : {2, 3}) {
    const TrialReport g = run_identity_trials(TrialKind::GENERAL, n, 100, 7);
    CHECK(g.max_rel_err <= 1e-10);
    const TrialReport s = run_identity_trials(TrialKind::AT_SOLUTION, n, 100, 7);
    CHECK(s.max_rel_err <= 1e-10);
    CHECK(s.min_final_value >= 0.0);
    CHECK(s.strict_candidates > 0);
    CHECK(s.strict_positive == s.strict_candidates);
    const TrialReport j = run_identity_trials(TrialKind::J_AT_SOLUTION, n, 100, 7);
    CHECK(j.max_rel_err <= 1e-10);
    CHECK(j.min_final_value >= 0.0);
    CHECK(j.strict_positive == j.strict_candidates);
    CHECK(run_identity_trials(TrialKind::AT_SOLUTION, n, 100, 7).to_json() == s.to_json());
  }
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  const auto js = run_identity_trials(TrialKind::GENERAL, 2, 3, 1).to_json();
  CHECK(js.contains("seed"));
  CHECK(js.contains("regime_flags"));
}

TEST_CASE("grid check vanishes at zero and refines at stencil order") {
  const double f[] = {0.7};
  const HermitianMatrix F0 = HermitianMatrix::diagonal(f);
  const GridBochnerReport z = grid_bochner_check(ScalarGridField(GridSpec{1, 32, 2}), F0);
  CHECK(z.lhs_sup == 0.0);
  CHECK(z.rhs_sup == 0.0);
  const TrigPolynomial tp = TrigPolynomial::random(1, 0.01, 21);
  const int Ns[] = {32, 64, 128};
  const RefinementStudy st = grid_bochner_refinement(tp, F0, 1, Ns, 2);
  REQUIRE(st.order.size() == 2);
  CHECK(st.order[1] == doctest::Approx(2.0).epsilon(0.25));
}
