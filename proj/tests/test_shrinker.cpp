#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "dhym/shrinker.hpp"
#include "doctest.h"

using namespace dhym;

namespace {

constexpr double kPi = std::numbers::pi;

ShrinkerParams dhym_params(int n, double theta0) {
  ShrinkerParams p;
  p.equation = ShrinkerEquation::DHYM;
  p.n = n;
  p.theta0 = theta0;
  return p;
}

ShrinkerParams j_params(int n, double c) {
  ShrinkerParams p;
  p.equation = ShrinkerEquation::J;
  p.n = n;
  p.c = c;
  return p;
}

}  // namespace

TEST_CASE("radial_eigs matches a direct eigendecomposition") {
  for (double v : radial_eigs(3.0, 0.0, 2.0, 3)) CHECK(v == 3.0);
  const auto e = radial_eigs(2.0, 2.0, 1.0, 2);  // psi = s^2 at s = 1
  CHECK(e[0] == doctest::Approx(2.0));
  CHECK(e[1] == doctest::Approx(4.0));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    const int n = 3;
    std::vector<cplx> z(n);
    double s = 0.0;
    for (auto& zi : z) {
      zi = cplx(nd(rng), nd(rng));
      s += std::norm(zi);
    }
    const double p1 = nd(rng), p2 = nd(rng);
    Eigen::MatrixXcd H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H(i, j) = (i == j ? p1 : 0.0) + p2 * std::conj(z[i]) * z[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const auto r = radial_eigs(p1, p2, s, n);
    for (int k = 0; k < n; ++k) CHECK(r[k] == doctest::Approx(es.eigenvalues()(k)).epsilon(1e-10));
    const HermitianMatrix rh = radial_hessian(p1, p2, z);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(std::abs(rh(i, j) - H(i, j)) <= 1e-12);
  }
}

TEST_CASE("shrinker residual examples") {
  CHECK(dhym_shrinker_residual(0.7, 0.7, 1.0, 0.0, kPi / 2, 2) == doctest::Approx(0.0));
  CHECK(dhym_shrinker_residual(0.3, 0.6, 2.0, 0.0, std::atan(2.0), 1) == doctest::Approx(0.0));
  CHECK(dhym_shrinker_residual(0.5, 0.5, 1.0, 0.0, kPi / 2 + 0.1, 2) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(j_shrinker_residual(0.5, 0.5, 1.0, 0.0, 2.0, 2) == doctest::Approx(0.0));
  CHECK(j_shrinker_residual(0.5, 1.0, 2.0, 0.0, 1.0, 2) == doctest::Approx(0.0));
  CHECK(j_shrinker_residual(0.5, 0.5, 1.0, 0.0, 0.0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(j_shrinker_residual(0.5, 0.5, -1.0, 0.0, 2.0, 2), PositivityError);
  CHECK_THROWS_AS(j_shrinker_residual(1.0, 0.5, 1.0, -2.0, 2.0, 2), PositivityError);
}

TEST_CASE("consistent p0 values") {
  CHECK(consistent_p0(dhym_params(2, kPi / 2), 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(consistent_p0(dhym_params(2, kPi / 2), 2.0) == doctest::Approx(kPi / 2 - 2 * std::atan(2.0)));
  CHECK(consistent_p0(j_params(2, 2.0), 1.0) == doctest::Approx(0.0));
  CHECK(consistent_p0(j_params(2, 2.0), 2.0) == doctest::Approx(-1.0));
}

TEST_CASE("quadratic solutions are reproduced") {
  for (const ShrinkerParams& p : {dhym_params(2, kPi / 2), j_params(2, 2.0)}) {
    const ShootResult r = shoot(p, 1.0);
    CHECK(r.classification == ShrinkerClass::QUADRATIC);
    CHECK(r.max_abs_psi2 <= 1e-10);
    CHECK(r.s_reached >= 200.0);
    for (const auto& smp : r.profile.samples) {
      CHECK(std::abs(smp.psi - smp.s) <= 1e-10 * std::max(1.0, smp.s));
      CHECK(std::abs(smp.psi1 - 1.0) <= 1e-10);
    }
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3), ut(-2, -0.1);
    for (int k = 0; k < 20; ++k) {
      const cplx z[2] = {cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
      CHECK(std::abs(selfsimilar_residual(r.profile, z, ut(rng))) <= 1e-8);
    }
  }
}

TEST_CASE("consistent shoots stay on the linear family; kicked shoots leave it") {
  const ShrinkerParams p = dhym_params(2, kPi / 2);
  const ShootResult r = shoot(p, 1.1);
  CHECK(r.classification == ShrinkerClass::QUADRATIC);
  for (const auto& smp : r.profile.samples) CHECK(std::abs(smp.psi - (r.p0 + 1.1 * smp.s)) <= 1e-9 * std::max(1.0, smp.s));

  ShootOptions kicked;
  kicked.kick = 1e-3;
  const ShootResult k = shoot(p, 1.1, kicked);
  CHECK(k.classification != ShrinkerClass::QUADRATIC);
  CHECK(k.classification != ShrinkerClass::INDETERMINATE);
  CHECK(k.max_abs_psi2 > 1e-10);
}

TEST_CASE("invalid shoots are rejected") {
  ShootOptions o;
  o.p0 = 0.3;
  CHECK_THROWS_AS(shoot(dhym_params(2, kPi / 2), 1.0, o), std::invalid_argument);
  CHECK_THROWS_AS(shoot(j_params(2, 2.0), -1.0), std::invalid_argument);
}

TEST_CASE("scans are deterministic and flag regular non-quadratic entries") {
  ShootOptions o;
  o.s_max = 20.0;
  CHECK(rigidity_scan(dhym_params(2, kPi / 2), std::span<const double>{}, o).rows.empty());
  const double grid[] = {0.8, 1.0, 1.2};
  const ScanTable a = rigidity_scan(j_params(2, 2.0), grid, o);
  const ScanTable b = rigidity_scan(j_params(2, 2.0), grid, o);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.property_holds);
  CHECK(a.quadratic_count == 3);
  CHECK(a.to_csv().rfind("q0,", 0) == 0);
}

TEST_CASE("barrier comparisons") {
  const ShootResult q = shoot(dhym_params(2, kPi / 2), 1.0);
  for (double eps : {0.1, 0.01}) {
    const BarrierReport b = barrier_compare(q.profile, eps);
    CHECK(b.r0 == doctest::Approx(std::sqrt(2.0)));
    CHECK(b.dominates);
    CHECK(b.drift_nonpositive);
    CHECK(b.min_gap >= 0.0);
    CHECK(b.samples_checked > 0);
  }
  const ShootResult j = shoot(j_params(2, 2.0), 1.0);
  const BarrierReport bj = barrier_compare(j.profile, 0.1);
  CHECK(bj.dominates);
  CHECK(bj.drift_nonpositive);
  CHECK(bj.eta_bound_held);

  ShootOptions s;
  s.s_max = 1.0;
  CHECK_THROWS_AS(barrier_compare(shoot(dhym_params(2, kPi / 2), 1.0, s).profile, 0.1), std::invalid_argument);
}
