#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "dhym/hermitian.hpp"
#include "doctest.h"

using namespace dhym;

namespace {

HermitianMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd;
  HermitianMatrix h(n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = scale * nd(rng);
    for (int j = i + 1; j < n; ++j) {
      h(i, j) = scale * cplx(nd(rng), nd(rng));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

HermitianMatrix random_pd(int n, std::mt19937_64& rng) {
  HermitianMatrix a = random_hermitian(n, rng);
  HermitianMatrix p = a * a.adjoint();
  for (int i = 0; i < n; ++i) p(i, i) += 0.5;
  p.symmetrize();
  return p;
}

Eigen::MatrixXcd to_eigen(const HermitianMatrix& h) {
  Eigen::MatrixXcd m(h.dim(), h.dim());
  for (int i = 0; i < h.dim(); ++i)
    for (int j = 0; j < h.dim(); ++j) m(i, j) = h(i, j);
  return m;
}

}  // namespace

TEST_CASE("eig_hermitian examples") {
  const double d[] = {3.0, 1.0};
  auto e = eig_hermitian(HermitianMatrix::diagonal(d));
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(3.0));

  HermitianMatrix h(2);
  h(0, 0) = 2.0;
  h(1, 1) = 2.0;
  h(0, 1) = cplx(0, 1);
  h(1, 0) = cplx(0, -1);
  e = eig_hermitian(h);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));

  e = eig_hermitian(HermitianMatrix::identity(4));
  for (double v : e.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian agrees with Eigen and meets the residual contract") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= kMaxDim; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const HermitianMatrix h = random_hermitian(n, rng, trial % 3 == 0 ? 100.0 : 1.0);
      const EigenData ed = eig_hermitian(h);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(h));
      const double hn = std::max(1.0, h.frobenius());
      for (int k = 0; k < n; ++k) {
        REQUIRE(std::abs(ed.values[k] - es.eigenvalues()(k)) <= 1e-12 * hn);
        if (k > 0) REQUIRE(ed.values[k - 1] <= ed.values[k]);
        REQUIRE(ed.thetas[k] == 1.0 + ed.values[k] * ed.values[k]);
        REQUIRE(std::abs(ed.inv_thetas[k] * ed.thetas[k] - 1.0) <= 1e-15);
        double res = 0.0;
        for (int i = 0; i < n; ++i) {
          cplx s = 0.0;
          for (int j = 0; j < n; ++j) s += h(i, j) * ed.vectors(j, k);
          res += std::norm(s - ed.values[k] * ed.vectors(i, k));
        }
        REQUIRE(std::sqrt(res) <= 1e-12 * hn);
      }
    }
  }
}

TEST_CASE("eig_hermitian handles degenerate spectra") {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 5; ++n) {
    // U diag(1,1,...,2) U^H for random unitary U from a Hermitian eigenbasis.
    const EigenData basis = eig_hermitian(random_hermitian(n, rng));
    std::vector<double> d(n, 1.0);
    d.back() = 2.0;
    const HermitianMatrix D = HermitianMatrix::diagonal(d);
    HermitianMatrix h = basis.vectors * D * basis.vectors.adjoint();
    h.symmetrize();
    const EigenData ed = eig_hermitian(h);
    for (int k = 0; k + 1 < n; ++k) CHECK(ed.values[k] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(ed.values.back() == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  HermitianMatrix h(2);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(eig_hermitian(h), NotHermitianError);
}

TEST_CASE("lagrangian_angle examples and monotonicity") {
  const double z[] = {0.0, 0.0, 0.0};
  CHECK(lagrangian_angle(z) == 0.0);
  const double one[] = {1.0};
  CHECK(lagrangian_angle(one) == doctest::Approx(std::numbers::pi / 4));
  const double a[] = {std::sqrt(3.0), 1.0};
  CHECK(lagrangian_angle(a) == doctest::Approx(7 * std::numbers::pi / 12).epsilon(1e-12));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> l = {u(rng), u(rng), u(rng)};
    const double base = lagrangian_angle(l);
    l[t % 3] += 1e-6;
    CHECK(lagrangian_angle(l) > base);
  }
}

TEST_CASE("zeta_det matches angle and modulus identities") {
  const double f12[] = {1.0, 2.0};
  const cplx z = zeta_det(HermitianMatrix::identity(2), HermitianMatrix::diagonal(f12));
  CHECK(z.real() == doctest::Approx(-1.0));
  CHECK(z.imag() == doctest::Approx(3.0));
  CHECK(std::abs(z) == doctest::Approx(std::sqrt(10.0)));
  CHECK(zeta_det(HermitianMatrix::identity(2), HermitianMatrix(2)) == cplx(1.0, 0.0));

  std::mt19937_64 rng(7);
  for (int n = 1; n <= 5; ++n)
    for (int t = 0; t < 100; ++t) {
      const HermitianMatrix h = random_hermitian(n, rng);
      const HermitianMatrix I = HermitianMatrix::identity(n);
      const cplx zz = zeta_det(I, h);
      const double ang = lagrangian_angle(eigenvalues(h));
      double diff = std::remainder(std::arg(zz) - ang, 2 * std::numbers::pi);
      CHECK(std::abs(diff) <= 1e-10 * std::max(1.0, std::abs(ang)));
      const double m2 = std::abs(determinant(I + h * h));
      CHECK(std::norm(zz) == doctest::Approx(m2).epsilon(1e-10));
    }
}

TEST_CASE("zeta_det and eta_form reject singular g") {
  CHECK_THROWS(zeta_det(HermitianMatrix(2), HermitianMatrix::identity(2)));
  CHECK_THROWS(eta_form(HermitianMatrix(2), HermitianMatrix::identity(2)));
}

TEST_CASE("eta_form examples and positivity") {
  const double l[] = {2.0, -3.0};
  const HermitianMatrix e = eta_form(HermitianMatrix::identity(2), HermitianMatrix::diagonal(l));
  CHECK(e(0, 0).real() == doctest::Approx(5.0));
  CHECK(e(1, 1).real() == doctest::Approx(10.0));
  CHECK(std::abs(e(0, 1)) == 0.0);
  const HermitianMatrix e1 = eta_form(HermitianMatrix::scaled_identity(1, 2.0), HermitianMatrix::scaled_identity(1, 2.0));
  CHECK(e1(0, 0).real() == doctest::Approx(4.0));
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 5; ++n)
    for (int t = 0; t < 100; ++t) CHECK(is_positive_definite(eta_form(random_pd(n, rng), random_hermitian(n, rng))));
}

TEST_CASE("generalized eigenvalues match Eigen") {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 4; ++n)
    for (int t = 0; t < 50; ++t) {
      const HermitianMatrix g = random_pd(n, rng), f = random_hermitian(n, rng);
      const auto ev = generalized_eigenvalues(g, f);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(g).inverse() * to_eigen(f));
      std::vector<double> ref;
      for (int k = 0; k < n; ++k) ref.push_back(es.eigenvalues()(k).real());
      std::sort(ref.begin(), ref.end());
      for (int k = 0; k < n; ++k) CHECK(ev[k] == doctest::Approx(ref[k]).epsilon(1e-9));
    }
}

TEST_CASE("j_trace and its dHYM limit") {
  const double a[] = {1.0, 1.0}, b[] = {1.0, 2.0, 3.0}, c[] = {2.0, 4.0};
  CHECK(j_trace(a) == 2.0);
  CHECK(j_trace(b) == doctest::Approx(11.0 / 6.0));
  CHECK(j_trace(c) == doctest::Approx(0.75));
  const double bad[] = {1.0, 0.0};
  CHECK_THROWS(j_trace(bad));
  CHECK_THROWS(dhym_to_j_limit(bad, 10.0));

  const double one[] = {1.0};
  CHECK(dhym_to_j_limit(one, 1e6) == doctest::Approx(1.0).epsilon(1e-9));
  const double l12[] = {1.0, 2.0};
  // 10 (atan 0.1 + atan 0.05), evaluated independently in extended precision.
  CHECK(std::abs(dhym_to_j_limit(l12, 10.0) - 1.4962704821310479) <= 1e-6);

  double prev = 0.0;
  for (double k : {10.0, 20.0, 40.0, 80.0}) {
    const double err = std::abs(dhym_to_j_limit(b, k) - 11.0 / 6.0);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.125));
    prev = err;
  }
}

TEST_CASE("counterexample probes") {
  CHECK(arctan_concavity(0.0) == 0.0);
  CHECK(arctan_concavity(-1.0) == doctest::Approx(0.5));
  CHECK(arctan_concavity(1.0) == doctest::Approx(-0.5));
  CHECK(glz_condition2_value(1.0) == 0.0);
  CHECK(glz_condition2_value(2.0) == doctest::Approx(-0.06));
  CHECK(glz_condition2_value(0.5) == doctest::Approx(0.96));
  CHECK_THROWS(glz_condition2_value(0.0));

  CHECK(real_embedding_probe(0.0, 0.0).probe_norm == 0.0);
  CHECK(real_embedding_probe(1.0, 0.0).probe_norm == doctest::Approx(0.5));
  const double r = real_embedding_probe(1.0, 1e6).probe_norm / real_embedding_probe(1.0, 1e3).probe_norm;
  CHECK(r == doctest::Approx(1e3).epsilon(1e-3));
}

TEST_CASE("dense helpers") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= kMaxDim; ++n) {
    const HermitianMatrix p = random_pd(n, rng);
    const HermitianMatrix inv = inverse(p);
    const HermitianMatrix id = p * inv;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(std::abs(id(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    const HermitianMatrix L = cholesky(p);
    CHECK((L * L.adjoint() - p).max_abs() <= 1e-12 * p.max_abs());
    CHECK(std::abs(determinant(p) - to_eigen(p).determinant()) <= 1e-10 * std::abs(determinant(p)));
  }
  CHECK_THROWS_AS(inverse(HermitianMatrix(3)), SingularMatrixError);
  CHECK_FALSE(is_positive_definite(HermitianMatrix::scaled_identity(2, -1.0)));
}
