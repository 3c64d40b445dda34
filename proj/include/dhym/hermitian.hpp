#pragma once

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace dhym {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 5;

/// Small dense complex matrix with inline storage (dim <= kMaxDim).
/// Used for pointwise data g, F, chi, omega, eta.  Hermitian symmetry is
/// not enforced on every write; see is_hermitian().
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(int dim);

  static HermitianMatrix identity(int dim);
  static HermitianMatrix diagonal(std::span<const double> values);
  static HermitianMatrix scaled_identity(int dim, double value);

  int dim() const { return dim_; }

  cplx& operator()(int i, int j) { return entries_[i * kMaxDim + j]; }
  const cplx& operator()(int i, int j) const { return entries_[i * kMaxDim + j]; }

  /// Max |a_ij - conj(a_ji)| relative to the max entry modulus.
  double hermitian_defect() const;
  bool is_hermitian(double rel_tol = 1e-10) const;
  /// Replace with (A + A^H)/2.
  void symmetrize();

  double max_abs() const;
  double frobenius() const;
  cplx trace() const;

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;
  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix adjoint() const;

 private:
  int dim_ = 0;
  std::array<cplx, kMaxDim * kMaxDim> entries_{};
};

class NotHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A matrix field that must stay positive definite lost positivity.
class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigen-decomposition of a Hermitian matrix.
struct EigenData {
  std::vector<double> values;      // ascending
  std::vector<double> thetas;      // 1 + lambda^2
  std::vector<double> inv_thetas;  // 1 / (1 + lambda^2)
  HermitianMatrix vectors;         // column k is the eigenvector of values[k]
  std::vector<int> order;          // original (pre-sort) index of each eigenpair
};

EigenData eig_hermitian(const HermitianMatrix& h);
/// Eigenvalues only; cheaper path used by grid loops.
std::vector<double> eigenvalues(const HermitianMatrix& h);
/// Eigenvalues of g^{-1} F for g positive definite (via Cholesky).
std::vector<double> generalized_eigenvalues(const HermitianMatrix& g, const HermitianMatrix& f);

// Dense helpers.  LU with partial pivoting; Cholesky for the positive definite case.
cplx determinant(const HermitianMatrix& a);
HermitianMatrix inverse(const HermitianMatrix& a);
/// Lower-triangular factor L with a = L L^H; throws SingularMatrixError if
/// a is not positive definite.
HermitianMatrix cholesky(const HermitianMatrix& a);
bool is_positive_definite(const HermitianMatrix& a);

// Operator zoo ---------------------------------------------------------------

/// Sum of arctan over the eigenvalues.
double lagrangian_angle(std::span<const double> lams);
/// det(I + i g^{-1} F).
cplx zeta_det(const HermitianMatrix& g, const HermitianMatrix& f);
/// g + F g^{-1} F.
HermitianMatrix eta_form(const HermitianMatrix& g, const HermitianMatrix& f);
/// Sum of 1/lambda; all lambda must be positive.
double j_trace(std::span<const double> lams);
/// Sum k (pi/2 - arctan(k lambda)); tends to j_trace as k -> infinity.
double dhym_to_j_limit(std::span<const double> lams, double k);
/// Second derivative of arctan: -2 lambda / (1 + lambda^2)^2.
double arctan_concavity(double lam);
/// (1 - l^2) / (l (1 + l^2)^2); negative for l > 1.
double glz_condition2_value(double lam_n);

struct RealEmbeddingProbe {
  std::array<std::array<double, 2>, 2> b;
  double b_norm = 0.0;      // max-entry norm
  double probe_norm = 0.0;  // ||Df(B) . B|| = ||B|| / (1 + a^2)
};
RealEmbeddingProbe real_embedding_probe(double a, double c);

}  // namespace dhym
