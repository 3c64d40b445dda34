#include "dhym/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace dhym {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("matrix dimension " + std::to_string(dim) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("matrix dimension mismatch");
}

double off_diagonal_norm(const HermitianMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Cyclic complex Jacobi.  Returns eigenvalues on the diagonal of `a` and
// eigenvectors as the columns of `v`.
void jacobi(HermitianMatrix& a, HermitianMatrix& v) {
  const int n = a.dim();
  v = HermitianMatrix::identity(n);
  const double scale = std::max(a.frobenius(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale) return;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq_abs = std::abs(a(p, q));
        if (apq_abs <= 1e-300) continue;
        const cplx phase = a(p, q) / apq_abs;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * apq_abs);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, conj(phase)) on (p,q) followed by the real rotation.
        const cplx jpp = c;
        const cplx jpq = s;
        const cplx jqp = -s * std::conj(phase);
        const cplx jqq = c * std::conj(phase);
        // a <- a J
        for (int k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
        // a <- J^H a
        for (int k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }
}

void eig2(const HermitianMatrix& h, double& lo, double& hi) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const double m = 0.5 * (a + d);
  const double r = std::hypot(0.5 * (a - d), std::abs(h(0, 1)));
  lo = m - r;
  hi = m + r;
}

// Unit eigenvector of a 2x2 Hermitian matrix for eigenvalue lam.
void eigvec2(const HermitianMatrix& h, double lam, cplx& v0, cplx& v1) {
  const cplx b = h(0, 1);
  // Two candidate null vectors; keep the better conditioned one.
  const cplx x0 = b, x1 = lam - h(0, 0).real();
  const cplx y0 = lam - h(1, 1).real(), y1 = std::conj(b);
  const double nx = std::sqrt(std::norm(x0) + std::norm(x1));
  const double ny = std::sqrt(std::norm(y0) + std::norm(y1));
  if (std::max(nx, ny) <= 1e-300) {
    v0 = 1.0;
    v1 = 0.0;
  } else if (nx >= ny) {
    v0 = x0 / nx;
    v1 = x1 / nx;
  } else {
    v0 = y0 / ny;
    v1 = y1 / ny;
  }
}

}  // namespace

// HermitianMatrix -------------------------------------------------------------

HermitianMatrix::HermitianMatrix(int dim) : dim_(dim) { check_dim(dim); }

HermitianMatrix HermitianMatrix::identity(int dim) { return scaled_identity(dim, 1.0); }

HermitianMatrix HermitianMatrix::scaled_identity(int dim, double value) {
  HermitianMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = value;
  return m;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  HermitianMatrix m(static_cast<int>(values.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = values[i];
  return m;
}

double HermitianMatrix::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

double HermitianMatrix::frobenius() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s += std::norm((*this)(i, j));
  return std::sqrt(s);
}

double HermitianMatrix::hermitian_defect() const {
  double d = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  const double scale = max_abs();
  return scale > 0.0 ? d / scale : d;
}

bool HermitianMatrix::is_hermitian(double rel_tol) const { return hermitian_defect() <= rel_tol; }

void HermitianMatrix::symmetrize() {
  for (int i = 0; i < dim_; ++i) {
    (*this)(i, i) = (*this)(i, i).real();
    for (int j = i + 1; j < dim_; ++j) {
      const cplx avg = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
      (*this)(i, j) = avg;
      (*this)(j, i) = std::conj(avg);
    }
  }
}

cplx HermitianMatrix::trace() const {
  cplx t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  HermitianMatrix r = *this;
  r += o;
  return r;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  require_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  require_same_dim(*this, o);
  HermitianMatrix r(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) r(i, j) = (*this)(i, j) - o(i, j);
  return r;
}

namespace {

template <int N>
void multiply_fixed(const cplx* a, const cplx* b, cplx* r) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double re = 0.0, im = 0.0;
      for (int k = 0; k < N; ++k) {
        const cplx x = a[i * kMaxDim + k], y = b[k * kMaxDim + j];
        re += x.real() * y.real() - x.imag() * y.imag();
        im += x.real() * y.imag() + x.imag() * y.real();
      }
      r[i * kMaxDim + j] = cplx(re, im);
    }
}

}  // namespace

HermitianMatrix HermitianMatrix::operator*(const HermitianMatrix& o) const {
  require_same_dim(*this, o);
  HermitianMatrix r(dim_);
  const cplx* a = entries_.data();
  const cplx* b = o.entries_.data();
  cplx* out = r.entries_.data();
  switch (dim_) {
    case 1: multiply_fixed<1>(a, b, out); break;
    case 2: multiply_fixed<2>(a, b, out); break;
    case 3: multiply_fixed<3>(a, b, out); break;
    case 4: multiply_fixed<4>(a, b, out); break;
    case 5: multiply_fixed<5>(a, b, out); break;
    default:
      for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < dim_; ++k) {
          const cplx aik = (*this)(i, k);
          for (int j = 0; j < dim_; ++j) r(i, j) += aik * o(k, j);
        }
  }
  return r;
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  HermitianMatrix r = *this;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) r(i, j) *= s;
  return r;
}

HermitianMatrix HermitianMatrix::adjoint() const {
  HermitianMatrix r(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) r(i, j) = std::conj((*this)(j, i));
  return r;
}

// Eigen-decomposition -----------------------------------------------------------

EigenData eig_hermitian(const HermitianMatrix& h) {
  if (!h.is_hermitian(1e-10)) {
    throw NotHermitianError("eig_hermitian: input violates Hermitian symmetry (defect " +
                            std::to_string(h.hermitian_defect()) + ")");
  }
  const int n = h.dim();
  std::vector<double> raw(n);
  HermitianMatrix vecs(n);
  if (n == 1) {
    raw[0] = h(0, 0).real();
    vecs(0, 0) = 1.0;
  } else if (n == 2) {
    eig2(h, raw[0], raw[1]);
    for (int k = 0; k < 2; ++k) eigvec2(h, raw[k], vecs(0, k), vecs(1, k));
    if (raw[0] == raw[1]) vecs = HermitianMatrix::identity(2);
  } else {
    HermitianMatrix a = h;
    a.symmetrize();
    jacobi(a, vecs);
    for (int i = 0; i < n; ++i) raw[i] = a(i, i).real();
  }

  EigenData out;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) { return raw[a] < raw[b]; });
  out.vectors = HermitianMatrix(n);
  for (int k = 0; k < n; ++k) {
    const int src = out.order[k];
    const double lam = raw[src];
    out.values.push_back(lam);
    out.thetas.push_back(1.0 + lam * lam);
    out.inv_thetas.push_back(1.0 / (1.0 + lam * lam));
    for (int i = 0; i < n; ++i) out.vectors(i, k) = vecs(i, src);
  }
  return out;
}

std::vector<double> eigenvalues(const HermitianMatrix& h) {
  const int n = h.dim();
  if (n == 1) return {h(0, 0).real()};
  if (n == 2) {
    std::vector<double> v(2);
    eig2(h, v[0], v[1]);
    return v;
  }
  HermitianMatrix a = h;
  a.symmetrize();
  HermitianMatrix vecs;
  jacobi(a, vecs);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a(i, i).real();
  std::sort(v.begin(), v.end());
  return v;
}

// Dense helpers -------------------------------------------------------------------

cplx determinant(const HermitianMatrix& m) {
  const int n = m.dim();
  HermitianMatrix a = m;
  cplx det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) == 0.0) return 0.0;
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
      det = -det;
    }
    det *= a(col, col);
    for (int r = col + 1; r < n; ++r) {
      const cplx f = a(r, col) / a(col, col);
      for (int k = col; k < n; ++k) a(r, k) -= f * a(col, k);
    }
  }
  return det;
}

HermitianMatrix inverse(const HermitianMatrix& m) {
  const int n = m.dim();
  HermitianMatrix a = m;
  HermitianMatrix inv = HermitianMatrix::identity(n);
  const double scale = std::max(m.max_abs(), 1e-300);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::norm(a(r, col)) > std::norm(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) <= 1e-14 * scale) throw SingularMatrixError("inverse: singular matrix");
    if (piv != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(a(piv, k), a(col, k));
        std::swap(inv(piv, k), inv(col, k));
      }
    }
    const cplx d = 1.0 / a(col, col);
    for (int k = 0; k < n; ++k) {
      a(col, k) *= d;
      inv(col, k) *= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = a(r, col);
      if (f == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        a(r, k) -= f * a(col, k);
        inv(r, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

HermitianMatrix cholesky(const HermitianMatrix& a) {
  const int n = a.dim();
  HermitianMatrix l(n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw SingularMatrixError("cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

bool is_positive_definite(const HermitianMatrix& a) {
  try {
    cholesky(a);
    return true;
  } catch (const SingularMatrixError&) {
    return false;
  }
}

std::vector<double> generalized_eigenvalues(const HermitianMatrix& g, const HermitianMatrix& f) {
  require_same_dim(g, f);
  const HermitianMatrix linv = inverse(cholesky(g));
  HermitianMatrix m = linv * f * linv.adjoint();
  m.symmetrize();
  return eigenvalues(m);
}

// Operator zoo --------------------------------------------------------------------

double lagrangian_angle(std::span<const double> lams) {
  double s = 0.0;
  for (double l : lams) s += std::atan(l);
  return s;
}

cplx zeta_det(const HermitianMatrix& g, const HermitianMatrix& f) {
  require_same_dim(g, f);
  const cplx dg = determinant(g);
  if (std::abs(dg) <= 1e-300) throw SingularMatrixError("zeta_det: singular metric");
  HermitianMatrix m = g;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) m(i, j) += cplx(0.0, 1.0) * f(i, j);
  return determinant(m) / dg;
}

HermitianMatrix eta_form(const HermitianMatrix& g, const HermitianMatrix& f) {
  require_same_dim(g, f);
  HermitianMatrix eta = g + f * inverse(g) * f;
  eta.symmetrize();
  return eta;
}

double j_trace(std::span<const double> lams) {
  double s = 0.0;
  for (double l : lams) {
    if (!(l > 0.0)) throw std::domain_error("j_trace: eigenvalues must be positive");
    s += 1.0 / l;
  }
  return s;
}

double dhym_to_j_limit(std::span<const double> lams, double k) {
  if (!(k > 0.0)) throw std::domain_error("dhym_to_j_limit: k must be positive");
  double s = 0.0;
  for (double l : lams) {
    if (!(l > 0.0)) throw std::domain_error("dhym_to_j_limit: eigenvalues must be positive");
    // pi/2 - atan(x) = atan(1/x) for x > 0; avoids cancellation at large k.
    s += k * std::atan(1.0 / (k * l));
  }
  return s;
}

double arctan_concavity(double lam) {
  const double t = 1.0 + lam * lam;
  return -2.0 * lam / (t * t);
}

double glz_condition2_value(double lam_n) {
  if (!(lam_n > 0.0)) throw std::domain_error("glz_condition2_value: lambda_n must be positive");
  const double t = 1.0 + lam_n * lam_n;
  return (1.0 - lam_n * lam_n) / (lam_n * t * t);
}

RealEmbeddingProbe real_embedding_probe(double a, double c) {
  RealEmbeddingProbe p;
  p.b = {{{a, c}, {c, a}}};
  p.b_norm = std::max(std::abs(a), std::abs(c));
  p.probe_norm = p.b_norm / (1.0 + a * a);
  return p;
}

}  // namespace dhym
