#include "dhym/bochner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dhym {

bool CurvatureInput::is_symmetric(double tol) const {
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p)
      if (std::abs((*this)(i, p) - (*this)(p, i)) > tol) return false;
  return true;
}

bool CurvatureInput::nonnegative() const {
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p)
      if (i != p && (*this)(i, p) < 0.0) return false;
  return true;
}

PointwiseJet::PointwiseJet(int dim)
    : n(dim),
      lam(dim, 0.0),
      T(static_cast<std::size_t>(dim) * dim * dim),
      Q(static_cast<std::size_t>(dim) * dim * dim * dim),
      R(dim) {}

double PointwiseJet::symmetry_defect() const {
  double d = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        d = std::max(d, std::abs(t(i, j, k) - t(k, j, i)));
        for (int l = 0; l < n; ++l) {
          const cplx v = q(i, j, k, l);
          d = std::max(d, std::abs(v - q(k, j, i, l)));
          d = std::max(d, std::abs(v - q(i, l, k, j)));
          d = std::max(d, std::abs(v - std::conj(q(j, i, l, k))));
        }
      }
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) d = std::max(d, std::abs(R(i, p) - R(p, i)));
  return d;
}

std::vector<double> jet_weights(std::span<const double> lam, SolutionKind kind) {
  std::vector<double> w(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (kind == SolutionKind::DHYM) {
      w[i] = 1.0 / (1.0 + lam[i] * lam[i]);
    } else {
      if (!(lam[i] > 0.0)) throw std::domain_error("J-equation jets need positive eigenvalues");
      w[i] = 1.0 / (lam[i] * lam[i]);
    }
  }
  return w;
}

namespace {

double IdentityPairScale(double s) { return std::max(s, std::numeric_limits<double>::min()); }

/// Full curvature component R_{a bbar c dbar} for a tensor carrying only the
/// bisectional components.
double rfull(const CurvatureInput& R, int a, int b, int c, int d) {
  if (a == c) return 0.0;
  if ((a == b && c == d) || (a == d && c == b)) return R(a, c);
  return 0.0;
}

// Ricci-identity corrections: F_{a bbar,c dbar} = Q + (D + E)/2, F_{a bbar,dbar c} = Q + (E - D)/2.
double dterm(const PointwiseJet& jet, int a, int b, int c, int d) {
  if (a != c && a == d && c == b) return (jet.lam[c] - jet.lam[a]) * jet.R(a, c);
  return 0.0;
}
double eterm(const PointwiseJet& jet, int a, int b, int c, int d) {
  if (a != c && a == b && c == d) return (jet.lam[a] - jet.lam[c]) * jet.R(a, c);
  return 0.0;
}
cplx s_entry(const PointwiseJet& jet, int a, int b, int c, int d) {
  return jet.q(a, b, c, d) + 0.5 * (dterm(jet, a, b, c, d) + eterm(jet, a, b, c, d));
}
cplx u_entry(const PointwiseJet& jet, int a, int b, int c, int d) {
  return jet.q(a, b, c, d) + 0.5 * (eterm(jet, a, b, c, d) - dterm(jet, a, b, c, d));
}

HermitianMatrix t_slice(const PointwiseJet& jet, int p) {
  HermitianMatrix m(jet.n);
  for (int a = 0; a < jet.n; ++a)
    for (int b = 0; b < jet.n; ++b) m(a, b) = jet.t(a, b, p);
  return m;
}

HermitianMatrix lam_matrix(const PointwiseJet& jet) { return HermitianMatrix::diagonal(jet.lam); }

HermitianMatrix eta_of(const HermitianMatrix& F, SolutionKind kind) {
  HermitianMatrix eta = F * F;
  if (kind == SolutionKind::DHYM) eta += HermitianMatrix::identity(F.dim());
  return eta;
}


// Set every entry in the symmetry orbit of Q[a][b][c][d] to v.
void set_orbit(PointwiseJet& jet, int a, int b, int c, int d, cplx v) {
  jet.q(a, b, c, d) = v;
  jet.q(c, b, a, d) = v;
  jet.q(a, d, c, b) = v;
  jet.q(c, d, a, b) = v;
  const cplx w = std::conj(v);
  jet.q(b, a, d, c) = w;
  jet.q(b, c, d, a) = w;
  jet.q(d, a, b, c) = w;
  jet.q(d, c, b, a) = w;
}

/// Value the weighted diagonal trace sum_a w_a Q[a][a][p][q] must take for the
/// differentiated equation to hold.
cplx second_constraint_target(const PointwiseJet& jet, SolutionKind kind, std::span<const double> w, int p, int q) {
  const int n = jet.n;
  const HermitianMatrix F = lam_matrix(jet);
  const HermitianMatrix tp = t_slice(jet, p);
  const HermitianMatrix tqd = t_slice(jet, q).adjoint();
  cplx target;
  if (kind == SolutionKind::DHYM) {
    const HermitianMatrix ei = inverse(eta_of(F, kind));
    const HermitianMatrix dp = tp * F + F * tp;
    target = (ei * dp * ei * tqd).trace();
  } else {
    const HermitianMatrix wi = inverse(F);
    target = (wi * tp * wi * tqd * wi + wi * tqd * wi * tp * wi).trace();
  }
  for (int a = 0; a < n; ++a)
    target -= w[a] * 0.5 * (eterm(jet, a, a, p, q) - dterm(jet, a, a, p, q));
  return target;
}

cplx weighted_diag(const PointwiseJet& jet, std::span<const double> w, int p, int q) {
  cplx s = 0.0;
  for (int a = 0; a < jet.n; ++a) s += w[a] * jet.q(a, a, p, q);
  return s;
}

/// eta^{p qbar} d_p d_qbar log det eta from matrix data: dF[p] = d_p F,
/// dFb[q] = d_qbar F, ddF[p*n+q] = d_p d_qbar F.  Adds term magnitudes to *scale.
cplx lap_logdet(const HermitianMatrix& F, SolutionKind kind, std::span<const HermitianMatrix> dF,
                std::span<const HermitianMatrix> dFb, std::span<const HermitianMatrix> ddF, double* scale) {
  const int n = F.dim();
  const HermitianMatrix ei = inverse(eta_of(F, kind));
  std::vector<HermitianMatrix> deta(n), detab(n);
  for (int p = 0; p < n; ++p) {
    deta[p] = dF[p] * F + F * dF[p];
    detab[p] = dFb[p] * F + F * dFb[p];
  }
  cplx tot = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const HermitianMatrix& x = ddF[p * n + q];
      const HermitianMatrix ddeta = x * F + dF[p] * dFb[q] + dFb[q] * dF[p] + F * x;
      const cplx a = -(ei * detab[q] * ei * deta[p]).trace();
      const cplx b = (ei * ddeta).trace();
      tot += ei(q, p) * (a + b);
      if (scale) *scale = std::max({*scale, std::abs(ei(q, p) * a), std::abs(ei(q, p) * b)});
    }
  return tot;
}

void require_symmetric(const PointwiseJet& jet) {
  if (static_cast<int>(jet.lam.size()) != jet.n || jet.R.n != jet.n)
    throw std::invalid_argument("jet: inconsistent dimensions");
  double mag = 1.0;
  for (const cplx& v : jet.T) mag = std::max(mag, std::abs(v));
  for (const cplx& v : jet.Q) mag = std::max(mag, std::abs(v));
  if (jet.symmetry_defect() > 1e-12 * mag) throw std::invalid_argument("jet: symmetry violated");
}

double penultimate_form(const PointwiseJet& jet, std::span<const double> th, double* scale) {
  const int n = jet.n;
  const auto& lam = jet.lam;
  auto fd = [&](int i, int j, int k) { return jet.t(i, j, k); };
  auto fb = [&](int i, int j, int k) { return std::conj(jet.t(j, i, k)); };
  double tot = 0.0;
  auto add = [&](double v) {
    tot += v;
    if (scale) *scale = std::max(*scale, std::abs(v));
  };
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        add(-th[p] * th[i] * th[j] * (lam[i] + lam[j]) * (lam[i] + lam[j]) * (fb(i, j, p) * fd(j, i, p)).real());
      for (int t = 0; t < n; ++t)
        add(th[p] * th[i] * (fd(i, t, p) * fb(t, i, p) + fb(i, t, p) * fd(t, i, p)).real());
      for (int q = 0; q < n; ++q)
        add(2.0 * th[i] * th[p] * th[q] * lam[i] * (lam[p] + lam[q]) * (fb(p, q, i) * fd(q, p, i)).real());
      if (i != p) add(2.0 * th[i] * th[p] * lam[i] * (lam[i] - lam[p]) * jet.R(i, p));
    }
  return tot;
}

double final_form(const PointwiseJet& jet, SolutionKind kind, double* scale) {
  const int n = jet.n;
  const auto& lam = jet.lam;
  double tot = 0.0;
  auto add = [&](double v) {
    tot += v;
    if (scale) *scale = std::max(*scale, std::abs(v));
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p) {
        const double m2 = std::norm(jet.t(j, p, i));
        if (kind == SolutionKind::DHYM) {
          const double th = 1.0 / ((1.0 + lam[i] * lam[i]) * (1.0 + lam[j] * lam[j]) * (1.0 + lam[p] * lam[p]));
          add(2.0 * th * (1.0 + lam[i] * lam[j]) * m2);
        } else {
          add(2.0 / (lam[i] * lam[j] * lam[p] * lam[p]) * m2);
        }
      }
  for (int i = 0; i < n; ++i)
    for (int p = i + 1; p < n; ++p) {
      const double d2 = (lam[i] - lam[p]) * (lam[i] - lam[p]);
      if (kind == SolutionKind::DHYM)
        add(2.0 * jet.R(i, p) * d2 / ((1.0 + lam[i] * lam[i]) * (1.0 + lam[p] * lam[p])));
      else
        add(2.0 * jet.R(i, p) * d2 / (lam[i] * lam[i] * lam[p] * lam[p]));
    }
  return tot;
}

double tensor_scale(const PointwiseJet& jet) {
  double m = 0.0;
  for (const cplx& v : jet.T) m = std::max(m, std::abs(v));
  return m;
}

IdentityPair at_solution(const PointwiseJet& jet, SolutionKind kind) {
  require_symmetric(jet);
  const auto th = jet_weights(jet.lam, kind);
  const double tol = 1e-10 * std::max(1.0, tensor_scale(jet));
  if (first_constraint_residual(jet, kind) > tol)
    throw ConstraintError("jet does not satisfy the first-derivative constraint; project it first");
  IdentityPair out;
  out.scale = 0.0;
  out.a = penultimate_form(jet, th, &out.scale);
  out.b = final_form(jet, kind, &out.scale);
  out.scale = IdentityPairScale(out.scale);
  return out;
}

}  // namespace

double IdentityPair::rel_error() const { return std::abs(a - b) / IdentityPairScale(scale); }

PointwiseJet random_jet(std::span<const double> lam, const CurvatureInput& R, std::mt19937_64& rng) {
  const int n = static_cast<int>(lam.size());
  PointwiseJet jet(n);
  jet.lam.assign(lam.begin(), lam.end());
  jet.R = R;
  std::normal_distribution<double> nd;
  for (auto& v : jet.T) v = cplx(nd(rng), nd(rng));
  for (auto& v : jet.Q) v = cplx(nd(rng), nd(rng));
  std::vector<cplx> tmp = jet.T;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) jet.t(i, j, k) = 0.5 * (tmp[(i * n + j) * n + k] + tmp[(k * n + j) * n + i]);
  auto idx = [n](int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; };
  std::vector<cplx> a = jet.Q, b(a.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) b[idx(i, j, k, l)] = 0.5 * (a[idx(i, j, k, l)] + a[idx(k, j, i, l)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) a[idx(i, j, k, l)] = 0.5 * (b[idx(i, j, k, l)] + b[idx(i, l, k, j)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          jet.q(i, j, k, l) = 0.5 * (a[idx(i, j, k, l)] + std::conj(a[idx(j, i, l, k)]));
  return jet;
}

void project_first_derivative(PointwiseJet& jet, SolutionKind kind) {
  const int n = jet.n;
  const auto th = jet_weights(jet.lam, kind);
  for (int j = 0; j < n; ++j) {
    // T[p][p][j] and T[j][p][p] are one entry, counted twice in the norm when p != j.
    cplx s = 0.0;
    double denom = 0.0;
    for (int p = 0; p < n; ++p) {
      const double w = p == j ? 1.0 : 2.0;
      s += th[p] * jet.t(p, p, j);
      denom += th[p] * th[p] / w;
    }
    for (int p = 0; p < n; ++p) {
      const double w = p == j ? 1.0 : 2.0;
      const cplx v = jet.t(p, p, j) - (th[p] / w) * s / denom;
      jet.t(p, p, j) = v;
      jet.t(j, p, p) = v;
    }
  }
  jet.first_constraint_projected = true;
}

double first_constraint_residual(const PointwiseJet& jet, SolutionKind kind) {
  const auto th = jet_weights(jet.lam, kind);
  double r = 0.0;
  for (int j = 0; j < jet.n; ++j) {
    cplx s = 0.0;
    for (int p = 0; p < jet.n; ++p) s += th[p] * jet.t(p, p, j);
    r = std::max(r, std::abs(s));
  }
  return r;
}

void project_second_derivative(PointwiseJet& jet, SolutionKind kind) {
  const int n = jet.n;
  const auto w = jet_weights(jet.lam, kind);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;

  // Off-diagonal (p, q): the entries Q[a][a][p][q] are independent across a.
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      const cplx r = second_constraint_target(jet, kind, w, p, q) - weighted_diag(jet, w, p, q);
      for (int a = 0; a < n; ++a) set_orbit(jet, a, a, p, q, jet.q(a, a, p, q) + w[a] * r / w2);
    }

  // Diagonal (p, p): M[a][p] = Q[a][a][p][p] is real symmetric with w^T M = c.
  std::vector<double> r(n);
  for (int p = 0; p < n; ++p) r[p] = (second_constraint_target(jet, kind, w, p, p) - weighted_diag(jet, w, p, p)).real();
  double wr = 0.0;
  for (int p = 0; p < n; ++p) wr += w[p] * r[p];
  for (int a = 0; a < n; ++a)
    for (int p = a; p < n; ++p) {
      const double d = (w[a] * r[p] + r[a] * w[p]) / w2 - wr * w[a] * w[p] / (w2 * w2);
      set_orbit(jet, a, a, p, p, jet.q(a, a, p, p).real() + d);
    }
  jet.second_constraint_projected = true;
}

double second_constraint_residual(const PointwiseJet& jet, SolutionKind kind) {
  const auto w = jet_weights(jet.lam, kind);
  double r = 0.0;
  for (int p = 0; p < jet.n; ++p)
    for (int q = 0; q < jet.n; ++q)
      r = std::max(r, std::abs(second_constraint_target(jet, kind, w, p, q) - weighted_diag(jet, w, p, q)));
  return r;
}

IdentityPair lap_expansion_general(const PointwiseJet& jet, SolutionKind kind) {
  require_symmetric(jet);
  const int n = jet.n;
  if (kind == SolutionKind::J) jet_weights(jet.lam, kind);  // positivity check
  const HermitianMatrix F = lam_matrix(jet);
  IdentityPair out;
  out.scale = 0.0;

  // Left side: direct differentiation of log det eta.
  std::vector<HermitianMatrix> dF(n), dFb(n), ddF(n * n);
  for (int p = 0; p < n; ++p) {
    dF[p] = t_slice(jet, p);
    dFb[p] = dF[p].adjoint();
  }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      HermitianMatrix s(n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s(a, b) = s_entry(jet, a, b, p, q);
      ddF[p * n + q] = s;
    }
  out.a = lap_logdet(F, kind, dF, dFb, ddF, &out.scale).real();

  // Right side: expanded form, fourth derivatives commuted with explicit curvature.
  const HermitianMatrix ei = inverse(eta_of(F, kind));
  auto E = [&](int p, int q) { return ei(q, p); };
  auto fd = [&](int i, int j, int k) { return jet.t(i, j, k); };
  auto fb = [&](int i, int j, int k) { return std::conj(jet.t(j, i, k)); };
  auto deta = [&](int i, int j, int p) {
    cplx s = 0.0;
    for (int b = 0; b < n; ++b) s += fd(i, b, p) * F(b, j) + F(i, b) * fd(b, j, p);
    return s;
  };
  auto detab = [&](int i, int j, int q) {
    cplx s = 0.0;
    for (int b = 0; b < n; ++b) s += fb(i, b, q) * F(b, j) + F(i, b) * fb(b, j, q);
    return s;
  };
  // F_{p qbar, tbar i} rewritten through F_{i tbar, p qbar}.
  auto commuted = [&](int p, int q, int i, int t) {
    cplx v = u_entry(jet, p, q, i, t);
    for (int a = 0; a < n; ++a) v += F(a, t) * rfull(jet.R, p, a, i, q);
    for (int b = 0; b < n; ++b) v -= F(p, b) * rfull(jet.R, b, t, i, q);
    return v;
  };
  cplx tot = 0.0;
  auto add = [&](cplx v) {
    tot += v;
    out.scale = std::max(out.scale, std::abs(v));
  };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const cplx epq = E(p, q), eij = E(i, j);
          cplx quad = 0.0;
          for (int t = 0; t < n; ++t)
            for (int s = 0; s < n; ++s) quad += E(i, t) * E(s, j) * detab(s, t, q);
          add(-epq * quad * deta(i, j, p));
          for (int t = 0; t < n; ++t) {
            add(epq * eij * (fd(i, t, p) * fb(t, j, q) + fb(i, t, q) * fd(t, j, p)));
            add(epq * eij * F(t, j) * commuted(p, q, i, t));
            add(epq * eij * F(i, t) * commuted(p, q, t, j));
          }
        }
  out.b = tot.real();
  out.scale = IdentityPairScale(out.scale);
  return out;
}

IdentityPair lap_at_solution(const PointwiseJet& jet) { return at_solution(jet, SolutionKind::DHYM); }

IdentityPair j_lap_at_solution(const PointwiseJet& jet) {
  for (double l : jet.lam)
    if (!(l > 0.0)) throw std::domain_error("j_lap_at_solution: eigenvalues must be positive");
  return at_solution(jet, SolutionKind::J);
}

// Grid level ------------------------------------------------------------------

namespace {

struct GridJet {
  HermitianGridField F;
  std::vector<ComplexField> d;    // [(a*n+b)*n+p]  d_p F_{a bbar}
  std::vector<ComplexField> db;   // [(a*n+b)*n+q]  d_qbar F_{a bbar}
  std::vector<ComplexField> dd;   // [((a*n+b)*n+p)*n+q]  d_p d_qbar F_{a bbar}
};

GridJet grid_jet(const ScalarGridField& phi, const HermitianMatrix& f0, bool second) {
  const int n = phi.spec().n;
  DerivativeJet jet(phi, phi.spec().stencil_order);
  GridJet g;
  g.F = curvature_field(f0, phi);
  g.d.resize(n * n * n);
  g.db.resize(n * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int p = 0; p < n; ++p) {
        const ComplexFactor f1[3] = {{a, true}, {b, false}, {p, true}};
        const ComplexFactor f2[3] = {{a, true}, {b, false}, {p, false}};
        g.d[(a * n + b) * n + p] = jet.complex_derivative(f1);
        g.db[(a * n + b) * n + p] = jet.complex_derivative(f2);
      }
  if (second) {
    g.dd.resize(n * n * n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            const ComplexFactor f[4] = {{a, true}, {b, false}, {p, true}, {q, false}};
            g.dd[((a * n + b) * n + p) * n + q] = jet.complex_derivative(f);
          }
  }
  return g;
}

}  // namespace

GridBochnerReport grid_bochner_check(const ScalarGridField& phi, const HermitianMatrix& f0) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  const std::size_t m = spec.points();
  const GridJet g = grid_jet(phi, f0, true);

  ScalarGridField logdet(spec);
  std::vector<HermitianMatrix> ei(m);
  for (std::size_t x = 0; x < m; ++x) {
    const HermitianMatrix eta = eta_of(g.F[x], SolutionKind::DHYM);
    logdet[x] = std::log(std::abs(determinant(eta)));
    ei[x] = inverse(eta);
  }
  const HermitianGridField hess = complex_hessian(logdet);

  GridBochnerReport rep;
  rep.lhs_min = std::numeric_limits<double>::infinity();
  std::vector<HermitianMatrix> dF(n), dFb(n), ddF(n * n);
  for (std::size_t x = 0; x < m; ++x) {
    const double lhs = (ei[x] * hess[x]).trace().real();
    for (int p = 0; p < n; ++p) {
      dF[p] = HermitianMatrix(n);
      dFb[p] = HermitianMatrix(n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          dF[p](a, b) = g.d[(a * n + b) * n + p][x];
          dFb[p](a, b) = g.db[(a * n + b) * n + p][x];
        }
    }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        HermitianMatrix s(n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s(a, b) = g.dd[((a * n + b) * n + p) * n + q][x];
        ddF[p * n + q] = s;
      }
    const double rhs = lap_logdet(g.F[x], SolutionKind::DHYM, dF, dFb, ddF, nullptr).real();
    rep.lhs_sup = std::max(rep.lhs_sup, std::abs(lhs));
    rep.rhs_sup = std::max(rep.rhs_sup, std::abs(rhs));
    rep.discrepancy = std::max(rep.discrepancy, std::abs(lhs - rhs));
    rep.lhs_min = std::min(rep.lhs_min, lhs);
  }
  rep.rel_discrepancy = rep.discrepancy / std::max(rep.rhs_sup, 1e-300);
  if (rep.rhs_sup == 0.0 && rep.discrepancy == 0.0) rep.rel_discrepancy = 0.0;
  return rep;
}

RefinementStudy grid_bochner_refinement(const TrigPolynomial& phi, const HermitianMatrix& f0, int n,
                                        std::span<const int> Ns, int stencil_order) {
  RefinementStudy out;
  for (int N : Ns) {
    GridSpec spec{n, N, stencil_order};
    spec.validate();
    out.N.push_back(N);
    out.discrepancy.push_back(grid_bochner_check(phi.sample(spec), f0).discrepancy);
  }
  for (std::size_t k = 1; k < out.N.size(); ++k)
    out.order.push_back(std::log(out.discrepancy[k - 1] / out.discrepancy[k]) /
                        std::log(static_cast<double>(out.N[k]) / out.N[k - 1]));
  return out;
}

std::string to_string(RegimeStatus s) { return s == RegimeStatus::OK ? "OK" : "REGIME_EXIT"; }

SubharmonicityReport subharmonicity_point(const PointwiseJet& jet) {
  SubharmonicityReport rep;
  const int n = jet.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (jet.lam[i] * jet.lam[j] <= -1.0) {
        rep.status = RegimeStatus::REGIME_EXIT;
        rep.regime_ok = false;
      }
  const auto th = jet_weights(jet.lam, SolutionKind::DHYM);
  rep.min_value = penultimate_form(jet, th, nullptr);
  rep.min_final = final_form(jet, SolutionKind::DHYM, nullptr);
  rep.constraint_residual = first_constraint_residual(jet, SolutionKind::DHYM);
  return rep;
}

SubharmonicityReport subharmonicity_monitor(const ScalarGridField& phi, const HermitianMatrix& f0) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  const std::size_t m = spec.points();
  const GridJet g = grid_jet(phi, f0, false);
  SubharmonicityReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.min_final = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < m; ++x) {
    const EigenData ed = eig_hermitian(g.F[x]);
    const HermitianMatrix& V = ed.vectors;
    // Frame e'_i = sum_a conj(V_{ai}) e_a diagonalizes F; T transforms as (hol, antihol, hol).
    PointwiseJet jet(n);
    jet.lam = ed.values;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          cplx s = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                s += std::conj(V(a, i)) * V(b, j) * std::conj(V(c, k)) * g.d[(a * n + b) * n + c][x];
          jet.t(i, j, k) = s;
        }
    const SubharmonicityReport pt = subharmonicity_point(jet);
    if (!pt.regime_ok) {
      rep.regime_ok = false;
      rep.status = RegimeStatus::REGIME_EXIT;
    }
    rep.min_value = std::min(rep.min_value, pt.min_value);
    rep.min_final = std::min(rep.min_final, pt.min_final);
    rep.constraint_residual = std::max(rep.constraint_residual, pt.constraint_residual);
  }
  return rep;
}

// Trials ----------------------------------------------------------------------

std::string to_string(TrialKind k) {
  switch (k) {
    case TrialKind::GENERAL: return "general";
    case TrialKind::AT_SOLUTION: return "at_solution";
    case TrialKind::J_AT_SOLUTION: return "j_at_solution";
  }
  return "unknown";
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

nlohmann::json TrialReport::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["seed"] = seed;
  j["n"] = n;
  j["trials"] = trials;
  j["max_rel_err"] = max_rel_err;
  if (kind == TrialKind::GENERAL)
    j["min_final_value"] = nullptr;
  else
    j["min_final_value"] = min_final_value;
  j["regime_flags"] = {{"violations", regime_violations},
                       {"strict_positive", strict_positive},
                       {"strict_candidates", strict_candidates}};
  return j;
}

TrialReport run_identity_trials(TrialKind kind, int n, int trials, std::uint64_t seed, bool with_curvature) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("run_identity_trials: n out of range");
  TrialReport rep;
  rep.kind = kind;
  rep.seed = seed;
  rep.n = n;
  rep.trials = trials;
  rep.min_final_value = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const bool j_kind = kind == TrialKind::J_AT_SOLUTION;
    std::uniform_real_distribution<double> ul(j_kind ? 0.5 : -0.5, j_kind ? 4.0 : 2.0);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    std::vector<double> lam(n);
    for (auto& l : lam) l = ul(rng);
    CurvatureInput R(n);
    if (with_curvature)
      for (int i = 0; i < n; ++i)
        for (int p = i + 1; p < n; ++p) R(i, p) = R(p, i) = ur(rng);
    PointwiseJet jet = random_jet(lam, R, rng);
    const SolutionKind sk = j_kind ? SolutionKind::J : SolutionKind::DHYM;

    bool in_regime = true;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (lam[i] * lam[j] <= -1.0) in_regime = false;
    if (!in_regime) ++rep.regime_violations;

    if (kind == TrialKind::GENERAL) {
      rep.max_rel_err = std::max(rep.max_rel_err, lap_expansion_general(jet, sk).rel_error());
      continue;
    }
    project_first_derivative(jet, sk);
    project_second_derivative(jet, sk);
    const IdentityPair at = j_kind ? j_lap_at_solution(jet) : lap_at_solution(jet);
    const IdentityPair gen = lap_expansion_general(jet, sk);
    // The direct expression with the constrained jet must agree with the penultimate form too.
    const IdentityPair chain{gen.a, at.a, std::max(gen.scale, at.scale)};
    rep.max_rel_err = std::max({rep.max_rel_err, at.rel_error(), chain.rel_error()});
    if (in_regime) rep.min_final_value = std::min(rep.min_final_value, at.b);
    bool strict = false;
    for (int i = 0; i < n; ++i)
      for (int p = i + 1; p < n; ++p)
        if (R(i, p) > 0.0 && lam[i] != lam[p]) strict = true;
    if (strict) {
      ++rep.strict_candidates;
      if (at.b > 0.0) ++rep.strict_positive;
    }
  }
  if (!std::isfinite(rep.min_final_value)) rep.min_final_value = 0.0;
  return rep;
}

}  // namespace dhym
