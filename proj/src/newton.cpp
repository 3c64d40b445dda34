#include "dhym/newton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fftw3.h>

namespace dhym {

void NewtonConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("NewtonConfig: max_iters must be >= 0");
  if (!(newton_tol > 0.0) || !(linear_tol > 0.0)) throw std::invalid_argument("NewtonConfig: tolerances must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("NewtonConfig: damping must lie in (0, 1]");
  if (linear_max_iters < 1 || restart < 1) throw std::invalid_argument("NewtonConfig: linear iteration limits must be >= 1");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw std::invalid_argument("NewtonConfig: min_step must lie in (0, 1]");
}

std::string to_string(EquationKind k) { return k == EquationKind::DHYM ? "dHYM" : "J"; }

std::string to_string(NewtonVerdict v) {
  switch (v) {
    case NewtonVerdict::CONVERGED: return "CONVERGED";
    case NewtonVerdict::NON_CONVERGED: return "NON_CONVERGED";
    case NewtonVerdict::ABORTED: return "ABORTED";
  }
  return "UNKNOWN";
}

NewtonProblem NewtonProblem::dhym(const HermitianMatrix& f0, const ScalarGridField& target) {
  NewtonProblem p;
  p.kind = EquationKind::DHYM;
  p.f0 = f0;
  p.target = target;
  return p;
}

NewtonProblem NewtonProblem::j(const HermitianMatrix& chi0, const HermitianMatrix& omega0,
                               const ScalarGridField& target) {
  if (!is_positive_definite(chi0)) throw std::invalid_argument("J problem: chi0 must be positive definite");
  NewtonProblem p;
  p.kind = EquationKind::J;
  p.chi0 = chi0;
  p.omega0 = omega0;
  p.target = target;
  return p;
}

ScalarGridField newton_residual(const NewtonProblem& problem, const ScalarGridField& phi) {
  const GridSpec& spec = phi.spec();
  const std::size_t m = spec.points();
  ScalarGridField r(spec);
  if (problem.kind == EquationKind::DHYM) {
    const HermitianGridField F = curvature_field(problem.f0, phi);
#pragma omp parallel for schedule(static)
    for (std::size_t x = 0; x < m; ++x) r[x] = lagrangian_angle(eigenvalues(F[x])) - problem.target[x];
    return r;
  }
  const HermitianGridField W = curvature_field(problem.omega0, phi);
  const HermitianMatrix linv = inverse(cholesky(problem.chi0));
  const HermitianMatrix linv_h = linv.adjoint();
  std::size_t bad = m;
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < m; ++x) {
    HermitianMatrix k = linv * W[x] * linv_h;
    k.symmetrize();
    const auto kap = eigenvalues(k);
    if (!(kap[0] > 0.0)) {
#pragma omp critical
      bad = std::min(bad, x);
      continue;
    }
    r[x] = j_trace(kap) - problem.target[x];
  }
  if (bad < m) throw PositivityError("omega_phi is not positive definite at grid index " + std::to_string(bad));
  return r;
}

HermitianMatrix LinearizedOperator::mean_coefficient() const {
  const int n = spec.n;
  HermitianMatrix c(n);
  for (const auto& m : coef) c += m;
  return c * (1.0 / static_cast<double>(coef.size()));
}

LinearizedOperator linearize(const NewtonProblem& problem, const ScalarGridField& phi) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  const std::size_t m = spec.points();
  LinearizedOperator op;
  op.spec = spec;
  op.coef.resize(m);
  if (problem.kind == EquationKind::DHYM) {
    const HermitianGridField F = curvature_field(problem.f0, phi);
    const HermitianMatrix g = HermitianMatrix::identity(n);
#pragma omp parallel for schedule(static)
    for (std::size_t x = 0; x < m; ++x) {
      op.coef[x] = inverse(eta_form(g, F[x]));
      op.coef[x].symmetrize();
    }
    op.sign = 1.0;
  } else {
    const HermitianGridField W = curvature_field(problem.omega0, phi);
#pragma omp parallel for schedule(static)
    for (std::size_t x = 0; x < m; ++x) {
      const HermitianMatrix wi = inverse(W[x]);
      op.coef[x] = wi * problem.chi0 * wi;
      op.coef[x].symmetrize();
    }
    op.sign = -1.0;
  }
  return op;
}

ScalarGridField apply_linearized(const LinearizedOperator& op, const ScalarGridField& psi) {
  const HermitianGridField H = complex_hessian(psi);
  ScalarGridField out(psi.spec());
  const int n = op.spec.n;
  for (std::size_t x = 0; x < out.size(); ++x) {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += (op.coef[x](a, b) * H[x](b, a)).real();
    out[x] = op.sign * s;
  }
  return out;
}

// Preconditioner ------------------------------------------------------------------

namespace {

// Fourier symbol of the 1-D difference stencils used by the derivative jet.
cplx stencil_symbol(int deriv, int order, double h, double th) {
  if (deriv == 1) {
    if (order == 2) return cplx(0.0, std::sin(th) / h);
    return cplx(0.0, (8.0 * std::sin(th) - std::sin(2.0 * th)) / (6.0 * h));
  }
  if (order == 2) return (2.0 * std::cos(th) - 2.0) / (h * h);
  return (-30.0 + 32.0 * std::cos(th) - 2.0 * std::cos(2.0 * th)) / (12.0 * h * h);
}

}  // namespace

struct FlatPreconditioner::Impl {
  GridSpec spec;
  std::vector<cplx> symbol;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }

  ScalarGridField transform(const ScalarGridField& in, bool invert) const {
    const std::size_t m = spec.points();
    for (std::size_t i = 0; i < m; ++i) {
      buf[i][0] = in[i];
      buf[i][1] = 0.0;
    }
    fftw_execute(fwd);
    for (std::size_t i = 0; i < m; ++i) {
      const cplx v(buf[i][0], buf[i][1]);
      cplx w;
      if (invert)
        w = symbol[i] == cplx(0.0) ? cplx(0.0) : v / symbol[i];
      else
        w = v * symbol[i];
      buf[i][0] = w.real();
      buf[i][1] = w.imag();
    }
    fftw_execute(bwd);
    ScalarGridField out(spec);
    for (std::size_t i = 0; i < m; ++i) out[i] = buf[i][0] / static_cast<double>(m);
    return out;
  }
};

FlatPreconditioner::FlatPreconditioner(const GridSpec& spec, const HermitianMatrix& coef, double sign)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.spec = spec;
  const int n = spec.n;
  const int axes = spec.axes();
  const std::size_t m = spec.points();
  const double h = spec.h();
  im.symbol.resize(m);
  double smax = 0.0;
  std::vector<cplx> d1(axes), d2(axes);
  for (std::size_t i = 0; i < m; ++i) {
    for (int a = 0; a < axes; ++a) {
      const double th = 2.0 * std::numbers::pi * spec.coord(i, a) / spec.N;
      d1[a] = stencil_symbol(1, spec.stencil_order, h, th);
      d2[a] = stencil_symbol(2, spec.stencil_order, h, th);
    }
    auto pair = [&](int u, int v) { return u == v ? d2[u] : d1[u] * d1[v]; };
    cplx s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const int xa = 2 * a, ya = 2 * a + 1, xb = 2 * b, yb = 2 * b + 1;
        const cplx hba = 0.25 * (pair(xb, xa) + cplx(0, 1) * pair(xb, ya) - cplx(0, 1) * pair(yb, xa) + pair(yb, ya));
        s += coef(a, b) * hba;
      }
    im.symbol[i] = sign * s;
    smax = std::max(smax, std::abs(im.symbol[i]));
  }
  for (auto& s : im.symbol)
    if (std::abs(s) <= 1e-13 * smax) s = 0.0;
  im.symbol[0] = 0.0;  // mean mode

  std::vector<int> dims(axes, spec.N);
  im.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
  im.fwd = fftw_plan_dft(axes, dims.data(), im.buf, im.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  im.bwd = fftw_plan_dft(axes, dims.data(), im.buf, im.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FlatPreconditioner::~FlatPreconditioner() = default;

ScalarGridField FlatPreconditioner::apply(const ScalarGridField& r) const { return impl_->transform(r, true); }
ScalarGridField FlatPreconditioner::apply_forward(const ScalarGridField& psi) const {
  return impl_->transform(psi, false);
}

// GMRES -------------------------------------------------------------------------------------

namespace {

double dot(const ScalarGridField& a, const ScalarGridField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const ScalarGridField& a) { return std::sqrt(dot(a, a)); }

}  // namespace

LinearSolveResult gmres_solve(const std::function<ScalarGridField(const ScalarGridField&)>& op,
                              const std::function<ScalarGridField(const ScalarGridField&)>& precond,
                              const ScalarGridField& b, double rel_tol, int max_iters, int restart) {
  LinearSolveResult res;
  res.x = ScalarGridField(b.spec());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  int total = 0;
  while (true) {
    ScalarGridField r = b - op(res.x);
    const double beta = norm2(r);
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= rel_tol) {
      res.converged = true;
      break;
    }
    if (total >= max_iters) break;

    const int k_max = std::min(restart, max_iters - total);
    std::vector<ScalarGridField> V, Z;
    V.push_back(r * (1.0 / beta));
    std::vector<std::vector<double>> H(k_max + 1, std::vector<double>(k_max, 0.0));
    std::vector<double> cs(k_max, 0.0), sn(k_max, 0.0), g(k_max + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < k_max; ++k) {
      Z.push_back(precond(V[k]));
      ScalarGridField w = op(Z[k]);
      for (int i = 0; i <= k; ++i) {
        H[i][k] = dot(w, V[i]);
        w.axpy(-H[i][k], V[i]);
      }
      H[k + 1][k] = norm2(w);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
        H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
        H[i][k] = t;
      }
      const double den = std::hypot(H[k][k], H[k + 1][k]);
      const double hk1 = H[k + 1][k];
      if (den == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = H[k][k] / den;
        sn[k] = hk1 / den;
      }
      H[k][k] = den;
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++total;
      const bool breakdown = hk1 <= 1e-14 * bnorm;
      if (!breakdown) V.push_back(w * (1.0 / hk1));
      if (std::abs(g[k + 1]) / bnorm <= rel_tol || breakdown) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k upper triangle.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = H[i][i] != 0.0 ? s / H[i][i] : 0.0;
    }
    for (int i = 0; i < k; ++i) res.x.axpy(y[i], Z[i]);
  }
  res.iterations = total;
  return res;
}

// Newton ------------------------------------------------------------------------------------

NewtonResult newton_solve(const NewtonProblem& problem, const ScalarGridField& phi_init, const NewtonConfig& cfg) {
  cfg.validate();
  phi_init.spec().validate();
  if (problem.target.size() != phi_init.size()) throw std::invalid_argument("newton: target field size mismatch");
  NewtonResult out;
  out.phi = mean_zero(phi_init);
  NewtonReport& rep = out.report;

  ScalarGridField R;
  try {
    R = newton_residual(problem, out.phi);
  } catch (const PositivityError& e) {
    rep.verdict = NewtonVerdict::ABORTED;
    rep.message = std::string("initial guess invalid: ") + e.what();
    return out;
  }
  double res = R.sup_norm();
  NewtonHistoryRow row;
  for (int it = 0;; ++it) {
    row.iter = it;
    row.residual_sup = res;
    rep.history.push_back(row);
    rep.iterations = it;
    rep.final_residual = res;
    if (!std::isfinite(res)) {
      rep.verdict = NewtonVerdict::ABORTED;
      rep.message = "non-finite residual";
      return out;
    }
    if (res <= cfg.newton_tol) {
      rep.verdict = NewtonVerdict::CONVERGED;
      rep.message = "residual below newton_tol";
      return out;
    }
    if (it >= cfg.max_iters) {
      rep.verdict = NewtonVerdict::NON_CONVERGED;
      std::ostringstream os;
      os << "max_iters reached; residual " << res << ", mean residual " << average(R);
      rep.message = os.str();
      return out;
    }

    const LinearizedOperator L = linearize(problem, out.phi);
    const FlatPreconditioner M(L.spec, L.mean_coefficient(), L.sign);
    auto op = [&](const ScalarGridField& v) { return mean_zero(apply_linearized(L, v)); };
    auto pc = [&](const ScalarGridField& v) { return M.apply(v); };
    const ScalarGridField rhs = mean_zero(R) * -1.0;
    const LinearSolveResult ls = gmres_solve(op, pc, rhs, cfg.linear_tol, cfg.linear_max_iters, cfg.restart);
    ScalarGridField delta = mean_zero(ls.x);
    if (!ls.converged) rep.linear_stagnation = true;

    // Backtracking on the residual sup norm.
    double alpha = cfg.damping;
    bool accepted = false;
    ScalarGridField trial, Rt;
    while (alpha >= cfg.min_step * (1.0 - 1e-12)) {
      trial = out.phi;
      trial.axpy(alpha, delta);
      trial = mean_zero(trial);
      try {
        Rt = newton_residual(problem, trial);
        if (Rt.sup_norm() < res) {
          accepted = true;
          break;
        }
      } catch (const PositivityError&) {
        // step leaves the admissible cone; shorten it
      }
      alpha *= 0.5;
    }
    row = NewtonHistoryRow{};
    row.linear_iters = ls.iterations;
    row.linear_converged = ls.converged;
    if (!accepted) {
      rep.verdict = NewtonVerdict::NON_CONVERGED;
      std::ostringstream os;
      os << "line search failed at residual " << res << " (mean residual " << average(R) << ")";
      if (!ls.converged) os << "; inner solve stagnated at relative residual " << ls.rel_residual;
      rep.message = os.str();
      rep.history.back().linear_iters = ls.iterations;
      rep.history.back().linear_converged = ls.converged;
      return out;
    }
    row.step_length = alpha;
    row.step_norm = alpha * delta.sup_norm();
    out.phi = trial;
    R = Rt;
    res = R.sup_norm();
  }
}

NewtonResult newton_dhym(const HermitianMatrix& f0, double hat_theta, const ScalarGridField& phi_init,
                         const NewtonConfig& cfg) {
  return newton_solve(NewtonProblem::dhym(f0, ScalarGridField(phi_init.spec(), hat_theta)), phi_init, cfg);
}

NewtonResult newton_j(const HermitianMatrix& chi0, const HermitianMatrix& omega0, double c,
                      const ScalarGridField& phi_init, const NewtonConfig& cfg) {
  return newton_solve(NewtonProblem::j(chi0, omega0, ScalarGridField(phi_init.spec(), c)), phi_init, cfg);
}

LinearizationCheck linearization_check(const NewtonProblem& problem, const ScalarGridField& phi,
                                       const ScalarGridField& psi, std::span<const double> eps) {
  LinearizationCheck out;
  const ScalarGridField Lpsi = apply_linearized(linearize(problem, phi), psi);
  for (double e : eps) {
    ScalarGridField plus = phi, minus = phi;
    plus.axpy(e, psi);
    minus.axpy(-e, psi);
    ScalarGridField fd = newton_residual(problem, plus) - newton_residual(problem, minus);
    fd *= 1.0 / (2.0 * e);
    out.eps.push_back(e);
    out.errors.push_back((fd - Lpsi).sup_norm());
  }
  for (std::size_t k = 1; k < out.eps.size(); ++k)
    out.orders.push_back(std::log(out.errors[k - 1] / out.errors[k]) / std::log(out.eps[k - 1] / out.eps[k]));
  return out;
}

}  // namespace dhym
