#include "dhym/shrinker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dhym/report.hpp"

namespace dhym {

std::string to_string(ShrinkerEquation e) { return e == ShrinkerEquation::DHYM ? "dHYM" : "J"; }

std::string to_string(ShrinkerClass c) {
  switch (c) {
    case ShrinkerClass::QUADRATIC: return "QUADRATIC";
    case ShrinkerClass::HESSIAN_BLOWUP: return "HESSIAN_BLOWUP";
    case ShrinkerClass::PSH_EXIT: return "PSH_EXIT";
    case ShrinkerClass::INTEGRATION_FAILURE: return "INTEGRATION_FAILURE";
    case ShrinkerClass::INDETERMINATE: return "INDETERMINATE";
  }
  return "UNKNOWN";
}

std::vector<double> radial_eigs(double psi1, double psi2, double s, int n) {
  if (n < 1) throw std::invalid_argument("radial_eigs: n must be positive");
  if (s < 0.0) throw std::invalid_argument("radial_eigs: s must be nonnegative");
  std::vector<double> e(n - 1, psi1);
  e.push_back(psi1 + s * psi2);
  std::sort(e.begin(), e.end());
  return e;
}

HermitianMatrix radial_hessian(double psi1, double psi2, std::span<const cplx> z) {
  const int n = static_cast<int>(z.size());
  HermitianMatrix h(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = (i == j ? psi1 : 0.0) + psi2 * std::conj(z[i]) * z[j];
  return h;
}

double dhym_shrinker_residual(double s, double psi, double psi1, double psi2, double theta0, int n) {
  return (n - 1) * std::atan(psi1) + std::atan(psi1 + s * psi2) - theta0 - (s * psi1 - psi);
}

double j_shrinker_residual(double s, double psi, double psi1, double psi2, double c, int n) {
  const double ln = psi1 + s * psi2;
  if (!(psi1 > 0.0) || !(ln > 0.0)) throw PositivityError("j_shrinker_residual: Hessian not positive");
  return c - ((n - 1) / psi1 + 1.0 / ln) - (s * psi1 - psi);
}

double consistent_p0(const ShrinkerParams& params, double q0) {
  if (params.equation == ShrinkerEquation::DHYM) return params.theta0 - params.n * std::atan(q0);
  if (!(q0 > 0.0)) throw std::invalid_argument("J shrinker needs q0 > 0");
  return -(params.c - params.n / q0);
}

namespace {

// State (w, q) with w = psi - s psi' and q = psi'.  Then w' = -P and q' = P / s,
// where P = s psi'' is fixed by the equation.  Quadratic data is the fixed line P = 0.
using State = std::array<double, 2>;

enum class Invalid { NONE, SATURATION, PSH };

struct Eval {
  double P = 0.0;
  Invalid why = Invalid::NONE;
};

Eval eval_P(const ShrinkerParams& p, const State& y) {
  const double w = y[0], q = y[1];
  Eval e;
  if (p.equation == ShrinkerEquation::DHYM) {
    // arctan(psi' + s psi'') - arctan(psi') = B
    const double B = (p.theta0 - p.n * std::atan(q)) - w;
    if (!(std::abs(B) < std::numbers::pi / 2)) {
      e.why = Invalid::SATURATION;
      return e;
    }
    const double tb = std::tan(B);
    const double den = 1.0 - q * tb;
    if (!(den > 0.0)) {
      e.why = Invalid::SATURATION;
      return e;
    }
    e.P = tb * (1.0 + q * q) / den;
  } else {
    if (!(q > 0.0)) {
      e.why = Invalid::PSH;
      return e;
    }
    // 1 / (psi' + s psi'') = A = 1/q + Bp
    const double Bp = (p.c - p.n / q) + w;
    const double A = 1.0 / q + Bp;
    if (!(A > 0.0)) {
      e.why = Invalid::PSH;
      return e;
    }
    e.P = -q * Bp / A;
  }
  if (!std::isfinite(e.P)) e.why = Invalid::SATURATION;
  return e;
}

struct Deriv {
  State dy{};
  Invalid why = Invalid::NONE;
};

Deriv rhs(const ShrinkerParams& p, double s, const State& y) {
  const Eval e = eval_P(p, y);
  Deriv d;
  d.why = e.why;
  if (e.why != Invalid::NONE) return d;
  d.dy = {-e.P, s > 0.0 ? e.P / s : 0.0};
  return d;
}

struct StepOut {
  State y{};
  Invalid why = Invalid::NONE;
};

StepOut rk4(const ShrinkerParams& p, double s, const State& y, double h) {
  StepOut out;
  auto at = [&](const State& base, const State& k, double f) {
    return State{base[0] + f * k[0], base[1] + f * k[1]};
  };
  const Deriv k1 = rhs(p, s, y);
  if ((out.why = k1.why) != Invalid::NONE) return out;
  const Deriv k2 = rhs(p, s + h / 2, at(y, k1.dy, h / 2));
  if ((out.why = k2.why) != Invalid::NONE) return out;
  const Deriv k3 = rhs(p, s + h / 2, at(y, k2.dy, h / 2));
  if ((out.why = k3.why) != Invalid::NONE) return out;
  const Deriv k4 = rhs(p, s + h, at(y, k3.dy, h));
  if ((out.why = k4.why) != Invalid::NONE) return out;
  for (int i = 0; i < 2; ++i) out.y[i] = y[i] + h / 6 * (k1.dy[i] + 2 * k2.dy[i] + 2 * k3.dy[i] + k4.dy[i]);
  if (!std::isfinite(out.y[0]) || !std::isfinite(out.y[1])) out.why = Invalid::SATURATION;
  return out;
}

struct Advance {
  State y{};
  double s = 0.0;
  Invalid why = Invalid::NONE;
  bool collapsed = false;
  double h_next = 0.0;
};

/// One adaptive step by step doubling; h shrinks until accepted or collapses.
Advance adaptive_step(const ShrinkerParams& p, double s, const State& y, double h, double h_max, double tol) {
  Advance a;
  Invalid last = Invalid::NONE;
  while (true) {
    const double h_min = 1e-13 * std::max(1.0, s);
    if (h < h_min) {
      a.collapsed = true;
      a.why = last;
      return a;
    }
    const StepOut big = rk4(p, s, y, h);
    StepOut half = big.why == Invalid::NONE ? rk4(p, s, y, h / 2) : big;
    StepOut two = half.why == Invalid::NONE ? rk4(p, s + h / 2, half.y, h / 2) : half;
    if (big.why != Invalid::NONE || two.why != Invalid::NONE) {
      last = big.why != Invalid::NONE ? big.why : two.why;
      h *= 0.25;
      continue;
    }
    double err = 0.0;
    for (int i = 0; i < 2; ++i) err = std::max(err, std::abs(big.y[i] - two.y[i]) / 15.0 / (1.0 + std::abs(two.y[i])));
    if (err <= tol) {
      a.y = {two.y[0] + (two.y[0] - big.y[0]) / 15.0, two.y[1] + (two.y[1] - big.y[1]) / 15.0};
      a.s = s + h;
      const double grow = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 4.0);
      a.h_next = std::min(h * grow, h_max);
      return a;
    }
    h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.5);
  }
}

RadialSample sample_of(const ShrinkerParams& p, double s, const State& y, double psi2_fallback) {
  RadialSample r;
  r.s = s;
  r.psi1 = y[1];
  r.psi = y[0] + s * y[1];
  if (s > 0.0) {
    const Eval e = eval_P(p, y);
    r.psi2 = e.why == Invalid::NONE ? e.P / s : std::numeric_limits<double>::quiet_NaN();
  } else {
    r.psi2 = psi2_fallback;
  }
  return r;
}

void validate_params(const ShrinkerParams& p) {
  if (p.n < 1 || p.n > kMaxDim) throw std::invalid_argument("shrinker: n out of range");
  if (p.equation == ShrinkerEquation::J && !(p.delta > 0.0)) throw std::invalid_argument("shrinker: delta must be > 0");
}

}  // namespace

ShootResult shoot(const ShrinkerParams& params, double q0, const ShootOptions& opt) {
  validate_params(params);
  if (!(opt.s_max > opt.s_start) || !(opt.s_start > 0.0)) throw std::invalid_argument("shoot: need 0 < s_start < s_max");
  const double p0 = consistent_p0(params, q0);
  if (opt.p0 && std::abs(*opt.p0 - p0) > 1e-12 * (1.0 + std::abs(p0)))
    throw std::invalid_argument("shoot: (q0, p0) violates the s = 0 relation");

  ShootResult res;
  res.q0 = q0;
  res.p0 = p0;
  res.profile.params = params;
  auto& samples = res.profile.samples;
  samples.push_back({0.0, p0, q0, opt.kick});

  // Two-term series off the origin.
  double s = opt.s_start;
  State y{p0 - 0.5 * opt.kick * s * s, q0 + opt.kick * s};
  samples.push_back(sample_of(params, s, y, opt.kick));
  res.max_abs_psi2 = std::max(std::abs(opt.kick), std::abs(samples.back().psi2));

  double h = std::min(opt.max_step, std::max(s, 1e-6));
  res.classification = ShrinkerClass::INDETERMINATE;
  bool finished = false;
  for (long k = 0; k < opt.max_steps; ++k) {
    if (s >= opt.s_max) {
      finished = true;
      break;
    }
    const double h_try = std::min(h, opt.s_max - s);
    const Advance a = adaptive_step(params, s, y, h_try, opt.max_step, opt.tol);
    if (a.collapsed) {
      if (a.why == Invalid::SATURATION) {
        res.classification = ShrinkerClass::HESSIAN_BLOWUP;
        res.note = "arctan argument saturates";
      } else if (a.why == Invalid::PSH) {
        res.classification = ShrinkerClass::PSH_EXIT;
        res.note = "Hessian leaves the positive cone";
      } else {
        res.classification = ShrinkerClass::INTEGRATION_FAILURE;
        res.note = "step size collapsed";
      }
      break;
    }
    s = a.s;
    y = a.y;
    h = a.h_next;
    const RadialSample smp = sample_of(params, s, y, 0.0);
    samples.push_back(smp);
    res.max_abs_psi2 = std::max(res.max_abs_psi2, std::abs(smp.psi2));
    const double ln = smp.psi1 + smp.s * smp.psi2;
    if (std::abs(smp.psi1) > opt.blowup || std::abs(ln) > opt.blowup) {
      res.classification = ShrinkerClass::HESSIAN_BLOWUP;
      res.note = "Hessian eigenvalue exceeds blow-up threshold";
      break;
    }
    if (params.equation == ShrinkerEquation::J && (!(smp.psi1 > 0.0) || !(ln > 0.0))) {
      res.classification = ShrinkerClass::PSH_EXIT;
      res.note = "Hessian leaves the positive cone";
      break;
    }
  }
  res.s_reached = s;
  if (finished) {
    if (res.max_abs_psi2 <= opt.quad_tol) {
      res.classification = ShrinkerClass::QUADRATIC;
      res.note = "psi'' vanishes on the whole range";
    } else {
      res.classification = ShrinkerClass::INDETERMINATE;
      res.note = "reached s_max with nonzero psi''";
    }
  } else if (res.note.empty()) {
    res.classification = ShrinkerClass::INTEGRATION_FAILURE;
    res.note = "step budget exhausted";
  }

  if (params.equation == ShrinkerEquation::J) {
    const double r_max = std::sqrt(res.s_reached);
    const double need = std::sqrt(2.0 * params.n - 1.0 + params.delta);
    for (const auto& smp : samples) {
      const double r = std::sqrt(smp.s);
      if (r < 0.5 * r_max || smp.s == 0.0) continue;
      const double lo = std::min(smp.psi1, smp.psi1 + smp.s * smp.psi2);
      if (!(lo >= need / r)) res.growth_condition_held = false;
    }
  }
  return res;
}

std::string ScanTable::to_csv() const {
  CsvTable t({"q0", "p0", "classification", "s_reached", "max_abs_psi2", "growth_condition_held"});
  for (const auto& r : rows) {
    const bool j = r.profile.params.equation == ShrinkerEquation::J;
    t.add_row({format_double(r.q0), format_double(r.p0), to_string(r.classification), format_double(r.s_reached),
               format_double(r.max_abs_psi2), j ? (r.growth_condition_held ? "true" : "false") : ""});
  }
  return t.str();
}

ScanTable rigidity_scan(const ShrinkerParams& params, std::span<const double> q0_grid, const ShootOptions& options) {
  ScanTable table;
  for (double q0 : q0_grid) {
    table.rows.push_back(shoot(params, q0, options));
    const auto& r = table.rows.back();
    if (r.classification == ShrinkerClass::QUADRATIC) ++table.quadratic_count;
    if (r.classification == ShrinkerClass::INDETERMINATE) table.property_holds = false;
  }
  return table;
}

namespace {

double compared_scalar(const ShrinkerParams& p, const RadialSample& smp) {
  const double ln = smp.psi1 + smp.s * smp.psi2;
  if (p.equation == ShrinkerEquation::DHYM) return (p.n - 1) * std::atan(smp.psi1) + std::atan(ln);
  return -((p.n - 1) / smp.psi1 + 1.0 / ln);
}

double interpolate_scalar(const RadialProfile& prof, double s) {
  const auto& v = prof.samples;
  auto it = std::lower_bound(v.begin(), v.end(), s, [](const RadialSample& a, double x) { return a.s < x; });
  if (it == v.end()) throw std::invalid_argument("profile does not reach the requested radius");
  if (it->s == s || it == v.begin()) return compared_scalar(prof.params, *it);
  const auto prev = std::prev(it);
  const double f = (s - prev->s) / (it->s - prev->s);
  return (1.0 - f) * compared_scalar(prof.params, *prev) + f * compared_scalar(prof.params, *it);
}

}  // namespace

BarrierReport barrier_compare(const RadialProfile& profile, double eps) {
  const ShrinkerParams& p = profile.params;
  if (!(eps > 0.0)) throw std::invalid_argument("barrier_compare: eps must be positive");
  if (profile.samples.empty()) throw std::invalid_argument("barrier_compare: empty profile");
  const bool dhym = p.equation == ShrinkerEquation::DHYM;
  BarrierReport rep;
  rep.eps = eps;
  rep.r0 = dhym ? std::sqrt(static_cast<double>(p.n)) : 1.0;
  const double s0 = rep.r0 * rep.r0;
  if (profile.samples.back().s <= s0) throw std::invalid_argument("barrier_compare: profile too short");
  rep.boundary_max = interpolate_scalar(profile, s0);
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.max_drift = -std::numeric_limits<double>::infinity();
  const double dl = p.delta;
  const double need = std::sqrt(2.0 * p.n - 1.0 + dl);

  auto check = [&](double s, double theta, const RadialSample* smp) {
    const double r = std::sqrt(s);
    double w, drift;
    if (dhym) {
      w = eps * s + rep.boundary_max;
      // (n/(2r) - r/2) w_r with w_r = 2 eps r
      drift = eps * (p.n - s);
    } else {
      w = eps * std::pow(r, 1.0 + dl) + rep.boundary_max;
      const double wr = eps * (1.0 + dl) * std::pow(r, dl);
      const double wrr = eps * (1.0 + dl) * dl * std::pow(r, dl - 1.0);
      const double lap = wrr + (2.0 * p.n - 1.0) * wr / r;
      const double a = s / (2.0 * (2.0 * p.n - 1.0 + dl)) * lap;
      const double b = 0.5 * r * wr;
      drift = (a - b) / std::max(1.0, std::abs(a) + std::abs(b));
      if (smp && smp->s > 0.0) {
        const double lo = std::min(smp->psi1, smp->psi1 + smp->s * smp->psi2);
        if (r >= 0.5 * std::sqrt(profile.samples.back().s) && !(lo >= need / r)) rep.eta_bound_held = false;
      }
    }
    rep.min_gap = std::min(rep.min_gap, w - theta);
    rep.max_drift = std::max(rep.max_drift, drift);
    ++rep.samples_checked;
  };
  check(s0, rep.boundary_max, nullptr);
  for (const auto& smp : profile.samples)
    if (smp.s > s0) check(smp.s, compared_scalar(p, smp), &smp);
  rep.dominates = rep.min_gap >= 0.0;
  rep.drift_nonpositive = rep.max_drift <= 1e-12;
  return rep;
}

double selfsimilar_residual(const RadialProfile& profile, std::span<const cplx> z, double t) {
  const ShrinkerParams& p = profile.params;
  if (!(t < 0.0)) throw std::invalid_argument("selfsimilar_residual: t must be negative");
  if (static_cast<int>(z.size()) != p.n) throw std::invalid_argument("selfsimilar_residual: dimension mismatch");
  const auto& v = profile.samples;
  if (v.size() < 2) throw std::invalid_argument("selfsimilar_residual: profile too short");
  double r2 = 0.0;
  for (const cplx& zi : z) r2 += std::norm(zi);
  const double s = r2 / (-t);
  if (s > v.back().s) throw std::out_of_range("selfsimilar_residual: |z|^2/(-t) beyond the profile range");

  // Re-integrate from the nearest sample at or below s so the state is exact to tolerance.
  RadialSample at;
  if (s < v[1].s) {
    const double k = v[0].psi2;
    const State y{v[0].psi - 0.5 * k * s * s, v[0].psi1 + k * s};
    at = sample_of(p, s, y, k);
  } else {
    auto it = std::upper_bound(v.begin(), v.end(), s, [](double x, const RadialSample& a) { return x < a.s; });
    const RadialSample& base = *std::prev(it);
    State y{base.psi - base.s * base.psi1, base.psi1};
    double sc = base.s;
    double h = std::max(s - sc, 0.0);
    while (sc < s) {
      const Advance a = adaptive_step(p, sc, y, std::min(h, s - sc), 1.0, 1e-13);
      if (a.collapsed) throw std::runtime_error("selfsimilar_residual: re-integration failed");
      sc = a.s;
      y = a.y;
      h = a.h_next;
      if (s - sc < 1e-15 * std::max(1.0, s)) sc = s;
    }
    at = sample_of(p, s, y, 0.0);
  }
  // d_t v = s psi' - psi at the rescaled point; the Hessian of v equals that of u there.
  const double dvdt = at.s * at.psi1 - at.psi;
  const auto lams = radial_eigs(at.psi1, at.psi2, at.s, p.n);
  if (p.equation == ShrinkerEquation::DHYM) return dvdt - (lagrangian_angle(lams) - p.theta0);
  return dvdt - (p.c - j_trace(lams));
}

}  // namespace dhym
