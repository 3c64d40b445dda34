#include "dhym/torus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dhym {

// GridSpec ----------------------------------------------------------------------

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int a = 0; a < axes(); ++a) p *= static_cast<std::size_t>(N);
  return p;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axes() - 1; a > axis; --a) s *= static_cast<std::size_t>(N);
  return s;
}

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw std::invalid_argument("GridSpec: complex dimension n must be in [1,3]");
  if (N < 8 || N % 2 != 0) throw std::invalid_argument("GridSpec: N must be even and >= 8");
  if (stencil_order != 2 && stencil_order != 4) throw std::invalid_argument("GridSpec: stencil_order must be 2 or 4");
  // Overflow-safe budget check.
  std::size_t p = 1;
  for (int a = 0; a < axes(); ++a) {
    p *= static_cast<std::size_t>(N);
    if (p > budget) {
      throw std::invalid_argument("GridSpec: " + std::to_string(N) + "^" + std::to_string(axes()) +
                                  " points exceeds budget " + std::to_string(budget));
    }
  }
}

std::size_t GridSpec::shifted(std::size_t idx, int axis, int offset) const {
  const std::size_t s = stride(axis);
  const int c = static_cast<int>((idx / s) % N);
  const int c2 = ((c + offset) % N + N) % N;
  return idx + static_cast<std::size_t>(c2) * s - static_cast<std::size_t>(c) * s;
}

// ScalarGridField -------------------------------------------------------------------

ScalarGridField::ScalarGridField(GridSpec spec, double value) : spec_(spec), data_(spec.points(), value) {}

ScalarGridField::ScalarGridField(GridSpec spec, std::vector<double> data) : spec_(spec), data_(std::move(data)) {
  if (data_.size() != spec_.points()) throw std::invalid_argument("ScalarGridField: data size does not match grid");
}

ScalarGridField ScalarGridField::sample(const GridSpec& spec,
                                        const std::function<double(std::span<const double>)>& f) {
  ScalarGridField out(spec);
  std::vector<double> x(spec.axes());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int a = 0; a < spec.axes(); ++a) x[a] = spec.coord(i, a) * spec.h();
    out[i] = f(x);
  }
  return out;
}

double ScalarGridField::sup_norm() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

ScalarGridField& ScalarGridField::operator+=(const ScalarGridField& o) {
  axpy(1.0, o);
  return *this;
}

ScalarGridField& ScalarGridField::operator-=(const ScalarGridField& o) {
  axpy(-1.0, o);
  return *this;
}

ScalarGridField& ScalarGridField::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

ScalarGridField ScalarGridField::operator+(const ScalarGridField& o) const {
  ScalarGridField r = *this;
  r += o;
  return r;
}

ScalarGridField ScalarGridField::operator-(const ScalarGridField& o) const {
  ScalarGridField r = *this;
  r -= o;
  return r;
}

ScalarGridField ScalarGridField::operator*(double s) const {
  ScalarGridField r = *this;
  r *= s;
  return r;
}

void ScalarGridField::axpy(double s, const ScalarGridField& o) {
  if (o.size() != size()) throw std::invalid_argument("ScalarGridField: size mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
}

// HermitianGridField ------------------------------------------------------------------

HermitianGridField::HermitianGridField(GridSpec spec, const HermitianMatrix& value)
    : spec_(spec), data_(spec.points(), value) {}

double HermitianGridField::max_abs() const {
  double m = 0.0;
  for (const auto& h : data_) m = std::max(m, h.max_abs());
  return m;
}

double HermitianGridField::hermitian_defect() const {
  double d = 0.0;
  for (const auto& h : data_)
    for (int i = 0; i < h.dim(); ++i)
      for (int j = 0; j < h.dim(); ++j) d = std::max(d, std::abs(h(i, j) - std::conj(h(j, i))));
  const double scale = max_abs();
  return scale > 0.0 ? d / scale : d;
}

// Stencils ------------------------------------------------------------------------------

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

Stencil make_stencil(int deriv, int order, double h) {
  if (deriv == 1) {
    if (order == 2) return {{-1, 1}, {-0.5 / h, 0.5 / h}};
    return {{-2, -1, 1, 2}, {1.0 / (12 * h), -8.0 / (12 * h), 8.0 / (12 * h), -1.0 / (12 * h)}};
  }
  const double h2 = h * h;
  if (order == 2) return {{-1, 0, 1}, {1.0 / h2, -2.0 / h2, 1.0 / h2}};
  return {{-2, -1, 0, 1, 2},
          {-1.0 / (12 * h2), 16.0 / (12 * h2), -30.0 / (12 * h2), 16.0 / (12 * h2), -1.0 / (12 * h2)}};
}

}  // namespace

std::vector<double> apply_stencil(const GridSpec& spec, std::span<const double> f, int axis, int deriv, int order) {
  const Stencil st = make_stencil(deriv, order, spec.h());
  const std::size_t s = spec.stride(axis);
  const int N = spec.N;
  const std::size_t K = st.offsets.size();
  // Periodic neighbour coordinate for every (coordinate, stencil tap).
  std::vector<std::size_t> nb(static_cast<std::size_t>(N) * K);
  for (int c = 0; c < N; ++c)
    for (std::size_t k = 0; k < K; ++k) nb[c * K + k] = static_cast<std::size_t>(((c + st.offsets[k]) % N + N) % N) * s;
  std::vector<double> out(f.size(), 0.0);
  const std::size_t block = s * static_cast<std::size_t>(N);
  for (std::size_t o = 0; o < f.size(); o += block) {
    for (int c = 0; c < N; ++c) {
      double* dst = out.data() + o + static_cast<std::size_t>(c) * s;
      for (std::size_t k = 0; k < K; ++k) {
        const double w = st.weights[k];
        const double* src = f.data() + o + nb[c * K + k];
        for (std::size_t r = 0; r < s; ++r) dst[r] += w * src[r];
      }
    }
  }
  return out;
}

// DerivativeJet ----------------------------------------------------------------------------

DerivativeJet::DerivativeJet(const ScalarGridField& phi, int stencil_order)
    : spec_(phi.spec()), order_(stencil_order), base_(phi.data().begin(), phi.data().end()) {}

const std::vector<double>& DerivativeJet::partial(const std::vector<int>& multi_index) {
  if (static_cast<int>(multi_index.size()) != spec_.axes()) throw std::invalid_argument("multi-index length");
  auto it = cache_.find(multi_index);
  if (it != cache_.end()) return it->second;
  std::vector<double> f = base_;
  for (int a = 0; a < spec_.axes(); ++a) {
    const int m = multi_index[a];
    if (m % 2 == 1) f = apply_stencil(spec_, f, a, 1, order_);
    for (int r = 0; r < m / 2; ++r) f = apply_stencil(spec_, f, a, 2, order_);
  }
  return cache_.emplace(multi_index, std::move(f)).first->second;
}

ComplexField DerivativeJet::complex_derivative(std::span<const ComplexFactor> factors) {
  std::map<std::vector<int>, cplx> terms;
  terms[std::vector<int>(spec_.axes(), 0)] = 1.0;
  for (const auto& fac : factors) {
    std::map<std::vector<int>, cplx> next;
    const cplx cy = fac.holomorphic ? cplx(0.0, -0.5) : cplx(0.0, 0.5);
    for (const auto& [mi, coef] : terms) {
      auto mx = mi;
      mx[2 * fac.j] += 1;
      next[mx] += coef * 0.5;
      auto my = mi;
      my[2 * fac.j + 1] += 1;
      next[my] += coef * cy;
    }
    terms = std::move(next);
  }
  ComplexField out(spec_.points(), 0.0);
  for (const auto& [mi, coef] : terms) {
    if (coef == 0.0) continue;
    const auto& p = partial(mi);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coef * p[i];
  }
  return out;
}

// Hessian and friends ---------------------------------------------------------------------------

HermitianGridField complex_hessian(const ScalarGridField& phi) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  DerivativeJet jet(phi, spec.stencil_order);
  HermitianGridField out(spec, HermitianMatrix(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const ComplexFactor f[2] = {{i, true}, {j, false}};
      const ComplexField v = jet.complex_derivative(f);
      for (std::size_t p = 0; p < v.size(); ++p) {
        if (i == j) {
          out[p](i, i) = v[p].real();
        } else {
          out[p](i, j) = v[p];
          out[p](j, i) = std::conj(v[p]);
        }
      }
    }
  }
  return out;
}

HermitianGridField curvature_field(const HermitianMatrix& f0, const ScalarGridField& phi) {
  if (f0.dim() != phi.spec().n) throw std::invalid_argument("curvature_field: F0 dimension mismatch");
  HermitianGridField h = complex_hessian(phi);
  for (std::size_t p = 0; p < h.size(); ++p) h[p] += f0;
  return h;
}

double average(const ScalarGridField& f) {
  double s = 0.0;
  for (double v : f.data()) s += v;
  return s / static_cast<double>(f.size());
}

ScalarGridField mean_zero(const ScalarGridField& f) {
  ScalarGridField out = f;
  const double m = average(f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= m;
  return out;
}

CentralCharge central_charge(const HermitianMatrix& g0, const HermitianMatrix& f0, const ScalarGridField& phi,
                             double tolerance) {
  if (!is_positive_definite(g0)) throw SingularMatrixError("central_charge: g0 must be positive definite");
  const HermitianGridField f = curvature_field(f0, phi);
  cplx sum = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) sum += zeta_det(g0, f[p]);
  CentralCharge cc;
  cc.Z = sum / static_cast<double>(f.size()) * determinant(g0).real();
  cc.hat_theta = lagrangian_angle(generalized_eigenvalues(g0, f0));
  double d = std::remainder(std::arg(cc.Z) - cc.hat_theta, 2.0 * std::numbers::pi);
  cc.arg_mismatch = std::abs(d);
  cc.consistent = cc.arg_mismatch <= tolerance;
  cc.lift_note = "hat_theta lifted through the constant representative: sum of arctan of eigenvalues of g0^{-1} F0";
  return cc;
}

double first_derivative_residual(const HermitianMatrix& g0, const HermitianGridField& f_field,
                                 const HermitianGridField& eta_field) {
  const GridSpec& spec = f_field.spec();
  const int n = spec.n;
  if (g0.dim() != n) throw std::invalid_argument("first_derivative_residual: dimension mismatch");
  std::vector<HermitianMatrix> eta_inv(f_field.size());
  for (std::size_t p = 0; p < f_field.size(); ++p) eta_inv[p] = inverse(eta_field[p]);

  double sup = 0.0;
  std::vector<double> comp(f_field.size());
  for (int j = 0; j < n; ++j) {
    // d/dz_j F_{ab} = (1/2)(d_x - i d_y) F_{ab}, entrywise.
    std::vector<std::vector<cplx>> dF(n * n, std::vector<cplx>(f_field.size()));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int part = 0; part < 2; ++part) {
          for (std::size_t p = 0; p < f_field.size(); ++p)
            comp[p] = part == 0 ? f_field[p](a, b).real() : f_field[p](a, b).imag();
          const auto dx = apply_stencil(spec, comp, 2 * j, 1, spec.stencil_order);
          const auto dy = apply_stencil(spec, comp, 2 * j + 1, 1, spec.stencil_order);
          const cplx unit = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
          for (std::size_t p = 0; p < f_field.size(); ++p)
            dF[a * n + b][p] += unit * 0.5 * cplx(dx[p], -dy[p]);
        }
      }
    }
    for (std::size_t p = 0; p < f_field.size(); ++p) {
      cplx tr = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) tr += eta_inv[p](b, a) * dF[a * n + b][p];
      sup = std::max(sup, std::abs(tr));
    }
  }
  return sup;
}

double bianchi_residual(const ScalarGridField& phi) {
  const GridSpec& spec = phi.spec();
  const int n = spec.n;
  DerivativeJet jet(phi, spec.stencil_order);
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const ComplexFactor a[3] = {{k, true}, {i, true}, {j, false}};
        const ComplexFactor b[3] = {{i, true}, {k, true}, {j, false}};
        const ComplexField t1 = jet.complex_derivative(a);
        const ComplexField t2 = jet.complex_derivative(b);
        for (std::size_t p = 0; p < t1.size(); ++p) {
          diff = std::max(diff, std::abs(t1[p] - t2[p]));
          scale = std::max(scale, std::abs(t1[p]));
        }
      }
  return scale > 0.0 ? diff / scale : diff;
}

// TrigPolynomial -----------------------------------------------------------------------------------

TrigPolynomial TrigPolynomial::random(int n, double amplitude, std::uint64_t seed, int max_wave, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> wave(-max_wave, max_wave);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrigPolynomial tp;
  tp.axes = 2 * n;
  double total = 0.0;
  for (int m = 0; m < count; ++m) {
    Mode mode;
    do {
      mode.k.assign(tp.axes, 0);
      for (int& k : mode.k) k = wave(rng);
    } while (std::all_of(mode.k.begin(), mode.k.end(), [](int k) { return k == 0; }));
    mode.amplitude = 0.5 + unit(rng);
    mode.phase = 2.0 * std::numbers::pi * unit(rng);
    total += mode.amplitude;
    tp.modes.push_back(std::move(mode));
  }
  for (auto& mode : tp.modes) mode.amplitude *= amplitude / total;
  return tp;
}

double TrigPolynomial::value(std::span<const double> x) const {
  const int zero[6] = {0, 0, 0, 0, 0, 0};
  return partial(x, std::span<const int>(zero, axes));
}

double TrigPolynomial::partial(std::span<const double> x, std::span<const int> multi_index) const {
  const double two_pi = 2.0 * std::numbers::pi;
  double sum = 0.0;
  for (const auto& m : modes) {
    double arg = m.phase;
    double factor = m.amplitude;
    int order = 0;
    for (int a = 0; a < axes; ++a) {
      arg += two_pi * m.k[a] * x[a];
      for (int r = 0; r < multi_index[a]; ++r) factor *= two_pi * m.k[a];
      order += multi_index[a];
    }
    sum += factor * std::cos(arg + order * std::numbers::pi / 2.0);
  }
  return sum;
}

ScalarGridField TrigPolynomial::sample(const GridSpec& spec) const {
  return ScalarGridField::sample(spec, [this](std::span<const double> x) { return value(x); });
}

// Snapshots --------------------------------------------------------------------------------------------

namespace {

void write_doubles(const std::filesystem::path& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  }
}

std::vector<double> read_doubles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  std::uint64_t bits;
  while (in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    values.push_back(std::bit_cast<double>(bits));
  }
  return values;
}

nlohmann::json header(const GridSpec& spec, const std::string& name, const std::string& kind) {
  return {{"n", spec.n},         {"N", spec.N},         {"stencil_order", spec.stencil_order},
          {"field_name", name},  {"kind", kind},        {"dtype", "float64-le"},
          {"order", "row-major, axes (x1,y1,...,xn,yn), last axis fastest"}};
}

void write_header(const std::filesystem::path& base, const nlohmann::json& j) {
  std::ofstream out(base.string() + ".json");
  out << j.dump(2) << "\n";
}

nlohmann::json read_header(const std::filesystem::path& base, GridSpec& spec) {
  std::ifstream in(base.string() + ".json");
  if (!in) throw std::runtime_error("missing snapshot header " + base.string() + ".json");
  nlohmann::json j = nlohmann::json::parse(in);
  spec.n = j.at("n");
  spec.N = j.at("N");
  spec.stencil_order = j.at("stencil_order");
  spec.budget = std::max(spec.budget, spec.points());
  return j;
}

}  // namespace

void write_snapshot(const std::filesystem::path& base, const ScalarGridField& f, const std::string& field_name) {
  write_doubles(base.string() + ".bin", {f.data().begin(), f.data().end()});
  write_header(base, header(f.spec(), field_name, "scalar"));
}

void write_snapshot(const std::filesystem::path& base, const HermitianGridField& f, const std::string& field_name) {
  const int n = f.spec().n;
  std::vector<double> values;
  values.reserve(f.size() * n * (n + 1));
  for (std::size_t p = 0; p < f.size(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        values.push_back(f[p](i, j).real());
        values.push_back(f[p](i, j).imag());
      }
  auto j = header(f.spec(), field_name, "hermitian");
  j["component_layout"] = "per point: upper triangle (i<=j) row by row, real/imag interleaved";
  write_doubles(base.string() + ".bin", values);
  write_header(base, j);
}

ScalarGridField read_scalar_snapshot(const std::filesystem::path& base) {
  GridSpec spec;
  auto j = read_header(base, spec);
  if (j.at("kind") != "scalar") throw std::runtime_error("snapshot is not a scalar field");
  return ScalarGridField(spec, read_doubles(base.string() + ".bin"));
}

HermitianGridField read_hermitian_snapshot(const std::filesystem::path& base) {
  GridSpec spec;
  auto j = read_header(base, spec);
  if (j.at("kind") != "hermitian") throw std::runtime_error("snapshot is not a hermitian field");
  const auto values = read_doubles(base.string() + ".bin");
  const int n = spec.n;
  const std::size_t per = static_cast<std::size_t>(n * (n + 1));
  if (values.size() != spec.points() * per) throw std::runtime_error("snapshot payload size mismatch");
  HermitianGridField f(spec, HermitianMatrix(n));
  std::size_t k = 0;
  for (std::size_t p = 0; p < f.size(); ++p)
    for (int i = 0; i < n; ++i)
      for (int jj = i; jj < n; ++jj) {
        const cplx v(values[k], values[k + 1]);
        k += 2;
        f[p](i, jj) = v;
        f[p](jj, i) = std::conj(v);
      }
  return f;
}

}  // namespace dhym
