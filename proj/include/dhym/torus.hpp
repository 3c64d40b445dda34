#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dhym/hermitian.hpp"

namespace dhym {

/// Uniform periodic grid on the flat torus C^n / (Z^n + i Z^n).
///
/// Real axes are ordered (x_1, y_1, ..., x_n, y_n); axis 2j is Re z_j and
/// axis 2j+1 is Im z_j.  Storage is row-major with the last axis fastest.
struct GridSpec {
  int n = 1;
  int N = 16;
  int stencil_order = 2;
  std::size_t budget = std::size_t{1} << 20;

  double h() const { return 1.0 / N; }
  int axes() const { return 2 * n; }
  std::size_t points() const;
  std::size_t stride(int axis) const;
  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
  /// Grid coordinate of `axis` at linear index `idx`.
  int coord(std::size_t idx, int axis) const { return static_cast<int>((idx / stride(axis)) % N); }
  /// Linear index shifted by `offset` along `axis` with periodic wrap.
  std::size_t shifted(std::size_t idx, int axis, int offset) const;

  bool operator==(const GridSpec&) const = default;
};

class ScalarGridField {
 public:
  ScalarGridField() = default;
  explicit ScalarGridField(GridSpec spec, double value = 0.0);
  ScalarGridField(GridSpec spec, std::vector<double> data);

  /// Sample f(x) at every grid point; x holds the 2n real coordinates.
  static ScalarGridField sample(const GridSpec& spec, const std::function<double(std::span<const double>)>& f);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double sup_norm() const;
  ScalarGridField& operator+=(const ScalarGridField& o);
  ScalarGridField& operator-=(const ScalarGridField& o);
  ScalarGridField& operator*=(double s);
  ScalarGridField operator+(const ScalarGridField& o) const;
  ScalarGridField operator-(const ScalarGridField& o) const;
  ScalarGridField operator*(double s) const;
  /// this += s * o
  void axpy(double s, const ScalarGridField& o);

 private:
  GridSpec spec_;
  std::vector<double> data_;
};

class HermitianGridField {
 public:
  HermitianGridField() = default;
  HermitianGridField(GridSpec spec, const HermitianMatrix& value);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  HermitianMatrix& operator[](std::size_t i) { return data_[i]; }
  const HermitianMatrix& operator[](std::size_t i) const { return data_[i]; }

  /// Max over grid points of the pointwise Hermitian defect (relative to the field scale).
  double hermitian_defect() const;
  double max_abs() const;

 private:
  GridSpec spec_;
  std::vector<HermitianMatrix> data_;
};

using ComplexField = std::vector<cplx>;

/// One factor of a complex derivative: d/dz_j (holomorphic) or d/dzbar_j.
struct ComplexFactor {
  int j = 0;
  bool holomorphic = true;
};

/// Real partial derivatives of a periodic scalar field with one canonical
/// stencil per (axis, multiplicity): D^(m) = D1^(m mod 2) D2^(m / 2).
/// Mixed partials are products of commuting 1-D operators, so every
/// derivative is independent of the order in which it is requested.
/// Results are cached by multi-index.
class DerivativeJet {
 public:
  DerivativeJet(const ScalarGridField& phi, int stencil_order);

  const std::vector<double>& partial(const std::vector<int>& multi_index);
  /// prod_k (1/2)(d_x -/+ i d_y) in the listed order, expanded over real partials.
  ComplexField complex_derivative(std::span<const ComplexFactor> factors);

  const GridSpec& spec() const { return spec_; }

 private:
  GridSpec spec_;
  int order_;
  std::vector<double> base_;
  std::map<std::vector<int>, std::vector<double>> cache_;
};

/// Apply a 1-D central difference of derivative order `deriv` (1 or 2) along `axis`.
std::vector<double> apply_stencil(const GridSpec& spec, std::span<const double> f, int axis, int deriv, int order);

/// Field of matrices d^2 phi / dz_i dzbar_j.
HermitianGridField complex_hessian(const ScalarGridField& phi);
/// x -> F0 + complex_hessian(phi)(x).
HermitianGridField curvature_field(const HermitianMatrix& f0, const ScalarGridField& phi);

struct CentralCharge {
  cplx Z;
  double hat_theta = 0.0;
  double arg_mismatch = 0.0;  // |arg Z - hat_theta| wrapped to [0, pi]
  bool consistent = true;
  std::string lift_note;
};

CentralCharge central_charge(const HermitianMatrix& g0, const HermitianMatrix& f0, const ScalarGridField& phi,
                             double tolerance = 1e-2);

/// sup over grid and j of |tr(eta^{-1} d_j F)|, using discrete d/dz_j on the F field.
double first_derivative_residual(const HermitianMatrix& g0, const HermitianGridField& f_field,
                                 const HermitianGridField& eta_field);

/// max |F_{i jbar,k} - F_{k jbar,i}| relative to max |F_{i jbar,k}|, on the discrete jet of phi.
double bianchi_residual(const ScalarGridField& phi);

double average(const ScalarGridField& f);
ScalarGridField mean_zero(const ScalarGridField& f);

/// Smooth periodic test function sum_m a_m cos(2 pi k_m . x + p_m).
struct TrigPolynomial {
  struct Mode {
    std::vector<int> k;  // one wave number per real axis
    double amplitude = 0.0;
    double phase = 0.0;
  };
  int axes = 2;
  std::vector<Mode> modes;

  /// Random modes with |k_a| <= max_wave; sum of |amplitudes| equals `amplitude`.
  static TrigPolynomial random(int n, double amplitude, std::uint64_t seed, int max_wave = 2, int count = 4);

  double value(std::span<const double> x) const;
  /// Analytic real partial of the given multi-index.
  double partial(std::span<const double> x, std::span<const int> multi_index) const;
  ScalarGridField sample(const GridSpec& spec) const;
};

// Field snapshots: raw little-endian float64 payload plus JSON sidecar.
void write_snapshot(const std::filesystem::path& base, const ScalarGridField& f, const std::string& field_name);
void write_snapshot(const std::filesystem::path& base, const HermitianGridField& f, const std::string& field_name);
ScalarGridField read_scalar_snapshot(const std::filesystem::path& base);
HermitianGridField read_hermitian_snapshot(const std::filesystem::path& base);

}  // namespace dhym
