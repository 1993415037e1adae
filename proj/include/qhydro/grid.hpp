#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/error.hpp"

namespace qhydro {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;

/// Uniform periodic grid in 1-3 dimensions.
///
/// Samples along axis a sit at origin[a] + i*dx(a), i = 0..n[a]-1, and the
/// grid is periodic with period length[a]. Storage is row-major with axis 0
/// slowest. Unused axes carry n = 1 and are ignored.
struct GridSpec {
  int dim = 1;
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  // Periodic line [lo, hi) sampled at n points.
  static GridSpec line(std::size_t n, double lo, double hi);
  // dim-dimensional cube [lo, hi)^dim with n points per axis.
  static GridSpec cube(int dim, std::size_t n, double lo, double hi);

  void validate() const;

  std::size_t size() const { return n[0] * n[1] * n[2]; }
  double dx(int axis) const { return length[axis] / static_cast<double>(n[axis]); }
  double cell_volume() const;
  double coord(int axis, std::size_t i) const {
    return origin[axis] + static_cast<double>(i) * dx(axis);
  }
  std::array<std::size_t, 3> unravel(std::size_t flat) const;
  std::size_t ravel(std::size_t i, std::size_t j = 0, std::size_t k = 0) const {
    return (i * n[1] + j) * n[2] + k;
  }
  Point point(std::size_t flat) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Physical constants. Natural mode fixes hbar = m = c = 1.
struct UnitSystem {
  enum class Mode { natural, explicit_units };
  double hbar = 1.0;
  double mass = 1.0;
  double c = 1.0;
  Mode mode = Mode::natural;

  static UnitSystem natural() { return {}; }
  static UnitSystem with(double hbar, double mass, double c) {
    UnitSystem u{hbar, mass, c, Mode::explicit_units};
    u.validate();
    return u;
  }
  // hbar and c must be positive; mass may be zero (massless fields).
  void validate() const;
  // validate() plus mass > 0, for dynamics that divide by the mass.
  void require_massive() const;
  double compton_wavenumber() const { return mass * c / hbar; }
};

/// Immutable samples on a GridSpec. Non-finite samples are rejected at
/// construction.
template <typename T>
class Field {
 public:
  using value_type = T;

  Field(GridSpec grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size()) {
      throw ConfigError("field has " + std::to_string(values_.size()) + " samples, grid expects " +
                        std::to_string(grid_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!is_finite(values_[i])) {
        throw ConfigError("non-finite sample at flat index " + std::to_string(i));
      }
    }
  }

  static Field constant(const GridSpec& grid, T value) {
    return Field(grid, std::vector<T>(grid.size(), value));
  }

  static Field from_function(const GridSpec& grid, const std::function<T(const Point&)>& f) {
    std::vector<T> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
    return Field(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const T> values() const& { return values_; }
  std::span<const T> values() const&& = delete;
  std::size_t size() const { return values_.size(); }
  const T& operator[](std::size_t i) const { return values_[i]; }

 private:
  static bool is_finite(double v) { return std::isfinite(v); }
  static bool is_finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

  GridSpec grid_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

// Per-point flag vector; 1 marks a masked point.
using Mask = std::vector<std::uint8_t>;

/// A field that is only meaningful off a mask. Masked entries hold 0.
struct MaskedField {
  RealField value;
  Mask mask;

  std::size_t masked_count() const;
};

// Sum |f|^2 dV.
double norm_squared(const ComplexField& f);
double integrate(const RealField& f);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace qhydro
