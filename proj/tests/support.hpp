#pragma once

// Shared helpers for the test suites: random band-limited fields and
// simple error norms.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro::testing {

// Random real field whose Fourier content is restricted to wavenumbers
// below `fraction` of the Nyquist wavenumber on every axis.
inline RealField band_limited(const GridSpec& g, std::mt19937_64& rng, double fraction) {
  std::normal_distribution<double> normal;
  std::vector<double> v(g.size(), 0.0);
  const int modes = 4;
  for (int m = 0; m < modes; ++m) {
    Point k{0, 0, 0};
    double phase = std::uniform_real_distribution<double>(0.0, 6.283185307179586)(rng);
    for (int a = 0; a < g.dim; ++a) {
      const auto kmax = static_cast<long>(fraction * static_cast<double>(g.n[a]) / 2.0);
      const long j = std::uniform_int_distribution<long>(-kmax, kmax)(rng);
      k[a] = 2.0 * 3.141592653589793 * static_cast<double>(j) / g.length[a];
    }
    const double amp = normal(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point x = g.point(i);
      v[i] += amp * std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase);
    }
  }
  return {g, std::move(v)};
}

inline ComplexField plane_wave_field(const GridSpec& g, double k) {
  return ComplexField::from_function(g, [&](const Point& x) { return std::polar(1.0, k * x[0]); });
}

template <typename T>
double max_abs(const Field<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

template <typename T>
double max_abs_diff(const Field<T>& a, const Field<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace qhydro::testing
