#include "qhydro/borninfeld.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "qhydro/error.hpp"
#include "qhydro/field_io.hpp"

namespace qhydro::bi {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

bool finite(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

QuadratureResult integrate_radial(const auto& f, double lo, double rel_tol, const char* what) {
  if (!(rel_tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, lo, std::numeric_limits<double>::infinity(), 30, rel_tol, &error);
  if (!std::isfinite(value) || error > rel_tol * std::abs(value) * 10)
    throw NumericError(std::string(what) + " quadrature did not converge (error estimate " + std::to_string(error) +
                       ")");
  return {value, error};
}

}  // namespace

void BIParams::validate() const {
  if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("critical field b must be positive and finite");
  if (!std::isfinite(q)) throw ConfigError("charge q must be finite");
}

Invariants invariants(const EMSample& s) {
  if (!finite(s.E) || !finite(s.B)) throw ConfigError("field sample has non-finite components");
  return {0.5 * (dot(s.E, s.E) - dot(s.B, s.B)), dot(s.E, s.B)};
}

double lagrangian(const Invariants& inv, const BIParams& p) {
  p.validate();
  const double b2 = p.b * p.b;
  const double x = 2.0 * inv.S / b2 + inv.P * inv.P / (b2 * b2);
  const double radicand = 1.0 - x;
  if (radicand < 0.0)
    throw DomainError("super-critical field configuration: Born-Infeld radicand " + std::to_string(radicand));
  return b2 * x / (1.0 + std::sqrt(radicand));
}

double lagrangian(const EMSample& s, const BIParams& p) { return lagrangian(invariants(s), p); }

double core_radius(const BIParams& p) {
  p.validate();
  return std::sqrt(std::abs(p.q) / (4 * std::numbers::pi * p.b));
}

double point_charge_field(double r, const BIParams& p) {
  if (!(r >= 0.0)) throw ConfigError("radius must be non-negative");
  const double r0 = core_radius(p);
  const double r2 = r * r, r02 = r0 * r0;
  // r⁴ + r₀⁴ formed from squares to avoid overflow at large r.
  return p.q / (4 * std::numbers::pi * std::hypot(r2, r02));
}

double point_charge_energy_density(double r, const BIParams& p) {
  if (!(r >= 0.0)) throw ConfigError("radius must be non-negative");
  p.validate();
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  const double d = std::abs(p.q) / (4 * std::numbers::pi * r * r) / p.b;
  // b²(√(1 + d²) - 1) without cancellation for small d.
  return p.b * p.b * d * d / (std::sqrt(1.0 + d * d) + 1.0);
}

QuadratureResult self_energy(const BIParams& p, double rel_tol) {
  p.validate();
  if (p.q == 0.0) return {0.0, 0.0};
  const double r0 = core_radius(p);
  // In units of r₀ the integrand is 4πb²r₀³ (√(x⁴ + 1) - x²).
  auto f = [](double x) {
    const double x2 = x * x;
    return 1.0 / (std::sqrt(x2 * x2 + 1.0) + x2);
  };
  auto res = integrate_radial(f, 0.0, rel_tol, "self-energy");
  const double scale = 4 * std::numbers::pi * p.b * p.b * r0 * r0 * r0;
  return {scale * res.value, scale * res.error};
}

double self_energy_exact(const BIParams& p) {
  p.validate();
  const double g = boost::math::tgamma(0.25);
  const double I = g * g / (6 * std::sqrt(std::numbers::pi));
  return I * std::pow(std::abs(p.q), 1.5) * std::sqrt(p.b) / std::sqrt(4 * std::numbers::pi);
}

QuadratureResult coulomb_cutoff_energy(double q, double r_min, double rel_tol) {
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ConfigError("Coulomb cutoff radius must be positive");
  if (!std::isfinite(q)) throw ConfigError("charge q must be finite");
  const double k = q * q / (8 * std::numbers::pi);
  // 4πr² (q/4πr²)²/2 = k/r².
  auto f = [k](double r) { return k / (r * r); };
  return integrate_radial(f, r_min, rel_tol, "Coulomb energy");
}

namespace io {

void write_radial_csv(std::ostream& out, const BIParams& p, std::span<const double> radii) {
  out << "r,E,E_coulomb,energy_density\n";
  for (double r : radii) {
    const double coulomb = r > 0.0 ? p.q / (4 * std::numbers::pi * r * r) : std::numeric_limits<double>::infinity();
    out << qhydro::io::format_double(r) << ',' << qhydro::io::format_double(point_charge_field(r, p)) << ','
        << qhydro::io::format_double(coulomb) << ','
        << qhydro::io::format_double(point_charge_energy_density(r, p)) << '\n';
  }
}

}  // namespace io

}  // namespace qhydro::bi
