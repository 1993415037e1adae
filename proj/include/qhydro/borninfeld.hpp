#pragma once

#include <array>
#include <iosfwd>
#include <span>

namespace qhydro::bi {

using Vec3 = std::array<double, 3>;

struct EMSample {
  Vec3 E{0, 0, 0};
  Vec3 B{0, 0, 0};
};

/// Critical field strength b and the source charge used by the point-charge
/// routines. Heaviside-Lorentz units.
struct BIParams {
  double b = 1.0;
  double q = 1.0;
  void validate() const;
};

struct Invariants {
  double S = 0.0;  // (|E|² - |B|²)/2
  double P = 0.0;  // E·B
};

Invariants invariants(const EMSample& s);

/// L = b²(1 - √(1 - 2S/b² - P²/b⁴)), evaluated as b²x/(1 + √(1 - x)) with
/// x = 2S/b² + P²/b⁴ so the weak-field limit keeps full relative accuracy.
/// A negative radicand throws DomainError (super-critical field).
double lagrangian(const EMSample& s, const BIParams& p);
double lagrangian(const Invariants& inv, const BIParams& p);

// r₀ = √(q/4πb), the radius where the field reaches b/√2.
double core_radius(const BIParams& p);

/// Radial field of a point charge, q/(4π√(r⁴ + r₀⁴)). E(0) = b.
double point_charge_field(double r, const BIParams& p);

// Energy density b²(√(1 + D²/b²) - 1) with D = q/4πr² the Coulomb displacement.
double point_charge_energy_density(double r, const BIParams& p);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// ∫ 4πr² u(r) dr over [0, ∞) of the point-charge energy density by adaptive
/// Gauss-Kronrod. Throws NumericError when the error estimate exceeds
/// rel_tol·|value|.
QuadratureResult self_energy(const BIParams& p, double rel_tol = 1e-10);

// Closed form Γ(1/4)²/(6√π) q^{3/2} b^{1/2} / √(4π).
double self_energy_exact(const BIParams& p);

/// Maxwell energy ∫ 4πr² D²/2 dr of a point charge outside r_min by
/// quadrature. Diverges as r_min → 0; the analytic value is q²/(8π r_min).
QuadratureResult coulomb_cutoff_energy(double q, double r_min, double rel_tol = 1e-10);

namespace io {
// Columns: r, E, E_coulomb, energy_density.
void write_radial_csv(std::ostream& out, const BIParams& p, std::span<const double> radii);
}  // namespace io

}  // namespace qhydro::bi
