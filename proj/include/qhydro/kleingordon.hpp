#pragma once

#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro {

// Conventions: signature (+,-,-,-) and □ = (1/c²)∂²_t - Δ, so the linear
// equation □φ + k_C²φ = 0 propagates with ω² = c²(k² + k_C²). The Compton
// wavenumber k_C = m₀c/ħ uses units.mass as the rest mass m₀.

struct KGState {
  ComplexField phi;
  ComplexField phi_dot;
};

struct NLKGState {
  RealField R;
  RealField R_dot;
};

struct KGConfig {
  double dt = 1e-3;
  std::size_t steps = 1;
  UnitSystem units;
  // Reject dt above the leapfrog bound 1/ω_max (half the stability limit).
  bool enforce_stability = true;
  // Abort once the energy exceeds this multiple of its initial value.
  double blowup_factor = 1e6;

  void validate() const;
};

struct KGSeries {
  std::vector<double> times;
  std::vector<KGState> frames;
};

struct NLKGSeries {
  std::vector<double> times;
  std::vector<NLKGState> frames;
};

// ω(k) = c √(k² + k_C²).
double kg_dispersion(double k, const UnitSystem& units);
// Massless five-dimensional dispersion ω = c √(k² + k₅²).
double massless_dispersion_5d(double k, double k5, double c);

// Largest angular frequency resolved on the grid for mass parameter k_mass.
double max_frequency(const GridSpec& grid, double c, double k_mass);

/// Linear Klein-Gordon leapfrog (kick-drift-kick).
///
/// The spatial operator is diagonal in Fourier space, so each mode is
/// stepped there and transformed back only when a frame is recorded. This
/// is identical to real-space leapfrog with a spectral Laplacian.
KGState evolve_kg(const KGState& state, const KGConfig& cfg);
KGSeries evolve_kg_series(const KGState& state, const KGConfig& cfg, std::size_t every);

// ∫ [|φ̇|²/c² + |∇φ|² + k_C²|φ|²] / 2 dV.
double kg_energy(const KGState& state, const UnitSystem& units);

// Positive-frequency state φ̇ = -iω(k)φ built mode by mode from φ.
KGState positive_frequency_state(const ComplexField& phi, const UnitSystem& units);

/// Nonlinear real Klein-Gordon equation □R - κ²R(1 - R⁴) = 0, κ = m₀c/ħ,
/// stepped with real-space leapfrog and a spectral Laplacian.
NLKGState evolve_nlkg(const NLKGState& state, const KGConfig& cfg);
NLKGSeries evolve_nlkg_series(const NLKGState& state, const KGConfig& cfg, std::size_t every);

// Conserved energy of the nonlinear equation:
// ∫ [Ṙ²/2c² + |∇R|²/2 + κ²(R⁶/6 - R²/2)] dV.
double nlkg_energy(const NLKGState& state, const UnitSystem& units);

// Pointwise □R - κ²R(1 - R⁴) with ∂²_t R from three snapshots spaced dt.
RealField nlkg_residual(const RealField& prev, const RealField& current, const RealField& next, double dt,
                        const UnitSystem& units);
// Same residual with an analytic second time derivative.
RealField nlkg_residual(const RealField& R, const RealField& R_ddot, const UnitSystem& units);

}  // namespace qhydro
