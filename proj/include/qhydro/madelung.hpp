#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro {

// Elementary plaquette whose phase differences sum to a nonzero multiple of 2π.
struct Vortex {
  std::array<std::size_t, 3> corner;
  int plane_a;
  int plane_b;
  int winding;
};

/// Polar form ψ = R e^{iS/ħ}.
///
/// S is unwrapped independently within each connected region of unmasked
/// points and set to 0 on the mask. Each region's reference value is the raw
/// phase of its first point, so recompose() reproduces ψ off the mask.
struct PolarFields {
  RealField R;
  RealField S;
  Mask nodal_mask;
  double hbar = 1.0;
  std::size_t regions = 0;
  std::vector<Vortex> vortices;

  bool multi_region() const { return regions > 1; }
};

/// Density, momentum and velocity of the Madelung fluid.
///
/// Non-relativistic reading: ρ = mR², p = ∇S = ħ Im(ψ*∇ψ)/|ψ|², v = p/m.
/// p and v are 0 on the mask.
struct HydroFields {
  RealField rho;
  std::vector<RealField> p;
  std::vector<RealField> v;
  Mask mask;
};

// Nodal threshold on R. Unset means 1e-8 max R.
struct NodeOptions {
  std::optional<double> eps_node;
};

PolarFields decompose(const ComplexField& psi, const UnitSystem& units = {}, const NodeOptions& opts = {});
ComplexField recompose(const PolarFields& pf);

HydroFields hydro_fields(const ComplexField& psi, const UnitSystem& units = {}, const NodeOptions& opts = {});

/// U_h = -(ħ²/2m) Δ√ρ/√ρ with a spectral Laplacian. Points with √ρ below
/// the nodal threshold are masked. A fully masked density is rejected.
MaskedField quantum_potential(const RealField& rho, const UnitSystem& units, const NodeOptions& opts = {});
// Same from a real amplitude R with ρ = R². R may change sign, which keeps a
// real eigenfunction smooth through its nodes where √ρ = |R| has kinks.
MaskedField quantum_potential_amplitude(const RealField& R, const UnitSystem& units, const NodeOptions& opts = {});

/// Relativistic counterpart -ħ²c² □√ρ₀/√ρ₀ (the signed "U_h squared"),
/// with □ = (1/c²)∂²_t - Δ and ∂²_t from three slices spaced dt.
MaskedField quantum_potential_rel(const RealField& rho_prev, const RealField& rho, const RealField& rho_next,
                                  double dt, const UnitSystem& units, const NodeOptions& opts = {});
MaskedField quantum_potential_rel_amplitude(const RealField& R_prev, const RealField& R, const RealField& R_next,
                                            double dt, const UnitSystem& units, const NodeOptions& opts = {});

struct ResidualPair {
  MaskedField first;
  MaskedField second;
};

/// Hamilton-Jacobi and continuity residuals at the middle of three
/// snapshots spaced dt:
///   hj = ∂S/∂t + |∇S|²/2m + V + U_h
///   continuity = ∂(R²)/∂t + ∇·(R²∇S/m)
/// ∂S/∂t is the wrapped phase increment ħ arg(ψ₊ conj ψ₋)/2dt and spatial
/// gradients of S come from ψ directly, so no unwrapping is involved.
ResidualPair schrodinger_residuals(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                   double dt, const RealField& potential, const UnitSystem& units,
                                   const NodeOptions& opts = {});
ResidualPair schrodinger_residuals(const PolarFields& prev, const PolarFields& cur, const PolarFields& next,
                                   double dt, const RealField& potential, const UnitSystem& units,
                                   const NodeOptions& opts = {});

/// Euler-form residual ∂p/∂t + (p·∇)p/m + ∇(V + U_h), one component per axis.
std::vector<RealField> euler_residual(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                      double dt, const RealField& potential, const UnitSystem& units,
                                      const NodeOptions& opts = {});

/// Relativistic residuals for a Klein-Gordon field sampled at three times.
///
/// Covariant momentum p_μ = -∂_μS, so p_t is the energy and, with signature
/// (+,-,-,-), p² = (p_t/c)² - |p_i|². Then
///   first  (mass shell)   = p² - m₀²c² - ħ²□R/R
///   second (codivergence) = (1/c²)∂_t p_t - ∂_i p_i
/// The rest mass m₀ is units.mass.
ResidualPair kg_residuals(const ComplexField& prev, const ComplexField& cur, const ComplexField& next, double dt,
                          const UnitSystem& units, const NodeOptions& opts = {});

// Codivergence of the density-weighted current, (1/c²)∂_t(R²p_t) - ∂_i(R²p_i).
MaskedField kg_current_codivergence(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                    double dt, const UnitSystem& units, const NodeOptions& opts = {});

/// ρ₀ = √(m₀² - U²/c²) from the signed U_h² field. Points with a negative
/// radicand are flagged in the mask and set to 0.
MaskedField effective_density(const RealField& uh_squared, const UnitSystem& units);

// Covector field at one time: p_t and spatial components p_i.
struct CovectorSlice {
  RealField pt;
  std::vector<RealField> p;
};

// p_μ = -∂_μS at the middle of three snapshots, from ψ directly: p_t is the
// wrapped phase increment -ħ arg(ψ₊ conj ψ₋)/2dt. Masked points hold 0.
CovectorSlice covector_slice(const ComplexField& prev, const ComplexField& cur, const ComplexField& next, double dt,
                             const UnitSystem& units, const NodeOptions& opts = {});

struct System27Residuals {
  // max over points and index pairs of |∂_μp_ν - ∂_νp_μ|
  double closedness = 0.0;
  RealField codivergence;
  RealField mass_shell;
};

/// Residuals of dp = 0, δp = 0 and p² = ρ₀²c² at the middle of three slices.
System27Residuals system27_residuals(const CovectorSlice& prev, const CovectorSlice& cur, const CovectorSlice& next,
                                     double dt, const RealField& rho0, const UnitSystem& units);

/// Spatial components of dU for the covelocity U = (1/ρ)dS, ρ = mR², with
/// dS taken from ψ. Returned in the order (0,1), (0,2), (1,2) for the active
/// axes; masked points hold 0.
std::vector<MaskedField> kinematic_vorticity(const ComplexField& psi, const UnitSystem& units,
                                             const NodeOptions& opts = {});

struct ResidualNorms {
  double max = 0.0;
  double l2 = 0.0;
  // √(∫ρ r² / ∫ρ), insensitive to noise where the density is negligible.
  double weighted_l2 = 0.0;
};

ResidualNorms residual_norms(const MaskedField& r);
ResidualNorms residual_norms(const MaskedField& r, const RealField& weight);

namespace io {
// Columns: coordinates, R, S, mask.
void write_csv(std::ostream& out, const PolarFields& pf);
// Columns: coordinates, rho, p_x.., v_x.., mask.
void write_csv(std::ostream& out, const HydroFields& hf);
}  // namespace io

}  // namespace qhydro
