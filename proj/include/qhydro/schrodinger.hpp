#pragma once

#include <optional>
#include <vector>

#include "qhydro/grid.hpp"
#include "qhydro/spectral.hpp"

namespace qhydro {

/// External potential U(x) in energy units.
struct PotentialSpec {
  enum class Kind { zero, harmonic, square_well, tabulated };

  Kind kind = Kind::zero;
  double omega = 0.0;  // harmonic: U = m ω² |x|² / 2
  double depth = 0.0;  // square well: U = -depth where every |x_a| < width/2
  double width = 0.0;
  std::optional<RealField> table;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec harmonic(double omega);
  static PotentialSpec square_well(double depth, double width);
  static PotentialSpec tabulated(RealField values);

  RealField sample(const GridSpec& grid, const UnitSystem& units) const;
};

struct EvolutionConfig {
  double dt = 1e-3;
  std::size_t steps = 1;
  UnitSystem units;

  void validate() const;
};

/// Strang split-step propagator for iħ∂ψ/∂t = -(ħ²/2m)Δψ + Uψ.
///
/// Half kinetic step in Fourier space, full potential step in real space,
/// half kinetic step; adjacent half kinetic steps are fused. Each step is
/// unitary, so the L² norm is conserved to rounding.
class SplitStepper {
 public:
  SplitStepper(const ComplexField& psi0, const RealField& potential, double dt, const UnitSystem& units);

  // Advances `count` steps. Throws NumericError naming the step index if a
  // non-finite value appears.
  void advance(std::size_t count);

  ComplexField state() const;
  double time() const { return time_; }
  std::size_t steps_taken() const { return steps_; }

 private:
  void kinetic(std::span<const cplx> phase);

  GridSpec grid_;
  Fourier fft_;
  std::vector<cplx> psi_;
  std::vector<cplx> half_kinetic_;
  std::vector<cplx> full_kinetic_;
  std::vector<cplx> potential_phase_;
  double dt_;
  double time_ = 0.0;
  std::size_t steps_ = 0;
};

ComplexField evolve(const ComplexField& psi, const PotentialSpec& potential, const EvolutionConfig& cfg);

struct WaveSeries {
  std::vector<double> times;
  std::vector<ComplexField> frames;
};

// Evolves and records the state every `every` steps (the initial state is
// always frame 0 and the final state is always the last frame).
WaveSeries evolve_series(const ComplexField& psi, const PotentialSpec& potential, const EvolutionConfig& cfg,
                         std::size_t every);

// Rayleigh quotient <ψ|H|ψ>/<ψ|ψ> with a spectral kinetic term.
double energy(const ComplexField& psi, const RealField& potential, const UnitSystem& units);
double energy(const ComplexField& psi, const PotentialSpec& potential, const UnitSystem& units);

// ‖(H - E)ψ‖ / ‖ψ‖ with E the Rayleigh quotient.
double eigen_residual(const ComplexField& psi, const RealField& potential, const UnitSystem& units);

struct GroundStateOptions {
  double residual_tol = 1e-9;  // converged when ‖(H-E)ψ‖/‖ψ‖ < residual_tol
  double initial_dtau = 0.05;  // first imaginary-time step
  double min_dtau = 1e-6;
  double chunk_tau = 0.5;  // imaginary time between residual checks
  std::size_t max_iterations = 2000000;
};

struct GroundState {
  ComplexField psi;
  double energy;
  double residual;
  std::size_t iterations;
};

/// Imaginary-time relaxation with renormalization after every step.
///
/// The fixed point of a split step with step τ differs from the true
/// eigenstate by O(τ²). The step starts at initial_dtau; whenever the
/// residual plateaus, the plateau height fixes that O(τ²) constant and the
/// step is shrunk to bring the plateau below residual_tol.
GroundState ground_state(const PotentialSpec& potential, const GridSpec& grid, const UnitSystem& units,
                         const GroundStateOptions& opts = {});

// Initial-state presets.
ComplexField gaussian_packet(const GridSpec& grid, const Point& center, double sigma, const Point& k = {0, 0, 0});
ComplexField plane_wave(const GridSpec& grid, const Point& k, double amplitude = 1.0);
// Harmonic-oscillator eigenstate with quantum number `level` along axis 0
// (ground state along the other axes), normalized.
ComplexField oscillator_eigenstate(const GridSpec& grid, int level, double omega, const UnitSystem& units);

ComplexField normalized(const ComplexField& psi);

// Variance <x²> - <x>² of the density |ψ|² along an axis.
double position_variance(const ComplexField& psi, int axis = 0);
double position_mean(const ComplexField& psi, int axis = 0);

}  // namespace qhydro
