#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qhydro/grid.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/schrodinger.hpp"

namespace qhydro {

/// Particle path sampled at strictly increasing times.
struct Trajectory {
  int dim = 1;
  std::size_t label = 0;
  std::vector<double> times;
  std::vector<Point> positions;
  // Set when the path ran into the nodal mask; the samples stop there.
  bool hit_node = false;
};

struct BohmOptions {
  double dt = 1e-2;
  // Defaults to the last snapshot time.
  std::optional<double> t_end;
  std::size_t record_every = 1;
  NodeOptions nodes;
};

/// Integrates dx/dt = v(x, t) = ∇S/m with classical RK4 from the first
/// snapshot time.
///
/// Velocity fields come from each snapshot (see hydro_fields) and are
/// interpolated with periodic tensor-product cubic Lagrange stencils in
/// space and linearly in time. A trajectory whose stencil touches a masked
/// sample stops with hit_node set. A seed whose stencil is masked at the
/// start is rejected. Positions are not wrapped into the periodic box.
std::vector<Trajectory> bohm_trajectories(const WaveSeries& series, std::span<const Point> seeds,
                                          const UnitSystem& units, const BohmOptions& opts = {});

/// Draws n points from |ψ|²: a grid sample chosen with probability ∝ |ψ|²,
/// then a uniform offset within its cell (centred on the sample).
std::vector<Point> sample_density(const ComplexField& psi, std::size_t n, std::uint64_t seed);

struct EquivarianceOptions {
  int axis = 0;
  std::size_t bins = 20;
  // Histogram range along `axis`; defaults to the whole periodic axis.
  std::optional<double> lo;
  std::optional<double> hi;
  BohmOptions bohm;
};

struct EquivarianceReport {
  std::size_t n = 0;
  double T = 0.0;
  double l1 = 0.0;
  std::size_t lost = 0;
  double lo = 0.0;
  double hi = 0.0;
  // Bin probabilities; the range overflow enters l1 as one extra bin.
  std::vector<double> empirical;
  std::vector<double> expected;
};

/// Transports `ensemble` with bohm_trajectories to the end time and compares
/// its marginal histogram along `axis` with the marginal of |ψ(T)|², using
/// the same cell model as sample_density. Positions are wrapped into the
/// periodic box. Trajectories that hit a node are dropped and counted.
EquivarianceReport equivariance_check(const WaveSeries& series, std::span<const Point> ensemble,
                                      const UnitSystem& units, const EquivarianceOptions& opts = {});

/// Separable Hamiltonian H(x, p) = T(p) + V(x).
struct Hamiltonian {
  int dim = 1;
  std::function<double(const Point&)> kinetic;
  std::function<Point(const Point&)> kinetic_gradient;
  std::function<double(const Point&)> potential;
  std::function<Point(const Point&)> potential_gradient;

  double operator()(const Point& x, const Point& p) const { return kinetic(p) + potential(x); }

  // T = |p|²/2m, V = 0.
  static Hamiltonian free(double mass, int dim = 1);
  // T = |p|²/2m, V = mω²|x|²/2.
  static Hamiltonian harmonic(double mass, double omega, int dim = 1);
  // T = c√(|p|² + m²c²), V = 0.
  static Hamiltonian relativistic(double mass, double c, int dim = 1);
};

struct RayState {
  Point x{};
  Point p{};
  double t = 0.0;
};

enum class RayMethod { leapfrog, yoshida4 };

struct RayConfig {
  double dt = 1e-3;
  std::size_t steps = 1000;
  RayMethod method = RayMethod::yoshida4;
  std::size_t record_every = 1;
  void validate() const;
};

/// Phase-space path with the action S = S₀ + ∫(p·ẋ - H) dt accumulated
/// along it (S₀ = 0) and H sampled at every record.
struct RayTrajectory {
  int dim = 1;
  std::size_t label = 0;
  std::vector<double> times;
  std::vector<Point> positions;
  std::vector<Point> momenta;
  std::vector<double> action;
  std::vector<double> energy;
};

/// dx/dt = ∂H/∂p, dp/dt = -∂H/∂x by drift-kick-drift leapfrog or its
/// fourth-order Yoshida composition. Each substep is the exact flow of T or
/// V, so the action increments are exact for the composed map.
std::vector<RayTrajectory> hamilton_rays(const Hamiltonian& H, std::span<const RayState> initial,
                                         const RayConfig& cfg);

/// ∂S/∂t + H(x, ∇S) on the middle of an odd number (3 or 5) of slices spaced
/// dt. ∂S/∂t uses the centred stencil of matching order; ∇S uses fourth-order
/// finite differences that treat each axis as non-periodic (S is unwrapped),
/// one-sided at the ends, so every axis with n > 1 needs n ≥ 5.
RealField hj_residual(std::span<const RealField> S_slices, double dt, const Hamiltonian& H);

namespace io {
// Columns: t, x (, y, z), flags. flags is 1 on the last row of a path that hit a node.
void write_csv(std::ostream& out, const Trajectory& tr);
// Columns: t, x.., p.., action, energy.
void write_csv(std::ostream& out, const RayTrajectory& tr);
}  // namespace io

}  // namespace qhydro
