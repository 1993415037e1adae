#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro {

/// Non-periodic coordinate chart in 1-4 dimensions, endpoints included.
///
/// Axis a has n[a] samples from lo[a] to hi[a]. An axis with n = 1 is a
/// degenerate direction on which every derivative vanishes. Storage is
/// row-major with axis 0 slowest.
struct ChartGrid {
  int dim = 2;
  std::array<std::size_t, 4> n{1, 1, 1, 1};
  std::array<double, 4> lo{0, 0, 0, 0};
  std::array<double, 4> hi{1, 1, 1, 1};

  static ChartGrid box(std::vector<std::size_t> n, std::vector<double> lo, std::vector<double> hi);
  void validate() const;

  std::size_t size() const { return n[0] * n[1] * n[2] * n[3]; }
  double spacing(int axis) const;
  double coord(int axis, std::size_t i) const { return lo[axis] + static_cast<double>(i) * spacing(axis); }
  std::array<std::size_t, 4> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<std::size_t, 4>& idx) const;
  std::array<double, 4> point(std::size_t flat) const;
};

using ChartField = std::vector<double>;

ChartField sample(const ChartGrid& chart, const std::function<double(const std::array<double, 4>&)>& f);

// Second-order centred difference; second-order one-sided at the ends.
ChartField chart_derivative(const ChartGrid& chart, const ChartField& f, int axis);

/// Frame θ^μ = θ^μ_i dx^i and connection ω^μ_ν = ω^μ_{νi} dx^i on a chart.
///
/// Optional g_{μν} is the metric in the frame basis. Components are stored
/// flat: frame[μn + i], connection[(μn + ν)n + i], metric[μn + ν].
struct ChartConnection {
  ChartGrid chart;
  std::vector<ChartField> frame;
  std::vector<ChartField> connection;
  std::optional<std::vector<ChartField>> metric;

  int n() const { return chart.dim; }
  const ChartField& theta(int mu, int i) const { return frame[mu * n() + i]; }
  const ChartField& omega(int mu, int nu, int i) const { return connection[(mu * n() + nu) * n() + i]; }
  const ChartField& g(int mu, int nu) const { return (*metric)[mu * n() + nu]; }

  void validate() const;
};

/// Torsion Θ^μ = dθ^μ + ω^μ_ν ∧ θ^ν and curvature Ω^μ_ν = dω^μ_ν + ω^μ_λ ∧ ω^λ_ν
/// as 2-form components, torsion[(μn + i)n + j] and
/// curvature[((μn + ν)n + i)n + j]. The [j][i] entries are the exact
/// negatives of the [i][j] entries.
struct CartanOutput {
  int n = 0;
  std::vector<ChartField> torsion;
  std::vector<ChartField> curvature;

  const ChartField& Theta(int mu, int i, int j) const { return torsion[(mu * n + i) * n + j]; }
  const ChartField& Omega(int mu, int nu, int i, int j) const { return curvature[((mu * n + nu) * n + i) * n + j]; }
};

CartanOutput cartan_structure(const ChartConnection& conn);

/// Ricci scalar from the curvature 2-form.
///
/// With E_a the frame dual to θ, R^μ_{νab} = Ω^μ_{νij} E_a^i E_b^j,
/// Ric_{νb} = R^μ_{νμb} and the scalar is g^{νb} Ric_{νb}. For a holonomic
/// frame and Levi-Civita connection this is the usual convention in which
/// the round sphere has positive curvature.
ChartField ricci_scalar(const ChartConnection& conn, const CartanOutput& cartan);

/// Metricity Q_{μνi} = ∂_i g_{μν} - ω^λ_{μi} g_{λν} - ω^λ_{νi} g_{μλ},
/// stored Q[(μn + ν)n + i].
struct MetricityResult {
  std::vector<ChartField> Q;
  double max_abs = 0.0;
  bool reducible = false;
};

MetricityResult metricity(const ChartConnection& conn, double tol);

/// Split ω = ω̄ + τ with τ symmetric once lowered by g:
/// τ^λ_{νi} = -½ g^{λμ} Q_{μνi}, ω̄ = ω - τ. The discrete metricity of ω̄
/// then vanishes to rounding. A degenerate metric is rejected.
struct ConnectionSplit {
  ChartConnection compatible;
  std::vector<ChartField> tau;
};

ConnectionSplit split_connection(const ChartConnection& conn);

/// Holonomic frame with the Levi-Civita connection of the given metric
/// components g[μn + ν], Christoffel symbols from finite differences of g.
ChartConnection levi_civita(const ChartGrid& chart, std::vector<ChartField> metric);

/// Named analytic charts:
///   "cartesian"          θ = dx, ω = 0, Euclidean metric
///   "polar"              (r, φ) holonomic frame, analytic Christoffels
///   "polar_orthonormal"  θ = (dr, r dφ), ω^1_2 = -dφ, identity frame metric
///   "sphere"             (ϑ, φ) on a sphere of radius `radius`, holonomic,
///                        analytic Christoffels
ChartConnection preset_connection(const std::string& name, const ChartGrid& chart, double radius = 1.0);

/// Ricci scalar of g = Ω²η on spacetime, η = diag(c², -1, -1, -1) in
/// coordinates (t, x, y, z), at the middle of an odd number (≥ 5) of time
/// slices spaced dt. The metric is assembled on a 4D chart and pushed
/// through levi_civita, cartan_structure and ricci_scalar; no closed-form
/// conformal formula is used. Points where the metric is singular (Ω below
/// `omega_floor`) are masked.
MaskedField ricci_scalar_conformal(const std::vector<RealField>& omega_slices, double dt, const UnitSystem& units,
                                   double omega_floor = 1e-12);

}  // namespace qhydro
