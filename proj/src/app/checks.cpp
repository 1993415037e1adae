#include "qhydro/app/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "qhydro/borninfeld.hpp"
#include "qhydro/error.hpp"
#include "qhydro/geometry.hpp"
#include "qhydro/kleingordon.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/trajectories.hpp"

namespace qhydro::app {

namespace {

struct Check {
  std::string name;
  double tolerance;
  std::function<double()> measure;
};

double norm_drift() {
  const auto g = GridSpec::line(256, -12.0, 12.0);
  const UnitSystem u;
  const auto psi0 = gaussian_packet(g, {1.0, 0, 0}, 0.8, {0.5, 0, 0});
  const auto psi = evolve(psi0, PotentialSpec::harmonic(1.0), {1e-3, 1000, u});
  return std::abs(norm_squared(psi) / norm_squared(psi0) - 1.0);
}

double round_trip() {
  const auto g = GridSpec::line(128, 0.0, 2 * std::numbers::pi);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double a = n(rng), b = n(rng), c = n(rng);
    const auto psi = ComplexField::from_function(g, [&](const Point& x) {
      return cplx(1.5 + 0.5 * std::cos(x[0] + a), b * std::sin(2 * x[0]) + c * std::cos(3 * x[0]));
    });
    const auto pf = decompose(psi);
    const auto back = recompose(pf);
    for (std::size_t i = 0; i < psi.size(); ++i)
      if (!pf.nodal_mask[i]) worst = std::max(worst, std::abs(back[i] - psi[i]));
  }
  return worst;
}

double quantum_potential_oracle() {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const UnitSystem u;
  const double s = 1.0;
  const auto rho = RealField::from_function(g, [&](const Point& x) { return std::exp(-x[0] * x[0] / (2 * s * s)); });
  const auto U = quantum_potential(rho, u, NodeOptions{1e-4});
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (U.mask[i]) continue;
    const double x = g.coord(0, i);
    const double exact = -0.5 * (x * x / (4 * s * s * s * s) - 1 / (2 * s * s));
    worst = std::max(worst, std::abs(U.value[i] - exact));
  }
  return worst;
}

double kg_plane_wave_shell() {
  const auto g = GridSpec::line(64, 0.0, 2 * std::numbers::pi);
  const auto u = UnitSystem::with(1.0, 1.0, 1.0);
  const double k = 2.0, w = kg_dispersion(k, u), dt = 1e-3;
  auto wave = [&](double t) {
    return ComplexField::from_function(g, [&](const Point& x) { return std::polar(1.0, k * x[0] - w * t); });
  };
  const auto r = kg_residuals(wave(-dt), wave(0), wave(dt), dt, u);
  double worst = 0.0;
  for (double v : r.first.value.values()) worst = std::max(worst, std::abs(v));
  for (double v : r.second.value.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

double nlkg_vacuum() {
  const auto g = GridSpec::line(64, 0.0, 2 * std::numbers::pi);
  const auto u = UnitSystem::with(1.0, 1.0, 1.0);
  const NLKGState s{RealField::constant(g, 1.0), RealField::constant(g, 0.0)};
  const auto out = evolve_nlkg(s, {1e-3, 500, u});
  double worst = 0.0;
  for (double v : out.R.values()) worst = std::max(worst, std::abs(v - 1.0));
  return worst;
}

double no_crossing() {
  const auto g = GridSpec::line(256, -16.0, 16.0);
  const UnitSystem u;
  const auto a = gaussian_packet(g, {-3, 0, 0}, 1.0, {1.5, 0, 0});
  const auto b = gaussian_packet(g, {3, 0, 0}, 1.0, {-1.5, 0, 0});
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + 0.5 * b[i];
  const auto series = evolve_series(ComplexField(g, std::move(v)), PotentialSpec::zero(), {2e-3, 1000, u}, 10);
  std::vector<Point> seeds;
  for (int s = 0; s < 20; ++s) seeds.push_back({-5.0 + 10.0 * s / 19.0, 0, 0});
  const auto paths = bohm_trajectories(series, seeds, u, BohmOptions{.dt = 0.02, .t_end = {}, .record_every = 1, .nodes = {}});
  double violations = 0.0;
  for (std::size_t j = 0; j < paths.front().times.size(); ++j)
    for (std::size_t s = 1; s < paths.size(); ++s)
      if (paths[s].positions.size() > j && paths[s - 1].positions.size() > j &&
          !(paths[s].positions[j][0] > paths[s - 1].positions[j][0]))
        violations += 1.0;
  return violations;
}

double ray_energy() {
  const auto H = Hamiltonian::harmonic(1.0, 1.0);
  const std::vector<RayState> init{{{1.0, 0, 0}, {0.0, 0, 0}, 0.0}};
  const auto tr = hamilton_rays(H, init, {.dt = 1e-3, .steps = 62832}).front();
  double worst = 0.0;
  for (double e : tr.energy) worst = std::max(worst, std::abs(e - tr.energy.front()) / tr.energy.front());
  return worst;
}

double bi_scaling() {
  const double base = bi::self_energy({1.0, 1.0}).value;
  return std::abs(bi::self_energy({1.0, 4.0}).value / base - 8.0) / 8.0;
}

double flat_polar_torsion() {
  const auto chart = ChartGrid::box({33, 33}, {0.5, 0.0}, {2.0, 2.0});
  const auto out = cartan_structure(preset_connection("polar_orthonormal", chart));
  double worst = 0.0;
  for (const auto& c : out.torsion)
    for (double v : c) worst = std::max(worst, std::abs(v));
  return worst;
}

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {"schrodinger_norm_conservation", 1e-10, norm_drift},
      {"madelung_round_trip", 1e-12, round_trip},
      {"quantum_potential_gaussian", 1e-7, quantum_potential_oracle},
      {"kg_plane_wave_residuals", 1e-8, kg_plane_wave_shell},
      {"nlkg_vacuum_fixed_point", 1e-14, nlkg_vacuum},
      {"bohm_no_crossing", 0.5, no_crossing},
      {"oscillator_ray_energy", 1e-10, ray_energy},
      {"born_infeld_self_energy_scaling", 1e-9, bi_scaling},
      {"flat_polar_torsion", 1e-12, flat_polar_torsion},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : checks()) n.push_back(c.name);
    return n;
  }();
  return names;
}

std::vector<CheckResult> run_checks(const std::vector<std::string>& only) {
  for (const auto& name : only) {
    const auto& names = check_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ConfigError("unknown check '" + name + "'");
  }
  std::vector<CheckResult> out;
  for (const auto& c : checks()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    CheckResult r{c.name, false, 0.0, c.tolerance, ""};
    try {
      r.value = c.measure();
      r.passed = std::isfinite(r.value) && r.value < c.tolerance;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qhydro::app
