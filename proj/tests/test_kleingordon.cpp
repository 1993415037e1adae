#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qhydro/kleingordon.hpp"
#include "qhydro/spectral.hpp"
#include "support.hpp"

using namespace qhydro;
using namespace qhydro::testing;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double centroid(const ComplexField& f) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += f.grid().coord(0, i) * std::norm(f[i]);
    den += std::norm(f[i]);
  }
  return num / den;
}

// Times at which a sampled signal crosses zero, by linear interpolation.
std::vector<double> zero_crossings(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t i = 1; i < y.size(); ++i)
    if ((y[i - 1] < 0.0) != (y[i] < 0.0)) out.push_back(t[i - 1] + (t[i] - t[i - 1]) * y[i - 1] / (y[i - 1] - y[i]));
  return out;
}

}  // namespace

TEST_CASE("dispersion relation") {
  const auto u = UnitSystem::with(0.5, 2.0, 3.0);
  const double kc = u.compton_wavenumber();
  CHECK(kg_dispersion(0.0, u) == doctest::Approx(u.c * kc).epsilon(1e-15));
  const auto massless = UnitSystem::with(1.0, 0.0, 2.5);
  CHECK(kg_dispersion(1.7, massless) == doctest::Approx(2.5 * 1.7).epsilon(1e-15));
  // A massless wave in five dimensions with k5 = k_C reproduces the massive branch.
  for (double k : {0.0, 0.3, 1.0, 7.5, 40.0}) CHECK(massless_dispersion_5d(k, kc, u.c) == kg_dispersion(k, u));
}

TEST_CASE("plane wave phase over ten periods") {
  const auto u = UnitSystem::natural();
  const auto g = GridSpec::line(16, 0.0, two_pi);
  const double k = 2.0;
  const double omega = kg_dispersion(k, u);
  const auto phi0 = plane_wave_field(g, k);
  const auto s0 = positive_frequency_state(phi0, u);
  const double period = two_pi / omega;
  const std::size_t steps = 2'000'000;
  const double T = 10.0 * period;
  const auto s = evolve_kg(s0, {T / static_cast<double>(steps), steps, u});
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i);
    err = std::max(err, std::abs(s.phi[i] - std::polar(1.0, k * x - omega * T)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("massless pulse moves left at speed c with its shape intact") {
  const auto u = UnitSystem::with(1.0, 0.0, 1.5);
  const auto g = GridSpec::line(128, -10.0, 10.0);
  auto pulse = [](double x) { return std::exp(-x * x); };
  const auto phi0 = ComplexField::from_function(g, [&](const Point& x) { return cplx(pulse(x[0]), 0.0); });
  // φ(x, t) = f(x + ct) gives φ̇ = c f'(x).
  const auto dphi = ComplexField::from_function(g, [&](const Point& x) { return cplx(-2.0 * x[0] * pulse(x[0]) * u.c, 0.0); });
  const double T = 4.0;
  const std::size_t steps = 20000;
  const auto s = evolve_kg({phi0, dphi}, {T / steps, steps, u});
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coord(0, i) + u.c * T;
    x = std::remainder(x, 20.0);
    err = std::max(err, std::abs(s.phi[i] - pulse(x)));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("zero field stays zero") {
  const auto g = GridSpec::cube(2, 16, -1.0, 1.0);
  const auto zero = ComplexField::constant(g, 0.0);
  const auto s = evolve_kg({zero, zero}, {1e-3, 100, UnitSystem::natural()});
  CHECK(max_abs(s.phi) == 0.0);
  CHECK(max_abs(s.phi_dot) == 0.0);
}

TEST_CASE("stability bound is enforced and instabilities are reported") {
  const auto u = UnitSystem::natural();
  const auto g = GridSpec::line(64, -5.0, 5.0);
  const double wmax = max_frequency(g, u.c, u.compton_wavenumber());
  std::mt19937_64 rng(31);
  const auto re = band_limited(g, rng, 1.0);
  std::vector<cplx> z(g.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = re[i] + 1e-3 * std::cos(std::numbers::pi * i);
  const ComplexField phi(g, z);
  const auto zero = ComplexField::constant(g, 0.0);

  CHECK_THROWS_AS(evolve_kg({phi, zero}, {1.5 / wmax, 10, u}), ConfigError);
  KGConfig cfg{3.0 / wmax, 1000, u};
  cfg.enforce_stability = false;
  CHECK_THROWS_WITH_AS(evolve_kg({phi, zero}, cfg), doctest::Contains("mode"), NumericError);
  CHECK_NOTHROW(evolve_kg({phi, zero}, {0.9 / wmax, 1000, u}));
}

TEST_CASE("property: leapfrog conserves the energy") {
  std::mt19937_64 rng(32);
  const auto u = UnitSystem::with(1.0, 0.8, 1.2);
  for (int trial = 0; trial < 4; ++trial) {
    const auto g = GridSpec::cube(1 + trial % 2, 32, -4.0, 4.0);
    const auto re = band_limited(g, rng, 0.25), im = band_limited(g, rng, 0.25);
    std::vector<cplx> z(g.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = cplx(re[i], im[i]);
    const auto s0 = positive_frequency_state(ComplexField(g, z), u);
    const double e0 = kg_energy(s0, u);
    const auto s = evolve_kg(s0, {1e-5, 1000, u});
    CHECK(std::abs(kg_energy(s, u) - e0) / e0 < 1e-8);
  }
}

TEST_CASE("packet centroid moves at the group velocity") {
  const auto u = UnitSystem::natural();
  const auto g = GridSpec::line(1024, -100.0, 100.0);
  const double k0 = 2.0, sigma = 6.0;
  const auto phi0 = ComplexField::from_function(g, [&](const Point& x) {
    return std::polar(std::exp(-(x[0] + 30.0) * (x[0] + 30.0) / (4.0 * sigma * sigma)), k0 * x[0]);
  });
  const auto s0 = positive_frequency_state(phi0, u);
  const double T = 40.0;
  const auto s = evolve_kg(s0, {T / 4000, 4000, u});
  const double measured = (centroid(s.phi) - centroid(s0.phi)) / T;
  const double expected = u.c * u.c * k0 / kg_dispersion(k0, u);
  CHECK(std::abs(measured - expected) / expected < 0.01);
}

TEST_CASE("nonlinear residual examples") {
  const auto u = UnitSystem::with(1.0, 1.3, 1.0);
  const auto g = GridSpec::line(64, 0.0, two_pi);
  const auto one = RealField::constant(g, 1.0), zero = RealField::constant(g, 0.0);
  CHECK(max_abs(nlkg_residual(one, zero, u)) == 0.0);
  CHECK(max_abs(nlkg_residual(zero, zero, u)) == 0.0);
  CHECK(max_abs(nlkg_residual(one, one, one, 0.1, u)) == 0.0);

  // R = 1 + ε cos(kx - ωt) with analytic R_tt; the residual is O(ε²) only on
  // the linearized shell ω² = c²k² + 4κ²c².
  const double eps = 1e-4, k = 3.0, kappa = u.compton_wavenumber();
  const double on_shell = u.c * std::sqrt(k * k + 4.0 * kappa * kappa);
  auto residual_at = [&](double omega) {
    const auto R = RealField::from_function(g, [&](const Point& x) { return 1.0 + eps * std::cos(k * x[0]); });
    const auto Rtt = RealField::from_function(g, [&](const Point& x) { return -omega * omega * eps * std::cos(k * x[0]); });
    return max_abs(nlkg_residual(R, Rtt, u));
  };
  const double best = residual_at(on_shell);
  CHECK(best < 20.0 * kappa * kappa * eps * eps);
  for (double f : {0.9, 0.99, 0.999, 1.001, 1.01, 1.1}) CHECK(residual_at(f * on_shell) > 10.0 * best);
}

TEST_CASE("uniform R = 1 is an exact static solution") {
  const auto u = UnitSystem::with(1.0, 2.0, 1.0);
  const auto g = GridSpec::cube(2, 16, -2.0, 2.0);
  const auto s = evolve_nlkg({RealField::constant(g, 1.0), RealField::constant(g, 0.0)}, {1e-3, 500, u});
  for (double r : s.R.values()) CHECK(r == 1.0);
  for (double v : s.R_dot.values()) CHECK(v == 0.0);
}

TEST_CASE("small oscillation about R = 1 follows the linearized dispersion") {
  const auto u = UnitSystem::with(1.0, 1.0, 1.0);
  const auto g = GridSpec::line(32, 0.0, two_pi);
  const double k = 2.0, eps = 1e-5;
  const double omega = u.c * std::sqrt(k * k + 4.0 * std::pow(u.compton_wavenumber(), 2));
  const auto R0 = RealField::from_function(g, [&](const Point& x) { return 1.0 + eps * std::cos(k * x[0]); });
  const double dt = 2e-3;
  const std::size_t steps = static_cast<std::size_t>(6.0 * two_pi / omega / dt);
  const auto series = evolve_nlkg_series({R0, RealField::constant(g, 0.0)}, {dt, steps, u}, 1);
  std::vector<double> y;
  for (const auto& f : series.frames) y.push_back(f.R[0] - 1.0);
  const auto zc = zero_crossings(series.times, y);
  REQUIRE(zc.size() >= 10);
  const double measured = std::numbers::pi * static_cast<double>(zc.size() - 1) / (zc.back() - zc.front());
  CHECK(std::abs(measured - omega) / omega < 1e-4);
}

TEST_CASE("nonlinear energy drift stays below 1e-6 over 1000 steps") {
  const auto u = UnitSystem::with(1.0, 0.7, 1.0);
  const auto g = GridSpec::line(128, -10.0, 10.0);
  const auto R0 = RealField::from_function(g, [](const Point& x) { return 1.0 + 0.3 * std::exp(-x[0] * x[0]); });
  const NLKGState s0{R0, RealField::constant(g, 0.0)};
  const double e0 = nlkg_energy(s0, u);
  const auto s = evolve_nlkg(s0, {2e-3, 1000, u});
  CHECK(std::abs(nlkg_energy(s, u) - e0) / std::abs(e0) < 1e-6);
}

TEST_CASE("nonlinear residual along an evolved trajectory converges at second order") {
  const auto u = UnitSystem::with(1.0, 0.7, 1.0);
  const auto g = GridSpec::line(64, -8.0, 8.0);
  const auto R0 = RealField::from_function(g, [](const Point& x) { return 1.0 + 0.2 * std::exp(-x[0] * x[0]); });
  const NLKGState s0{R0, RealField::constant(g, 0.0)};
  // Snapshots spaced 8 steps apart centred on t = 0.32.
  auto residual = [&](double dt) {
    const std::size_t stride = 8;
    const auto steps = static_cast<std::size_t>(std::llround(0.32 / dt)) + stride;
    const auto series = evolve_nlkg_series(s0, {dt, steps, u}, stride);
    const std::size_t n = series.frames.size();
    return max_abs(nlkg_residual(series.frames[n - 3].R, series.frames[n - 2].R, series.frames[n - 1].R,
                                 stride * dt, u));
  };
  const double r1 = residual(4e-3), r2 = residual(2e-3), r3 = residual(1e-3);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(r2 / r3 == doctest::Approx(4.0).epsilon(0.1));
}
