#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qhydro/schrodinger.hpp"
#include "support.hpp"

using namespace qhydro;
using namespace qhydro::testing;

namespace {

// Analytic oscillator ground state, m = ħ = ω = 1.
ComplexField analytic_ground(const GridSpec& g) {
  return ComplexField::from_function(g, [](const Point& x) {
    return cplx(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x[0] * x[0]), 0.0);
  });
}

double relative_norm_drift(const ComplexField& a, const ComplexField& b) {
  const double na = std::sqrt(norm_squared(a));
  return std::abs(std::sqrt(norm_squared(b)) - na) / na;
}

}  // namespace

TEST_CASE("analytic ground state keeps its modulus and acquires phase exp(-i E0 T)") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto psi0 = analytic_ground(g);
  const EvolutionConfig cfg{1e-4, 10000, UnitSystem::natural()};
  const auto psi = evolve(psi0, PotentialSpec::harmonic(1.0), cfg);
  double drift = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) drift = std::max(drift, std::abs(std::abs(psi[i]) - std::abs(psi0[i])));
  CHECK(drift < 1e-8);
  const cplx expected = std::polar(1.0, -0.5 * 1.0);
  const std::size_t mid = g.size() / 2;
  CHECK(std::abs(psi[mid] / psi0[mid] - expected) < 1e-8);
}

TEST_CASE("free plane wave evolves with phase k x - ħk²t/2m") {
  const auto u = UnitSystem::with(0.7, 1.3, 1.0);
  const auto g = GridSpec::line(64, 0.0, 2.0 * std::numbers::pi);
  const double k = 3.0;
  const auto psi0 = plane_wave(g, {k, 0, 0});
  const EvolutionConfig cfg{0.01, 100, u};
  const auto psi = evolve(psi0, PotentialSpec::zero(), cfg);
  const double t = 1.0;
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i);
    err = std::max(err, std::abs(psi[i] - std::polar(1.0, k * x - u.hbar * k * k * t / (2.0 * u.mass))));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("free Gaussian width follows the analytic spreading law") {
  const auto g = GridSpec::line(512, -30.0, 30.0);
  const double sigma0 = 1.0;
  const auto psi0 = gaussian_packet(g, {0, 0, 0}, sigma0);
  CHECK(position_variance(psi0) == doctest::Approx(sigma0 * sigma0).epsilon(1e-12));
  const auto series = evolve_series(psi0, PotentialSpec::zero(), {0.01, 200, UnitSystem::natural()}, 50);
  for (std::size_t f = 1; f < series.frames.size(); ++f) {
    const double t = series.times[f];
    const double s = t / (2.0 * sigma0 * sigma0);
    const double expected = sigma0 * sigma0 * (1.0 + s * s);
    CHECK(std::abs(position_variance(series.frames[f]) - expected) / expected < 1e-6);
  }
}

TEST_CASE("ground state energies from imaginary-time relaxation") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  SUBCASE("harmonic omega = 1") {
    const auto gs = ground_state(PotentialSpec::harmonic(1.0), g, u);
    CHECK(std::abs(gs.energy - 0.5) < 1e-6);
    CHECK(std::abs(norm_squared(gs.psi) - 1.0) < 1e-12);
    CHECK(gs.residual < 1e-9);
  }
  SUBCASE("harmonic omega = 2") {
    const auto gs = ground_state(PotentialSpec::harmonic(2.0), g, u);
    CHECK(std::abs(gs.energy - 1.0) < 1e-6);
  }
  SUBCASE("free particle relaxes to a constant") {
    const auto gs = ground_state(PotentialSpec::zero(), g, u);
    CHECK(std::abs(gs.energy) < 1e-9);
    const double level = std::abs(gs.psi[0]);
    for (const auto& z : gs.psi.values()) CHECK(std::abs(std::abs(z) - level) < 1e-6);
  }
}

TEST_CASE("ground state reports non-convergence with the final residual") {
  const auto g = GridSpec::line(64, -10.0, 10.0);
  GroundStateOptions opts;
  opts.max_iterations = 10;
  opts.residual_tol = 1e-14;
  CHECK_THROWS_WITH_AS(ground_state(PotentialSpec::harmonic(1.0), g, UnitSystem::natural(), opts),
                       doctest::Contains("final residual"), NumericError);
}

TEST_CASE("energy expectation values") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  CHECK(energy(analytic_ground(g), PotentialSpec::harmonic(1.0), u) == doctest::Approx(0.5).epsilon(1e-12));

  const auto ue = UnitSystem::with(1.1, 0.6, 1.0);
  const auto gp = GridSpec::line(64, 0.0, 2.0 * std::numbers::pi);
  const double k = 2.0;
  CHECK(energy(plane_wave(gp, {k, 0, 0}), PotentialSpec::zero(), ue) ==
        doctest::Approx(ue.hbar * ue.hbar * k * k / (2.0 * ue.mass)).epsilon(1e-12));
  CHECK(std::abs(energy(ComplexField::constant(g, 1.0), PotentialSpec::zero(), u)) < 1e-14);
}

TEST_CASE("norm conservation for every potential kind over 1000 steps") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  std::mt19937_64 rng(21);
  auto table = band_limited(g, rng, 0.2);
  const PotentialSpec kinds[] = {PotentialSpec::zero(), PotentialSpec::harmonic(1.3),
                                 PotentialSpec::square_well(5.0, 4.0), PotentialSpec::tabulated(table)};
  const auto psi0 = gaussian_packet(g, {-1.0, 0, 0}, 0.8, {2.0, 0, 0});
  for (const auto& v : kinds) {
    const auto psi = evolve(psi0, v, {1e-3, 1000, u});
    CHECK(relative_norm_drift(psi0, psi) < 1e-10);
  }
}

TEST_CASE("energy conservation for a time-independent potential") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  const auto v = PotentialSpec::harmonic(1.0);
  const auto psi0 = gaussian_packet(g, {1.0, 0, 0}, 0.9);
  const double e0 = energy(psi0, v, u);
  const auto psi = evolve(psi0, v, {1e-4, 1000, u});
  CHECK(std::abs(energy(psi, v, u) - e0) / e0 < 1e-8);
}

TEST_CASE("Strang splitting converges at second order in dt") {
  const auto g = GridSpec::line(128, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  const auto v = PotentialSpec::harmonic(1.0);
  const auto psi0 = gaussian_packet(g, {1.5, 0, 0}, 0.6, {1.0, 0, 0});
  const double T = 0.8;
  const auto reference = evolve(psi0, v, {T / 6400, 6400, u});
  auto error = [&](std::size_t steps) {
    return std::sqrt(norm_squared(ComplexField(g, [&] {
      const auto psi = evolve(psi0, v, {T / static_cast<double>(steps), steps, u});
      std::vector<cplx> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = psi[i] - reference[i];
      return d;
    }())));
  };
  const double e1 = error(50), e2 = error(100), e3 = error(200);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("non-finite state aborts with the step index") {
  const auto g = GridSpec::line(64, -1.0, 1.0);
  const auto psi0 = ComplexField::constant(g, cplx(1e307, 1e307));
  CHECK_THROWS_WITH_AS(evolve(psi0, PotentialSpec::zero(), {1e-3, 5, UnitSystem::natural()}),
                       doctest::Contains("step 1"), NumericError);
}

TEST_CASE("evolution config validation") {
  const auto g = GridSpec::line(16, -1.0, 1.0);
  const auto psi0 = ComplexField::constant(g, 1.0);
  CHECK_THROWS_AS(evolve(psi0, PotentialSpec::zero(), {0.0, 5, {}}), ConfigError);
  CHECK_THROWS_AS(evolve(psi0, PotentialSpec::zero(), {1e-3, 0, {}}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::harmonic(-1.0), ConfigError);
  const auto other = GridSpec::line(32, -1.0, 1.0);
  CHECK_THROWS_AS(evolve(psi0, PotentialSpec::tabulated(RealField::constant(other, 0.0)), {1e-3, 1, {}}),
                  ConfigError);
}

TEST_CASE("oscillator eigenstates are normalized eigenfunctions") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto u = UnitSystem::natural();
  const auto v = PotentialSpec::harmonic(1.0).sample(g, u);
  for (int n = 0; n < 4; ++n) {
    const auto psi = oscillator_eigenstate(g, n, 1.0, u);
    CHECK(norm_squared(psi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(energy(psi, v, u) == doctest::Approx(n + 0.5).epsilon(1e-10));
    CHECK(eigen_residual(psi, v, u) < 1e-9);
  }
}
