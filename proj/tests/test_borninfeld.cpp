#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qhydro/borninfeld.hpp"
#include "qhydro/error.hpp"

using namespace qhydro;
using namespace qhydro::bi;

TEST_CASE("field invariants") {
  auto inv = invariants({});
  CHECK(inv.S == 0.0);
  CHECK(inv.P == 0.0);
  inv = invariants({{0, 1, 0}, {0, 0, 0}});
  CHECK(inv.S == 0.5);
  CHECK(inv.P == 0.0);
  inv = invariants({{1, 0, 0}, {1, 0, 0}});
  CHECK(inv.S == 0.0);
  CHECK(inv.P == 1.0);
  CHECK_THROWS_AS(invariants({{NAN, 0, 0}, {}}), ConfigError);
}

TEST_CASE("Born-Infeld Lagrangian") {
  const BIParams p{2.0, 1.0};
  CHECK(lagrangian(EMSample{}, p) == 0.0);
  CHECK(lagrangian(EMSample{{2.0, 0, 0}, {}}, p) == 4.0);
  CHECK_THROWS_AS(lagrangian(EMSample{{2.0001, 0, 0}, {}}, p), DomainError);
  CHECK_THROWS_AS(lagrangian(EMSample{}, BIParams{0.0, 1.0}), ConfigError);

  const EMSample weak{{0.02, 0, 0}, {}};
  const double S = invariants(weak).S;
  const double dev = (lagrangian(weak, p) - S) / S;
  CHECK(dev > 2e-5);
  CHECK(dev < 3e-5);

  // Stable evaluation agrees with the textbook square-root form.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int n = 0; n < 200; ++n) {
    const EMSample s{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
    const double b = 1.3;
    const auto inv = invariants(s);
    const double direct = b * b * (1 - std::sqrt(1 - 2 * inv.S / (b * b) - inv.P * inv.P / std::pow(b, 4)));
    CHECK(lagrangian(s, {b, 1.0}) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Maxwell limit is approached quadratically") {
  const BIParams p{1.0, 1.0};
  std::vector<double> ratios;
  for (double e = 1e-1; e >= 1e-5 * 0.999; e /= 10) {
    const EMSample s{{e, 0, 0}, {0, 0.3 * e, 0}};
    const double S = invariants(s).S;
    ratios.push_back((lagrangian(s, p) - S) / S);
  }
  REQUIRE(ratios.size() == 5);
  for (std::size_t k = 1; k < ratios.size(); ++k)
    CHECK(std::log10(ratios[k - 1] / ratios[k]) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("Lagrangian depends on the fields only through the invariants") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const BIParams p{1.7, 1.0};
  for (int n = 0; n < 100; ++n) {
    const EMSample s{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
    // A rotation about a random axis by a random angle keeps S and P.
    const double th = u(rng) * 6;
    const double c = std::cos(th), sn = std::sin(th);
    auto rot = [&](const Vec3& v) { return Vec3{c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2]}; };
    const EMSample r{rot(s.E), rot(s.B)};
    const auto a = invariants(s), b = invariants(r);
    const double la = lagrangian(s, p);
    CHECK(lagrangian(Invariants{a.S, a.P}, p) == la);
    CHECK(lagrangian(b, p) == doctest::Approx(la).epsilon(1e-14));
  }
}

TEST_CASE("point charge field") {
  const BIParams p{3.0, 2.0};
  const double r0 = core_radius(p);
  CHECK(r0 * r0 == doctest::Approx(2.0 / (4 * std::numbers::pi * 3.0)).epsilon(1e-15));
  CHECK(point_charge_field(0.0, p) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(point_charge_field(r0, p) == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-14));
  const double r = 100 * r0;
  const double coulomb = p.q / (4 * std::numbers::pi * r * r);
  CHECK(std::abs(point_charge_field(r, p) - coulomb) / coulomb < 1e-8);
  double prev = point_charge_field(0.0, p);
  for (double x = 0.01; x < 50; x *= 1.1) {
    const double e = point_charge_field(x * r0, p);
    CHECK(e < prev);
    CHECK(e <= p.b);
    prev = e;
  }
}

TEST_CASE("self-energy is finite and scales as q^(3/2) b^(1/2)") {
  const BIParams p{1.0, 1.0};
  const auto e = self_energy(p);
  CHECK(std::isfinite(e.value));
  CHECK(e.error <= 1e-9 * e.value);
  // Oracle: 4πb²r₀³ ∫(√(x⁴+1) - x²)dx with ∫ = Γ(1/4)²/(6√π).
  CHECK(e.value == doctest::Approx(self_energy_exact(p)).epsilon(1e-9));
  const double g = std::tgamma(0.25);
  const double r0 = core_radius(p);
  CHECK(e.value == doctest::Approx(4 * std::numbers::pi * r0 * r0 * r0 * g * g / (6 * std::sqrt(std::numbers::pi)))
                       .epsilon(1e-9));

  CHECK(self_energy({1.0, 4.0}).value / e.value == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(self_energy({4.0, 1.0}).value / e.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(self_energy({1.0, -1.0}).value == doctest::Approx(e.value).epsilon(1e-12));
}

TEST_CASE("Coulomb cutoff energy diverges as 1/r_min") {
  const double q = 1.0;
  double prev = coulomb_cutoff_energy(q, 1.0).value;
  CHECK(prev == doctest::Approx(q * q / (8 * std::numbers::pi)).epsilon(1e-9));
  for (double r = 0.5; r > 1e-4; r /= 2) {
    const double cur = coulomb_cutoff_energy(q, r).value;
    // Halving the cutoff from 2r to r adds q²/8π (1/r - 1/2r).
    const double increment = q * q / (8 * std::numbers::pi) * (1 / r - 1 / (2 * r));
    CHECK(std::abs((cur - prev) - increment) < 0.01 * increment);
    prev = cur;
  }
  CHECK_THROWS_AS(coulomb_cutoff_energy(q, 0.0), ConfigError);
}

TEST_CASE("radial CSV") {
  std::ostringstream os;
  const std::vector<double> r{0.0, 1.0};
  io::write_radial_csv(os, {1.0, 4 * std::numbers::pi}, r);
  const auto s = os.str();
  CHECK(s.rfind("r,E,E_coulomb,energy_density\n0,1,inf,inf\n1,", 0) == 0);
}
