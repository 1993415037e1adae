#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qhydro/field_io.hpp"
#include "qhydro/spectral.hpp"
#include "support.hpp"

using namespace qhydro;
using namespace qhydro::testing;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec::line(4, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(GridSpec::line(16, 1.0, 1.0), ConfigError);
  const auto g = GridSpec::line(16, -2.0, 2.0);
  CHECK(g.dx(0) == doctest::Approx(0.25));
  CHECK(g.coord(0, 0) == -2.0);
  CHECK(g.size() == 16);
  const auto c = GridSpec::cube(3, 8, 0.0, 1.0);
  CHECK(c.size() == 512);
  const auto idx = c.unravel(c.ravel(3, 5, 7));
  CHECK(idx == std::array<std::size_t, 3>{3, 5, 7});
}

TEST_CASE("fields reject non-finite samples at construction") {
  const auto g = GridSpec::line(8, 0.0, 1.0);
  std::vector<double> v(8, 0.0);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(RealField(g, v), ConfigError);
  std::vector<cplx> z(8, 0.0);
  z[5] = cplx(0.0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(ComplexField(g, z), ConfigError);
  CHECK_THROWS_AS(RealField(g, std::vector<double>(7, 0.0)), ConfigError);
}

TEST_CASE("gradient of a resolved Fourier mode is exact") {
  const double L = 2.0 * std::numbers::pi;
  const auto g = GridSpec::line(64, 0.0, L);
  const double k = 5.0;
  const auto f = RealField::from_function(g, [&](const Point& x) { return std::sin(k * x[0]); });
  const auto df = gradient(f).at(0);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(df[i] - k * std::cos(k * g.coord(0, i))));
  CHECK(err < 1e-10);

  const auto lap = laplacian(f);
  err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + k * k * f[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("derivatives of a constant vanish") {
  const auto g = GridSpec::cube(2, 16, -1.0, 1.0);
  const auto f = RealField::constant(g, 3.5);
  for (const auto& d : gradient(f))
    for (double v : d.values()) CHECK(std::abs(v) < 1e-13);
  const auto lap = laplacian(f);
  for (double v : lap.values()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("Gaussian derivatives match the symbolic oracle") {
  const auto g = GridSpec::line(256, -10.0, 10.0);
  const auto f = RealField::from_function(g, [](const Point& x) { return std::exp(-0.5 * x[0] * x[0]); });
  const auto df = partial(f, 0);
  const auto lap = laplacian(f);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i);
    const double gauss = std::exp(-0.5 * x * x);
    e1 = std::max(e1, std::abs(df[i] - (-x * gauss)));
    e2 = std::max(e2, std::abs(lap[i] - (x * x - 1.0) * gauss));
  }
  CHECK(e1 < 1e-8);
  CHECK(e2 < 1e-8);
}

TEST_CASE("non power-of-two grids are supported") {
  for (std::size_t n : {96u, 100u, 81u}) {
    const double L = 2.0 * std::numbers::pi;
    const auto g = GridSpec::line(n, 0.0, L);
    const auto f = RealField::from_function(g, [](const Point& x) { return std::cos(3.0 * x[0]); });
    const auto df = partial(f, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(df[i] + 3.0 * std::sin(3.0 * g.coord(0, i))));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("Helmholtz residual") {
  const double L = 2.0 * std::numbers::pi;
  const auto g = GridSpec::line(64, 0.0, L);
  const double k = 4.0;
  const auto plane = plane_wave_field(g, k);
  CHECK(max_abs(helmholtz_residual(plane, k)) < 1e-10);

  // Off-resonant plane wave: |Δf + k²f| = |k² - k'²| pointwise.
  const double kp = 6.0;
  const auto off = helmholtz_residual(plane_wave_field(g, kp), k);
  for (double v : off.values()) CHECK(v == doctest::Approx(std::abs(k * k - kp * kp)).epsilon(1e-10));

  const auto zero = ComplexField::constant(g, cplx(0.0, 0.0));
  CHECK(max_abs(helmholtz_residual(zero, k)) == 0.0);
  CHECK_THROWS_AS(helmholtz_residual(plane, std::numeric_limits<double>::infinity()), ConfigError);
}

TEST_CASE("property: gradient and laplacian commute on band-limited fields") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 3;
    const auto g = GridSpec::cube(dim, dim == 3 ? 16 : 32, -3.0, 3.0);
    const auto f = band_limited(g, rng, 0.25);
    const auto lap = laplacian(f);
    const auto grad_lap = gradient(lap);
    const auto grad = gradient(f);
    for (int a = 0; a < dim; ++a) {
      const auto lap_grad = laplacian(grad[a]);
      CHECK(max_abs_diff(grad_lap[a], lap_grad) < 1e-10);
    }
  }
}

TEST_CASE("property: forward+inverse transform preserves the L2 sum (Parseval)") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = GridSpec::cube(1 + trial % 3, 16, 0.0, 1.0);
    const auto f = band_limited(g, rng, 0.5);
    std::vector<cplx> data(f.values().begin(), f.values().end());
    const Fourier fft(g);
    fft.forward(data);
    double spectral = 0.0, direct = 0.0;
    for (const auto& z : data) spectral += std::norm(z);
    spectral /= static_cast<double>(data.size());
    for (double v : f.values()) direct += v * v;
    CHECK(std::abs(spectral - direct) / direct < 1e-12);
    fft.inverse(data);
    double back = 0.0;
    for (const auto& z : data) back += std::norm(z);
    CHECK(std::abs(back - direct) / direct < 1e-12);
  }
}

TEST_CASE("property: differentiation is linear") {
  std::mt19937_64 rng(13);
  const auto g = GridSpec::cube(2, 32, -1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = band_limited(g, rng, 0.3);
    const auto h = band_limited(g, rng, 0.3);
    const double a = 1.7, b = -0.4;
    std::vector<double> mix(g.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * f[i] + b * h[i];
    const auto lmix = laplacian(RealField(g, mix));
    const auto lf = laplacian(f), lh = laplacian(h);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
      err = std::max(err, std::abs(lmix[i] - (a * lf[i] + b * lh[i])));
      scale = std::max(scale, std::abs(lmix[i]));
    }
    CHECK(err < 1e-12 * scale * 100);
  }
}

TEST_CASE("CSV export has a header and round-trips exactly") {
  std::mt19937_64 rng(14);
  const auto g = GridSpec::cube(2, 8, -1.5, 2.5);
  const auto re = band_limited(g, rng, 0.5);
  const auto im = band_limited(g, rng, 0.5);
  std::vector<cplx> z(g.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = cplx(re[i], im[i]);
  const ComplexField f(g, z);

  std::stringstream ss;
  io::write_csv(ss, f);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "x,y,real,imag");

  const auto back = io::read_complex_csv(ss);
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
  CHECK(back.grid().n == g.n);
  CHECK(back.grid().dx(0) == doctest::Approx(g.dx(0)).epsilon(1e-12));
}

TEST_CASE("CSV reader rejects malformed input") {
  std::stringstream bad_header("x,re,im\n0,1,2\n");
  CHECK_THROWS_AS(io::read_complex_csv(bad_header), ConfigError);
  std::stringstream bad_number("x,real,imag\n0,abc,2\n");
  CHECK_THROWS_AS(io::read_complex_csv(bad_number), ConfigError);
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1e-300) == "1e-300");
}
