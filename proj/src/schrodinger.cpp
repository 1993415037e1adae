#include "qhydro/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qhydro {

PotentialSpec PotentialSpec::harmonic(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("harmonic omega must be positive");
  PotentialSpec p;
  p.kind = Kind::harmonic;
  p.omega = omega;
  return p;
}

PotentialSpec PotentialSpec::square_well(double depth, double width) {
  if (!std::isfinite(depth) || !(width > 0.0) || !std::isfinite(width))
    throw ConfigError("square well needs finite depth and positive width");
  PotentialSpec p;
  p.kind = Kind::square_well;
  p.depth = depth;
  p.width = width;
  return p;
}

PotentialSpec PotentialSpec::tabulated(RealField values) {
  PotentialSpec p;
  p.kind = Kind::tabulated;
  p.table = std::move(values);
  return p;
}

RealField PotentialSpec::sample(const GridSpec& grid, const UnitSystem& units) const {
  switch (kind) {
    case Kind::zero:
      return RealField::constant(grid, 0.0);
    case Kind::harmonic:
      return RealField::from_function(grid, [&](const Point& x) {
        return 0.5 * units.mass * omega * omega * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      });
    case Kind::square_well:
      return RealField::from_function(grid, [&](const Point& x) {
        for (int a = 0; a < grid.dim; ++a)
          if (std::abs(x[a]) >= 0.5 * width) return 0.0;
        return -depth;
      });
    case Kind::tabulated:
      if (!table) throw ConfigError("tabulated potential has no table");
      require_same_grid(grid, table->grid(), "tabulated potential");
      return *table;
  }
  throw ConfigError("unknown potential kind");
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be positive");
  if (steps < 1) throw ConfigError("steps must be at least 1");
  units.require_massive();
}

namespace {

std::vector<cplx> kinetic_phase(const GridSpec& grid, const UnitSystem& u, double tau) {
  const auto k2 = wavenumber_squared(grid);
  std::vector<cplx> m(k2.size());
  const double a = u.hbar * tau / (2.0 * u.mass);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(1.0, -a * k2[i]);
  return m;
}

std::vector<double> kinetic_decay(const GridSpec& grid, const UnitSystem& u, double tau) {
  const auto k2 = wavenumber_squared(grid);
  std::vector<double> m(k2.size());
  const double a = u.hbar * tau / (2.0 * u.mass);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-a * k2[i]);
  return m;
}

// H applied to ψ: spectral kinetic term plus pointwise potential.
std::vector<cplx> apply_hamiltonian(const ComplexField& psi, std::span<const double> v, const UnitSystem& u) {
  const GridSpec& g = psi.grid();
  const Fourier fft(g);
  const auto k2 = wavenumber_squared(g);
  std::vector<cplx> h(psi.values().begin(), psi.values().end());
  fft.forward(h);
  const double a = u.hbar * u.hbar / (2.0 * u.mass);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] *= a * k2[i];
  fft.inverse(h);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += v[i] * psi[i];
  return h;
}

}  // namespace

SplitStepper::SplitStepper(const ComplexField& psi0, const RealField& potential, double dt, const UnitSystem& units)
    : grid_(psi0.grid()),
      fft_(psi0.grid()),
      psi_(psi0.values().begin(), psi0.values().end()),
      dt_(dt) {
  require_same_grid(grid_, potential.grid(), "split-step potential");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be positive");
  units.require_massive();
  half_kinetic_ = kinetic_phase(grid_, units, 0.5 * dt);
  full_kinetic_ = kinetic_phase(grid_, units, dt);
  potential_phase_.resize(grid_.size());
  for (std::size_t i = 0; i < potential_phase_.size(); ++i)
    potential_phase_[i] = std::polar(1.0, -potential[i] * dt / units.hbar);
}

void SplitStepper::kinetic(std::span<const cplx> phase) {
  fft_.forward(psi_);
  for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] *= phase[i];
  fft_.inverse(psi_);
}

void SplitStepper::advance(std::size_t count) {
  if (count == 0) return;
  kinetic(half_kinetic_);
  for (std::size_t s = 0; s < count; ++s) {
    bool finite = true;
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      psi_[i] *= potential_phase_[i];
      finite = finite && std::isfinite(psi_[i].real()) && std::isfinite(psi_[i].imag());
    }
    if (!finite) {
      throw NumericError("split-step produced a non-finite value at step " + std::to_string(steps_ + s + 1));
    }
    kinetic(s + 1 < count ? std::span<const cplx>(full_kinetic_) : std::span<const cplx>(half_kinetic_));
  }
  steps_ += count;
  time_ = static_cast<double>(steps_) * dt_;
}

ComplexField SplitStepper::state() const { return {grid_, psi_}; }

ComplexField evolve(const ComplexField& psi, const PotentialSpec& potential, const EvolutionConfig& cfg) {
  cfg.validate();
  SplitStepper stepper(psi, potential.sample(psi.grid(), cfg.units), cfg.dt, cfg.units);
  stepper.advance(cfg.steps);
  return stepper.state();
}

WaveSeries evolve_series(const ComplexField& psi, const PotentialSpec& potential, const EvolutionConfig& cfg,
                         std::size_t every) {
  cfg.validate();
  if (every == 0) throw ConfigError("snapshot interval must be at least 1 step");
  SplitStepper stepper(psi, potential.sample(psi.grid(), cfg.units), cfg.dt, cfg.units);
  WaveSeries series;
  series.times.push_back(0.0);
  series.frames.push_back(psi);
  std::size_t done = 0;
  while (done < cfg.steps) {
    const std::size_t n = std::min(every, cfg.steps - done);
    stepper.advance(n);
    done += n;
    series.times.push_back(static_cast<double>(done) * cfg.dt);
    series.frames.push_back(stepper.state());
  }
  return series;
}

double energy(const ComplexField& psi, const RealField& potential, const UnitSystem& units) {
  require_same_grid(psi.grid(), potential.grid(), "energy");
  const auto h = apply_hamiltonian(psi, potential.values(), units);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    num += (std::conj(psi[i]) * h[i]).real();
    den += std::norm(psi[i]);
  }
  if (!(den > 0.0)) throw NumericError("energy of a zero wavefunction is undefined");
  return num / den;
}

double energy(const ComplexField& psi, const PotentialSpec& potential, const UnitSystem& units) {
  return energy(psi, potential.sample(psi.grid(), units), units);
}

double eigen_residual(const ComplexField& psi, const RealField& potential, const UnitSystem& units) {
  const double e = energy(psi, potential, units);
  const auto h = apply_hamiltonian(psi, potential.values(), units);
  double r = 0.0, n = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    r += std::norm(h[i] - e * psi[i]);
    n += std::norm(psi[i]);
  }
  return std::sqrt(r / n);
}

GroundState ground_state(const PotentialSpec& potential, const GridSpec& grid, const UnitSystem& units,
                         const GroundStateOptions& opts) {
  grid.validate();
  units.require_massive();
  const RealField v = potential.sample(grid, units);
  double vmin = v[0];
  for (double x : v.values()) vmin = std::min(vmin, x);

  Point center{0, 0, 0};
  double sigma = grid.length[0];
  for (int a = 0; a < grid.dim; ++a) {
    center[a] = grid.origin[a] + 0.5 * grid.length[a];
    sigma = std::min(sigma, grid.length[a] / 10.0);
  }
  ComplexField psi = gaussian_packet(grid, center, sigma);
  std::vector<cplx> work(psi.values().begin(), psi.values().end());
  const Fourier fft(grid);
  const double dv = grid.cell_volume();

  auto renormalize = [&] {
    double s = 0.0;
    for (const auto& z : work) s += std::norm(z);
    const double scale = 1.0 / std::sqrt(s * dv);
    for (auto& z : work) z *= scale;
  };

  double dtau = opts.initial_dtau;
  std::size_t iterations = 0;
  double previous = eigen_residual(psi, v, units);
  while (true) {
    const auto half = kinetic_decay(grid, units, 0.5 * dtau);
    const auto full = kinetic_decay(grid, units, dtau);
    std::vector<double> pot(grid.size());
    // Shift by the potential minimum so the decay factors stay <= 1.
    for (std::size_t i = 0; i < pot.size(); ++i) pot[i] = std::exp(-(v[i] - vmin) * dtau / units.hbar);

    const auto chunk = static_cast<std::size_t>(std::ceil(opts.chunk_tau / dtau));
    auto kin = [&](const std::vector<double>& m) {
      fft.forward(work);
      for (std::size_t i = 0; i < work.size(); ++i) work[i] *= m[i];
      fft.inverse(work);
    };
    kin(half);
    for (std::size_t s = 0; s < chunk; ++s) {
      for (std::size_t i = 0; i < work.size(); ++i) work[i] *= pot[i];
      kin(s + 1 < chunk ? full : half);
      renormalize();
    }
    iterations += chunk;

    psi = ComplexField(grid, work);
    const double residual = eigen_residual(psi, v, units);
    if (residual < opts.residual_tol) {
      return {psi, energy(psi, v, units), residual, iterations};
    }
    if (iterations >= opts.max_iterations) {
      throw NumericError("ground state did not converge within " + std::to_string(opts.max_iterations) +
                         " iterations; final residual " + std::to_string(residual));
    }
    const bool plateau = residual > 0.995 * previous;
    if (plateau) {
      if (dtau <= opts.min_dtau) {
        throw NumericError("ground state residual stalled at " + std::to_string(residual) +
                           " with the smallest imaginary time step");
      }
      // Plateau scales as dtau²: aim a factor 10 below the tolerance.
      const double factor = std::sqrt(0.1 * opts.residual_tol / residual);
      dtau = std::max(opts.min_dtau, dtau * std::clamp(factor, 1.0 / 16.0, 0.5));
    }
    previous = residual;
  }
}

ComplexField gaussian_packet(const GridSpec& grid, const Point& center, double sigma, const Point& k) {
  if (!(sigma > 0.0)) throw ConfigError("Gaussian width must be positive");
  const auto raw = ComplexField::from_function(grid, [&](const Point& x) {
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
      phase += k[a] * x[a];
    }
    return std::polar(std::exp(-r2 / (4.0 * sigma * sigma)), phase);
  });
  return normalized(raw);
}

ComplexField plane_wave(const GridSpec& grid, const Point& k, double amplitude) {
  return ComplexField::from_function(grid, [&](const Point& x) {
    return std::polar(amplitude, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
  });
}

ComplexField oscillator_eigenstate(const GridSpec& grid, int level, double omega, const UnitSystem& units) {
  if (level < 0) throw ConfigError("oscillator level must be non-negative");
  if (!(omega > 0.0)) throw ConfigError("oscillator omega must be positive");
  const double scale = std::sqrt(units.mass * omega / units.hbar);
  const double norm0 = std::pow(units.mass * omega / (std::numbers::pi * units.hbar), 0.25);
  const double norm = norm0 / std::sqrt(std::pow(2.0, level) * std::tgamma(level + 1.0));
  return ComplexField::from_function(grid, [&](const Point& x) {
    double value = 1.0;
    for (int a = 0; a < grid.dim; ++a) {
      const double xi = scale * x[a];
      const double h = a == 0 ? std::hermite(static_cast<unsigned>(level), xi) : 1.0;
      value *= (a == 0 ? norm : norm0) * h * std::exp(-0.5 * xi * xi);
    }
    return cplx(value, 0.0);
  });
}

ComplexField normalized(const ComplexField& psi) {
  const double n2 = norm_squared(psi);
  if (!(n2 > 0.0)) throw ConfigError("cannot normalize a zero wavefunction");
  const double s = 1.0 / std::sqrt(n2);
  std::vector<cplx> v(psi.values().begin(), psi.values().end());
  for (auto& z : v) z *= s;
  return {psi.grid(), std::move(v)};
}

double position_mean(const ComplexField& psi, int axis) {
  double m = 0.0, w = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    m += p * psi.grid().point(i)[axis];
    w += p;
  }
  return m / w;
}

double position_variance(const ComplexField& psi, int axis) {
  const double mean = position_mean(psi, axis);
  double m2 = 0.0, w = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    const double d = psi.grid().point(i)[axis] - mean;
    m2 += p * d * d;
    w += p;
  }
  return m2 / w;
}

}  // namespace qhydro
