#include "qhydro/kleingordon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qhydro/spectral.hpp"

namespace qhydro {

void KGConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be positive");
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (!(blowup_factor > 1.0)) throw ConfigError("blowup factor must exceed 1");
  units.validate();
}

double kg_dispersion(double k, const UnitSystem& units) {
  const double kc = units.compton_wavenumber();
  return units.c * std::sqrt(k * k + kc * kc);
}

double massless_dispersion_5d(double k, double k5, double c) { return c * std::sqrt(k * k + k5 * k5); }

double max_frequency(const GridSpec& grid, double c, double k_mass) {
  double k2 = k_mass * k_mass;
  for (int a = 0; a < grid.dim; ++a) {
    const double kn = std::numbers::pi / grid.dx(a);
    k2 += kn * kn;
  }
  return c * std::sqrt(k2);
}

namespace {

void check_stability(const GridSpec& g, const KGConfig& cfg, double k_mass) {
  if (!cfg.enforce_stability) return;
  const double bound = 1.0 / max_frequency(g, cfg.units.c, k_mass);
  if (cfg.dt > bound) {
    std::ostringstream msg;
    msg << "dt = " << cfg.dt << " exceeds the leapfrog bound " << bound << " (1/omega_max)";
    throw ConfigError(msg.str());
  }
}

std::string describe_mode(const GridSpec& g, std::size_t flat) {
  const auto idx = g.unravel(flat);
  std::ostringstream msg;
  msg << "mode (";
  for (int a = 0; a < g.dim; ++a) {
    if (a) msg << ", ";
    msg << wavenumbers(g, a)[idx[a]];
  }
  msg << ")";
  return msg.str();
}

std::size_t dominant_mode(std::span<const cplx> spectrum) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < spectrum.size(); ++i)
    if (std::norm(spectrum[i]) > std::norm(spectrum[best])) best = i;
  return best;
}

// Leapfrog for the linear equation, held entirely in Fourier space.
class LinearKGStepper {
 public:
  LinearKGStepper(const KGState& s, const KGConfig& cfg)
      : grid_(s.phi.grid()), fft_(grid_), cfg_(cfg), k2_(wavenumber_squared(grid_)) {
    require_same_grid(grid_, s.phi_dot.grid(), "Klein-Gordon state");
    cfg.validate();
    const double kc = cfg.units.compton_wavenumber();
    check_stability(grid_, cfg, kc);
    phi_.assign(s.phi.values().begin(), s.phi.values().end());
    vel_.assign(s.phi_dot.values().begin(), s.phi_dot.values().end());
    fft_.forward(phi_);
    fft_.forward(vel_);
    omega2_.resize(k2_.size());
    const double c2 = cfg.units.c * cfg.units.c;
    for (std::size_t i = 0; i < k2_.size(); ++i) omega2_[i] = c2 * (k2_[i] + kc * kc);
    initial_energy_ = spectral_energy();
  }

  void advance(std::size_t count) {
    const double h = cfg_.dt;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < phi_.size(); ++i) {
        vel_[i] -= 0.5 * h * omega2_[i] * phi_[i];
        phi_[i] += h * vel_[i];
        vel_[i] -= 0.5 * h * omega2_[i] * phi_[i];
      }
      ++steps_;
      if (steps_ % 16 == 0 || s + 1 == count) guard();
    }
  }

  KGState state() const {
    std::vector<cplx> p = phi_, v = vel_;
    fft_.inverse(p);
    fft_.inverse(v);
    return {ComplexField(grid_, std::move(p)), ComplexField(grid_, std::move(v))};
  }

 private:
  double spectral_energy() const {
    const double c2 = cfg_.units.c * cfg_.units.c;
    double e = 0.0;
    for (std::size_t i = 0; i < phi_.size(); ++i) e += std::norm(vel_[i]) / c2 + omega2_[i] / c2 * std::norm(phi_[i]);
    return e;
  }

  void guard() {
    const double e = spectral_energy();
    if (!std::isfinite(e) || (initial_energy_ > 0.0 && e > cfg_.blowup_factor * initial_energy_)) {
      const auto mode = dominant_mode(phi_);
      throw NumericError("Klein-Gordon instability at step " + std::to_string(steps_) + ": energy grew past " +
                         std::to_string(cfg_.blowup_factor) + "x its initial value, dominant " +
                         describe_mode(grid_, mode));
    }
  }

  GridSpec grid_;
  Fourier fft_;
  KGConfig cfg_;
  std::vector<double> k2_;
  std::vector<double> omega2_;
  std::vector<cplx> phi_, vel_;
  double initial_energy_ = 0.0;
  std::size_t steps_ = 0;
};

// Real-space leapfrog for □R = κ²R(1 - R⁴).
class NonlinearKGStepper {
 public:
  NonlinearKGStepper(const NLKGState& s, const KGConfig& cfg)
      : grid_(s.R.grid()), fft_(grid_), cfg_(cfg), k2_(wavenumber_squared(grid_)) {
    require_same_grid(grid_, s.R_dot.grid(), "nonlinear Klein-Gordon state");
    cfg.validate();
    kappa2_ = std::pow(cfg.units.compton_wavenumber(), 2);
    double stiff = 4.0;
    for (double r : s.R.values()) stiff = std::max(stiff, 5.0 * std::pow(r, 4) - 1.0);
    check_stability(grid_, cfg, std::sqrt(kappa2_ * stiff));
    r_.assign(s.R.values().begin(), s.R.values().end());
    v_.assign(s.R_dot.values().begin(), s.R_dot.values().end());
    acc_.resize(r_.size());
    buf_.resize(r_.size());
    acceleration();
    initial_norm_ = guard_norm();
  }

  void advance(std::size_t count) {
    const double h = cfg_.dt;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < r_.size(); ++i) {
        v_[i] += 0.5 * h * acc_[i];
        r_[i] += h * v_[i];
      }
      acceleration();
      for (std::size_t i = 0; i < r_.size(); ++i) v_[i] += 0.5 * h * acc_[i];
      ++steps_;
      if (steps_ % 16 == 0 || s + 1 == count) guard();
    }
  }

  NLKGState state() const { return {RealField(grid_, r_), RealField(grid_, v_)}; }

 private:
  void acceleration() {
    for (std::size_t i = 0; i < r_.size(); ++i) buf_[i] = r_[i];
    fft_.forward(buf_);
    for (std::size_t i = 0; i < buf_.size(); ++i) buf_[i] *= -k2_[i];
    fft_.inverse(buf_);
    const double c2 = cfg_.units.c * cfg_.units.c;
    for (std::size_t i = 0; i < r_.size(); ++i) {
      const double r = r_[i];
      const double r4 = r * r * r * r;
      acc_[i] = c2 * (buf_[i].real() + kappa2_ * r * (1.0 - r4));
    }
  }

  // Positive-definite size measure used only for blow-up detection.
  double guard_norm() const {
    const double c2 = cfg_.units.c * cfg_.units.c;
    double e = 0.0;
    for (std::size_t i = 0; i < r_.size(); ++i) e += v_[i] * v_[i] / c2 + (kappa2_ + 1.0) * r_[i] * r_[i];
    return e;
  }

  void guard() {
    const double e = guard_norm();
    if (!std::isfinite(e) || (initial_norm_ > 0.0 && e > cfg_.blowup_factor * initial_norm_)) {
      std::vector<cplx> spec(r_.begin(), r_.end());
      for (auto& z : spec)
        if (!std::isfinite(z.real())) z = 0.0;
      fft_.forward(spec);
      spec[0] = 0.0;
      throw NumericError("nonlinear Klein-Gordon instability at step " + std::to_string(steps_) + ", dominant " +
                         describe_mode(grid_, dominant_mode(spec)));
    }
  }

  GridSpec grid_;
  Fourier fft_;
  KGConfig cfg_;
  std::vector<double> k2_;
  double kappa2_ = 0.0;
  std::vector<double> r_, v_, acc_;
  std::vector<cplx> buf_;
  double initial_norm_ = 0.0;
  std::size_t steps_ = 0;
};

template <typename Stepper, typename Series, typename State>
Series run_series(const State& s, const KGConfig& cfg, std::size_t every) {
  if (every == 0) throw ConfigError("snapshot interval must be at least 1 step");
  Stepper stepper(s, cfg);
  Series series;
  series.times.push_back(0.0);
  series.frames.push_back(s);
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

}  // namespace

KGState evolve_kg(const KGState& state, const KGConfig& cfg) {
  LinearKGStepper stepper(state, cfg);
  stepper.advance(cfg.steps);
  return stepper.state();
}

KGSeries evolve_kg_series(const KGState& state, const KGConfig& cfg, std::size_t every) {
  return run_series<LinearKGStepper, KGSeries>(state, cfg, every);
}

double kg_energy(const KGState& s, const UnitSystem& units) {
  const double kc2 = std::pow(units.compton_wavenumber(), 2);
  const double c2 = units.c * units.c;
  const auto grad = gradient(s.phi);
  double e = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    double g2 = 0.0;
    for (const auto& d : grad) g2 += std::norm(d[i]);
    e += std::norm(s.phi_dot[i]) / c2 + g2 + kc2 * std::norm(s.phi[i]);
  }
  return 0.5 * e * s.phi.grid().cell_volume();
}

KGState positive_frequency_state(const ComplexField& phi, const UnitSystem& units) {
  const GridSpec& g = phi.grid();
  const Fourier fft(g);
  const auto k2 = wavenumber_squared(g);
  const double kc = units.compton_wavenumber();
  std::vector<cplx> v(phi.values().begin(), phi.values().end());
  fft.forward(v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= cplx(0.0, -units.c * std::sqrt(k2[i] + kc * kc));
  fft.inverse(v);
  return {phi, ComplexField(g, std::move(v))};
}

NLKGState evolve_nlkg(const NLKGState& state, const KGConfig& cfg) {
  NonlinearKGStepper stepper(state, cfg);
  stepper.advance(cfg.steps);
  return stepper.state();
}

NLKGSeries evolve_nlkg_series(const NLKGState& state, const KGConfig& cfg, std::size_t every) {
  return run_series<NonlinearKGStepper, NLKGSeries>(state, cfg, every);
}

double nlkg_energy(const NLKGState& s, const UnitSystem& units) {
  const double kappa2 = std::pow(units.compton_wavenumber(), 2);
  const double c2 = units.c * units.c;
  const auto grad = gradient(s.R);
  double e = 0.0;
  for (std::size_t i = 0; i < s.R.size(); ++i) {
    double g2 = 0.0;
    for (const auto& d : grad) g2 += d[i] * d[i];
    const double r2 = s.R[i] * s.R[i];
    e += 0.5 * s.R_dot[i] * s.R_dot[i] / c2 + 0.5 * g2 + kappa2 * (r2 * r2 * r2 / 6.0 - 0.5 * r2);
  }
  return e * s.R.grid().cell_volume();
}

RealField nlkg_residual(const RealField& R, const RealField& R_ddot, const UnitSystem& units) {
  require_same_grid(R.grid(), R_ddot.grid(), "nonlinear Klein-Gordon residual");
  const double kappa2 = std::pow(units.compton_wavenumber(), 2);
  const double c2 = units.c * units.c;
  const auto lap = laplacian(R);
  std::vector<double> out(R.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = R[i];
    out[i] = R_ddot[i] / c2 - lap[i] - kappa2 * r * (1.0 - r * r * r * r);
  }
  return {R.grid(), std::move(out)};
}

RealField nlkg_residual(const RealField& prev, const RealField& current, const RealField& next, double dt,
                        const UnitSystem& units) {
  require_same_grid(prev.grid(), current.grid(), "nonlinear Klein-Gordon residual");
  require_same_grid(next.grid(), current.grid(), "nonlinear Klein-Gordon residual");
  if (!(dt > 0.0)) throw ConfigError("snapshot spacing must be positive");
  std::vector<double> ddot(current.size());
  for (std::size_t i = 0; i < ddot.size(); ++i) ddot[i] = (next[i] - 2.0 * current[i] + prev[i]) / (dt * dt);
  return nlkg_residual(current, RealField(current.grid(), std::move(ddot)), units);
}

}  // namespace qhydro
