#include "qhydro/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "qhydro/field_io.hpp"

namespace qhydro {

namespace {

struct VelocityFrame {
  std::vector<std::vector<double>> v;
  Mask mask;
};

struct Stencil {
  std::array<std::array<std::size_t, 4>, 3> index{};
  std::array<std::array<double, 4>, 3> weight{};
  std::array<int, 3> width{1, 1, 1};
};

// Periodic cubic Lagrange stencil through the four samples around x.
Stencil make_stencil(const GridSpec& g, const Point& x) {
  Stencil s;
  for (int a = 0; a < 3; ++a) {
    if (a >= g.dim || g.n[a] == 1) {
      s.index[a][0] = 0;
      s.weight[a][0] = 1.0;
      continue;
    }
    const double u = (x[a] - g.origin[a]) / g.dx(a);
    const double base = std::floor(u);
    const double f = u - base;
    const auto n = static_cast<long long>(g.n[a]);
    const long long i0 = static_cast<long long>(base);
    s.width[a] = 4;
    s.weight[a] = {-f * (f - 1) * (f - 2) / 6, (f + 1) * (f - 1) * (f - 2) / 2, -(f + 1) * f * (f - 2) / 2,
                   (f + 1) * f * (f - 1) / 6};
    for (int k = 0; k < 4; ++k) s.index[a][k] = static_cast<std::size_t>((((i0 - 1 + k) % n) + n) % n);
  }
  return s;
}

// Velocity at x, or nothing if any stencil sample is masked.
std::optional<Point> interpolate(const GridSpec& g, const VelocityFrame& frame, const Stencil& s) {
  Point v{0, 0, 0};
  for (int i = 0; i < s.width[0]; ++i)
    for (int j = 0; j < s.width[1]; ++j)
      for (int k = 0; k < s.width[2]; ++k) {
        const std::size_t p = g.ravel(s.index[0][i], s.index[1][j], s.index[2][k]);
        if (frame.mask[p]) return std::nullopt;
        const double w = s.weight[0][i] * s.weight[1][j] * s.weight[2][k];
        for (int a = 0; a < g.dim; ++a) v[a] += w * frame.v[a][p];
      }
  return v;
}

class GuidanceField {
 public:
  GuidanceField(const WaveSeries& series, const UnitSystem& units, const NodeOptions& nodes) : times_(series.times) {
    if (series.frames.empty() || series.frames.size() != series.times.size())
      throw ConfigError("wave series needs matching, non-empty times and frames");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k] > times_[k - 1])) throw ConfigError("wave series times must be strictly increasing");
    grid_ = series.frames.front().grid();
    for (const auto& f : series.frames) {
      require_same_grid(f.grid(), grid_, "wave series frame");
      const auto h = hydro_fields(f, units, nodes);
      VelocityFrame vf;
      for (const auto& c : h.v) vf.v.emplace_back(c.values().begin(), c.values().end());
      vf.mask = h.mask;
      frames_.push_back(std::move(vf));
    }
  }

  const GridSpec& grid() const { return grid_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::optional<Point> operator()(const Point& x, double t) const {
    const Stencil s = make_stencil(grid_, x);
    if (times_.size() == 1) return interpolate(grid_, frames_[0], s);
    const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
    if (t < t_begin() - slack || t > t_end() + slack) throw NumericError("trajectory time outside the wave series");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    k = std::min(k, times_.size() - 2);
    const double w = std::clamp((t - times_[k]) / (times_[k + 1] - times_[k]), 0.0, 1.0);
    Point v{0, 0, 0};
    if (w < 1.0) {
      const auto a = interpolate(grid_, frames_[k], s);
      if (!a) return std::nullopt;
      for (int d = 0; d < 3; ++d) v[d] += (1.0 - w) * (*a)[d];
    }
    if (w > 0.0) {
      const auto b = interpolate(grid_, frames_[k + 1], s);
      if (!b) return std::nullopt;
      for (int d = 0; d < 3; ++d) v[d] += w * (*b)[d];
    }
    return v;
  }

 private:
  std::vector<double> times_;
  GridSpec grid_;
  std::vector<VelocityFrame> frames_;
};

Point axpy(const Point& x, double a, const Point& y) { return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2]}; }

bool finite(const Point& x) { return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]); }

}  // namespace

std::vector<Trajectory> bohm_trajectories(const WaveSeries& series, std::span<const Point> seeds,
                                          const UnitSystem& units, const BohmOptions& opts) {
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw ConfigError("trajectory step must be positive");
  if (opts.record_every == 0) throw ConfigError("record_every must be at least 1");
  const GuidanceField field(series, units, opts.nodes);
  const double t0 = field.t_begin();
  const double t1 = opts.t_end.value_or(field.t_end());
  if (!(t1 >= t0) || t1 > field.t_end() + 1e-12 * std::max(1.0, std::abs(t1)))
    throw ConfigError("trajectory end time must lie within the wave series");
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / opts.dt - 1e-9));
  const double h = steps == 0 ? 0.0 : (t1 - t0) / static_cast<double>(steps);
  const int dim = field.grid().dim;

  std::vector<Trajectory> out;
  out.reserve(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    Point x = seeds[s];
    if (!finite(x)) throw ConfigError("seed " + std::to_string(s) + " is not finite");
    if (!field(x, t0)) throw ConfigError("seed " + std::to_string(s) + " lies on the nodal mask");
    Trajectory tr{dim, s, {t0}, {x}, false};
    for (std::size_t n = 0; n < steps; ++n) {
      const double t = t0 + static_cast<double>(n) * h;
      const auto k1 = field(x, t);
      const auto k2 = k1 ? field(axpy(x, h / 2, *k1), t + h / 2) : std::nullopt;
      const auto k3 = k2 ? field(axpy(x, h / 2, *k2), t + h / 2) : std::nullopt;
      const auto k4 = k3 ? field(axpy(x, h, *k3), t + h) : std::nullopt;
      if (!k4) {
        tr.hit_node = true;
        break;
      }
      for (int a = 0; a < 3; ++a) x[a] += h / 6 * ((*k1)[a] + 2 * (*k2)[a] + 2 * (*k3)[a] + (*k4)[a]);
      if (!finite(x)) throw NumericError("trajectory " + std::to_string(s) + " left the finite range");
      if ((n + 1) % opts.record_every == 0 || n + 1 == steps) {
        tr.times.push_back(n + 1 == steps ? t1 : t + h);
        tr.positions.push_back(x);
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<Point> sample_density(const ComplexField& psi, std::size_t n, std::uint64_t seed) {
  const GridSpec& g = psi.grid();
  std::vector<double> w(psi.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::norm(psi[i]);
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; }))
    throw ConfigError("cannot sample a vanishing density");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  std::vector<Point> out(n);
  for (auto& x : out) {
    x = g.point(pick(rng));
    for (int a = 0; a < g.dim; ++a)
      if (g.n[a] > 1) x[a] += jitter(rng) * g.dx(a);
  }
  return out;
}

EquivarianceReport equivariance_check(const WaveSeries& series, std::span<const Point> ensemble,
                                      const UnitSystem& units, const EquivarianceOptions& opts) {
  if (series.frames.empty()) throw ConfigError("wave series is empty");
  const GridSpec& g = series.frames.back().grid();
  const int axis = opts.axis;
  if (axis < 0 || axis >= g.dim) throw ConfigError("histogram axis out of range");
  if (opts.bins == 0) throw ConfigError("histogram needs at least one bin");
  if (ensemble.empty()) throw ConfigError("ensemble is empty");
  const double L = g.length[axis];
  const double lo = opts.lo.value_or(g.origin[axis]);
  const double hi = opts.hi.value_or(lo + L);
  if (!(hi > lo) || hi - lo > L * (1 + 1e-12)) throw ConfigError("histogram range must be increasing and fit the box");

  EquivarianceReport rep;
  rep.n = ensemble.size();
  rep.lo = lo;
  rep.hi = hi;
  rep.empirical.assign(opts.bins, 0.0);
  rep.expected.assign(opts.bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(opts.bins);

  const auto paths = bohm_trajectories(series, ensemble, units, opts.bohm);
  rep.T = paths.front().times.back();
  double kept = 0.0, overflow_emp = 0.0;
  for (const auto& tr : paths) {
    if (tr.hit_node) {
      ++rep.lost;
      continue;
    }
    kept += 1.0;
    double x = tr.positions.back()[axis];
    x = lo + (x - lo) - L * std::floor((x - lo) / L);
    const double u = (x - lo) / width;
    if (u >= 0.0 && u < static_cast<double>(opts.bins))
      rep.empirical[static_cast<std::size_t>(u)] += 1.0;
    else
      overflow_emp += 1.0;
  }
  if (kept == 0.0) throw NumericError("every ensemble member hit a node");
  for (double& e : rep.empirical) e /= kept;
  overflow_emp /= kept;

  // Marginal cell masses of |ψ(T)|² along the axis.
  const auto& psi = series.frames.back();
  std::vector<double> mass(g.n[axis], 0.0);
  double total = 0.0;
  for (std::size_t p = 0; p < psi.size(); ++p) {
    const double w = std::norm(psi[p]);
    mass[g.unravel(p)[axis]] += w;
    total += w;
  }
  const double dx = g.dx(axis);
  double inside = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double m = mass[i] / total;
    for (int shift = -2; shift <= 2; ++shift) {
      const double a = g.coord(axis, i) - dx / 2 + shift * L;
      const double b = a + dx;
      if (b <= lo || a >= hi) continue;
      const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((a - lo) / width)));
      for (std::size_t k = first; k < opts.bins; ++k) {
        const double blo = lo + static_cast<double>(k) * width, bhi = blo + width;
        if (blo >= b) break;
        const double overlap = std::min(b, bhi) - std::max(a, blo);
        if (overlap > 0.0) {
          rep.expected[k] += m * overlap / dx;
          inside += m * overlap / dx;
        }
      }
    }
  }
  const double overflow_exp = std::max(0.0, 1.0 - inside);
  for (std::size_t k = 0; k < opts.bins; ++k) rep.l1 += std::abs(rep.empirical[k] - rep.expected[k]);
  rep.l1 += std::abs(overflow_emp - overflow_exp);
  return rep;
}

namespace {

Point scaled(const Point& p, double s) { return {p[0] * s, p[1] * s, p[2] * s}; }
double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw ConfigError("Hamiltonian dimension must be 1, 2 or 3");
}

}  // namespace

Hamiltonian Hamiltonian::free(double mass, int dim) {
  check_dim(dim);
  if (!(mass > 0.0)) throw ConfigError("mass must be positive");
  return {dim, [=](const Point& p) { return dot(p, p) / (2 * mass); },
          [=](const Point& p) { return scaled(p, 1.0 / mass); }, [](const Point&) { return 0.0; },
          [](const Point&) { return Point{0, 0, 0}; }};
}

Hamiltonian Hamiltonian::harmonic(double mass, double omega, int dim) {
  auto h = free(mass, dim);
  if (!(omega > 0.0)) throw ConfigError("oscillator frequency must be positive");
  const double k = mass * omega * omega;
  h.potential = [=](const Point& x) { return 0.5 * k * dot(x, x); };
  h.potential_gradient = [=](const Point& x) { return scaled(x, k); };
  return h;
}

Hamiltonian Hamiltonian::relativistic(double mass, double c, int dim) {
  check_dim(dim);
  if (!(mass >= 0.0) || !(c > 0.0)) throw ConfigError("relativistic Hamiltonian needs mass >= 0 and c > 0");
  const double mc2 = mass * mass * c * c;
  return {dim, [=](const Point& p) { return c * std::sqrt(dot(p, p) + mc2); },
          [=](const Point& p) {
            const double e = std::sqrt(dot(p, p) + mc2);
            if (e == 0.0) throw NumericError("massless ray with zero momentum has no direction");
            return scaled(p, c / e);
          },
          [](const Point&) { return 0.0; }, [](const Point&) { return Point{0, 0, 0}; }};
}

void RayConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("ray step must be positive");
  if (record_every == 0) throw ConfigError("record_every must be at least 1");
}

namespace {

struct RayPoint {
  Point x;
  Point p;
  double S = 0.0;
};

void drift(const Hamiltonian& H, RayPoint& r, double tau) {
  const Point v = H.kinetic_gradient(r.p);
  r.S += tau * (dot(r.p, v) - H.kinetic(r.p));
  r.x = axpy(r.x, tau, v);
}

void kick(const Hamiltonian& H, RayPoint& r, double tau) {
  r.S -= tau * H.potential(r.x);
  r.p = axpy(r.p, -tau, H.potential_gradient(r.x));
}

void leapfrog(const Hamiltonian& H, RayPoint& r, double h) {
  drift(H, r, h / 2);
  kick(H, r, h);
  drift(H, r, h / 2);
}

}  // namespace

std::vector<RayTrajectory> hamilton_rays(const Hamiltonian& H, std::span<const RayState> initial,
                                         const RayConfig& cfg) {
  cfg.validate();
  const double cbrt2 = std::cbrt(2.0);
  const double w1 = 1.0 / (2.0 - cbrt2), w0 = -cbrt2 / (2.0 - cbrt2);
  std::vector<RayTrajectory> out;
  for (std::size_t s = 0; s < initial.size(); ++s) {
    const RayState& init = initial[s];
    if (!finite(init.x) || !finite(init.p) || !std::isfinite(init.t))
      throw ConfigError("ray " + std::to_string(s) + " has non-finite initial data");
    RayPoint r{init.x, init.p, 0.0};
    RayTrajectory tr{H.dim, s, {init.t}, {r.x}, {r.p}, {0.0}, {H(r.x, r.p)}};
    for (std::size_t n = 0; n < cfg.steps; ++n) {
      if (cfg.method == RayMethod::leapfrog) {
        leapfrog(H, r, cfg.dt);
      } else {
        leapfrog(H, r, w1 * cfg.dt);
        leapfrog(H, r, w0 * cfg.dt);
        leapfrog(H, r, w1 * cfg.dt);
      }
      if (!finite(r.x) || !finite(r.p) || !std::isfinite(r.S))
        throw NumericError("ray " + std::to_string(s) + " became non-finite at step " + std::to_string(n + 1));
      if ((n + 1) % cfg.record_every == 0 || n + 1 == cfg.steps) {
        tr.times.push_back(init.t + static_cast<double>(n + 1) * cfg.dt);
        tr.positions.push_back(r.x);
        tr.momenta.push_back(r.p);
        tr.action.push_back(r.S);
        tr.energy.push_back(H(r.x, r.p));
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

namespace {

// Fourth-order derivative along one axis of a non-periodic sampling.
std::vector<double> fd4(const GridSpec& g, std::span<const double> f, int axis) {
  const std::size_t n = g.n[axis];
  std::vector<double> d(f.size(), 0.0);
  if (n == 1) return d;
  const double inv = 1.0 / (12.0 * g.dx(axis));
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto idx = g.unravel(p);
    const std::size_t i = idx[axis];
    auto at = [&](std::size_t j) {
      auto q = idx;
      q[axis] = j;
      return f[g.ravel(q[0], q[1], q[2])];
    };
    double v;
    if (i == 0)
      v = -25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4);
    else if (i == 1)
      v = -3 * at(0) - 10 * at(1) + 18 * at(2) - 6 * at(3) + at(4);
    else if (i == n - 2)
      v = 3 * at(n - 1) + 10 * at(n - 2) - 18 * at(n - 3) + 6 * at(n - 4) - at(n - 5);
    else if (i == n - 1)
      v = 25 * at(n - 1) - 48 * at(n - 2) + 36 * at(n - 3) - 16 * at(n - 4) + 3 * at(n - 5);
    else
      v = at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2);
    d[p] = v * inv;
  }
  return d;
}

}  // namespace

RealField hj_residual(std::span<const RealField> S_slices, double dt, const Hamiltonian& H) {
  if (S_slices.size() != 3 && S_slices.size() != 5) throw ConfigError("hj_residual needs 3 or 5 action slices");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("slice spacing dt must be positive");
  const GridSpec& g = S_slices.front().grid();
  for (const auto& s : S_slices) require_same_grid(s.grid(), g, "action slice");
  if (g.dim != H.dim) throw ConfigError("Hamiltonian dimension does not match the grid");
  for (int a = 0; a < g.dim; ++a)
    if (g.n[a] > 1 && g.n[a] < 5) throw ConfigError("fourth-order gradients need at least 5 samples per axis");

  const std::size_t mid = S_slices.size() / 2;
  const RealField& S = S_slices[mid];
  std::vector<std::vector<double>> grad;
  for (int a = 0; a < g.dim; ++a) grad.push_back(fd4(g, S.values(), a));
  std::vector<double> r(S.size());
  for (std::size_t p = 0; p < r.size(); ++p) {
    double st;
    if (S_slices.size() == 3)
      st = (S_slices[2][p] - S_slices[0][p]) / (2 * dt);
    else
      st = (S_slices[0][p] - 8 * S_slices[1][p] + 8 * S_slices[3][p] - S_slices[4][p]) / (12 * dt);
    Point dS{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) dS[a] = grad[a][p];
    r[p] = st + H(g.point(p), dS);
  }
  return RealField(g, std::move(r));
}

namespace io {

namespace {
const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }
}  // namespace

void write_csv(std::ostream& out, const Trajectory& tr) {
  out << "t";
  for (int a = 0; a < tr.dim; ++a) out << ',' << axis_name(a);
  out << ",flags\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << format_double(tr.times[k]);
    for (int a = 0; a < tr.dim; ++a) out << ',' << format_double(tr.positions[k][a]);
    out << ',' << ((tr.hit_node && k + 1 == tr.times.size()) ? 1 : 0) << '\n';
  }
}

void write_csv(std::ostream& out, const RayTrajectory& tr) {
  out << "t";
  for (int a = 0; a < tr.dim; ++a) out << ',' << axis_name(a);
  for (int a = 0; a < tr.dim; ++a) out << ",p_" << axis_name(a);
  out << ",action,energy\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << format_double(tr.times[k]);
    for (int a = 0; a < tr.dim; ++a) out << ',' << format_double(tr.positions[k][a]);
    for (int a = 0; a < tr.dim; ++a) out << ',' << format_double(tr.momenta[k][a]);
    out << ',' << format_double(tr.action[k]) << ',' << format_double(tr.energy[k]) << '\n';
  }
}

}  // namespace io

}  // namespace qhydro
