#include "qhydro/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace qhydro {

struct Fourier::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {

using PlanKey = std::tuple<int, std::size_t, std::size_t, std::size_t>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fourier::Fourier(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  static std::map<PlanKey, std::shared_ptr<const Plans>> cache;
  const PlanKey key{grid.dim, grid.n[0], grid.n[1], grid.n[2]};

  // FFTW's planner is not reentrant.
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(key); it != cache.end()) {
    plans_ = it->second;
    return;
  }
  int dims[3];
  for (int a = 0; a < grid.dim; ++a) dims[a] = static_cast<int>(grid.n[a]);
  std::vector<cplx> scratch(grid.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  auto plans = std::make_shared<Plans>();
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->fwd = fftw_plan_dft(grid.dim, dims, buf, buf, FFTW_FORWARD, flags);
  plans->bwd = fftw_plan_dft(grid.dim, dims, buf, buf, FFTW_BACKWARD, flags);
  if (!plans->fwd || !plans->bwd) throw NumericError("FFTW failed to create a plan");
  cache.emplace(key, plans);
  plans_ = std::move(plans);
}

void Fourier::forward(std::span<cplx> data) const {
  if (data.size() != grid_.size()) throw ConfigError("FFT buffer size does not match grid");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, p, p);
}

void Fourier::inverse(std::span<cplx> data) const {
  if (data.size() != grid_.size()) throw ConfigError("FFT buffer size does not match grid");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, p, p);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

std::vector<double> wavenumbers(const GridSpec& grid, int axis) {
  const std::size_t n = grid.n[axis];
  std::vector<double> k(n, 0.0);
  if (axis >= grid.dim) return k;
  const double base = 2.0 * std::numbers::pi / grid.length[axis];
  for (std::size_t j = 0; j < n; ++j) {
    const auto s = static_cast<long long>(j);
    const auto nn = static_cast<long long>(n);
    k[j] = base * static_cast<double>(2 * s < nn ? s : s - nn);
  }
  return k;
}

std::vector<double> wavenumber_squared(const GridSpec& grid) {
  std::array<std::vector<double>, 3> k;
  for (int a = 0; a < 3; ++a) k[a] = wavenumbers(grid, a);
  std::vector<double> k2(grid.size());
  for (std::size_t f = 0; f < k2.size(); ++f) {
    const auto idx = grid.unravel(f);
    k2[f] = k[0][idx[0]] * k[0][idx[0]] + k[1][idx[1]] * k[1][idx[1]] + k[2][idx[2]] * k[2][idx[2]];
  }
  return k2;
}

namespace {

void check_axis(const GridSpec& g, int axis) {
  if (axis < 0 || axis >= g.dim) throw ConfigError("derivative axis out of range");
}

// i*k along `axis`, with the unpaired Nyquist mode dropped so the derivative
// of a real field stays real.
std::vector<cplx> derivative_multiplier(const GridSpec& g, int axis) {
  auto k = wavenumbers(g, axis);
  const std::size_t n = g.n[axis];
  if (n % 2 == 0) k[n / 2] = 0.0;
  std::vector<cplx> m(g.size());
  for (std::size_t f = 0; f < m.size(); ++f) m[f] = cplx(0.0, k[g.unravel(f)[axis]]);
  return m;
}

std::vector<cplx> apply_multiplier(const GridSpec& g, std::vector<cplx> data, std::span<const cplx> mult) {
  const Fourier fft(g);
  fft.forward(data);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= mult[i];
  fft.inverse(data);
  return data;
}

std::vector<cplx> apply_multiplier(const GridSpec& g, std::vector<cplx> data, std::span<const double> mult) {
  const Fourier fft(g);
  fft.forward(data);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= mult[i];
  fft.inverse(data);
  return data;
}

std::vector<cplx> complexify(const RealField& f) {
  return {f.values().begin(), f.values().end()};
}

RealField real_part(const GridSpec& g, const std::vector<cplx>& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
  return {g, std::move(out)};
}

std::vector<double> negative_k2(const GridSpec& g) {
  auto k2 = wavenumber_squared(g);
  for (auto& v : k2) v = -v;
  return k2;
}

}  // namespace

RealField partial(const RealField& f, int axis) {
  check_axis(f.grid(), axis);
  const auto m = derivative_multiplier(f.grid(), axis);
  return real_part(f.grid(), apply_multiplier(f.grid(), complexify(f), m));
}

ComplexField partial(const ComplexField& f, int axis) {
  check_axis(f.grid(), axis);
  const auto m = derivative_multiplier(f.grid(), axis);
  std::vector<cplx> data(f.values().begin(), f.values().end());
  return {f.grid(), apply_multiplier(f.grid(), std::move(data), m)};
}

std::vector<RealField> gradient(const RealField& f) {
  std::vector<RealField> out;
  for (int a = 0; a < f.grid().dim; ++a) out.push_back(partial(f, a));
  return out;
}

std::vector<ComplexField> gradient(const ComplexField& f) {
  std::vector<ComplexField> out;
  for (int a = 0; a < f.grid().dim; ++a) out.push_back(partial(f, a));
  return out;
}

RealField laplacian(const RealField& f) {
  const auto m = negative_k2(f.grid());
  return real_part(f.grid(), apply_multiplier(f.grid(), complexify(f), m));
}

ComplexField laplacian(const ComplexField& f) {
  const auto m = negative_k2(f.grid());
  std::vector<cplx> data(f.values().begin(), f.values().end());
  return {f.grid(), apply_multiplier(f.grid(), std::move(data), m)};
}

RealField divergence(std::span<const RealField> components) {
  if (components.empty()) throw ConfigError("divergence of an empty vector field");
  const GridSpec& g = components.front().grid();
  if (static_cast<int>(components.size()) != g.dim)
    throw ConfigError("divergence needs one component per grid axis");
  std::vector<double> acc(g.size(), 0.0);
  for (int a = 0; a < g.dim; ++a) {
    require_same_grid(g, components[a].grid(), "divergence");
    const auto d = partial(components[a], a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
  }
  return {g, std::move(acc)};
}

RealField helmholtz_residual(const ComplexField& f, double k) {
  if (!std::isfinite(k)) throw ConfigError("Helmholtz wavenumber must be finite");
  const auto lap = laplacian(f);
  std::vector<double> r(f.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(lap[i] + k * k * f[i]);
  return {f.grid(), std::move(r)};
}

}  // namespace qhydro
