#include "qhydro/grid.hpp"

#include <algorithm>
#include <string>

namespace qhydro {

GridSpec GridSpec::line(std::size_t n, double lo, double hi) {
  GridSpec g;
  g.dim = 1;
  g.n = {n, 1, 1};
  g.length = {hi - lo, 1.0, 1.0};
  g.origin = {lo, 0.0, 0.0};
  g.validate();
  return g;
}

GridSpec GridSpec::cube(int dim, std::size_t n, double lo, double hi) {
  GridSpec g;
  g.dim = dim;
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      g.n[a] = n;
      g.length[a] = hi - lo;
      g.origin[a] = lo;
    } else {
      g.n[a] = 1;
      g.length[a] = 1.0;
      g.origin[a] = 0.0;
    }
  }
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw ConfigError("grid dim must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      if (n[a] < 8) throw ConfigError("grid needs at least 8 points per axis (axis " + std::to_string(a) + ")");
      if (!(length[a] > 0.0) || !std::isfinite(length[a]))
        throw ConfigError("grid length must be positive (axis " + std::to_string(a) + ")");
      if (!std::isfinite(origin[a])) throw ConfigError("grid origin must be finite");
    } else if (n[a] != 1) {
      throw ConfigError("unused grid axes must have n = 1");
    }
  }
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= dx(a);
  return v;
}

std::array<std::size_t, 3> GridSpec::unravel(std::size_t flat) const {
  const std::size_t k = flat % n[2];
  flat /= n[2];
  const std::size_t j = flat % n[1];
  const std::size_t i = flat / n[1];
  return {i, j, k};
}

Point GridSpec::point(std::size_t flat) const {
  const auto idx = unravel(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = coord(a, idx[a]);
  return p;
}

void UnitSystem::validate() const {
  if (!(hbar > 0.0) || !(mass >= 0.0) || !(c > 0.0) || !std::isfinite(hbar) || !std::isfinite(mass) ||
      !std::isfinite(c)) {
    throw ConfigError("unit constants hbar, c must be finite and positive and mass non-negative");
  }
}

void UnitSystem::require_massive() const {
  validate();
  if (!(mass > 0.0)) throw ConfigError("mass must be positive for this operation");
}

std::size_t MaskedField::masked_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double norm_squared(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return s * f.grid().cell_volume();
}

double integrate(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": fields live on different grids");
}

}  // namespace qhydro
