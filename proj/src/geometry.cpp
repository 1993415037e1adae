#include "qhydro/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qhydro {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

void check_components(const ChartGrid& chart, const std::vector<ChartField>& comps, std::size_t count,
                      const char* what) {
  if (comps.size() != count) throw ConfigError(std::string(what) + ": wrong number of components");
  for (const auto& c : comps) {
    if (c.size() != chart.size()) throw ConfigError(std::string(what) + ": component size does not match chart");
    for (double v : c)
      if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": non-finite component");
  }
}

Mat point_matrix(const std::vector<ChartField>& comps, int n, std::size_t p) {
  Mat m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = comps[a * n + b][p];
  return m;
}

Mat checked_inverse(const Mat& m, const char* what) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!(scale > 0.0) || std::abs(det) <= 1e-13 * std::pow(scale, static_cast<double>(m.rows())))
    throw ConfigError(std::string(what) + ": degenerate matrix");
  return m.inverse();
}

// Derivatives of every component along every axis: out[c * n + axis].
std::vector<ChartField> all_derivatives(const ChartGrid& chart, const std::vector<ChartField>& comps) {
  const int n = chart.dim;
  std::vector<ChartField> out;
  out.reserve(comps.size() * static_cast<std::size_t>(n));
  for (const auto& c : comps)
    for (int a = 0; a < n; ++a) out.push_back(chart_derivative(chart, c, a));
  return out;
}

}  // namespace

ChartGrid ChartGrid::box(std::vector<std::size_t> n, std::vector<double> lo, std::vector<double> hi) {
  if (n.empty() || n.size() > 4 || lo.size() != n.size() || hi.size() != n.size())
    throw ConfigError("chart needs 1-4 axes with matching bounds");
  ChartGrid c;
  c.dim = static_cast<int>(n.size());
  for (std::size_t a = 0; a < n.size(); ++a) {
    c.n[a] = n[a];
    c.lo[a] = lo[a];
    c.hi[a] = hi[a];
  }
  c.validate();
  return c;
}

void ChartGrid::validate() const {
  if (dim < 1 || dim > 4) throw ConfigError("chart dimension must be 1-4");
  for (int a = 0; a < 4; ++a) {
    if (a >= dim && n[a] != 1) throw ConfigError("unused chart axes must have a single sample");
    if (n[a] == 1) continue;
    if (n[a] < 3) throw ConfigError("chart axes need at least 3 samples for second-order differences");
    if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a]))
      throw ConfigError("chart axis bounds must be finite with hi > lo");
  }
}

double ChartGrid::spacing(int axis) const {
  return n[axis] > 1 ? (hi[axis] - lo[axis]) / static_cast<double>(n[axis] - 1) : 1.0;
}

std::array<std::size_t, 4> ChartGrid::unravel(std::size_t flat) const {
  std::array<std::size_t, 4> idx{};
  for (int a = 3; a >= 0; --a) {
    idx[a] = flat % n[a];
    flat /= n[a];
  }
  return idx;
}

std::size_t ChartGrid::ravel(const std::array<std::size_t, 4>& idx) const {
  return ((idx[0] * n[1] + idx[1]) * n[2] + idx[2]) * n[3] + idx[3];
}

std::array<double, 4> ChartGrid::point(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::array<double, 4> x{};
  for (int a = 0; a < 4; ++a) x[a] = coord(a, idx[a]);
  return x;
}

ChartField sample(const ChartGrid& chart, const std::function<double(const std::array<double, 4>&)>& f) {
  ChartField out(chart.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = f(chart.point(p));
  return out;
}

ChartField chart_derivative(const ChartGrid& chart, const ChartField& f, int axis) {
  ChartField out(f.size(), 0.0);
  const std::size_t m = chart.n[axis];
  if (m == 1) return out;
  std::size_t stride = 1;
  for (int a = 3; a > axis; --a) stride *= chart.n[a];
  const double inv = 1.0 / (2.0 * chart.spacing(axis));
  for (std::size_t p = 0; p < f.size(); ++p) {
    const std::size_t i = (p / stride) % m;
    if (i == 0)
      out[p] = (-3.0 * f[p] + 4.0 * f[p + stride] - f[p + 2 * stride]) * inv;
    else if (i + 1 == m)
      out[p] = (3.0 * f[p] - 4.0 * f[p - stride] + f[p - 2 * stride]) * inv;
    else
      out[p] = (f[p + stride] - f[p - stride]) * inv;
  }
  return out;
}

void ChartConnection::validate() const {
  chart.validate();
  const auto n2 = static_cast<std::size_t>(n() * n());
  check_components(chart, frame, n2, "frame");
  check_components(chart, connection, n2 * static_cast<std::size_t>(n()), "connection");
  if (metric) check_components(chart, *metric, n2, "metric");
}

CartanOutput cartan_structure(const ChartConnection& conn) {
  conn.validate();
  const int n = conn.n();
  const std::size_t N = conn.chart.size();
  const auto dtheta = all_derivatives(conn.chart, conn.frame);        // [(μn + j)n + i] = ∂_i θ^μ_j
  const auto domega = all_derivatives(conn.chart, conn.connection);   // [((μn + ν)n + j)n + i] = ∂_i ω^μ_{νj}

  CartanOutput out;
  out.n = n;
  out.torsion.assign(static_cast<std::size_t>(n * n * n), ChartField(N, 0.0));
  out.curvature.assign(static_cast<std::size_t>(n * n * n * n), ChartField(N, 0.0));

  for (int mu = 0; mu < n; ++mu) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        auto& t = out.torsion[(mu * n + i) * n + j];
        const auto& di_tj = dtheta[(mu * n + j) * n + i];
        const auto& dj_ti = dtheta[(mu * n + i) * n + j];
        for (std::size_t p = 0; p < N; ++p) {
          double v = di_tj[p] - dj_ti[p];
          for (int nu = 0; nu < n; ++nu)
            v += conn.omega(mu, nu, i)[p] * conn.theta(nu, j)[p] - conn.omega(mu, nu, j)[p] * conn.theta(nu, i)[p];
          t[p] = v;
        }
        auto& tr = out.torsion[(mu * n + j) * n + i];
        for (std::size_t p = 0; p < N; ++p) tr[p] = -t[p];
      }
    }
  }

  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          auto& c = out.curvature[((mu * n + nu) * n + i) * n + j];
          const auto& di_wj = domega[((mu * n + nu) * n + j) * n + i];
          const auto& dj_wi = domega[((mu * n + nu) * n + i) * n + j];
          for (std::size_t p = 0; p < N; ++p) {
            double v = di_wj[p] - dj_wi[p];
            for (int l = 0; l < n; ++l)
              v += conn.omega(mu, l, i)[p] * conn.omega(l, nu, j)[p] - conn.omega(mu, l, j)[p] * conn.omega(l, nu, i)[p];
            c[p] = v;
          }
          auto& cr = out.curvature[((mu * n + nu) * n + j) * n + i];
          for (std::size_t p = 0; p < N; ++p) cr[p] = -c[p];
        }
      }
    }
  }
  return out;
}

ChartField ricci_scalar(const ChartConnection& conn, const CartanOutput& cartan) {
  if (!conn.metric) throw ConfigError("Ricci scalar needs a metric");
  conn.validate();
  const int n = conn.n();
  if (cartan.n != n) throw ConfigError("curvature does not match the connection");
  ChartField out(conn.chart.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Mat E = checked_inverse(point_matrix(conn.frame, n, p), "frame");  // E(i, a) = E_a^i
    const Mat G = checked_inverse(point_matrix(*conn.metric, n, p), "metric");
    double scalar = 0.0;
    for (int nu = 0; nu < n; ++nu) {
      for (int b = 0; b < n; ++b) {
        double ric = 0.0;
        for (int mu = 0; mu < n; ++mu)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ric += cartan.Omega(mu, nu, i, j)[p] * E(i, mu) * E(j, b);
        scalar += G(nu, b) * ric;
      }
    }
    out[p] = scalar;
  }
  return out;
}

namespace {

std::vector<ChartField> metricity_components(const ChartConnection& conn) {
  const int n = conn.n();
  const std::size_t N = conn.chart.size();
  const auto dg = all_derivatives(conn.chart, *conn.metric);  // [(μn + ν)n + i] = ∂_i g_{μν}
  std::vector<ChartField> Q(static_cast<std::size_t>(n * n * n), ChartField(N, 0.0));
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      for (int i = 0; i < n; ++i) {
        auto& q = Q[(mu * n + nu) * n + i];
        const auto& d = dg[(mu * n + nu) * n + i];
        for (std::size_t p = 0; p < N; ++p) {
          double v = d[p];
          for (int l = 0; l < n; ++l)
            v -= conn.omega(l, mu, i)[p] * conn.g(l, nu)[p] + conn.omega(l, nu, i)[p] * conn.g(mu, l)[p];
          q[p] = v;
        }
      }
  return Q;
}

}  // namespace

MetricityResult metricity(const ChartConnection& conn, double tol) {
  if (!conn.metric) throw ConfigError("metricity needs a metric");
  conn.validate();
  MetricityResult r;
  r.Q = metricity_components(conn);
  for (const auto& q : r.Q)
    for (double v : q) r.max_abs = std::max(r.max_abs, std::abs(v));
  r.reducible = r.max_abs < tol;
  return r;
}

ConnectionSplit split_connection(const ChartConnection& conn) {
  if (!conn.metric) throw ConfigError("connection split needs a metric");
  conn.validate();
  const int n = conn.n();
  const std::size_t N = conn.chart.size();
  const auto Q = metricity_components(conn);
  std::vector<ChartField> tau(conn.connection.size(), ChartField(N, 0.0));
  for (std::size_t p = 0; p < N; ++p) {
    const Mat G = checked_inverse(point_matrix(*conn.metric, n, p), "metric");
    for (int l = 0; l < n; ++l)
      for (int nu = 0; nu < n; ++nu)
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int mu = 0; mu < n; ++mu) v += G(l, mu) * Q[(mu * n + nu) * n + i][p];
          tau[(l * n + nu) * n + i][p] = -0.5 * v;
        }
  }
  ConnectionSplit out{conn, std::move(tau)};
  for (std::size_t c = 0; c < out.tau.size(); ++c)
    for (std::size_t p = 0; p < N; ++p) out.compatible.connection[c][p] -= out.tau[c][p];
  return out;
}

ChartConnection levi_civita(const ChartGrid& chart, std::vector<ChartField> metric) {
  chart.validate();
  const int n = chart.dim;
  const std::size_t N = chart.size();
  check_components(chart, metric, static_cast<std::size_t>(n * n), "metric");
  const auto dg = all_derivatives(chart, metric);  // [(μn + ν)n + k] = ∂_k g_{μν}
  auto d = [&](int a, int b, int k, std::size_t p) { return dg[(a * n + b) * n + k][p]; };

  ChartConnection conn{chart, {}, {}, std::nullopt};
  conn.frame.assign(static_cast<std::size_t>(n * n), ChartField(N, 0.0));
  for (int a = 0; a < n; ++a) std::fill(conn.frame[a * n + a].begin(), conn.frame[a * n + a].end(), 1.0);
  conn.connection.assign(static_cast<std::size_t>(n * n * n), ChartField(N, 0.0));
  for (std::size_t p = 0; p < N; ++p) {
    const Mat G = checked_inverse(point_matrix(metric, n, p), "metric");
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu)
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int l = 0; l < n; ++l) v += G(mu, l) * (d(l, nu, i, p) + d(l, i, nu, p) - d(i, nu, l, p));
          conn.connection[(mu * n + nu) * n + i][p] = 0.5 * v;
        }
  }
  conn.metric = std::move(metric);
  return conn;
}

ChartConnection preset_connection(const std::string& name, const ChartGrid& chart, double radius) {
  chart.validate();
  const int n = chart.dim;
  const std::size_t N = chart.size();
  ChartConnection conn{chart, {}, {}, std::nullopt};
  conn.frame.assign(static_cast<std::size_t>(n * n), ChartField(N, 0.0));
  conn.connection.assign(static_cast<std::size_t>(n * n * n), ChartField(N, 0.0));
  std::vector<ChartField> g(static_cast<std::size_t>(n * n), ChartField(N, 0.0));
  auto set = [&](std::vector<ChartField>& comps, std::size_t c, auto f) {
    for (std::size_t p = 0; p < N; ++p) comps[c][p] = f(chart.point(p));
  };
  auto one = [](const auto&) { return 1.0; };

  if (name == "cartesian") {
    for (int a = 0; a < n; ++a) {
      set(conn.frame, a * n + a, one);
      set(g, a * n + a, one);
    }
  } else if (name == "polar" || name == "polar_orthonormal" || name == "sphere") {
    if (n != 2) throw ConfigError("preset '" + name + "' needs a 2D chart");
    if (name == "polar" || name == "polar_orthonormal")
      if (!(chart.lo[0] > 0.0)) throw ConfigError("polar chart needs r > 0");
    if (name == "sphere") {
      if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
      if (!(chart.lo[0] > 0.0) || !(chart.hi[0] < std::numbers::pi))
        throw ConfigError("sphere chart needs 0 < polar angle < pi");
    }
    if (name == "polar") {
      set(conn.frame, 0, one);
      set(conn.frame, 3, one);
      set(g, 0, one);
      set(g, 3, [](const auto& x) { return x[0] * x[0]; });
      set(conn.connection, (0 * 2 + 1) * 2 + 1, [](const auto& x) { return -x[0]; });
      set(conn.connection, (1 * 2 + 1) * 2 + 0, [](const auto& x) { return 1.0 / x[0]; });
      set(conn.connection, (1 * 2 + 0) * 2 + 1, [](const auto& x) { return 1.0 / x[0]; });
    } else if (name == "polar_orthonormal") {
      set(conn.frame, 0, one);
      set(conn.frame, 3, [](const auto& x) { return x[0]; });
      set(g, 0, one);
      set(g, 3, one);
      set(conn.connection, (0 * 2 + 1) * 2 + 1, [](const auto&) { return -1.0; });
      set(conn.connection, (1 * 2 + 0) * 2 + 1, one);
    } else {
      const double r2 = radius * radius;
      set(conn.frame, 0, one);
      set(conn.frame, 3, one);
      set(g, 0, [&](const auto&) { return r2; });
      set(g, 3, [&](const auto& x) { return r2 * std::sin(x[0]) * std::sin(x[0]); });
      set(conn.connection, (0 * 2 + 1) * 2 + 1, [](const auto& x) { return -std::sin(x[0]) * std::cos(x[0]); });
      set(conn.connection, (1 * 2 + 1) * 2 + 0, [](const auto& x) { return 1.0 / std::tan(x[0]); });
      set(conn.connection, (1 * 2 + 0) * 2 + 1, [](const auto& x) { return 1.0 / std::tan(x[0]); });
    }
  } else {
    throw ConfigError("unknown chart preset '" + name + "'");
  }
  conn.metric = std::move(g);
  return conn;
}

MaskedField ricci_scalar_conformal(const std::vector<RealField>& omega_slices, double dt, const UnitSystem& units,
                                   double omega_floor) {
  units.validate();
  if (omega_slices.size() < 5 || omega_slices.size() % 2 == 0)
    throw ConfigError("conformal curvature needs an odd number of time slices, at least 5");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("slice spacing dt must be positive");
  const GridSpec& g = omega_slices.front().grid();
  for (const auto& s : omega_slices) require_same_grid(s.grid(), g, "conformal factor slice");

  const std::size_t nt = omega_slices.size();
  ChartGrid chart;
  chart.dim = 4;
  chart.n = {nt, g.n[0], g.n[1], g.n[2]};
  chart.lo[0] = -0.5 * static_cast<double>(nt - 1) * dt;
  chart.hi[0] = -chart.lo[0];
  for (int a = 0; a < 3; ++a) {
    chart.lo[a + 1] = g.origin[a];
    chart.hi[a + 1] = g.origin[a] + static_cast<double>(g.n[a] - 1) * g.dx(a);
  }
  chart.validate();

  const std::size_t M = g.size();
  Mask mask(M, 0);
  ChartField omega2(chart.size());
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t i = 0; i < M; ++i) {
      const double w = omega_slices[t][i];
      if (!(w >= omega_floor)) {
        mask[i] = 1;
        omega2[t * M + i] = 1.0;
      } else {
        omega2[t * M + i] = w * w;
      }
    }

  std::vector<ChartField> metric(16, ChartField(chart.size(), 0.0));
  const double c2 = units.c * units.c;
  for (std::size_t p = 0; p < chart.size(); ++p) {
    metric[0][p] = c2 * omega2[p];
    for (int a = 1; a < 4; ++a) metric[a * 4 + a][p] = -omega2[p];
  }
  const auto conn = levi_civita(chart, std::move(metric));
  const auto scalar = ricci_scalar(conn, cartan_structure(conn));

  const std::size_t mid = nt / 2;
  std::vector<double> out(M);
  for (std::size_t i = 0; i < M; ++i) out[i] = mask[i] ? 0.0 : scalar[mid * M + i];
  return {RealField(g, std::move(out)), std::move(mask)};
}

}  // namespace qhydro
