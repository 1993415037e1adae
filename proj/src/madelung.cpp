#include "qhydro/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>
#include <string>

#include "qhydro/field_io.hpp"
#include "qhydro/spectral.hpp"

namespace qhydro {

namespace {

double threshold(std::span<const double> amplitude, const NodeOptions& opts) {
  if (opts.eps_node) {
    if (!(*opts.eps_node >= 0.0) || !std::isfinite(*opts.eps_node))
      throw ConfigError("nodal threshold must be finite and non-negative");
    return *opts.eps_node;
  }
  double m = 0.0;
  for (double r : amplitude) m = std::max(m, r);
  return 1e-8 * m;
}

Mask node_mask(std::span<const double> amplitude, const NodeOptions& opts) {
  const double eps = threshold(amplitude, opts);
  Mask mask(amplitude.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (amplitude[i] < eps || amplitude[i] == 0.0) ? 1 : 0;
  return mask;
}

std::vector<double> modulus(const ComplexField& psi) {
  std::vector<double> r(psi.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(psi[i]);
  return r;
}

// ħ Im(ψ* ∂_a ψ)/|ψ|² per active axis, 0 on the mask.
std::vector<std::vector<double>> phase_gradient(const ComplexField& psi, const Mask& mask, double hbar) {
  const auto grad = gradient(psi);
  std::vector<std::vector<double>> out(grad.size(), std::vector<double>(psi.size(), 0.0));
  for (std::size_t a = 0; a < grad.size(); ++a)
    for (std::size_t i = 0; i < psi.size(); ++i)
      if (!mask[i]) out[a][i] = hbar * std::imag(std::conj(psi[i]) * grad[a][i]) / std::norm(psi[i]);
  return out;
}

// Wrapped phase increment arg(b conj a).
double phase_step(cplx a, cplx b) { return std::arg(b * std::conj(a)); }

void require_snapshots(const ComplexField& prev, const ComplexField& cur, const ComplexField& next, double dt) {
  require_same_grid(prev.grid(), cur.grid(), "snapshot");
  require_same_grid(next.grid(), cur.grid(), "snapshot");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("snapshot spacing dt must be positive");
}

RealField spectral_laplacian(const GridSpec& g, const std::vector<double>& f) { return laplacian(RealField(g, f)); }

MaskedField masked(const GridSpec& g, std::vector<double> v, Mask mask) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (mask[i]) v[i] = 0.0;
  return {RealField(g, std::move(v)), std::move(mask)};
}

}  // namespace

PolarFields decompose(const ComplexField& psi, const UnitSystem& units, const NodeOptions& opts) {
  units.validate();
  const GridSpec& g = psi.grid();
  auto r = modulus(psi);
  Mask mask = node_mask(r, opts);
  const double hbar = units.hbar;

  std::vector<double> phase(psi.size(), 0.0);
  std::vector<std::uint8_t> seen(psi.size(), 0);
  std::size_t regions = 0;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < psi.size(); ++seed) {
    if (mask[seed] || seen[seed]) continue;
    ++regions;
    seen[seed] = 1;
    phase[seed] = std::arg(psi[seed]);
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      const auto idx = g.unravel(i);
      for (int a = 0; a < g.dim; ++a) {
        for (int step : {-1, 1}) {
          if (step < 0 && idx[a] == 0) continue;
          if (step > 0 && idx[a] + 1 == g.n[a]) continue;
          auto nb = idx;
          nb[a] = static_cast<std::size_t>(static_cast<long>(idx[a]) + step);
          const std::size_t j = g.ravel(nb[0], nb[1], nb[2]);
          if (mask[j] || seen[j]) continue;
          seen[j] = 1;
          phase[j] = phase[i] + phase_step(psi[i], psi[j]);
          queue.push_back(j);
        }
      }
    }
  }

  std::vector<Vortex> vortices;
  for (int a = 0; a < g.dim; ++a) {
    for (int b = a + 1; b < g.dim; ++b) {
      for (std::size_t i = 0; i < psi.size(); ++i) {
        auto c0 = g.unravel(i);
        if (c0[a] + 1 == g.n[a] || c0[b] + 1 == g.n[b]) continue;
        auto c1 = c0, c3 = c0;
        ++c1[a];
        ++c3[b];
        auto c2 = c1;
        ++c2[b];
        const std::size_t loop[4] = {i, g.ravel(c1[0], c1[1], c1[2]), g.ravel(c2[0], c2[1], c2[2]),
                                     g.ravel(c3[0], c3[1], c3[2])};
        if (mask[loop[0]] || mask[loop[1]] || mask[loop[2]] || mask[loop[3]]) continue;
        double w = 0.0;
        for (int e = 0; e < 4; ++e) w += phase_step(psi[loop[e]], psi[loop[(e + 1) % 4]]);
        const int winding = static_cast<int>(std::lround(w / (2.0 * std::numbers::pi)));
        if (winding != 0) vortices.push_back({c0, a, b, winding});
      }
    }
  }

  std::vector<double> s(psi.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = mask[i] ? 0.0 : hbar * phase[i];
  return {RealField(g, std::move(r)), RealField(g, std::move(s)), std::move(mask), hbar, regions,
          std::move(vortices)};
}

ComplexField recompose(const PolarFields& pf) {
  require_same_grid(pf.R.grid(), pf.S.grid(), "polar fields");
  std::vector<cplx> out(pf.R.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(pf.R[i], pf.S[i] / pf.hbar);
  return {pf.R.grid(), std::move(out)};
}

HydroFields hydro_fields(const ComplexField& psi, const UnitSystem& units, const NodeOptions& opts) {
  units.require_massive();
  const GridSpec& g = psi.grid();
  const auto r = modulus(psi);
  Mask mask = node_mask(r, opts);
  const auto dS = phase_gradient(psi, mask, units.hbar);
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = units.mass * r[i] * r[i];
  HydroFields out{RealField(g, std::move(rho)), {}, {}, std::move(mask)};
  for (const auto& comp : dS) {
    std::vector<double> v(comp.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = comp[i] / units.mass;
    out.p.emplace_back(g, comp);
    out.v.emplace_back(g, std::move(v));
  }
  return out;
}

namespace {

std::vector<double> checked_sqrt(const RealField& rho) {
  std::vector<double> r(rho.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (rho[i] < 0.0) throw ConfigError("density must be non-negative");
    r[i] = std::sqrt(rho[i]);
  }
  return r;
}

}  // namespace

namespace {

std::vector<double> magnitudes(std::span<const double> r) {
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(r[i]);
  return out;
}

Mask checked_mask(std::span<const double> r, const NodeOptions& opts, const char* what) {
  Mask mask = node_mask(magnitudes(r), opts);
  if (std::all_of(mask.begin(), mask.end(), [](auto m) { return m != 0; }))
    throw ConfigError(std::string(what) + ": density is masked everywhere");
  return mask;
}

}  // namespace

MaskedField quantum_potential_amplitude(const RealField& R, const UnitSystem& units, const NodeOptions& opts) {
  units.require_massive();
  Mask mask = checked_mask(R.values(), opts, "quantum potential");
  const auto lap = laplacian(R);
  const double scale = -units.hbar * units.hbar / (2.0 * units.mass);
  std::vector<double> u(R.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!mask[i]) u[i] = scale * lap[i] / R[i];
  return masked(R.grid(), std::move(u), std::move(mask));
}

MaskedField quantum_potential(const RealField& rho, const UnitSystem& units, const NodeOptions& opts) {
  return quantum_potential_amplitude(RealField(rho.grid(), checked_sqrt(rho)), units, opts);
}

MaskedField quantum_potential_rel_amplitude(const RealField& R_prev, const RealField& R, const RealField& R_next,
                                            double dt, const UnitSystem& units, const NodeOptions& opts) {
  units.validate();
  require_same_grid(R_prev.grid(), R.grid(), "amplitude slice");
  require_same_grid(R_next.grid(), R.grid(), "amplitude slice");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("slice spacing dt must be positive");
  Mask mask = checked_mask(R.values(), opts, "relativistic quantum potential");
  const auto lap = laplacian(R);
  const double c2 = units.c * units.c;
  const double scale = -units.hbar * units.hbar * c2;
  std::vector<double> u(R.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mask[i]) continue;
    const double box = (R_next[i] - 2.0 * R[i] + R_prev[i]) / (c2 * dt * dt) - lap[i];
    u[i] = scale * box / R[i];
  }
  return masked(R.grid(), std::move(u), std::move(mask));
}

MaskedField quantum_potential_rel(const RealField& rho_prev, const RealField& rho, const RealField& rho_next,
                                  double dt, const UnitSystem& units, const NodeOptions& opts) {
  return quantum_potential_rel_amplitude(RealField(rho_prev.grid(), checked_sqrt(rho_prev)),
                                         RealField(rho.grid(), checked_sqrt(rho)),
                                         RealField(rho_next.grid(), checked_sqrt(rho_next)), dt, units, opts);
}

ResidualPair schrodinger_residuals(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                   double dt, const RealField& potential, const UnitSystem& units,
                                   const NodeOptions& opts) {
  require_snapshots(prev, cur, next, dt);
  require_same_grid(potential.grid(), cur.grid(), "potential");
  units.require_massive();
  const GridSpec& g = cur.grid();
  const auto r = modulus(cur);
  Mask mask = node_mask(r, opts);
  const auto dS = phase_gradient(cur, mask, units.hbar);

  std::vector<double> rho(cur.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = r[i] * r[i];
  const auto uh = quantum_potential(RealField(g, rho), units, NodeOptions{threshold(r, opts)});

  // Current R²∇S/m = ħ Im(ψ*∇ψ)/m is smooth through nodes.
  const auto grad = gradient(cur);
  std::vector<RealField> current;
  for (const auto& d : grad) {
    std::vector<double> j(cur.size());
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = units.hbar * std::imag(std::conj(cur[i]) * d[i]) / units.mass;
    current.emplace_back(g, std::move(j));
  }
  const auto div = divergence(current);

  std::vector<double> hj(cur.size(), 0.0), cont(cur.size(), 0.0);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    cont[i] = (std::norm(next[i]) - std::norm(prev[i])) / (2.0 * dt) + div[i];
    if (mask[i]) continue;
    double p2 = 0.0;
    for (const auto& c : dS) p2 += c[i] * c[i];
    const double dSdt = units.hbar * phase_step(prev[i], next[i]) / (2.0 * dt);
    hj[i] = dSdt + p2 / (2.0 * units.mass) + potential[i] + uh.value[i];
  }
  return {masked(g, std::move(hj), mask), masked(g, std::move(cont), mask)};
}

ResidualPair schrodinger_residuals(const PolarFields& prev, const PolarFields& cur, const PolarFields& next,
                                   double dt, const RealField& potential, const UnitSystem& units,
                                   const NodeOptions& opts) {
  return schrodinger_residuals(recompose(prev), recompose(cur), recompose(next), dt, potential, units, opts);
}

std::vector<RealField> euler_residual(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                      double dt, const RealField& potential, const UnitSystem& units,
                                      const NodeOptions& opts) {
  require_snapshots(prev, cur, next, dt);
  require_same_grid(potential.grid(), cur.grid(), "potential");
  units.require_massive();
  const GridSpec& g = cur.grid();
  const auto r = modulus(cur);
  const Mask mask = node_mask(r, opts);
  const double eps = threshold(r, opts);
  const NodeOptions fixed{eps};
  const auto p = phase_gradient(cur, mask, units.hbar);
  const auto pp = phase_gradient(prev, node_mask(modulus(prev), fixed), units.hbar);
  const auto pn = phase_gradient(next, node_mask(modulus(next), fixed), units.hbar);

  std::vector<double> rho(cur.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = r[i] * r[i];
  const auto uh = quantum_potential(RealField(g, rho), units, fixed);
  std::vector<double> total(cur.size());
  for (std::size_t i = 0; i < total.size(); ++i) total[i] = potential[i] + uh.value[i];
  const auto force = gradient(RealField(g, std::move(total)));

  std::vector<std::vector<RealField>> dp;  // dp[a][b] = ∂_b p_a
  for (const auto& comp : p) dp.push_back(gradient(RealField(g, comp)));

  std::vector<RealField> out;
  for (std::size_t a = 0; a < p.size(); ++a) {
    std::vector<double> e(cur.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (mask[i]) continue;
      double adv = 0.0;
      for (std::size_t b = 0; b < p.size(); ++b) adv += p[b][i] * dp[a][b][i];
      e[i] = (pn[a][i] - pp[a][i]) / (2.0 * dt) + adv / units.mass + force[a][i];
    }
    out.emplace_back(g, std::move(e));
  }
  return out;
}

ResidualPair kg_residuals(const ComplexField& prev, const ComplexField& cur, const ComplexField& next, double dt,
                          const UnitSystem& units, const NodeOptions& opts) {
  require_snapshots(prev, cur, next, dt);
  units.validate();
  const GridSpec& g = cur.grid();
  const auto rp = modulus(prev), r = modulus(cur), rn = modulus(next);
  Mask mask = node_mask(r, opts);
  const double hbar = units.hbar, c2 = units.c * units.c;
  const double m0c = units.mass * units.c;

  // Spatial covariant components p_i = -∂_iS.
  auto dS = phase_gradient(cur, mask, hbar);
  std::vector<RealField> p;
  for (auto& comp : dS) {
    for (double& v : comp) v = -v;
    p.emplace_back(g, comp);
  }
  const auto div_p = divergence(p);
  const auto lap_r = spectral_laplacian(g, r);

  std::vector<double> shell(cur.size(), 0.0), codiv(cur.size(), 0.0);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (mask[i]) continue;
    const double pt = -hbar * phase_step(prev[i], next[i]) / (2.0 * dt);
    const double dpt_dt = -hbar * (phase_step(cur[i], next[i]) - phase_step(prev[i], cur[i])) / (dt * dt);
    double p2 = pt * pt / c2;
    for (const auto& comp : dS) p2 -= comp[i] * comp[i];
    const double box_r = (rn[i] - 2.0 * r[i] + rp[i]) / (c2 * dt * dt) - lap_r[i];
    shell[i] = p2 - m0c * m0c - hbar * hbar * box_r / r[i];
    codiv[i] = dpt_dt / c2 - div_p[i];
  }
  return {masked(g, std::move(shell), mask), masked(g, std::move(codiv), mask)};
}

MaskedField kg_current_codivergence(const ComplexField& prev, const ComplexField& cur, const ComplexField& next,
                                    double dt, const UnitSystem& units, const NodeOptions& opts) {
  require_snapshots(prev, cur, next, dt);
  units.validate();
  // R²p_t = -ħ Im(ψ*∂_tψ) and R²p_i = -ħ Im(ψ*∂_iψ), so the codivergence is
  // -ħ Im(ψ* □ψ).
  const auto lap = laplacian(cur);
  const double c2 = units.c * units.c;
  std::vector<double> out(cur.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx tt = (next[i] - 2.0 * cur[i] + prev[i]) / (dt * dt);
    out[i] = -units.hbar * std::imag(std::conj(cur[i]) * (tt / c2 - lap[i]));
  }
  return masked(cur.grid(), std::move(out), node_mask(modulus(cur), opts));
}

CovectorSlice covector_slice(const ComplexField& prev, const ComplexField& cur, const ComplexField& next, double dt,
                             const UnitSystem& units, const NodeOptions& opts) {
  require_snapshots(prev, cur, next, dt);
  units.validate();
  const GridSpec& g = cur.grid();
  const Mask mask = node_mask(modulus(cur), opts);
  std::vector<double> pt(cur.size(), 0.0);
  for (std::size_t i = 0; i < pt.size(); ++i)
    if (!mask[i]) pt[i] = -units.hbar * phase_step(prev[i], next[i]) / (2.0 * dt);
  CovectorSlice out{RealField(g, std::move(pt)), {}};
  for (auto& comp : phase_gradient(cur, mask, units.hbar)) {
    for (double& v : comp) v = -v;
    out.p.emplace_back(g, std::move(comp));
  }
  return out;
}

MaskedField effective_density(const RealField& uh_squared, const UnitSystem& units) {
  units.validate();
  const double m2 = units.mass * units.mass, c2 = units.c * units.c;
  std::vector<double> out(uh_squared.size(), 0.0);
  Mask mask(uh_squared.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double radicand = m2 - uh_squared[i] / c2;
    if (radicand < 0.0)
      mask[i] = 1;
    else
      out[i] = std::sqrt(radicand);
  }
  return {RealField(uh_squared.grid(), std::move(out)), std::move(mask)};
}

System27Residuals system27_residuals(const CovectorSlice& prev, const CovectorSlice& cur, const CovectorSlice& next,
                                     double dt, const RealField& rho0, const UnitSystem& units) {
  units.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("slice spacing dt must be positive");
  const GridSpec& g = cur.pt.grid();
  const std::size_t dim = static_cast<std::size_t>(g.dim);
  for (const auto* s : {&prev, &cur, &next}) {
    if (s->p.size() != dim) throw ConfigError("covector needs one spatial component per grid axis");
    require_same_grid(s->pt.grid(), g, "covector slice");
    for (const auto& c : s->p) require_same_grid(c.grid(), g, "covector slice");
  }
  require_same_grid(rho0.grid(), g, "rest density");

  double closed = 0.0;
  const auto grad_pt = gradient(cur.pt);
  std::vector<std::vector<RealField>> dp;  // dp[a][b] = ∂_b p_a
  for (const auto& c : cur.p) dp.push_back(gradient(c));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t a = 0; a < dim; ++a) {
      const double dt_pa = (next.p[a][i] - prev.p[a][i]) / (2.0 * dt);
      closed = std::max(closed, std::abs(dt_pa - grad_pt[a][i]));
      for (std::size_t b = a + 1; b < dim; ++b) closed = std::max(closed, std::abs(dp[b][a][i] - dp[a][b][i]));
    }
  }

  const double c2 = units.c * units.c;
  const auto div = divergence(cur.p);
  std::vector<double> codiv(g.size()), shell(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    codiv[i] = (next.pt[i] - prev.pt[i]) / (2.0 * dt * c2) - div[i];
    double p2 = cur.pt[i] * cur.pt[i] / c2;
    for (const auto& c : cur.p) p2 -= c[i] * c[i];
    shell[i] = p2 - rho0[i] * rho0[i] * c2;
  }
  return {closed, RealField(g, std::move(codiv)), RealField(g, std::move(shell))};
}

std::vector<MaskedField> kinematic_vorticity(const ComplexField& psi, const UnitSystem& units,
                                             const NodeOptions& opts) {
  units.require_massive();
  const GridSpec& g = psi.grid();
  const auto r = modulus(psi);
  const Mask mask = node_mask(r, opts);
  const auto dS = phase_gradient(psi, mask, units.hbar);
  std::vector<std::vector<RealField>> dU;  // dU[a][b] = ∂_b U_a
  for (const auto& comp : dS) {
    std::vector<double> u(psi.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!mask[i]) u[i] = comp[i] / (units.mass * r[i] * r[i]);
    dU.push_back(gradient(RealField(g, std::move(u))));
  }
  std::vector<MaskedField> out;
  for (int a = 0; a < g.dim; ++a) {
    for (int b = a + 1; b < g.dim; ++b) {
      std::vector<double> w(psi.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = dU[b][a][i] - dU[a][b][i];
      out.push_back(masked(g, std::move(w), mask));
    }
  }
  return out;
}

ResidualNorms residual_norms(const MaskedField& r) {
  return residual_norms(r, RealField::constant(r.value.grid(), 1.0));
}

ResidualNorms residual_norms(const MaskedField& r, const RealField& weight) {
  require_same_grid(r.value.grid(), weight.grid(), "residual weight");
  ResidualNorms n;
  double sq = 0.0, wsq = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < r.value.size(); ++i) {
    if (r.mask[i]) continue;
    const double v = r.value[i];
    n.max = std::max(n.max, std::abs(v));
    sq += v * v;
    wsq += weight[i] * v * v;
    wsum += weight[i];
  }
  n.l2 = std::sqrt(sq * r.value.grid().cell_volume());
  n.weighted_l2 = wsum > 0.0 ? std::sqrt(wsq / wsum) : 0.0;
  return n;
}

namespace io {

namespace {
std::vector<double> as_doubles(const Mask& m) { return {m.begin(), m.end()}; }
const char* axis_name(std::size_t a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }
}  // namespace

void write_csv(std::ostream& out, const PolarFields& pf) {
  const auto mask = as_doubles(pf.nodal_mask);
  const Column cols[] = {{"R", pf.R.values()}, {"S", pf.S.values()}, {"mask", mask}};
  write_columns(out, pf.R.grid(), cols);
}

void write_csv(std::ostream& out, const HydroFields& hf) {
  const auto mask = as_doubles(hf.mask);
  std::vector<Column> cols{{"rho", hf.rho.values()}};
  for (std::size_t a = 0; a < hf.p.size(); ++a) cols.push_back({std::string("p_") + axis_name(a), hf.p[a].values()});
  for (std::size_t a = 0; a < hf.v.size(); ++a) cols.push_back({std::string("v_") + axis_name(a), hf.v[a].values()});
  cols.push_back({"mask", mask});
  write_columns(out, hf.rho.grid(), cols);
}

}  // namespace io

}  // namespace qhydro
