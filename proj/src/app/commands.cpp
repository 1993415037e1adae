#include "qhydro/app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "qhydro/app/checks.hpp"
#include "qhydro/app/manifest.hpp"
#include "qhydro/app/svg.hpp"
#include "qhydro/borninfeld.hpp"
#include "qhydro/error.hpp"
#include "qhydro/field_io.hpp"
#include "qhydro/geometry.hpp"
#include "qhydro/kleingordon.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/trajectories.hpp"

namespace qhydro::app {

using nlohmann::json;

namespace {

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu%s", stem, i, ext);
  return buf;
}

template <typename F>
std::string to_text(F&& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

RealField modulus_squared(const ComplexField& psi) {
  std::vector<double> v(psi.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::norm(psi[i]);
  return {psi.grid(), std::move(v)};
}

RealField modulus(const ComplexField& psi) {
  std::vector<double> v(psi.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(psi[i]);
  return {psi.grid(), std::move(v)};
}

json norms_json(const ResidualNorms& n) { return {{"max", n.max}, {"l2", n.l2}, {"weighted_l2", n.weighted_l2}}; }

json point_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

// Density snapshots as a line plot (1D) or the last snapshot as a heat map (2D).
void density_plot(const OutputDir& out, const std::vector<double>& times, const std::vector<RealField>& dens,
                  const std::string& title, const std::string& label, json& report) {
  const GridSpec& g = dens.front().grid();
  if (g.dim == 3) {
    report["svg_skipped"] = "3D fields are not plotted; write a slice instead";
    return;
  }
  svg::Style style{640, 420, title, "x", label};
  if (g.dim == 2) {
    style.y_label = "y";
    out.write("plot.svg", svg::plot_field(dens.back(), style));
    return;
  }
  std::vector<svg::Series> series;
  const std::size_t stride = std::max<std::size_t>(1, (dens.size() + 5) / 6);
  for (std::size_t k = 0; k < dens.size(); k += stride) {
    char name[32];
    std::snprintf(name, sizeof(name), "t = %.3g", times[k]);
    svg::Series s{name, {}, {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.x.push_back(g.coord(0, i));
      s.y.push_back(dens[k][i]);
    }
    series.push_back(std::move(s));
  }
  out.write("plot.svg", svg::line_plot(series, style));
}

json run_evolve(const RunConfig& cfg, const EvolveParams& p, const OutputDir& out) {
  const auto psi0 = build_wave(p.initial, *cfg.grid, cfg.units);
  const auto series = evolve_series(psi0, p.potential, {p.dt, p.steps, cfg.units}, p.every);
  json report{{"times", series.times}, {"norm", json::array()}, {"energy", json::array()}};
  std::vector<RealField> dens;
  for (std::size_t k = 0; k < series.frames.size(); ++k) {
    const auto& f = series.frames[k];
    report["norm"].push_back(norm_squared(f));
    report["energy"].push_back(energy(f, p.potential, cfg.units));
    dens.push_back(modulus_squared(f));
    if (cfg.output.csv) out.write("frames/" + indexed("psi", k, ".csv"), to_text([&](auto& os) { io::write_csv(os, f); }));
  }
  const double n0 = report["norm"].front().get<double>();
  report["norm_drift"] = std::abs(report["norm"].back().get<double>() / n0 - 1.0);
  if (cfg.output.svg) density_plot(out, series.times, dens, "probability density", "|psi|^2", report);
  return report;
}

json run_evolve_kg(const RunConfig& cfg, const KGParams& p, const OutputDir& out) {
  const auto phi = build_wave(p.initial, *cfg.grid, cfg.units);
  const KGState s0 = p.positive_frequency ? positive_frequency_state(phi, cfg.units)
                                          : KGState{phi, ComplexField::constant(phi.grid(), 0.0)};
  KGConfig kc{p.dt, p.steps, cfg.units};
  kc.enforce_stability = p.enforce_stability;
  const auto series = evolve_kg_series(s0, kc, p.every);
  json report{{"times", series.times}, {"energy", json::array()}};
  std::vector<RealField> amp;
  for (std::size_t k = 0; k < series.frames.size(); ++k) {
    report["energy"].push_back(kg_energy(series.frames[k], cfg.units));
    amp.push_back(modulus(series.frames[k].phi));
    if (cfg.output.csv)
      out.write("frames/" + indexed("phi", k, ".csv"), to_text([&](auto& os) { io::write_csv(os, series.frames[k].phi); }));
  }
  const double e0 = report["energy"].front().get<double>();
  report["energy_drift"] = e0 != 0.0 ? std::abs(report["energy"].back().get<double>() / e0 - 1.0) : 0.0;
  if (cfg.output.svg) density_plot(out, series.times, amp, "Klein-Gordon amplitude", "|phi|", report);
  return report;
}

json run_evolve_nlkg(const RunConfig& cfg, const NLKGParams& p, const OutputDir& out) {
  const GridSpec& g = *cfg.grid;
  const auto R0 = RealField::from_function(
      g, [&](const Point& x) { return 1.0 + p.amplitude * std::cos(p.k[0] * x[0] + p.k[1] * x[1] + p.k[2] * x[2]); });
  const NLKGState s0{R0, RealField::constant(g, 0.0)};
  const auto series = evolve_nlkg_series(s0, {p.dt, p.steps, cfg.units}, p.every);
  json report{{"times", series.times}, {"energy", json::array()}};
  std::vector<RealField> Rs;
  for (std::size_t k = 0; k < series.frames.size(); ++k) {
    report["energy"].push_back(nlkg_energy(series.frames[k], cfg.units));
    Rs.push_back(series.frames[k].R);
    if (cfg.output.csv)
      out.write("frames/" + indexed("R", k, ".csv"), to_text([&](auto& os) { io::write_csv(os, series.frames[k].R, "R"); }));
  }
  const double e0 = report["energy"].front().get<double>();
  report["energy_drift"] = std::abs(report["energy"].back().get<double>() - e0) / std::max(std::abs(e0), 1e-300);
  if (cfg.output.svg) density_plot(out, series.times, Rs, "nonlinear Klein-Gordon amplitude", "R", report);
  return report;
}

json run_decompose(const RunConfig& cfg, const DecomposeParams& p, const OutputDir& out) {
  const auto psi = build_wave(p.initial, *cfg.grid, cfg.units);
  const NodeOptions nodes{p.eps_node};
  const auto pf = decompose(psi, cfg.units, nodes);
  json report{{"regions", pf.regions}, {"vortices", json::array()}};
  std::size_t masked = 0;
  for (auto m : pf.nodal_mask) masked += m;
  report["masked_points"] = masked;
  for (const auto& v : pf.vortices)
    report["vortices"].push_back({{"corner", v.corner}, {"plane", {v.plane_a, v.plane_b}}, {"winding", v.winding}});
  if (cfg.output.csv) {
    out.write("polar.csv", to_text([&](auto& os) { io::write_csv(os, pf); }));
    if (cfg.units.mass > 0.0) {
      const auto hf = hydro_fields(psi, cfg.units, nodes);
      out.write("hydro.csv", to_text([&](auto& os) { io::write_csv(os, hf); }));
    }
  }
  if (cfg.output.svg) density_plot(out, {0.0}, {pf.R}, "amplitude R", "R", report);
  return report;
}

json run_potential(const RunConfig& cfg, const DecomposeParams& p, const OutputDir& out) {
  const auto psi = build_wave(p.initial, *cfg.grid, cfg.units);
  const auto U = quantum_potential(modulus_squared(psi), cfg.units, NodeOptions{p.eps_node});
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < U.value.size(); ++i)
    if (!U.mask[i]) lo = std::min(lo, U.value[i]), hi = std::max(hi, U.value[i]);
  json report{{"masked_points", U.masked_count()}, {"min", lo}, {"max", hi}};
  if (cfg.output.csv) {
    std::vector<double> mask(U.mask.begin(), U.mask.end());
    const std::vector<io::Column> cols{{"U_h", U.value.values()}, {"mask", mask}};
    out.write("quantum_potential.csv", to_text([&](auto& os) { io::write_columns(os, U.value.grid(), cols); }));
  }
  if (cfg.output.svg) density_plot(out, {0.0}, {U.value}, "quantum potential", "U_h", report);
  return report;
}

json run_residuals(const RunConfig& cfg, const ResidualParams& p, const OutputDir& out) {
  const auto psi0 = build_wave(p.initial, *cfg.grid, cfg.units);
  const auto start = p.steps > 1 ? evolve(psi0, p.potential, {p.dt, p.steps - 1, cfg.units}) : psi0;
  const auto s = evolve_series(start, p.potential, {p.dt, 2, cfg.units}, 1);
  const auto V = p.potential.sample(*cfg.grid, cfg.units);
  const auto r = schrodinger_residuals(s.frames[0], s.frames[1], s.frames[2], p.dt, V, cfg.units, {p.eps_node});
  const auto rho = modulus_squared(s.frames[1]);
  json report{{"time", s.times[1]},
              {"hj", norms_json(residual_norms(r.first, rho))},
              {"continuity", norms_json(residual_norms(r.second, rho))}};
  if (cfg.output.csv) {
    std::vector<double> mask(r.first.mask.begin(), r.first.mask.end());
    const std::vector<io::Column> cols{{"hj", r.first.value.values()}, {"continuity", r.second.value.values()}, {"mask", mask}};
    out.write("residuals.csv", to_text([&](auto& os) { io::write_columns(os, *cfg.grid, cols); }));
  }
  if (cfg.output.svg) density_plot(out, {s.times[1]}, {r.first.value}, "Hamilton-Jacobi residual", "residual", report);
  return report;
}

json run_geometry(const RunConfig& cfg, const GeometryParams& p, const OutputDir& out) {
  const auto conn = preset_connection(p.preset, p.chart, p.radius);
  const auto cartan = cartan_structure(conn);
  const auto R = ricci_scalar(conn, cartan);
  auto max_abs = [](const std::vector<ChartField>& comps) {
    double m = 0.0;
    for (const auto& c : comps)
      for (double v : c) m = std::max(m, std::abs(v));
    return m;
  };
  const auto q = metricity(conn, p.metricity_tol);
  const auto split = split_connection(conn);
  std::array<std::size_t, 4> mid{};
  for (int a = 0; a < 4; ++a) mid[a] = p.chart.n[a] / 2;
  json report{{"preset", p.preset},
              {"max_torsion", max_abs(cartan.torsion)},
              {"max_curvature", max_abs(cartan.curvature)},
              {"ricci_scalar_centre", R[p.chart.ravel(mid)]},
              {"metricity_max", q.max_abs},
              {"metric_compatible", q.reducible},
              {"max_tau", max_abs(split.tau)}};
  if (cfg.output.csv) {
    std::ostringstream os;
    const char* names[4] = {"u0", "u1", "u2", "u3"};
    for (int a = 0; a < p.chart.dim; ++a) os << names[a] << ',';
    os << "ricci_scalar\n";
    for (std::size_t i = 0; i < R.size(); ++i) {
      const auto x = p.chart.point(i);
      for (int a = 0; a < p.chart.dim; ++a) os << io::format_double(x[a]) << ',';
      os << io::format_double(R[i]) << '\n';
    }
    out.write("ricci_scalar.csv", os.str());
  }
  if (cfg.output.svg && p.chart.dim <= 2) {
    // Plot on a periodic grid with the same sample positions.
    GridSpec g;
    g.dim = p.chart.dim;
    for (int a = 0; a < g.dim; ++a) {
      g.n[a] = p.chart.n[a];
      g.origin[a] = p.chart.lo[a];
      g.length[a] = p.chart.spacing(a) * static_cast<double>(p.chart.n[a]);
    }
    svg::Style style{640, 420, "Ricci scalar (" + p.preset + ")", "u0", g.dim == 2 ? "u1" : "R"};
    out.write("plot.svg", svg::plot_field(RealField(g, R), style));
  }
  return report;
}

json run_trajectories(const RunConfig& cfg, const TrajectoryParams& p, std::uint64_t seed, const OutputDir& out) {
  const auto psi0 = build_wave(p.initial, *cfg.grid, cfg.units);
  const auto series = evolve_series(psi0, p.potential, {p.dt, p.steps, cfg.units}, p.every);
  BohmOptions bo;
  bo.dt = p.trajectory_dt;
  json report{{"T", series.times.back()}, {"trajectories", json::array()}};
  std::vector<Trajectory> paths;
  if (!p.seeds.empty()) paths = bohm_trajectories(series, p.seeds, cfg.units, bo);
  for (const auto& tr : paths) {
    report["trajectories"].push_back({{"label", tr.label},
                                      {"start", point_json(tr.positions.front(), tr.dim)},
                                      {"end", point_json(tr.positions.back(), tr.dim)},
                                      {"hit_node", tr.hit_node}});
    if (cfg.output.csv)
      out.write("trajectories/" + indexed("traj", tr.label, ".csv"), to_text([&](auto& os) { io::write_csv(os, tr); }));
  }
  if (p.ensemble) {
    EquivarianceOptions eo;
    eo.bins = p.ensemble->bins;
    eo.lo = p.ensemble->lo;
    eo.hi = p.ensemble->hi;
    eo.bohm = bo;
    const auto ensemble = sample_density(series.frames.front(), p.ensemble->n, seed);
    const auto rep = equivariance_check(series, ensemble, cfg.units, eo);
    report["ensemble"] = {{"N", rep.n},       {"T", rep.T},   {"l1", rep.l1},
                          {"lost", rep.lost}, {"lo", rep.lo}, {"hi", rep.hi},
                          {"seed", seed},     {"bins", {{"empirical", rep.empirical}, {"expected", rep.expected}}}};
  }
  if (cfg.output.svg) {
    if (cfg.grid->dim == 1) {
      std::vector<RealField> amp;
      for (const auto& f : series.frames) amp.push_back(modulus(f));
      svg::Style style{640, 420, "Bohmian trajectories over |psi|", "x", "t"};
      out.write("trajectories.svg", svg::trajectory_overlay(series.times, amp, paths, style));
    } else {
      report["svg_skipped"] = "space-time overlay is drawn for 1D runs only";
    }
  }
  return report;
}

json run_rays(const RunConfig& cfg, const RayParams& p, const OutputDir& out) {
  Hamiltonian H;
  switch (p.kind) {
    case RayParams::Kind::free: H = Hamiltonian::free(p.mass, p.dim); break;
    case RayParams::Kind::harmonic: H = Hamiltonian::harmonic(p.mass, p.omega, p.dim); break;
    case RayParams::Kind::relativistic: H = Hamiltonian::relativistic(p.mass, p.c, p.dim); break;
  }
  const auto rays = hamilton_rays(H, p.initial, p.cfg);
  json report{{"rays", json::array()}};
  std::vector<svg::Series> portrait;
  for (const auto& tr : rays) {
    double drift = 0.0;
    for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()));
    report["rays"].push_back({{"label", tr.label},
                              {"end_x", point_json(tr.positions.back(), tr.dim)},
                              {"end_p", point_json(tr.momenta.back(), tr.dim)},
                              {"energy", tr.energy.front()},
                              {"max_energy_deviation", drift},
                              {"action", tr.action.back()}});
    if (cfg.output.csv)
      out.write("rays/" + indexed("ray", tr.label, ".csv"), to_text([&](auto& os) { io::write_csv(os, tr); }));
    svg::Series s{"ray " + std::to_string(tr.label), {}, {}};
    const std::size_t stride = std::max<std::size_t>(1, tr.times.size() / 2000);
    for (std::size_t j = 0; j < tr.times.size(); j += stride) {
      s.x.push_back(tr.positions[j][0]);
      s.y.push_back(tr.momenta[j][0]);
    }
    portrait.push_back(std::move(s));
  }
  (void)cfg;
  if (cfg.output.svg) out.write("phase_portrait.svg", svg::line_plot(portrait, {640, 420, "phase portrait", "x", "p_x"}));
  return report;
}

json run_check(const CheckParams& p, const OutputDir&, bool& ok) {
  json list = json::array();
  ok = true;
  for (const auto& r : run_checks(p.only)) {
    ok = ok && r.passed;
    json e{{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"tolerance", r.tolerance}};
    if (!r.detail.empty()) e["detail"] = r.detail;
    list.push_back(e);
  }
  return {{"checks", list}, {"all_passed", ok}};
}

}  // namespace

ComplexField build_wave(const WaveInit& w, const GridSpec& grid, const UnitSystem& units) {
  auto scaled = [&](const ComplexField& f) {
    if (w.weight == 1.0) return f;
    std::vector<cplx> v(f.values().begin(), f.values().end());
    for (auto& z : v) z *= w.weight;
    return ComplexField(grid, std::move(v));
  };
  switch (w.kind) {
    case WaveInit::Kind::gaussian: return scaled(gaussian_packet(grid, w.center, w.sigma, w.k));
    case WaveInit::Kind::plane_wave: return scaled(plane_wave(grid, w.k));
    case WaveInit::Kind::eigenstate: return scaled(oscillator_eigenstate(grid, w.level, w.omega, units));
    case WaveInit::Kind::sum: {
      std::vector<cplx> acc(grid.size(), 0.0);
      for (const auto& t : w.terms) {
        const auto f = build_wave(t, grid, units);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += f[i];
      }
      return scaled(ComplexField(grid, std::move(acc)));
    }
  }
  throw ConfigError("unknown wave kind");
}

json bi_report(const BIRunParams& p) {
  const bi::BIParams bp{p.b, p.q};
  bp.validate();
  const bi::EMSample s{p.E, p.B};
  const auto inv = bi::invariants(s);
  json report{{"S", inv.S}, {"P", inv.P}, {"b", p.b}, {"q", p.q}};
  report["lagrangian"] = bi::lagrangian(inv, bp);
  report["maxwell_lagrangian"] = inv.S;
  report["core_radius"] = bi::core_radius(bp);
  report["field_at_origin"] = bi::point_charge_field(0.0, bp);
  if (p.self_energy) {
    const auto e = bi::self_energy(bp, p.tol);
    report["self_energy"] = {{"value", e.value}, {"error", e.error}, {"closed_form", bi::self_energy_exact(bp)}};
  }
  return report;
}

RunResult run(const RunConfig& cfg, const RunOptions& opts, std::ostream& log) {
  const std::filesystem::path dir = opts.out_dir.value_or(cfg.output.dir);
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const OutputDir out(dir);
  RunResult result;
  json report;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, EvolveParams>) {
          report = run_evolve(cfg, p, out);
        } else if constexpr (std::is_same_v<P, KGParams>) {
          report = run_evolve_kg(cfg, p, out);
        } else if constexpr (std::is_same_v<P, NLKGParams>) {
          report = run_evolve_nlkg(cfg, p, out);
        } else if constexpr (std::is_same_v<P, DecomposeParams>) {
          report = cfg.command == "potential" ? run_potential(cfg, p, out) : run_decompose(cfg, p, out);
        } else if constexpr (std::is_same_v<P, ResidualParams>) {
          report = run_residuals(cfg, p, out);
        } else if constexpr (std::is_same_v<P, GeometryParams>) {
          report = run_geometry(cfg, p, out);
        } else if constexpr (std::is_same_v<P, TrajectoryParams>) {
          report = run_trajectories(cfg, p, seed, out);
        } else if constexpr (std::is_same_v<P, RayParams>) {
          report = run_rays(cfg, p, out);
        } else if constexpr (std::is_same_v<P, BIRunParams>) {
          report = bi_report(p);
          if (p.radial_points > 0 && cfg.output.csv) {
            std::vector<double> r(p.radial_points);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = p.r_max * static_cast<double>(i) / static_cast<double>(r.size() - 1);
            out.write("radial.csv", to_text([&](auto& os) { bi::io::write_radial_csv(os, {p.b, p.q}, r); }));
          }
        } else {
          report = run_check(p, out, result.ok);
        }
      },
      cfg.params);
  report["command"] = cfg.command;
  out.write_json("report.json", report);
  result.report = report;
  result.manifest = write_manifest(dir, {{"command", cfg.command}, {"seed", seed}});
  if (!opts.quiet) log << cfg.command << ": wrote " << result.manifest["files"].size() << " files to " << dir.string() << "\n";
  return result;
}

}  // namespace qhydro::app
