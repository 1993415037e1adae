#include "qhydro/app/config.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "qhydro/error.hpp"

namespace qhydro::app {

using nlohmann::json;

namespace {

// Object reader that records which keys were consumed and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(at(key), "missing required key");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key)) {
      if (!def) fail(at(key), "missing required key");
      return *def;
    }
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    const double v = number(key, def);
    if (!(v > 0.0)) fail(at(key), "must be positive");
    return v;
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt, std::size_t min = 0) {
    std::size_t v;
    if (!has(key)) {
      if (!def) fail(at(key), "missing required key");
      v = *def;
    } else {
      const json& j = j_.at(key);
      if (!j.is_number_unsigned()) fail(at(key), "expected a non-negative integer");
      v = j.get<std::size_t>();
    }
    if (v < min) fail(at(key), "must be at least " + std::to_string(min));
    return v;
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) fail(at(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!has(key)) {
      if (!def) fail(at(key), "missing required key");
      return *def;
    }
    if (!j_.at(key).is_string()) fail(at(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(at(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // A point with exactly `dim` components, or the default when absent.
  Point point(const std::string& key, int dim, Point def = {0, 0, 0}) {
    if (!has(key)) return def;
    const auto v = numbers(key);
    if (static_cast<int>(v.size()) != dim) fail(at(key), "expected " + std::to_string(dim) + " components");
    Point p{0, 0, 0};
    for (int a = 0; a < dim; ++a) p[a] = v[a];
    return p;
  }

  Obj child(const std::string& key) { return Obj(raw(key), at(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

GridSpec read_grid(Obj o) {
  const auto path = o.at("n");
  const json& nj = o.raw("n");
  if (!nj.is_array() || nj.empty() || nj.size() > 3) Obj::fail(path, "expected 1 to 3 sample counts");
  GridSpec g;
  g.dim = static_cast<int>(nj.size());
  const auto lo = o.numbers("lo"), hi = o.numbers("hi");
  if (lo.size() != nj.size() || hi.size() != nj.size()) Obj::fail(o.at("lo"), "lo and hi must match n in length");
  for (int a = 0; a < g.dim; ++a) {
    if (!nj[a].is_number_unsigned() || nj[a].get<std::size_t>() < 2) Obj::fail(path, "counts must be integers >= 2");
    g.n[a] = nj[a].get<std::size_t>();
    if (!(hi[a] > lo[a])) Obj::fail(o.at("hi"), "hi must exceed lo on every axis");
    g.origin[a] = lo[a];
    g.length[a] = hi[a] - lo[a];
  }
  o.finish();
  g.validate();
  return g;
}

ChartGrid read_chart(Obj o) {
  const json& nj = o.raw("n");
  if (!nj.is_array() || nj.empty() || nj.size() > 4) Obj::fail(o.at("n"), "expected 1 to 4 sample counts");
  std::vector<std::size_t> n;
  for (const auto& e : nj) {
    if (!e.is_number_unsigned()) Obj::fail(o.at("n"), "counts must be non-negative integers");
    n.push_back(e.get<std::size_t>());
  }
  auto lo = o.numbers("lo"), hi = o.numbers("hi");
  o.finish();
  return ChartGrid::box(n, lo, hi);
}

UnitSystem read_units(Obj o) {
  const double hbar = o.positive("hbar", 1.0);
  const double c = o.positive("c", 1.0);
  const double mass = o.number("mass", 1.0);
  if (!(mass >= 0.0)) Obj::fail(o.at("mass"), "must be non-negative");
  o.finish();
  UnitSystem u{hbar, mass, c, UnitSystem::Mode::explicit_units};
  u.validate();
  return u;
}

WaveInit read_wave(Obj o, int dim) {
  WaveInit w;
  const auto type = o.text("type");
  w.weight = o.number("weight", 1.0);
  if (type == "gaussian") {
    w.kind = WaveInit::Kind::gaussian;
    w.center = o.point("center", dim);
    w.sigma = o.positive("sigma");
    w.k = o.point("k", dim);
  } else if (type == "plane_wave") {
    w.kind = WaveInit::Kind::plane_wave;
    w.k = o.point("k", dim);
  } else if (type == "eigenstate") {
    w.kind = WaveInit::Kind::eigenstate;
    w.level = static_cast<int>(o.count("level", 0));
    w.omega = o.positive("omega", 1.0);
  } else if (type == "sum") {
    w.kind = WaveInit::Kind::sum;
    const json& terms = o.raw("terms");
    if (!terms.is_array() || terms.empty()) Obj::fail(o.at("terms"), "expected a non-empty array");
    for (std::size_t i = 0; i < terms.size(); ++i)
      w.terms.push_back(read_wave(Obj(terms[i], o.at("terms") + "[" + std::to_string(i) + "]"), dim));
  } else {
    Obj::fail(o.at("type"), "unknown wave type '" + type + "' (gaussian, plane_wave, eigenstate, sum)");
  }
  o.finish();
  return w;
}

PotentialSpec read_potential(Obj o) {
  const auto kind = o.text("kind");
  PotentialSpec p;
  if (kind == "zero") {
    p = PotentialSpec::zero();
  } else if (kind == "harmonic") {
    p = PotentialSpec::harmonic(o.positive("omega"));
  } else if (kind == "square_well") {
    const double depth = o.number("depth");
    p = PotentialSpec::square_well(depth, o.positive("width"));
  } else {
    Obj::fail(o.at("kind"), "unknown potential '" + kind + "' (zero, harmonic, square_well)");
  }
  o.finish();
  return p;
}

PotentialSpec optional_potential(Obj& o) {
  return o.has("potential") ? read_potential(o.child("potential")) : PotentialSpec::zero();
}

std::optional<double> optional_eps(Obj& o) {
  if (!o.has("eps_node")) return std::nullopt;
  const double v = o.number("eps_node");
  if (!(v >= 0.0)) Obj::fail(o.at("eps_node"), "must be non-negative");
  return v;
}

RayState read_ray(Obj o, int dim) {
  RayState r;
  r.x = o.point("x", dim);
  r.p = o.point("p", dim);
  r.t = o.number("t", 0.0);
  o.finish();
  return r;
}

CommandParams read_params(const std::string& command, Obj o, int dim) {
  if (command == "evolve") {
    EvolveParams p;
    p.initial = read_wave(o.child("initial"), dim);
    p.potential = optional_potential(o);
    p.dt = o.positive("dt");
    p.steps = o.count("steps", std::nullopt, 1);
    p.every = o.count("every", p.steps, 1);
    o.finish();
    return p;
  }
  if (command == "evolve-kg") {
    KGParams p;
    p.initial = read_wave(o.child("initial"), dim);
    p.positive_frequency = o.flag("positive_frequency", true);
    p.enforce_stability = o.flag("enforce_stability", true);
    p.dt = o.positive("dt");
    p.steps = o.count("steps", std::nullopt, 1);
    p.every = o.count("every", p.steps, 1);
    o.finish();
    return p;
  }
  if (command == "evolve-nlkg") {
    NLKGParams p;
    p.amplitude = o.number("amplitude", 1e-3);
    p.k = o.point("k", dim);
    p.dt = o.positive("dt");
    p.steps = o.count("steps", std::nullopt, 1);
    p.every = o.count("every", p.steps, 1);
    o.finish();
    return p;
  }
  if (command == "decompose" || command == "potential") {
    DecomposeParams p;
    p.initial = read_wave(o.child("initial"), dim);
    p.eps_node = optional_eps(o);
    o.finish();
    return p;
  }
  if (command == "residuals") {
    ResidualParams p;
    p.initial = read_wave(o.child("initial"), dim);
    p.potential = optional_potential(o);
    p.dt = o.positive("dt");
    p.steps = o.count("steps", std::nullopt, 1);
    p.eps_node = optional_eps(o);
    o.finish();
    return p;
  }
  if (command == "geometry") {
    GeometryParams p;
    p.preset = o.text("preset");
    static const std::set<std::string> presets{"cartesian", "polar", "polar_orthonormal", "sphere"};
    if (!presets.count(p.preset))
      Obj::fail(o.at("preset"), "unknown preset (cartesian, polar, polar_orthonormal, sphere)");
    p.chart = read_chart(o.child("chart"));
    p.radius = o.positive("radius", 1.0);
    p.metricity_tol = o.positive("metricity_tol", 1e-10);
    o.finish();
    return p;
  }
  if (command == "trajectories") {
    TrajectoryParams p;
    p.initial = read_wave(o.child("initial"), dim);
    p.potential = optional_potential(o);
    p.dt = o.positive("dt");
    p.steps = o.count("steps", std::nullopt, 1);
    p.every = o.count("every", 10, 1);
    p.trajectory_dt = o.positive("trajectory_dt", 1e-2);
    if (o.has("seeds")) {
      const json& s = o.raw("seeds");
      if (!s.is_array()) Obj::fail(o.at("seeds"), "expected an array");
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto path = o.at("seeds") + "[" + std::to_string(i) + "]";
        Point x{0, 0, 0};
        if (s[i].is_number() && dim == 1) {
          x[0] = s[i].get<double>();
        } else if (s[i].is_array() && static_cast<int>(s[i].size()) == dim) {
          for (int a = 0; a < dim; ++a) {
            if (!s[i][a].is_number()) Obj::fail(path, "expected numbers");
            x[a] = s[i][a].get<double>();
          }
        } else {
          Obj::fail(path, "expected a point with " + std::to_string(dim) + " components");
        }
        p.seeds.push_back(x);
      }
    }
    if (o.has("ensemble")) {
      Obj e = o.child("ensemble");
      EnsembleParams ep;
      ep.n = e.count("n", 1000, 1);
      ep.bins = e.count("bins", 20, 1);
      if (e.has("lo")) ep.lo = e.number("lo");
      if (e.has("hi")) ep.hi = e.number("hi");
      e.finish();
      p.ensemble = ep;
    }
    if (p.seeds.empty() && !p.ensemble) Obj::fail(o.at("seeds"), "give seeds, an ensemble, or both");
    o.finish();
    return p;
  }
  if (command == "rays") {
    RayParams p;
    Obj h = o.child("hamiltonian");
    const auto kind = h.text("kind");
    if (kind == "free")
      p.kind = RayParams::Kind::free;
    else if (kind == "harmonic")
      p.kind = RayParams::Kind::harmonic;
    else if (kind == "relativistic")
      p.kind = RayParams::Kind::relativistic;
    else
      Obj::fail(h.at("kind"), "unknown Hamiltonian (free, harmonic, relativistic)");
    p.dim = static_cast<int>(h.count("dim", 1, 1));
    if (p.dim > 3) Obj::fail(h.at("dim"), "must be 1, 2 or 3");
    p.mass = h.number("mass", 1.0);
    p.omega = h.positive("omega", 1.0);
    p.c = h.positive("c", 1.0);
    h.finish();
    const json& init = o.raw("initial");
    if (!init.is_array() || init.empty()) Obj::fail(o.at("initial"), "expected a non-empty array of ray states");
    for (std::size_t i = 0; i < init.size(); ++i)
      p.initial.push_back(read_ray(Obj(init[i], o.at("initial") + "[" + std::to_string(i) + "]"), p.dim));
    p.cfg.dt = o.positive("dt");
    p.cfg.steps = o.count("steps", std::nullopt, 1);
    p.cfg.record_every = o.count("record_every", 1, 1);
    const auto method = o.text("method", "yoshida4");
    if (method == "leapfrog")
      p.cfg.method = RayMethod::leapfrog;
    else if (method == "yoshida4")
      p.cfg.method = RayMethod::yoshida4;
    else
      Obj::fail(o.at("method"), "unknown integrator (leapfrog, yoshida4)");
    o.finish();
    return p;
  }
  if (command == "bi") {
    BIRunParams p;
    auto vec3 = [&](const char* key) {
      std::array<double, 3> v{0, 0, 0};
      if (!o.has(key)) return v;
      const auto n = o.numbers(key);
      if (n.size() != 3) Obj::fail(o.at(key), "expected 3 components");
      std::copy(n.begin(), n.end(), v.begin());
      return v;
    };
    p.E = vec3("E");
    p.B = vec3("B");
    p.b = o.positive("b");
    p.q = o.number("q", 1.0);
    p.self_energy = o.flag("self_energy", true);
    p.tol = o.positive("tol", 1e-10);
    if (o.has("radial")) {
      Obj r = o.child("radial");
      p.r_max = r.positive("r_max");
      p.radial_points = r.count("points", 101, 2);
      r.finish();
    }
    o.finish();
    return p;
  }
  if (command == "check") {
    CheckParams p;
    if (o.has("only")) {
      const json& only = o.raw("only");
      if (!only.is_array()) Obj::fail(o.at("only"), "expected an array of check names");
      for (const auto& e : only) {
        if (!e.is_string()) Obj::fail(o.at("only"), "expected an array of check names");
        p.only.push_back(e.get<std::string>());
      }
    }
    o.finish();
    return p;
  }
  Obj::fail("command", "unknown command '" + command + "'");
}

bool needs_grid(const std::string& command) {
  return command != "geometry" && command != "rays" && command != "bi" && command != "check";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"evolve",    "evolve-kg", "evolve-nlkg", "decompose",
                                              "potential", "residuals", "geometry",    "trajectories",
                                              "rays",      "bi",        "check"};
  return names;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Obj top(j, "");
  RunConfig cfg;
  cfg.command = top.text("command");
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cfg.command) == names.end()) Obj::fail("command", "unknown command '" + cfg.command + "'");

  int dim = 1;
  if (needs_grid(cfg.command)) {
    cfg.grid = read_grid(top.child("grid"));
    dim = cfg.grid->dim;
  } else if (top.has("grid")) {
    Obj::fail("grid", "not used by command '" + cfg.command + "'");
  }
  if (top.has("units")) cfg.units = read_units(top.child("units"));
  if (top.has("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_unsigned()) Obj::fail("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (top.has("params"))
    cfg.params = read_params(cfg.command, top.child("params"), dim);
  else
    cfg.params = read_params(cfg.command, Obj(json::object(), "params"), dim);
  if (top.has("output")) {
    Obj o = top.child("output");
    cfg.output.dir = o.text("dir", cfg.output.dir);
    cfg.output.csv = o.flag("csv", true);
    cfg.output.svg = o.flag("svg", true);
    o.finish();
  }
  top.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qhydro::app
