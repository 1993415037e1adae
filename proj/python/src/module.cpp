#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "qhydro/app/commands.hpp"
#include "qhydro/app/config.hpp"
#include "qhydro/borninfeld.hpp"
#include "qhydro/error.hpp"
#include "qhydro/geometry.hpp"
#include "qhydro/kleingordon.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/trajectories.hpp"

namespace py = pybind11;
using namespace qhydro;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> shape_of(const GridSpec& g) {
  std::vector<py::ssize_t> s;
  for (int a = 0; a < g.dim; ++a) s.push_back(static_cast<py::ssize_t>(g.n[a]));
  return s;
}

template <typename T>
Field<T> to_field(const GridSpec& g, const Array<T>& a) {
  if (static_cast<std::size_t>(a.size()) != g.size())
    throw ConfigError("array has " + std::to_string(a.size()) + " samples, grid expects " + std::to_string(g.size()));
  return Field<T>(g, std::vector<T>(a.data(), a.data() + a.size()));
}

template <typename T>
Array<T> to_array(const Field<T>& f) {
  Array<T> out(shape_of(f.grid()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Array<bool> mask_array(const GridSpec& g, const Mask& m) {
  Array<bool> out(shape_of(g));
  std::copy(m.begin(), m.end(), out.mutable_data());
  return out;
}

Point point(const std::vector<double>& v) {
  if (v.size() > 3) throw ConfigError("points have at most 3 components");
  Point p{0, 0, 0};
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

std::vector<double> components(const Point& p, int dim) { return {p.begin(), p.begin() + dim}; }

template <typename T>
Array<T> stack(const std::vector<Field<T>>& frames, const GridSpec& g) {
  auto shape = shape_of(g);
  shape.insert(shape.begin(), static_cast<py::ssize_t>(frames.size()));
  Array<T> out(shape);
  T* dst = out.mutable_data();
  for (const auto& f : frames) dst = std::copy(f.values().begin(), f.values().end(), dst);
  return out;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_qhydro, m) {
  m.doc() = "Quantum hydrodynamics numerics";

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  auto numeric_error = py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  (void)config_error;
  py::register_exception<DomainError>(m, "DomainError", numeric_error.ptr());

  py::class_<GridSpec>(m, "Grid")
      .def_static("line", &GridSpec::line, py::arg("n"), py::arg("lo"), py::arg("hi"))
      .def_static("cube", &GridSpec::cube, py::arg("dim"), py::arg("n"), py::arg("lo"), py::arg("hi"))
      .def_readonly("dim", &GridSpec::dim)
      .def_property_readonly("shape", [](const GridSpec& g) { return py::tuple(py::cast(shape_of(g))); })
      .def_property_readonly("size", &GridSpec::size)
      .def("dx", &GridSpec::dx, py::arg("axis") = 0)
      .def("coords", [](const GridSpec& g, int axis) {
        if (axis < 0 || axis >= g.dim) throw ConfigError("axis out of range");
        Array<double> out(static_cast<py::ssize_t>(g.n[axis]));
        for (std::size_t i = 0; i < g.n[axis]; ++i) out.mutable_data()[i] = g.coord(axis, i);
        return out;
      }, py::arg("axis") = 0)
      .def("__repr__", [](const GridSpec& g) {
        std::ostringstream os;
        os << "Grid(dim=" << g.dim << ", n=[" << g.n[0] << ", " << g.n[1] << ", " << g.n[2] << "])";
        return os.str();
      });

  py::class_<UnitSystem>(m, "Units")
      .def(py::init([](double hbar, double mass, double c) { return UnitSystem::with(hbar, mass, c); }),
           py::arg("hbar") = 1.0, py::arg("mass") = 1.0, py::arg("c") = 1.0)
      .def_readonly("hbar", &UnitSystem::hbar)
      .def_readonly("mass", &UnitSystem::mass)
      .def_readonly("c", &UnitSystem::c);

  py::class_<PotentialSpec>(m, "Potential")
      .def_static("zero", &PotentialSpec::zero)
      .def_static("harmonic", &PotentialSpec::harmonic, py::arg("omega"))
      .def_static("square_well", &PotentialSpec::square_well, py::arg("depth"), py::arg("width"))
      .def_static("tabulated", [](const GridSpec& g, const Array<double>& v) {
        return PotentialSpec::tabulated(to_field(g, v));
      }, py::arg("grid"), py::arg("values"))
      .def("sample", [](const PotentialSpec& p, const GridSpec& g, const UnitSystem& u) { return to_array(p.sample(g, u)); },
           py::arg("grid"), py::arg("units") = UnitSystem{});

  // Schrodinger dynamics.
  m.def("gaussian_packet", [](const GridSpec& g, const std::vector<double>& center, double sigma, const std::vector<double>& k) {
    return to_array(gaussian_packet(g, point(center), sigma, point(k)));
  }, py::arg("grid"), py::arg("center"), py::arg("sigma"), py::arg("k") = std::vector<double>{});
  m.def("oscillator_eigenstate", [](const GridSpec& g, int level, double omega, const UnitSystem& u) {
    return to_array(oscillator_eigenstate(g, level, omega, u));
  }, py::arg("grid"), py::arg("level"), py::arg("omega"), py::arg("units") = UnitSystem{});
  m.def("evolve", [](const GridSpec& g, const Array<cplx>& psi, const PotentialSpec& pot, double dt, std::size_t steps,
                     const UnitSystem& u) {
    const auto f = to_field(g, psi);
    std::optional<ComplexField> out;
    {
      py::gil_scoped_release release;
      out = evolve(f, pot, {dt, steps, u});
    }
    return to_array(*out);
  }, py::arg("grid"), py::arg("psi"), py::arg("potential"), py::arg("dt"), py::arg("steps"), py::arg("units") = UnitSystem{});
  m.def("evolve_series", [](const GridSpec& g, const Array<cplx>& psi, const PotentialSpec& pot, double dt,
                            std::size_t steps, std::size_t every, const UnitSystem& u) {
    const auto s = evolve_series(to_field(g, psi), pot, {dt, steps, u}, every);
    return py::make_tuple(py::cast(s.times), stack(s.frames, g));
  }, py::arg("grid"), py::arg("psi"), py::arg("potential"), py::arg("dt"), py::arg("steps"), py::arg("every"),
     py::arg("units") = UnitSystem{});
  m.def("ground_state", [](const GridSpec& g, const PotentialSpec& pot, const UnitSystem& u) {
    const auto gs = ground_state(pot, g, u);
    return py::make_tuple(to_array(gs.psi), gs.energy);
  }, py::arg("grid"), py::arg("potential"), py::arg("units") = UnitSystem{});
  m.def("norm_squared", [](const GridSpec& g, const Array<cplx>& psi) { return norm_squared(to_field(g, psi)); },
        py::arg("grid"), py::arg("psi"));
  m.def("energy", [](const GridSpec& g, const Array<cplx>& psi, const PotentialSpec& pot, const UnitSystem& u) {
    return energy(to_field(g, psi), pot, u);
  }, py::arg("grid"), py::arg("psi"), py::arg("potential"), py::arg("units") = UnitSystem{});

  // Madelung form.
  m.def("decompose", [](const GridSpec& g, const Array<cplx>& psi, const UnitSystem& u, std::optional<double> eps) {
    const auto pf = decompose(to_field(g, psi), u, NodeOptions{eps});
    py::dict d;
    d["R"] = to_array(pf.R);
    d["S"] = to_array(pf.S);
    d["mask"] = mask_array(g, pf.nodal_mask);
    d["regions"] = pf.regions;
    py::list vortices;
    for (const auto& v : pf.vortices)
      vortices.append(py::dict(py::arg("corner") = v.corner, py::arg("plane") = py::make_tuple(v.plane_a, v.plane_b),
                               py::arg("winding") = v.winding));
    d["vortices"] = vortices;
    return d;
  }, py::arg("grid"), py::arg("psi"), py::arg("units") = UnitSystem{}, py::arg("eps_node") = py::none());
  m.def("recompose", [](const GridSpec& g, const Array<double>& R, const Array<double>& S, const UnitSystem& u) {
    PolarFields pf{to_field(g, R), to_field(g, S), Mask(g.size(), 0), u.hbar, 1, {}};
    return to_array(recompose(pf));
  }, py::arg("grid"), py::arg("R"), py::arg("S"), py::arg("units") = UnitSystem{});
  m.def("quantum_potential", [](const GridSpec& g, const Array<double>& rho, const UnitSystem& u, std::optional<double> eps) {
    const auto U = quantum_potential(to_field(g, rho), u, NodeOptions{eps});
    return py::make_tuple(to_array(U.value), mask_array(g, U.mask));
  }, py::arg("grid"), py::arg("rho"), py::arg("units") = UnitSystem{}, py::arg("eps_node") = py::none());
  m.def("schrodinger_residuals", [](const GridSpec& g, const Array<cplx>& prev, const Array<cplx>& cur,
                                    const Array<cplx>& next, double dt, const Array<double>& V, const UnitSystem& u) {
    const auto r = schrodinger_residuals(to_field(g, prev), to_field(g, cur), to_field(g, next), dt, to_field(g, V), u);
    return py::make_tuple(to_array(r.first.value), to_array(r.second.value), mask_array(g, r.first.mask));
  }, py::arg("grid"), py::arg("prev"), py::arg("cur"), py::arg("next"), py::arg("dt"), py::arg("potential"),
     py::arg("units") = UnitSystem{});

  // Klein-Gordon.
  m.def("kg_dispersion", &kg_dispersion, py::arg("k"), py::arg("units") = UnitSystem{});
  m.def("evolve_kg", [](const GridSpec& g, const Array<cplx>& phi, std::optional<Array<cplx>> phi_dot, double dt,
                        std::size_t steps, const UnitSystem& u) {
    const auto f = to_field(g, phi);
    const KGState s0 = phi_dot ? KGState{f, to_field(g, *phi_dot)} : positive_frequency_state(f, u);
    const auto s = evolve_kg(s0, {dt, steps, u});
    return py::make_tuple(to_array(s.phi), to_array(s.phi_dot));
  }, py::arg("grid"), py::arg("phi"), py::arg("phi_dot") = py::none(), py::arg("dt"), py::arg("steps"),
     py::arg("units") = UnitSystem{});
  m.def("evolve_nlkg", [](const GridSpec& g, const Array<double>& R, const Array<double>& R_dot, double dt,
                          std::size_t steps, const UnitSystem& u) {
    const auto s = evolve_nlkg({to_field(g, R), to_field(g, R_dot)}, {dt, steps, u});
    return py::make_tuple(to_array(s.R), to_array(s.R_dot));
  }, py::arg("grid"), py::arg("R"), py::arg("R_dot"), py::arg("dt"), py::arg("steps"), py::arg("units") = UnitSystem{});
  m.def("nlkg_energy", [](const GridSpec& g, const Array<double>& R, const Array<double>& R_dot, const UnitSystem& u) {
    return nlkg_energy({to_field(g, R), to_field(g, R_dot)}, u);
  }, py::arg("grid"), py::arg("R"), py::arg("R_dot"), py::arg("units") = UnitSystem{});

  // Trajectories.
  m.def("bohm_trajectories", [](const GridSpec& g, const std::vector<double>& times, const Array<cplx>& frames,
                                const std::vector<std::vector<double>>& seeds, double dt, const UnitSystem& u) {
    if (static_cast<std::size_t>(frames.size()) != times.size() * g.size())
      throw ConfigError("frames must have shape (len(times), *grid.shape)");
    WaveSeries series;
    series.times = times;
    for (std::size_t k = 0; k < times.size(); ++k)
      series.frames.emplace_back(g, std::vector<cplx>(frames.data() + k * g.size(), frames.data() + (k + 1) * g.size()));
    std::vector<Point> pts;
    for (const auto& s : seeds) pts.push_back(point(s));
    BohmOptions opts;
    opts.dt = dt;
    py::list out;
    for (const auto& tr : bohm_trajectories(series, pts, u, opts)) {
      std::vector<std::vector<double>> pos;
      for (const auto& p : tr.positions) pos.push_back(components(p, tr.dim));
      out.append(py::dict(py::arg("t") = tr.times, py::arg("x") = pos, py::arg("hit_node") = tr.hit_node));
    }
    return out;
  }, py::arg("grid"), py::arg("times"), py::arg("frames"), py::arg("seeds"), py::arg("dt") = 1e-2,
     py::arg("units") = UnitSystem{});
  m.def("sample_density", [](const GridSpec& g, const Array<cplx>& psi, std::size_t n, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    for (const auto& p : sample_density(to_field(g, psi), n, seed)) out.push_back(components(p, g.dim));
    return out;
  }, py::arg("grid"), py::arg("psi"), py::arg("n"), py::arg("seed"));
  m.def("hamilton_rays", [](const std::string& kind, const std::vector<std::vector<double>>& x0,
                            const std::vector<std::vector<double>>& p0, double dt, std::size_t steps, double mass,
                            double omega, double c, const std::string& method) {
    if (x0.empty() || x0.size() != p0.size()) throw ConfigError("x0 and p0 must be non-empty and of equal length");
    const int dim = static_cast<int>(x0.front().size());
    Hamiltonian H;
    if (kind == "free")
      H = Hamiltonian::free(mass, dim);
    else if (kind == "harmonic")
      H = Hamiltonian::harmonic(mass, omega, dim);
    else if (kind == "relativistic")
      H = Hamiltonian::relativistic(mass, c, dim);
    else
      throw ConfigError("unknown Hamiltonian '" + kind + "'");
    std::vector<RayState> init;
    for (std::size_t i = 0; i < x0.size(); ++i) init.push_back({point(x0[i]), point(p0[i]), 0.0});
    RayConfig cfg;
    cfg.dt = dt;
    cfg.steps = steps;
    if (method == "leapfrog")
      cfg.method = RayMethod::leapfrog;
    else if (method != "yoshida4")
      throw ConfigError("unknown integrator '" + method + "'");
    py::list out;
    for (const auto& tr : hamilton_rays(H, init, cfg)) {
      std::vector<std::vector<double>> xs, ps;
      for (std::size_t j = 0; j < tr.times.size(); ++j) {
        xs.push_back(components(tr.positions[j], dim));
        ps.push_back(components(tr.momenta[j], dim));
      }
      out.append(py::dict(py::arg("t") = tr.times, py::arg("x") = xs, py::arg("p") = ps, py::arg("action") = tr.action,
                          py::arg("energy") = tr.energy));
    }
    return out;
  }, py::arg("kind"), py::arg("x0"), py::arg("p0"), py::arg("dt"), py::arg("steps"), py::arg("mass") = 1.0,
     py::arg("omega") = 1.0, py::arg("c") = 1.0, py::arg("method") = "yoshida4");

  // Born-Infeld.
  auto to_vec3 = [](const std::vector<double>& v) {
    if (v.size() != 3) throw ConfigError("field vectors need 3 components");
    return bi::Vec3{v[0], v[1], v[2]};
  };
  m.def("bi_invariants", [=](const std::vector<double>& E, const std::vector<double>& B) {
    const auto inv = bi::invariants({to_vec3(E), to_vec3(B)});
    return py::make_tuple(inv.S, inv.P);
  }, py::arg("E"), py::arg("B"));
  m.def("bi_lagrangian", [=](const std::vector<double>& E, const std::vector<double>& B, double b) {
    return bi::lagrangian(bi::EMSample{to_vec3(E), to_vec3(B)}, bi::BIParams{b, 1.0});
  }, py::arg("E"), py::arg("B"), py::arg("b"));
  m.def("bi_point_charge_field", [](double r, double b, double q) { return bi::point_charge_field(r, {b, q}); },
        py::arg("r"), py::arg("b"), py::arg("q"));
  m.def("bi_self_energy", [](double b, double q, double tol) {
    const auto e = bi::self_energy({b, q}, tol);
    return py::make_tuple(e.value, e.error);
  }, py::arg("b"), py::arg("q"), py::arg("rel_tol") = 1e-10);

  // Geometry.
  m.def("ricci_scalar_preset", [](const std::string& name, const std::vector<std::size_t>& n,
                                  const std::vector<double>& lo, const std::vector<double>& hi, double radius) {
    const auto chart = ChartGrid::box(n, lo, hi);
    const auto conn = preset_connection(name, chart, radius);
    const auto R = ricci_scalar(conn, cartan_structure(conn));
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < chart.dim; ++a) shape.push_back(static_cast<py::ssize_t>(chart.n[a]));
    Array<double> out(shape);
    std::copy(R.begin(), R.end(), out.mutable_data());
    return out;
  }, py::arg("preset"), py::arg("n"), py::arg("lo"), py::arg("hi"), py::arg("radius") = 1.0);

  // Whole runs, as the command-line tool performs them.
  m.def("run_config", [](const std::string& json_text, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    const auto cfg = app::parse_config(json_text);
    std::ostringstream log;
    const auto r = app::run(cfg, {out_dir, seed, true}, log);
    py::dict d;
    d["report"] = to_python(r.report);
    d["manifest"] = to_python(r.manifest);
    d["ok"] = r.ok;
    return d;
  }, py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none());
  m.def("command_names", &app::command_names);
}
