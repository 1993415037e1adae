#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qhydro/geometry.hpp"
#include "qhydro/grid.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/trajectories.hpp"

namespace qhydro::app {

/// Initial wavefunction. "sum" superposes `terms` with real weights; the
/// others map onto gaussian_packet, plane_wave and oscillator_eigenstate.
struct WaveInit {
  enum class Kind { gaussian, plane_wave, eigenstate, sum };
  Kind kind = Kind::gaussian;
  Point center{0, 0, 0};
  double sigma = 1.0;
  Point k{0, 0, 0};
  int level = 0;
  double omega = 1.0;
  double weight = 1.0;
  std::vector<WaveInit> terms;
};

struct EvolveParams {
  WaveInit initial;
  PotentialSpec potential;
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t every = 100;
};

struct KGParams {
  WaveInit initial;
  bool positive_frequency = true;
  bool enforce_stability = true;
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t every = 100;
};

// R₀ = 1 + amplitude cos(k·x), Ṙ₀ = 0.
struct NLKGParams {
  double amplitude = 1e-3;
  Point k{0, 0, 0};
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t every = 100;
};

struct DecomposeParams {
  WaveInit initial;
  std::optional<double> eps_node;
};

struct ResidualParams {
  WaveInit initial;
  PotentialSpec potential;
  double dt = 1e-3;
  std::size_t steps = 100;
  std::optional<double> eps_node;
};

struct GeometryParams {
  std::string preset = "polar";
  ChartGrid chart;
  double radius = 1.0;
  double metricity_tol = 1e-10;
};

struct EnsembleParams {
  std::size_t n = 1000;
  std::size_t bins = 20;
  std::optional<double> lo;
  std::optional<double> hi;
};

struct TrajectoryParams {
  WaveInit initial;
  PotentialSpec potential;
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t every = 10;
  double trajectory_dt = 1e-2;
  std::vector<Point> seeds;
  std::optional<EnsembleParams> ensemble;
};

struct RayParams {
  enum class Kind { free, harmonic, relativistic };
  Kind kind = Kind::harmonic;
  int dim = 1;
  double mass = 1.0;
  double omega = 1.0;
  double c = 1.0;
  std::vector<RayState> initial;
  RayConfig cfg;
};

struct BIRunParams {
  std::array<double, 3> E{0, 0, 0};
  std::array<double, 3> B{0, 0, 0};
  double b = 1.0;
  double q = 1.0;
  double r_max = 0.0;
  std::size_t radial_points = 0;
  bool self_energy = true;
  double tol = 1e-10;
};

struct CheckParams {
  // Empty means every check.
  std::vector<std::string> only;
};

using CommandParams = std::variant<EvolveParams, KGParams, NLKGParams, DecomposeParams, ResidualParams,
                                   GeometryParams, TrajectoryParams, RayParams, BIRunParams, CheckParams>;

struct OutputSpec {
  std::string dir = "out";
  bool csv = true;
  bool svg = true;
};

/// Fully validated run description. Construction from JSON checks every
/// key against the schema of the selected command and rejects unknown keys,
/// so no computation starts on a malformed file.
struct RunConfig {
  std::string command;
  std::optional<GridSpec> grid;
  UnitSystem units;
  std::uint64_t seed = 0;
  CommandParams params;
  OutputSpec output;
};

// Parses and validates. Throws ConfigError naming the offending JSON path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

const std::vector<std::string>& command_names();

}  // namespace qhydro::app
