#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontosim/grid.hpp"
#include "ontosim/grw.hpp"

namespace ontosim {

enum class Mode { schrodinger, bohm, grwm, grwf };

std::string to_string(Mode m);
/// Throws ConfigError("scenario.mode") for unknown names.
Mode parse_mode(const std::string& s);

/// Raw config: section -> key -> value text, as read from the file.
using ConfigTable = std::map<std::string, std::map<std::string, std::string>>;

/// Validated experiment description.
///
/// Config file layout (INI style; '#' or ';' start comments):
///
///   [scenario]  name, mode (schrodinger|bohm|grwm|grwf), seed
///   [grid]      n_particles, extent_min, extent_max, points_per_axis, max_points
///   [masses]    values (space-separated, one per particle; default all 1)
///   [state]     family (gaussian|double_slit|einstein_box|entangled_pair) + params
///   [potential] family (free|harmonic|double-well|barrier-with-slits) + params;
///               used by the gaussian and entangled_pair families
///   [dynamics]  dt, t_final, steps_per_output, n_traj
///   [grw]       lambda, sigma, forced_time, forced_particle
///   [analysis]  region_cut, histogram_bins
struct ScenarioSpec {
  ConfigTable table;

  std::string name;
  Mode mode = Mode::schrodinger;
  std::uint64_t seed = 0;

  int n_particles = 1;
  double extent_min = -10.0;
  double extent_max = 10.0;
  std::size_t points_per_axis = 256;
  std::size_t max_points = GridSpec::kDefaultMaxPoints;
  std::vector<double> masses;

  std::string state_family;
  std::string potential_family = "free";

  double dt = 1e-3;
  double t_final = 0.0;
  int steps_per_output = 1;
  std::size_t n_traj = 1000;

  GrwParams grw;
  std::vector<ForcedCollapse> forced;

  double region_cut = 0.0;
  int histogram_bins = 32;

  GridSpec grid() const;
  /// Numeric parameter from the table, or fallback when absent.
  double param(const std::string& section, const std::string& key, double fallback) const;
  /// Required numeric parameter; throws ConfigError naming section.key.
  double require(const std::string& section, const std::string& key) const;
  bool has(const std::string& section, const std::string& key) const;

  /// Sets table[section][key] and re-validates.
  void set(const std::string& section, const std::string& key, const std::string& value);
};

/// Parses and validates. Errors are ConfigError with the offending field.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::filesystem::path& path);
ScenarioSpec scenario_from_table(ConfigTable table);
nlohmann::json table_to_json(const ConfigTable& table);
ConfigTable table_from_json(const nlohmann::json& j);

struct BuiltScenario {
  WaveFunction psi0;
  PotentialField potential;
  Masses masses;
};

/// Post-slit transverse state: two coherent packets at +-separation/2 with
/// the slit width as packet width, V = 0 downstream. The forward motion is
/// the (unmodeled) longitudinal axis: the screen is reached at
/// t = screen_distance * m / k0.
BuiltScenario build_double_slit(const ScenarioSpec& spec);
/// (phi_left + phi_right)/sqrt(2), each the ground state of its half of a
/// double harmonic well, optionally displaced toward the center by `offset`.
BuiltScenario build_einstein_box(const ScenarioSpec& spec);
/// Exchange-symmetric f(x1)g(x2) + g(x1)f(x2), normalized; f at -a moving
/// right, g at +a moving left.
BuiltScenario build_entangled_pair(const ScenarioSpec& spec);
/// Dispatches on state.family.
BuiltScenario build_scenario(const ScenarioSpec& spec);

/// Screen time of the double-slit mapping.
double double_slit_screen_time(const ScenarioSpec& spec);

/// Fringe contrast of a 1D density: over interior local minima inside the
/// region where the density exceeds 1% of its peak, the largest
/// (neighbouring max - min) / (neighbouring max + min). 0 for unimodal input.
double fringe_contrast(const std::vector<double>& density);

/// Mean spacing of the local maxima above 5% of the peak.
double fringe_spacing(const std::vector<double>& density, const GridSpec& grid);

}  // namespace ontosim
