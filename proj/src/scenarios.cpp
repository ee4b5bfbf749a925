#include "ontosim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ontosim/errors.hpp"
#include "ontosim/schrodinger.hpp"

namespace ontosim {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::schrodinger: return "schrodinger";
    case Mode::bohm: return "bohm";
    case Mode::grwm: return "grwm";
    case Mode::grwf: return "grwf";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "schrodinger") return Mode::schrodinger;
  if (s == "bohm") return Mode::bohm;
  if (s == "grwm") return Mode::grwm;
  if (s == "grwf") return Mode::grwf;
  throw ConfigError("scenario.mode", "unknown mode '" + s + "' (expected schrodinger|bohm|grwm|grwf)");
}

namespace {

double to_double(const std::string& field, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end == text.c_str() || *end != '\0' || !std::isfinite(v))
    throw ConfigError(field, "not a finite number: '" + text + "'");
  return v;
}

long long to_integer(const std::string& field, const std::string& text) {
  const double v = to_double(field, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError(field, "not an integer: '" + text + "'");
  return static_cast<long long>(v);
}

const std::string* lookup(const ConfigTable& t, const std::string& section, const std::string& key) {
  auto s = t.find(section);
  if (s == t.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

std::string text_or(const ConfigTable& t, const std::string& section, const std::string& key,
                    const std::string& fallback) {
  const auto* v = lookup(t, section, key);
  return v ? *v : fallback;
}

// Keys each section accepts; anything else is a typo worth reporting.
const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"scenario", {"name", "mode", "seed", "description"}},
      {"grid", {"n_particles", "extent_min", "extent_max", "points_per_axis", "max_points"}},
      {"masses", {"values"}},
      {"state",
       {"family", "x0", "k0", "width", "separation", "slit_width", "screen_distance",
        "relative_phase", "right_amplitude", "half_separation", "well_width", "offset"}},
      {"potential", {"family", "omega", "center", "half_separation", "separation", "slit_width",
                     "height", "shift"}},
      {"dynamics", {"dt", "t_final", "steps_per_output", "n_traj"}},
      {"grw", {"lambda", "sigma", "forced_time", "forced_particle"}},
      {"analysis", {"region_cut", "histogram_bins"}},
  };
  return keys;
}

void check_margin(const ScenarioSpec& spec, double lo, double hi, const std::string& what) {
  if (lo < spec.extent_min || hi > spec.extent_max)
    throw ConfigError("grid.extent_min",
                      what + " needs [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] inside the extent (5-width boundary margin)");
}

// Overlap mass sum min(|a|^2, |b|^2) dx of two 1D packets.
double overlap_mass(const std::vector<Complex>& a, const std::vector<Complex>& b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::min(std::norm(a[i]), std::norm(b[i]));
  return s * dx;
}

}  // namespace

double ScenarioSpec::param(const std::string& section, const std::string& key,
                           double fallback) const {
  const auto* v = lookup(table, section, key);
  return v ? to_double(section + "." + key, *v) : fallback;
}

double ScenarioSpec::require(const std::string& section, const std::string& key) const {
  const auto* v = lookup(table, section, key);
  if (!v) throw ConfigError(section + "." + key, "required parameter missing");
  return to_double(section + "." + key, *v);
}

bool ScenarioSpec::has(const std::string& section, const std::string& key) const {
  return lookup(table, section, key) != nullptr;
}

GridSpec ScenarioSpec::grid() const {
  return GridSpec(n_particles, extent_min, extent_max, points_per_axis, max_points);
}

void ScenarioSpec::set(const std::string& section, const std::string& key,
                       const std::string& value) {
  ConfigTable t = table;
  t[section][key] = value;
  *this = scenario_from_table(std::move(t));
}

ScenarioSpec scenario_from_table(ConfigTable table) {
  for (const auto& [section, entries] : table) {
    auto known = known_keys().find(section);
    if (known == known_keys().end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : entries)
      if (std::find(known->second.begin(), known->second.end(), key) == known->second.end())
        throw ConfigError(section + "." + key, "unknown key");
  }

  ScenarioSpec s;
  s.table = std::move(table);
  const auto& t = s.table;

  const auto* name = lookup(t, "scenario", "name");
  if (!name || name->empty()) throw ConfigError("scenario.name", "required");
  s.name = *name;
  const auto* mode = lookup(t, "scenario", "mode");
  if (!mode) throw ConfigError("scenario.mode", "required");
  s.mode = parse_mode(*mode);
  if (const auto* seed = lookup(t, "scenario", "seed")) {
    const long long v = to_integer("scenario.seed", *seed);
    if (v < 0) throw ConfigError("scenario.seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(v);
  }

  s.n_particles = static_cast<int>(to_integer("grid.n_particles", text_or(t, "grid", "n_particles", "1")));
  s.extent_min = s.param("grid", "extent_min", s.extent_min);
  s.extent_max = s.param("grid", "extent_max", s.extent_max);
  const long long points = to_integer("grid.points_per_axis", text_or(t, "grid", "points_per_axis", "256"));
  if (points < 8) throw ConfigError("grid.points_per_axis", "must be a power of two >= 8");
  s.points_per_axis = static_cast<std::size_t>(points);
  if (s.has("grid", "max_points")) {
    const long long cap = to_integer("grid.max_points", *lookup(t, "grid", "max_points"));
    if (cap < 8) throw ConfigError("grid.max_points", "must be >= 8");
    s.max_points = static_cast<std::size_t>(cap);
  }
  if (s.n_particles < 1) throw ConfigError("grid.n_particles", "must be >= 1");
  try {
    (void)s.grid();
  } catch (const MemoryCap& e) {
    throw ConfigError("grid.points_per_axis", e.what());
  } catch (const InvalidGrid& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.find("extent") != std::string::npos ? "grid.extent_max" : "grid.points_per_axis",
                      msg);
  }

  if (const auto* values = lookup(t, "masses", "values")) {
    std::istringstream in(*values);
    std::string tok;
    while (in >> tok) s.masses.push_back(to_double("masses.values", tok));
    if (s.masses.size() != static_cast<std::size_t>(s.n_particles))
      throw ConfigError("masses.values", "need one mass per particle");
    for (double m : s.masses)
      if (!(m > 0.0)) throw ConfigError("masses.values", "masses must be positive");
  } else {
    s.masses.assign(static_cast<std::size_t>(s.n_particles), 1.0);
  }

  const auto* family = lookup(t, "state", "family");
  if (!family) throw ConfigError("state.family", "required");
  s.state_family = *family;
  static const std::vector<std::string> families = {"gaussian", "double_slit", "einstein_box",
                                                    "entangled_pair"};
  if (std::find(families.begin(), families.end(), s.state_family) == families.end())
    throw ConfigError("state.family", "unknown family '" + s.state_family + "'");
  s.potential_family = text_or(t, "potential", "family", "free");
  static const std::vector<std::string> potentials = {"free", "harmonic", "double-well",
                                                      "barrier-with-slits"};
  if (std::find(potentials.begin(), potentials.end(), s.potential_family) == potentials.end())
    throw ConfigError("potential.family", "unknown family '" + s.potential_family + "'");

  s.dt = s.param("dynamics", "dt", 1e-3);
  if (!(s.dt > 0.0)) throw ConfigError("dynamics.dt", "must be positive");
  s.t_final = s.state_family == "double_slit" && !s.has("dynamics", "t_final")
                  ? double_slit_screen_time(s)
                  : s.param("dynamics", "t_final", 0.0);
  if (!(s.t_final >= 0.0)) throw ConfigError("dynamics.t_final", "must be >= 0");
  s.steps_per_output =
      static_cast<int>(to_integer("dynamics.steps_per_output", text_or(t, "dynamics", "steps_per_output", "1")));
  if (s.steps_per_output < 1) throw ConfigError("dynamics.steps_per_output", "must be >= 1");
  const long long n_traj = to_integer("dynamics.n_traj", text_or(t, "dynamics", "n_traj", "1000"));
  if (n_traj < 1) throw ConfigError("dynamics.n_traj", "must be >= 1");
  s.n_traj = static_cast<std::size_t>(n_traj);

  s.grw.lambda_rate = s.param("grw", "lambda", si::kDefaultLambda);
  if (!(s.grw.lambda_rate > 0.0)) throw ConfigError("grw.lambda", "must be positive");
  s.grw.sigma = s.param("grw", "sigma", 1.0);
  if (!(s.grw.sigma > 0.0)) throw ConfigError("grw.sigma", "must be positive");
  s.grw.seed = s.seed;
  if (s.has("grw", "forced_time")) {
    const double ft = s.require("grw", "forced_time");
    if (ft < 0.0) throw ConfigError("grw.forced_time", "must be >= 0");
    const int fp = static_cast<int>(to_integer("grw.forced_particle", text_or(t, "grw", "forced_particle", "0")));
    if (fp < 0 || fp >= s.n_particles) throw ConfigError("grw.forced_particle", "out of range");
    s.forced.push_back({ft, fp});
  }
  if (s.mode == Mode::grwm || s.mode == Mode::grwf) {
    const double limit = 1.0 / (50.0 * s.n_particles * s.grw.lambda_rate);
    if (s.dt > limit)
      throw ConfigError("dynamics.dt", "must be <= 1/(50 N lambda) = " + std::to_string(limit));
  }

  s.region_cut = s.param("analysis", "region_cut", 0.0);
  if (!(s.region_cut > s.extent_min && s.region_cut < s.extent_max))
    throw ConfigError("analysis.region_cut", "must lie inside the extent");
  s.histogram_bins =
      static_cast<int>(to_integer("analysis.histogram_bins", text_or(t, "analysis", "histogram_bins", "32")));
  if (s.histogram_bins < 2) throw ConfigError("analysis.histogram_bins", "must be >= 2");
  return s;
}

ScenarioSpec parse_scenario(std::istream& in) {
  // Boost's INI reader only knows ';' comments; drop '#' lines first.
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned << line << '\n';
  }
  std::istringstream src(cleaned.str());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(src, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed config: ") + e.message() + " (line " +
                                    std::to_string(e.line()) + ")");
  }
  ConfigTable table;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw ConfigError(section, "key outside of a [section]");
    for (const auto& [key, value] : entries) table[section][key] = value.data();
  }
  return scenario_from_table(std::move(table));
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  return parse_scenario(in);
}

nlohmann::json table_to_json(const ConfigTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, entries] : table)
    for (const auto& [key, value] : entries) j[section][key] = value;
  return j;
}

ConfigTable table_from_json(const nlohmann::json& j) {
  ConfigTable t;
  for (const auto& [section, entries] : j.items())
    for (const auto& [key, value] : entries.items()) t[section][key] = value.get<std::string>();
  return t;
}

double double_slit_screen_time(const ScenarioSpec& spec) {
  const double k0 = spec.require("state", "k0");
  if (!(k0 > 0.0)) throw ConfigError("state.k0", "forward momentum must be positive");
  const double distance = spec.require("state", "screen_distance");
  if (!(distance > 0.0)) throw ConfigError("state.screen_distance", "must be positive");
  const double m = spec.masses.empty() ? 1.0 : spec.masses[0];
  return distance * m / k0;
}

BuiltScenario build_double_slit(const ScenarioSpec& spec) {
  if (spec.n_particles != 1) throw ConfigError("grid.n_particles", "double_slit is single-particle");
  const GridSpec grid = spec.grid();
  const double d = spec.require("state", "separation");
  const double w = spec.require("state", "slit_width");
  if (!(d > 0.0)) throw ConfigError("state.separation", "must be positive");
  if (!(w > 0.0)) throw ConfigError("state.slit_width", "must be positive");
  (void)double_slit_screen_time(spec);
  const double phase = spec.param("state", "relative_phase", 0.0);
  const double right = spec.param("state", "right_amplitude", 1.0);
  if (right < 0.0) throw ConfigError("state.right_amplitude", "must be >= 0");
  const double m = spec.masses[0];

  const double spread = free_gaussian_width(w, m, spec.t_final);
  check_margin(spec, -0.5 * d - 5.0 * spread, 0.5 * d + 5.0 * spread, "double-slit packets");

  const auto left = gaussian_packet(grid, -0.5 * d, 0.0, w);
  const auto rightp = gaussian_packet(grid, 0.5 * d, 0.0, w);
  if (overlap_mass(left, rightp, grid.spacing()) > 0.1)
    throw InvalidGeometry("double-slit packets overlap by more than 10% of their mass");
  WaveFunction psi(grid);
  const Complex rel = std::polar(right, phase);
  for (std::size_t i = 0; i < grid.size(); ++i) psi.amplitudes[i] = left[i] + rel * rightp[i];
  return {normalize(psi), PotentialField::free(grid), Masses(spec.masses)};
}

BuiltScenario build_einstein_box(const ScenarioSpec& spec) {
  if (spec.n_particles != 1) throw ConfigError("grid.n_particles", "einstein_box is single-particle");
  const GridSpec grid = spec.grid();
  const double a = spec.require("state", "half_separation");
  const double w = spec.require("state", "well_width");
  const double offset = spec.param("state", "offset", 0.0);
  if (!(a > 0.0)) throw ConfigError("state.half_separation", "must be positive");
  if (!(w > 0.0)) throw ConfigError("state.well_width", "must be positive");
  if (std::abs(offset) >= a) throw ConfigError("state.offset", "must be smaller than half_separation");
  if ((spec.mode == Mode::grwm || spec.mode == Mode::grwf) && !(spec.grw.sigma <= 0.5 * a))
    throw ConfigError("grw.sigma", "collapse runs need sigma << half_separation (sigma <= a/2)");
  check_margin(spec, -a - std::abs(offset) - 5.0 * w, a + std::abs(offset) + 5.0 * w, "box halves");

  const Masses masses(spec.masses);
  // Ground state of each well has density width w.
  const double omega = 1.0 / (2.0 * masses[0] * w * w);
  const auto left = gaussian_packet(grid, -a + offset, 0.0, w);
  const auto right = gaussian_packet(grid, a - offset, 0.0, w);
  if (overlap_mass(left, right, grid.spacing()) > 1e-10)
    throw InvalidGeometry("box halves overlap");
  WaveFunction psi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) psi.amplitudes[i] = left[i] + right[i];
  return {normalize(psi), PotentialField::double_well(grid, masses, omega, a), masses};
}

namespace {

PotentialField potential_from_spec(const ScenarioSpec& spec, const GridSpec& grid,
                                   const Masses& masses) {
  PotentialField v = PotentialField::free(grid);
  try {
    if (spec.potential_family == "harmonic") {
      v = PotentialField::harmonic(grid, masses, spec.require("potential", "omega"),
                                   spec.param("potential", "center", 0.0));
    } else if (spec.potential_family == "double-well") {
      v = PotentialField::double_well(grid, masses, spec.require("potential", "omega"),
                                      spec.require("potential", "half_separation"));
    } else if (spec.potential_family == "barrier-with-slits") {
      v = PotentialField::barrier_with_slits(grid, spec.require("potential", "separation"),
                                             spec.require("potential", "slit_width"),
                                             spec.require("potential", "height"));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("potential." + spec.potential_family, e.what());
  }
  if (spec.has("potential", "shift")) v = v.shifted(spec.require("potential", "shift"));
  return v;
}

}  // namespace

BuiltScenario build_entangled_pair(const ScenarioSpec& spec) {
  if (spec.n_particles != 2) throw ConfigError("grid.n_particles", "entangled_pair needs N = 2");
  const GridSpec grid = spec.grid();
  const double a = spec.require("state", "half_separation");
  const double s = spec.require("state", "width");
  const double k0 = spec.param("state", "k0", 0.0);
  if (!(a > 0.0)) throw ConfigError("state.half_separation", "must be positive");
  if (!(s > 0.0)) throw ConfigError("state.width", "must be positive");
  check_margin(spec, -a - 5.0 * s, a + 5.0 * s, "entangled packets");

  const auto f = gaussian_packet(grid, -a, k0, s);
  const auto g = gaussian_packet(grid, a, -k0, s);
  WaveFunction psi(grid);
  const std::size_t m = grid.points_per_axis();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      psi.amplitudes[i * m + j] = f[i] * g[j] + g[i] * f[j];
  const Masses masses(spec.masses);
  return {normalize(psi), potential_from_spec(spec, grid, masses), masses};
}

BuiltScenario build_scenario(const ScenarioSpec& spec) {
  if (spec.state_family == "double_slit") return build_double_slit(spec);
  if (spec.state_family == "einstein_box") return build_einstein_box(spec);
  if (spec.state_family == "entangled_pair") return build_entangled_pair(spec);

  const GridSpec grid = spec.grid();
  const double x0 = spec.param("state", "x0", 0.0);
  const double k0 = spec.param("state", "k0", 0.0);
  const double w = spec.require("state", "width");
  if (!(w > 0.0)) throw ConfigError("state.width", "must be positive");
  check_margin(spec, x0 - 5.0 * w, x0 + 5.0 * w, "gaussian packet");
  std::vector<std::vector<Complex>> factors(static_cast<std::size_t>(spec.n_particles),
                                            gaussian_packet(grid, x0, k0, w));
  const Masses masses(spec.masses);
  return {normalize(product_state(grid, factors)), potential_from_spec(spec, grid, masses), masses};
}

double fringe_contrast(const std::vector<double>& density) {
  if (density.size() < 3) return 0.0;
  const double peak = *std::max_element(density.begin(), density.end());
  const double floor = 0.01 * peak;
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < density.size(); ++i) {
    if (!(density[i] <= density[i - 1] && density[i] < density[i + 1])) continue;
    // Highest point reachable on each side before the density drops below floor.
    double left = 0.0, right = 0.0;
    std::size_t j = i;
    while (j > 0 && density[j - 1] >= density[j]) left = density[--j];
    j = i;
    while (j + 1 < density.size() && density[j + 1] >= density[j]) right = density[++j];
    if (left < floor || right < floor) continue;
    const double top = std::min(left, right);
    best = std::max(best, (top - density[i]) / (top + density[i]));
  }
  return best;
}

double fringe_spacing(const std::vector<double>& density, const GridSpec& grid) {
  const double peak = *std::max_element(density.begin(), density.end());
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < density.size(); ++i) {
    if (density[i] > density[i - 1] && density[i] >= density[i + 1] && density[i] > 0.05 * peak) {
      // Parabolic refinement of the peak location.
      const double a = density[i - 1], b = density[i], c = density[i + 1];
      const double denom = a - 2.0 * b + c;
      const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
      maxima.push_back(grid.coordinate(i) + shift * grid.spacing());
    }
  }
  if (maxima.size() < 2) return 0.0;
  return (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
}

}  // namespace ontosim
