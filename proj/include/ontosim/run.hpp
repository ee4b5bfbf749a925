#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontosim/bohmian.hpp"
#include "ontosim/grw.hpp"
#include "ontosim/ontology.hpp"
#include "ontosim/scenarios.hpp"

namespace ontosim {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kManifestSchema = "ontosim-run-manifest/1";

/// Runs a validated scenario in its mode and writes everything under out_dir:
///
///   manifest.json       config echo, seed, version, outputs with SHA-256, summary
///   initial_state.bin   psi0 dump
///   final_state.bin     psi at t_final (t_final > 0)
///   observables.csv     t, norm, energy, mass per region
///   density.dat         gnuplot blocks "x m(x)" per snapshot
///   trajectories.csv    bohm: t, traj, q1..qN
///   histogram.dat       bohm: bin center, empirical and |psi_T|^2 densities
///   events.csv          grwm/grwf: t, k, x, p(x)
///   flashes.csv         grwf: t, x
///
/// With t_final = 0 only the manifest and the initial dump are produced.
/// On engine failure the manifest is still written with status "failed" and
/// the error is rethrown. Returns the manifest.
nlohmann::json run_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

/// Rebuilds the scenario echoed in a manifest.
ScenarioSpec scenario_from_manifest(const nlohmann::json& manifest);

std::string sha256_file(const std::filesystem::path& path);

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories);
void write_events_csv(std::ostream& out, const std::vector<CollapseEvent>& events);
void write_flashes_csv(std::ostream& out, const std::vector<FlashEvent>& flashes);
void write_matter_density_csv(std::ostream& out, const MatterDensityField& m);

}  // namespace ontosim
