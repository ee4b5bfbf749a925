#include "ontosim/run.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ontosim/errors.hpp"
#include "ontosim/field_io.hpp"
#include "ontosim/schrodinger.hpp"

namespace ontosim {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  out << std::setprecision(17) << "t,traj";
  const int n = trajectories.empty() ? 1 : trajectories.front().n_particles;
  for (int k = 0; k < n; ++k) out << ",q" << (k + 1);
  out << '\n';
  for (const auto& tr : trajectories) {
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
      out << tr.times[s] << ',' << tr.index;
      for (double q : tr.at(s)) out << ',' << q;
      out << '\n';
    }
  }
}

void write_events_csv(std::ostream& out, const std::vector<CollapseEvent>& events) {
  out << std::setprecision(17) << "t,k,x,p\n";
  for (const auto& e : events)
    out << e.time << ',' << (e.particle + 1) << ',' << e.center << ',' << e.weight << '\n';
}

void write_flashes_csv(std::ostream& out, const std::vector<FlashEvent>& flashes) {
  out << std::setprecision(17) << "t,x\n";
  for (const auto& f : flashes) out << f.time << ',' << f.position << '\n';
}

void write_matter_density_csv(std::ostream& out, const MatterDensityField& m) {
  out << std::setprecision(17) << "t,x,m\n";
  for (std::size_t i = 0; i < m.values.size(); ++i)
    out << m.time << ',' << m.coordinate(i) << ',' << m.values[i] << '\n';
}

namespace {

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  template <class Writer>
  void text(const std::string& name, Writer&& writer) {
    std::ofstream out(dir_ / name);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    writer(out);
    out.close();
    files_.push_back(name);
  }

  void dump(const std::string& name, const WaveFunction& psi) {
    write_dump(dir_ / name, psi);
    files_.push_back(name);
  }

  nlohmann::json listing() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& f : files_) j.push_back({{"file", f}, {"sha256", sha256_file(dir_ / f)}});
    return j;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct Series {
  std::vector<double> times, norms, energies;
  std::vector<std::vector<double>> region_mass;
};

Series observe(const std::vector<WaveFunction>& snapshots, const BuiltScenario& built,
               const RegionPartition& partition, const std::vector<double>* energies = nullptr) {
  Series s;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& psi = snapshots[i];
    s.times.push_back(psi.time);
    s.norms.push_back(norm_squared(psi));
    s.energies.push_back(energies ? (*energies)[i]
                                  : expectation_energy(psi, built.potential, built.masses));
    s.region_mass.push_back(region_masses(matter_density(psi, built.masses), partition));
  }
  return s;
}

void write_observables(OutputSet& out, const Series& s, const RegionPartition& partition) {
  out.text("observables.csv", [&](std::ostream& os) {
    os << std::setprecision(17) << "t,norm,energy";
    for (const auto& r : partition.regions()) os << ",mass_" << r.name;
    os << '\n';
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      os << s.times[i] << ',' << s.norms[i] << ',' << s.energies[i];
      for (double m : s.region_mass[i]) os << ',' << m;
      os << '\n';
    }
  });
}

void write_density_blocks(OutputSet& out, const std::vector<WaveFunction>& snapshots,
                          const Masses& masses) {
  out.text("density.dat", [&](std::ostream& os) {
    os << std::setprecision(17);
    for (const auto& psi : snapshots) {
      const auto m = matter_density(psi, masses);
      os << "# t = " << psi.time << '\n';
      for (std::size_t i = 0; i < m.values.size(); ++i)
        os << m.coordinate(i) << ' ' << m.values[i] << '\n';
      os << "\n\n";
    }
  });
}

nlohmann::json series_json(const Series& s) {
  double drift = 0.0, norm_dev = 0.0, max_jump = 0.0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    drift = std::max(drift, std::abs(s.energies[i] - s.energies[0]) / std::abs(s.energies[0]));
    norm_dev = std::max(norm_dev, std::abs(std::sqrt(s.norms[i]) - 1.0));
    if (i > 0)
      for (std::size_t r = 0; r < s.region_mass[i].size(); ++r)
        max_jump = std::max(max_jump, std::abs(s.region_mass[i][r] - s.region_mass[i - 1][r]));
  }
  return {{"times", s.times},
          {"energies", s.energies},
          {"region_masses", s.region_mass},
          {"max_norm_deviation", norm_dev},
          {"max_relative_energy_drift", drift},
          {"max_region_mass_jump", max_jump}};
}

nlohmann::json run_bohm(const ScenarioSpec& spec, const BuiltScenario& built,
                        const RegionPartition& partition, OutputSet& out) {
  const PropagatorConfig cfg{spec.dt, spec.steps_per_output};
  const auto ens = run_ensemble(built.psi0, built.potential, built.masses, spec.t_final,
                                spec.n_traj, spec.seed, cfg);
  out.text("trajectories.csv", [&](std::ostream& os) { write_trajectories_csv(os, ens.trajectories); });

  nlohmann::json gof = nlohmann::json::array();
  for (std::size_t s = 0; s < ens.snapshots.size(); ++s) {
    try {
      auto cmp = equivariance_test(ens, s, 0, spec.histogram_bins);
      auto j = cmp.report.to_json();
      j["time"] = ens.snapshots[s].time;
      gof.push_back(j);
    } catch (const InsufficientExpected& e) {
      gof.push_back({{"time", ens.snapshots[s].time}, {"error", e.what()}});
    }
  }

  const auto final_cmp = equivariance_test(ens, ens.snapshots.size() - 1, 0, spec.histogram_bins);
  out.text("histogram.dat", [&](std::ostream& os) {
    os << std::setprecision(17) << "# x_center empirical_density expected_density\n";
    const double n = static_cast<double>(ens.trajectories.size());
    for (std::size_t b = 0; b < final_cmp.counts.size(); ++b) {
      const double lo = final_cmp.edges[b], hi = final_cmp.edges[b + 1];
      os << 0.5 * (lo + hi) << ' ' << static_cast<double>(final_cmp.counts[b]) / (n * (hi - lo))
         << ' ' << final_cmp.expected[b] / (hi - lo) << '\n';
    }
  });

  // Region label changes per trajectory (particle 0).
  std::size_t changed = 0;
  std::vector<std::size_t> final_occupancy(partition.size(), 0);
  for (const auto& tr : ens.trajectories) {
    const std::size_t first = partition.locate(tr.at(0)[0]);
    bool moved = false;
    for (std::size_t s = 1; s < tr.times.size(); ++s) moved |= partition.locate(tr.at(s)[0]) != first;
    if (moved) ++changed;
    ++final_occupancy[partition.locate(tr.at(tr.times.size() - 1)[0])];
  }

  const Series series = observe(ens.snapshots, built, partition);
  write_observables(out, series, partition);
  write_density_blocks(out, ens.snapshots, built.masses);
  out.dump("final_state.bin", ens.snapshots.back());
  return {{"trajectories", ens.trajectories.size()},
          {"node_fallback_steps", ens.node_steps},
          {"trajectories_with_node_fallback", ens.trajectories_with_nodes},
          {"equivariance", gof},
          {"region_changes", changed},
          {"final_region_occupancy", final_occupancy},
          {"series", series_json(series)}};
}

nlohmann::json run_collapse(const ScenarioSpec& spec, const BuiltScenario& built,
                            const RegionPartition& partition, OutputSet& out) {
  GrwRunOptions options;
  options.propagation = {spec.dt, spec.steps_per_output};
  options.forced = spec.forced;
  options.record_collapse_states = spec.mode == Mode::grwm;
  const auto run = run_grw(built.psi0, built.potential, built.masses, spec.t_final, spec.grw, options);
  out.text("events.csv", [&](std::ostream& os) { write_events_csv(os, run.events); });

  nlohmann::json summary{{"event_count", run.events.size()}};
  if (spec.mode == Mode::grwf) {
    const auto flashes = flashes_from_events(run.events);
    out.text("flashes.csv", [&](std::ostream& os) { write_flashes_csv(os, flashes); });
    summary["flash_count"] = flashes.size();
  } else {
    nlohmann::json tails = nlohmann::json::array();
    for (const auto& [before, after] : run.collapse_states) {
      const auto mb = matter_density(before, built.masses);
      const auto ma = matter_density(after, built.masses);
      nlohmann::json regions = nlohmann::json::array();
      try {
        for (const auto& r : structured_tails_report(mb, ma, partition))
          regions.push_back({{"region", r.name},
                             {"weight_before", r.weight_before},
                             {"weight_after", r.weight_after},
                             {"weight_ratio", r.weight_ratio},
                             {"shape_correlation", r.shape_correlation}});
      } catch (const DegenerateRegion& e) {
        regions.push_back({{"error", e.what()}});
      }
      tails.push_back({{"time", after.time}, {"regions", regions}});
    }
    summary["structured_tails"] = tails;
    write_density_blocks(out, run.snapshots, built.masses);
  }
  const Series series = observe(run.snapshots, built, partition, &run.energies);
  write_observables(out, series, partition);
  out.dump("final_state.bin", run.snapshots.back());
  summary["series"] = series_json(series);
  return summary;
}

nlohmann::json run_schrodinger(const ScenarioSpec& spec, const BuiltScenario& built,
                               const RegionPartition& partition, OutputSet& out) {
  const auto snapshots = evolve(built.psi0, built.potential, built.masses, spec.t_final,
                                {spec.dt, spec.steps_per_output});
  const Series series = observe(snapshots, built, partition);
  write_observables(out, series, partition);
  write_density_blocks(out, snapshots, built.masses);
  out.dump("final_state.bin", snapshots.back());
  return {{"series", series_json(series)}};
}

}  // namespace

nlohmann::json run_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json manifest{{"schema", kManifestSchema},
                          {"version", kVersion},
                          {"name", spec.name},
                          {"mode", to_string(spec.mode)},
                          {"seed", spec.seed},
                          {"config", table_to_json(spec.table)}};
  OutputSet out(out_dir);
  auto write_manifest = [&] {
    std::ofstream os(out_dir / "manifest.json");
    os << manifest.dump(2) << '\n';
  };
  try {
    const BuiltScenario built = build_scenario(spec);
    const GridSpec grid = spec.grid();
    const auto partition = RegionPartition::halves(grid, spec.region_cut);
    out.dump("initial_state.bin", built.psi0);
    nlohmann::json summary = nlohmann::json::object();
    if (spec.t_final > 0.0) {
      switch (spec.mode) {
        case Mode::schrodinger: summary = run_schrodinger(spec, built, partition, out); break;
        case Mode::bohm: summary = run_bohm(spec, built, partition, out); break;
        case Mode::grwm:
        case Mode::grwf: summary = run_collapse(spec, built, partition, out); break;
      }
    }
    manifest["status"] = "ok";
    manifest["summary"] = summary;
    manifest["outputs"] = out.listing();
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["outputs"] = out.listing();
    write_manifest();
    throw;
  }
  write_manifest();
  return manifest;
}

ScenarioSpec scenario_from_manifest(const nlohmann::json& manifest) {
  if (!manifest.contains("config")) throw ConfigError("config", "manifest has no config echo");
  return scenario_from_table(table_from_json(manifest.at("config")));
}

}  // namespace ontosim
