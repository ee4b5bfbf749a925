// ontosim command-line front end.
//
//   ontosim run <config.cfg|manifest.json> --out DIR [--seed N] [--mode M]
//   ontosim verify [--suite fast|full]
//   ontosim convert --in FILE --format csv|dump [--out FILE]
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/config/format error,
// 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ontosim/acceptance.hpp"
#include "ontosim/errors.hpp"
#include "ontosim/field_io.hpp"
#include "ontosim/run.hpp"
#include "ontosim/scenarios.hpp"

namespace fs = std::filesystem;
using namespace ontosim;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kRuntime = 3 };

ScenarioSpec load_input(const fs::path& input) {
  if (input.extension() == ".json") {
    std::ifstream in(input);
    if (!in) throw ConfigError("config", "cannot read " + input.string());
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config", std::string("bad manifest: ") + e.what());
    }
    return scenario_from_manifest(manifest);
  }
  return load_scenario(input);
}

int cmd_run(const fs::path& input, const fs::path& out, const std::string& seed,
            const std::string& mode) {
  ScenarioSpec spec = load_input(input);
  if (!seed.empty()) spec.set("scenario", "seed", seed);
  if (!mode.empty()) spec.set("scenario", "mode", mode);
  const auto manifest = run_scenario(spec, out);
  std::cout << "wrote " << manifest.at("outputs").size() << " files + manifest.json to "
            << out.string() << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite_name) {
  const Suite suite = parse_suite(suite_name);
  std::cout << "acceptance suite: " << suite_name << '\n';
  const auto results = run_acceptance(suite, ONTOSIM_SCENARIO_DIR, [](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
  });
  int failed = 0;
  for (const auto& r : results)
    if (!r.passed) {
      ++failed;
      std::cout << "failed: " << r.id << " " << r.name << '\n';
    }
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? kOk : kVerifyFailed;
}

int cmd_convert(const fs::path& in, const std::string& format, fs::path out) {
  if (format == "csv") {
    const WaveFunction psi = read_dump(in);
    if (out.empty()) out = fs::path(in).replace_extension(".csv");
    std::ofstream os(out);
    if (!os) throw Error("cannot write " + out.string());
    write_csv(os, psi);
  } else {
    std::ifstream is(in);
    if (!is) throw FormatError("cannot read " + in.string(), 0);
    const WaveFunction psi = read_csv(is);
    if (out.empty()) out = fs::path(in).replace_extension(".bin");
    write_dump(out, psi);
  }
  std::cout << "wrote " << out.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ontosim: wave function, Bohmian and collapse dynamics on a grid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  fs::path run_input, run_out;
  std::string run_seed, run_mode;
  auto* run = app.add_subcommand("run", "run a scenario config (or re-run a manifest)");
  run->add_option("input", run_input, "config file (.cfg) or manifest.json")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--seed", run_seed, "override scenario.seed");
  run->add_option("--mode", run_mode, "override scenario.mode (schrodinger|bohm|grwm|grwf)");

  std::string suite = "fast";
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--suite", suite, "fast or full");

  fs::path conv_in, conv_out;
  std::string format;
  auto* convert = app.add_subcommand("convert", "convert between binary dumps and CSV");
  convert->add_option("--in", conv_in, "input file")->required();
  convert->add_option("--format", format, "target format")->required()->check(CLI::IsMember({"csv", "dump"}));
  convert->add_option("--out", conv_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(run_input, run_out, run_seed, run_mode);
    if (*verify) return cmd_verify(suite);
    return cmd_convert(conv_in, format, conv_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidGeometry& e) {
    std::cerr << "invalid geometry: " << e.what() << '\n';
    return kUsage;
  } catch (const MemoryCap& e) {
    std::cerr << "memory cap: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
}
