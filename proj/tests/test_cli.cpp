#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontosim/field_io.hpp"
#include "ontosim/run.hpp"

namespace fs = std::filesystem;
using namespace ontosim;

namespace {

const fs::path kCli = ONTOSIM_CLI;
const fs::path kDir = ONTOSIM_SCENARIO_DIR;

struct Result {
  int code;
  std::string output;
};

Result cli(const std::string& args) {
  const auto log = fs::temp_directory_path() / "ontosim-cli-test.log";
  const std::string cmd = kCli.string() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ontosim-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("run the bundled double slit") {
  const auto out = temp_dir("slit");
  const auto r = cli("run " + (kDir / "double_slit_bohm.cfg").string() + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "histogram.dat"));
  const auto m = manifest(out);
  CHECK(m["status"] == "ok");
  CHECK(m["summary"]["equivariance"].back()["p_value"].get<double>() > 0.01);
  fs::remove_all(out);
}

TEST_CASE("invalid config exits 2 naming the field") {
  const auto dir = temp_dir("badcfg");
  std::ifstream src(kDir / "energy_grw.cfg");
  std::stringstream text;
  text << src.rdbuf();
  std::string cfg = text.str();
  cfg.replace(cfg.find("sigma = 0.5"), 11, "sigma = -0.5");
  std::ofstream(dir / "bad.cfg") << cfg;
  const auto r = cli("run " + (dir / "bad.cfg").string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("sigma") != std::string::npos);
  const auto mode = cli("run " + (kDir / "energy_grw.cfg").string() + " --out " + (dir / "o2").string() +
                        " --mode psychic");
  CHECK(mode.code == 2);
  CHECK(mode.output.find("scenario.mode") != std::string::npos);
  CHECK(cli("run /nonexistent.cfg --out " + (dir / "o3").string()).code == 2);
  CHECK(cli("frobnicate").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("seeded runs are identical, re-runs from the manifest too") {
  const auto dir = temp_dir("seed");
  const auto cfg = (kDir / "poisson_grwf.cfg").string();
  REQUIRE(cli("run " + cfg + " --seed 42 --out " + (dir / "a").string()).code == 0);
  REQUIRE(cli("run " + cfg + " --seed 42 --out " + (dir / "b").string()).code == 0);
  REQUIRE(cli("run " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "c").string()).code == 0);
  const auto a = manifest(dir / "a"), b = manifest(dir / "b"), c = manifest(dir / "c");
  CHECK(a["seed"] == 42);
  CHECK(a["outputs"] == b["outputs"]);
  CHECK(a["outputs"] == c["outputs"]);
  for (const auto& f : a["outputs"])
    CHECK(sha256_file(dir / "a" / f["file"].get<std::string>()) == f["sha256"].get<std::string>());
  REQUIRE(cli("run " + cfg + " --seed 43 --out " + (dir / "d").string()).code == 0);
  CHECK(manifest(dir / "d")["outputs"] != a["outputs"]);
  fs::remove_all(dir);
}

TEST_CASE("verify rejects unknown suites") {
  const auto r = cli("verify --suite medium");
  CHECK(r.code == 2);
}

TEST_CASE("convert") {
  const auto dir = temp_dir("convert");
  const GridSpec g(2, -4.0, 4.0, 16);
  WaveFunction psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = {std::sin(0.37 * i), std::cos(1.1 * i) / 3.0};
  write_dump(dir / "psi.bin", psi);

  REQUIRE(cli("convert --in " + (dir / "psi.bin").string() + " --format csv --out " + (dir / "psi.csv").string()).code == 0);
  std::ifstream csv(dir / "psi.csv");
  std::string comment, header;
  std::getline(csv, comment);
  std::getline(csv, header);
  CHECK(header == "x1,x2,re,im,abs2");
  REQUIRE(cli("convert --in " + (dir / "psi.csv").string() + " --format dump --out " + (dir / "back.bin").string()).code == 0);
  CHECK(read_dump(dir / "back.bin").amplitudes == psi.amplitudes);
  CHECK(sha256_file(dir / "back.bin") == sha256_file(dir / "psi.bin"));

  // Truncated dump.
  {
    std::ifstream in(dir / "psi.bin", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(dir / "cut.bin", std::ios::binary) << bytes.substr(0, 100);
  }
  const auto cut = cli("convert --in " + (dir / "cut.bin").string() + " --format csv --out " + (dir / "cut.csv").string());
  CHECK(cut.code == 2);
  CHECK(cut.output.find("offset") != std::string::npos);
  std::ofstream(dir / "junk.bin") << "JUNKJUNKJUNK";
  CHECK(cli("convert --in " + (dir / "junk.bin").string() + " --format csv").code == 2);
  CHECK(cli("convert --in " + (dir / "psi.bin").string() + " --format xml").code == 2);
  fs::remove_all(dir);
}
