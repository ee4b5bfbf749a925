#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ontosim/errors.hpp"
#include "ontosim/field_io.hpp"
#include "ontosim/schrodinger.hpp"

using namespace ontosim;

namespace {

double mean_position(const WaveFunction& psi) { return marginal_moments(psi, 0).mean; }

double max_density_error(const WaveFunction& a, const WaveFunction& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    e = std::max(e, std::abs(std::norm(a.amplitudes[i]) - std::norm(b.amplitudes[i])));
  return e;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS((PropagatorConfig{0.0, 1}).validate(), InvalidArgument);
  CHECK_THROWS_AS((PropagatorConfig{1e-3, 0}).validate(), InvalidArgument);
  CHECK(step_count(2.0, 1e-3) == 2000);
  CHECK(step_count(0.0, 1e-3) == 0);
}

TEST_CASE("free step moves the centroid by k0/m dt") {
  const GridSpec g(1, -30.0, 30.0, 1024);
  const Masses m({2.0});
  const double k0 = 3.0, dt = 0.01;
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, -1.0, k0, 1.5)));
  const auto next = step(psi, PotentialField::free(g), m, dt);
  CHECK(mean_position(next) - mean_position(psi) == doctest::Approx(k0 / 2.0 * dt).epsilon(1e-9));
  CHECK(next.time == doctest::Approx(dt));
  CHECK(std::abs(norm_squared(next) - 1.0) < 1e-12);
}

TEST_CASE("constant potential is a global phase") {
  const GridSpec g(1, -20.0, 20.0, 256);
  const Masses m = Masses::uniform(1);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 1.0, -2.0, 0.8)));
  const double c = 3.7, dt = 0.05;
  const auto free = step(psi, PotentialField::free(g), m, dt);
  const auto shifted = step(psi, PotentialField::free(g).shifted(c), m, dt);
  CHECK(max_density_error(free, shifted) < 1e-12);
  const Complex phase = std::polar(1.0, -c * dt);
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    e = std::max(e, std::abs(shifted.amplitudes[i] - phase * free.amplitudes[i]));
  CHECK(e < 1e-12);
}

TEST_CASE("coherent state after a quarter period") {
  const GridSpec g(1, -16.0, 16.0, 512);
  const Masses m = Masses::uniform(1);
  const double omega = 1.0;
  const auto v = PotentialField::harmonic(g, m, omega);
  const auto psi0 = analytic_coherent_state(g, 2.0, 0.5, 1.0, omega, 0.0);
  const double quarter = 0.5 * std::numbers::pi / omega;
  const auto snaps = evolve(psi0, v, m, quarter, {1e-3, 1 << 30});
  const auto exact = analytic_coherent_state(g, 2.0, 0.5, 1.0, omega, snaps.back().time);
  CHECK(max_density_error(snaps.back(), exact) < 1e-6);
  // Classical motion x(t) = x0 cos wt + p0/(m w) sin wt.
  const double t = snaps.back().time;
  CHECK(mean_position(snaps.back()) == doctest::Approx(2.0 * std::cos(t) + 0.5 * std::sin(t)).epsilon(1e-6));
}

TEST_CASE("evolve cadence") {
  const GridSpec g(1, -10.0, 10.0, 64);
  const Masses m = Masses::uniform(1);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.0, 1.0)));
  const auto v = PotentialField::free(g);
  const auto zero = evolve(psi, v, m, 0.0, {});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].amplitudes == psi.amplitudes);
  const auto snaps = evolve(psi, v, m, 0.11, {0.01, 3});
  // Steps 0, 3, 6, 9 and the off-cadence final step 11.
  REQUIRE(snaps.size() == 5);
  CHECK(snaps[1].time == doctest::Approx(0.03));
  CHECK(snaps.back().time == doctest::Approx(0.11));
}

TEST_CASE("free Gaussian spreading") {
  const GridSpec g(1, -32.0, 32.0, 512);
  const Masses m = Masses::uniform(1);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.0, 1.0)));
  const auto snaps = evolve(psi, PotentialField::free(g), m, 2.0, {1e-3, 1000});
  CHECK(free_gaussian_width(1.0, 1.0, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(marginal_moments(snaps.back(), 0).stddev - std::sqrt(2.0)) < 1e-4);
  CHECK(l2_distance(snaps.back(), analytic_free_gaussian(g, 0.0, 0.0, 1.0, 1.0, 2.0)) < 1e-10);
}

TEST_CASE("analytic free Gaussian") {
  const GridSpec g(1, -40.0, 40.0, 1024);
  const double x0 = 1.25, s0 = 0.75;
  SUBCASE("t = 0 is the initial packet") {
    const auto a = analytic_free_gaussian(g, x0, 2.0, s0, 1.0, 0.0);
    const auto p = gaussian_packet(g, x0, 2.0, s0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a.amplitudes[i] - p[i]) < 1e-14);
  }
  SUBCASE("parity about x0 for k0 = 0") {
    const GridSpec sym(1, -40.0, 40.0, 1024);
    const auto a = analytic_free_gaussian(sym, 0.0, 0.0, s0, 1.3, 3.0);
    for (std::size_t i = 1; i < 512; ++i)
      CHECK(std::norm(a.amplitudes[512 + i]) == doctest::Approx(std::norm(a.amplitudes[512 - i])).epsilon(1e-12));
  }
  SUBCASE("doubling the width halves the peak") {
    // s(t) = 2 s0 at t = 2 m s0^2 sqrt(3).
    const double m = 1.5, t = 2.0 * m * s0 * s0 * std::sqrt(3.0);
    CHECK(free_gaussian_width(s0, m, t) == doctest::Approx(2.0 * s0));
    const GridSpec on_x0(1, -40.0 + x0, 40.0 + x0, 1024);
    const auto a0 = analytic_free_gaussian(on_x0, x0, 0.0, s0, m, 0.0);
    const auto at = analytic_free_gaussian(on_x0, x0, 0.0, s0, m, t);
    CHECK(std::norm(a0.amplitudes[512]) / std::norm(at.amplitudes[512]) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("unitarity and energy over long runs") {
  const GridSpec g(1, -20.0, 20.0, 256);
  const Masses m = Masses::uniform(1);
  const auto v = PotentialField::double_well(g, m, 1.0, 5.0);
  WaveFunction psi(g);
  const auto l = gaussian_packet(g, -5.0, 0.0, std::sqrt(0.5));
  const auto r = gaussian_packet(g, 5.0, 0.0, std::sqrt(0.5));
  for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = l[i] + r[i];
  psi = normalize(psi);
  const double e0 = expectation_energy(psi, v, m);
  const SplitOperator prop(v, m, 1e-3);
  for (int s = 1; s <= 1000; ++s) prop.advance(psi);
  CHECK(std::abs(norm_squared(psi) - 1.0) < 1e-12);
  CHECK(std::abs(expectation_energy(psi, v, m) - e0) / e0 < 1e-8);
}

TEST_CASE("time reversal") {
  const GridSpec g(1, -16.0, 16.0, 256);
  const Masses m = Masses::uniform(1);
  const auto v = PotentialField::harmonic(g, m, 0.7, 0.5);
  auto psi0 = normalize(WaveFunction(g, gaussian_packet(g, -1.0, 1.5, 0.9)));
  auto forward = evolve(psi0, v, m, 1.0, {1e-3, 1 << 30}).back();
  for (auto& a : forward.amplitudes) a = std::conj(a);
  forward.time = 0.0;
  auto back = evolve(forward, v, m, 1.0, {1e-3, 1 << 30}).back();
  for (auto& a : back.amplitudes) a = std::conj(a);
  back.time = 0.0;
  CHECK(l2_distance(back, psi0) < 1e-9);
}

TEST_CASE("second-order convergence on the coherent state") {
  const GridSpec g(1, -16.0, 16.0, 512);
  const Masses m = Masses::uniform(1);
  const auto v = PotentialField::harmonic(g, m, 1.0);
  const auto psi0 = analytic_coherent_state(g, 2.0, 0.0, 1.0, 1.0, 0.0);
  auto err = [&](double dt) {
    const auto last = evolve(psi0, v, m, 1.0, {dt, 1 << 30}).back();
    return l2_distance(last, analytic_coherent_state(g, 2.0, 0.0, 1.0, 1.0, 1.0));
  };
  const double ratio = err(0.02) / err(0.01);
  MESSAGE("coherent-state error ratio for dt 0.02 -> 0.01: " << ratio);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("free Gaussian: splitting is exact in time for V = 0") {
  // Halving dt does not shrink the error: both runs sit at round-off.
  const GridSpec g(1, -32.0, 32.0, 512);
  const Masses m = Masses::uniform(1);
  const auto psi0 = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.0, 1.0)));
  const auto exact = analytic_free_gaussian(g, 0.0, 0.0, 1.0, 1.0, 2.0);
  const double e1 = l2_distance(evolve(psi0, PotentialField::free(g), m, 2.0, {1e-3, 1 << 30}).back(), exact);
  const double e2 = l2_distance(evolve(psi0, PotentialField::free(g), m, 2.0, {5e-4, 1 << 30}).back(), exact);
  MESSAGE("free-Gaussian L2 errors: " << e1 << " (dt=1e-3), " << e2 << " (dt=5e-4)");
  CHECK(e1 < 1e-11);
  CHECK(e2 < 1e-11);
}

TEST_CASE("snapshot series on disk") {
  const GridSpec g(1, -10.0, 10.0, 32);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 1.0, 1.0)));
  const auto snaps = evolve(psi, PotentialField::free(g), Masses::uniform(1), 0.1, {0.01, 5});
  const auto dir = std::filesystem::temp_directory_path() / "ontosim-test-snaps";
  std::filesystem::remove_all(dir);
  write_snapshot_series(dir, snaps);
  std::ifstream idx(dir / "index.json");
  const auto j = nlohmann::json::parse(idx)["snapshots"];
  REQUIRE(j.size() == snaps.size());
  const auto second = read_dump(dir / j[1]["file"].get<std::string>());
  CHECK(second.amplitudes == snaps[1].amplitudes);
  CHECK(j[1]["time"].get<double>() == doctest::Approx(0.05));
  std::filesystem::remove_all(dir);
}
