#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ontosim/errors.hpp"
#include "ontosim/grw.hpp"
#include "ontosim/stats.hpp"

using namespace ontosim;

namespace {

double direct_kernel(double d, double sigma) {
  return std::exp(-d * d / (2.0 * sigma * sigma)) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

WaveFunction two_packets(const GridSpec& g, double a, double s) {
  WaveFunction psi(g);
  const auto l = gaussian_packet(g, -a, 0.0, s);
  const auto r = gaussian_packet(g, a, 0.0, s);
  for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = l[i] + r[i];
  return normalize(psi);
}

double half_norm(const WaveFunction& psi, bool right) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.grid.size(); ++i)
    if ((psi.grid.coordinate(i) >= 0.0) == right) s += std::norm(psi.amplitudes[i]) * psi.grid.spacing();
  return s;
}

}  // namespace

TEST_CASE("params") {
  CHECK_THROWS_AS((GrwParams{0.0, 1.0, 0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((GrwParams{1.0, -1.0, 0}).validate(), InvalidArgument);
  CHECK_NOTHROW((GrwParams{1.0, 1.0, 0}).validate());
}

TEST_CASE("jump intervals") {
  RngStream rng(1, 0);
  const int n = 100000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += next_jump_interval(1, 1.0, rng) / n;
  CHECK(std::abs(mean - 1.0) < 0.02);
  mean = 0.0;
  for (int i = 0; i < n; ++i) mean += next_jump_interval(10, 1.0, rng) / n;
  CHECK(std::abs(mean - 0.1) < 0.002);
  // The standard rate: one jump per ~1e16 s for a single particle, i.e. at
  // astronomical time scales. Time unit = 1 s here.
  const double lambda = si::rate_to_natural(si::kDefaultLambda, 1.0);
  mean = 0.0;
  for (int i = 0; i < 10000; ++i) mean += next_jump_interval(1, lambda, rng) / 10000;
  CHECK(mean == doctest::Approx(1e16).epsilon(0.05));
  CHECK(si::length_to_natural(si::kDefaultSigma, 1e-9) == doctest::Approx(100.0));
}

TEST_CASE("collapsing particle") {
  RngStream rng(2, 0);
  for (int i = 0; i < 100; ++i) CHECK(pick_collapsing_particle(1, rng) == 0);
  std::vector<std::uint64_t> counts(2, 0);
  for (int i = 0; i < 10000; ++i) ++counts[pick_collapsing_particle(2, rng)];
  CHECK(std::abs(static_cast<double>(counts[0]) - 5000.0) < 3.0 * 50.0);
  std::vector<std::uint64_t> many(7, 0);
  for (int i = 0; i < 100000; ++i) ++many[pick_collapsing_particle(7, rng)];
  CHECK(chi_square_gof(many, std::vector<double>(7, 1.0 / 7.0)).p_value > 0.01);
  RngStream a(3, 0), b(3, 0);
  for (int i = 0; i < 50; ++i) CHECK(pick_collapsing_particle(5, a) == pick_collapsing_particle(5, b));
}

TEST_CASE("localization weights") {
  const GridSpec g(1, -20.0, 20.0, 256);
  const double sigma = 0.8;
  const auto w = localization_weights(g, g.coordinate(100), 0, sigma);
  CHECK(w[100] == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma)).epsilon(1e-14));
  // One sigma from the center.
  const auto w2 = localization_weights(g, g.coordinate(100) - sigma, 0, sigma);
  CHECK(w2[100] == doctest::Approx(w[100] * std::exp(-0.5)).epsilon(1e-12));
  for (double x : w) CHECK(x > 0.0);
  CHECK(std::max_element(w.begin(), w.end()) - w.begin() == 100);

  const GridSpec g2(2, -8.0, 8.0, 32);
  const auto w3 = localization_weights(g2, 1.0, 1, 0.7);
  for (std::size_t j = 0; j < 32; ++j)
    for (std::size_t i = 1; i < 32; ++i) CHECK(std::abs(w3[i * 32 + j] - w3[j]) < 1e-15);
}

TEST_CASE("periodic kernel") {
  const double L = 10.0;
  CHECK(periodic_gaussian(0.3, 0.5, L) == doctest::Approx(direct_kernel(0.3, 0.5)).epsilon(1e-12));
  // Images on both sides at the half-period.
  CHECK(periodic_gaussian(5.0, 2.0, L) ==
        doctest::Approx(2.0 * direct_kernel(5.0, 2.0) + 2.0 * direct_kernel(15.0, 2.0) + 2.0 * direct_kernel(25.0, 2.0)).epsilon(1e-10));
  // Integrates to one over a period in both regimes.
  for (double sigma : {0.3, 2.4, 3.0, 40.0}) {
    double s = 0.0;
    for (int i = 0; i < 1000; ++i) s += periodic_gaussian(-5.0 + i * 0.01, sigma, L) * 0.01;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Both evaluation branches agree at the switch-over.
  CHECK(periodic_gaussian(1.7, 2.4999999, L) == doctest::Approx(periodic_gaussian(1.7, 2.5, L)).epsilon(1e-6));
}

TEST_CASE("collapse-center distribution") {
  const GridSpec g(1, -20.0, 20.0, 256);
  SUBCASE("single occupied cell gives the kernel") {
    WaveFunction psi(g);
    psi.amplitudes[130] = 1.0;
    psi = normalize(psi);
    const auto p = collapse_center_distribution(psi, 0, 1.1);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(std::abs(p[i] - direct_kernel(g.coordinate(i) - g.coordinate(130), 1.1)) < 1e-10);
  }
  SUBCASE("broad sigma vs direct summation") {
    const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 3.0, 1.0, 2.0)));
    const double sigma = 15.0;
    const auto p = collapse_center_distribution(psi, 0, sigma);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 17) {
      double direct = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j)
        direct += periodic_gaussian(g.coordinate(i) - g.coordinate(j), sigma, g.length()) *
                  std::norm(psi.amplitudes[j]) * g.spacing();
      CHECK(std::abs(p[i] - direct) < 1e-12);
    }
    for (double x : p) total += x * g.spacing();
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
  SUBCASE("two equal packets split evenly") {
    const auto psi = two_packets(g, 8.0, 0.5);
    const auto p = collapse_center_distribution(psi, 0, 0.5);
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) (g.coordinate(i) < 0.0 ? left : right) += p[i] * g.spacing();
    CHECK(std::abs(left - 0.5) < 1e-6);
    CHECK(std::abs(right - 0.5) < 1e-6);
  }
  SUBCASE("two particles: marginal of k") {
    const GridSpec g2(2, -8.0, 8.0, 32);
    const auto f = gaussian_packet(g2, -2.0, 0.0, 0.8);
    const auto h = gaussian_packet(g2, 3.0, 0.0, 0.6);
    const auto psi = normalize(product_state(g2, {f, h}));
    const auto p = collapse_center_distribution(psi, 1, 0.9);
    const auto rho = marginal_density(psi, 1);
    for (std::size_t i = 0; i < 32; i += 3) {
      double direct = 0.0;
      for (std::size_t j = 0; j < 32; ++j)
        direct += periodic_gaussian(g2.coordinate(i) - g2.coordinate(j), 0.9, g2.length()) * rho[j] * g2.spacing();
      CHECK(std::abs(p[i] - direct) < 1e-12);
    }
  }
}

TEST_CASE("apply_collapse") {
  const GridSpec g(1, -20.0, 20.0, 256);
  const auto psi = two_packets(g, 8.0, 0.5);
  SUBCASE("very broad sigma is the identity") {
    const auto after = apply_collapse(psi, 0, 2.0, 1e6 * g.length());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(after.amplitudes[i] - psi.amplitudes[i]) < 1e-8);
  }
  SUBCASE("narrow collapse on the right packet") {
    const auto after = apply_collapse(psi, 0, 8.0, 1.0);
    CHECK(std::abs(norm_squared(after) - 1.0) < 1e-12);
    CHECK(half_norm(after, true) > 1.0 - 1e-6);
    CHECK(half_norm(after, false) > 0.0);
  }
  SUBCASE("real positive multiplier") {
    WaveFunction moving = psi;
    for (std::size_t i = 0; i < g.size(); ++i) moving.amplitudes[i] *= std::polar(1.0, 0.7 * g.coordinate(i));
    const auto after = apply_collapse(moving, 0, -3.0, 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::abs(moving.amplitudes[i]) <= 1e-12) continue;
      const Complex ratio = after.amplitudes[i] / moving.amplitudes[i];
      CHECK(ratio.real() > 0.0);
      CHECK(std::abs(ratio.imag()) < 1e-12 * ratio.real());
    }
  }
  SUBCASE("incompatible center") {
    WaveFunction narrow(g);
    narrow.amplitudes[10] = 1.0;
    CHECK_THROWS_AS(apply_collapse(normalize(narrow), 0, 0.0, 0.05), ZeroOverlap);
  }
  SUBCASE("superposition suppression") {
    RngStream rng(4, 0);
    const auto p = collapse_center_distribution(psi, 0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto after = apply_collapse(psi, 0, g.coordinate(sample_center_index(p, rng)), 1.0);
      CHECK(std::max(half_norm(after, true), half_norm(after, false)) > 1.0 - 1e-4);
    }
  }
}

TEST_CASE("entangled collapse reshapes the partner marginal") {
  const GridSpec g(2, -12.0, 12.0, 128);
  const auto f = gaussian_packet(g, -3.0, 0.0, 0.5);
  const auto h = gaussian_packet(g, 3.0, 0.0, 0.5);
  WaveFunction psi(g);
  for (std::size_t i = 0; i < 128; ++i)
    for (std::size_t j = 0; j < 128; ++j) psi.amplitudes[i * 128 + j] = f[i] * h[j] + h[i] * f[j];
  psi = normalize(psi);
  auto right_mass = [&](const WaveFunction& w) {
    const auto rho = marginal_density(w, 1);
    double s = 0.0;
    for (std::size_t i = 64; i < 128; ++i) s += rho[i] * g.spacing();
    return s;
  };
  const double before = right_mass(psi);
  const auto after = apply_collapse(psi, 0, -3.0, 0.5);
  CHECK(before == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(right_mass(after) - before) > 0.1);
  CHECK(right_mass(after) > 0.99);
}

TEST_CASE("center sampler matches p(x)") {
  const GridSpec g(1, -16.0, 16.0, 256);
  const auto psi = two_packets(g, 5.0, 1.0);
  const auto p = collapse_center_distribution(psi, 0, 1.0);
  RngStream rng(6, 0);
  std::vector<double> centers;
  for (int i = 0; i < 10000; ++i) centers.push_back(g.coordinate(sample_center_index(p, rng)));
  // 32 equal-width bins of 8 grid cells, edges on cell boundaries.
  std::vector<double> edges;
  for (int b = 0; b <= 32; ++b) edges.push_back(g.extent_min() - 0.5 * g.spacing() + b * 8 * g.spacing());
  const auto h = histogram(centers, edges);
  std::vector<double> probs(32, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) probs[i / 8] += p[i] * g.spacing();
  CHECK(chi_square_gof(h.counts, probs).p_value > 0.01);
}

TEST_CASE("mean energy gain per collapse") {
  // E[<H>'] - <H> = 1 / (8 m sigma^2) for a localization of width sigma.
  const GridSpec g(1, -20.0, 20.0, 512);
  const Masses m = Masses::uniform(1);
  const auto v = PotentialField::free(g);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.5, 1.5)));
  const double sigma = 0.5;
  const double e0 = expectation_energy(psi, v, m);
  const auto p = collapse_center_distribution(psi, 0, sigma);
  double mean = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = p[i] * g.spacing();
    if (w < 1e-14) continue;
    mean += w * expectation_energy(apply_collapse(psi, 0, g.coordinate(i), sigma), v, m);
  }
  CHECK(mean - e0 == doctest::Approx(1.0 / (8.0 * sigma * sigma)).epsilon(1e-4));
}

TEST_CASE("run_grw") {
  const GridSpec g(1, -8.0, 8.0, 16);
  const Masses m = Masses::uniform(1);
  const auto v = PotentialField::harmonic(g, m, 1.0);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.0, std::sqrt(0.5))));

  SUBCASE("vanishing rate equals plain evolution") {
    GrwRunOptions opt;
    opt.propagation = {1e-2, 10};
    const auto run = run_grw(psi, v, m, 2.0, {1e-30, 1.0, 1}, opt);
    const auto plain = evolve(psi, v, m, 2.0, opt.propagation);
    CHECK(run.events.empty());
    REQUIRE(run.snapshots.size() == plain.size());
    for (std::size_t s = 0; s < plain.size(); ++s) CHECK(run.snapshots[s].amplitudes == plain[s].amplitudes);
  }
  SUBCASE("event counts have mean N lambda T") {
    GrwRunOptions opt;
    opt.propagation = {4e-4, 1 << 30};
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto run = run_grw(psi, v, m, 10.0, {50.0, 1.5, seed}, opt);
      total += static_cast<double>(run.events.size());
      for (std::size_t e = 1; e < run.events.size(); ++e) REQUIRE(run.events[e].time >= run.events[e - 1].time);
    }
    const double ratio = total / 200.0 / 500.0;
    CHECK(ratio >= 0.97);
    CHECK(ratio <= 1.03);
  }
  SUBCASE("forced collapse and recorded states") {
    GrwRunOptions opt;
    opt.propagation = {1e-2, 1};
    opt.forced = {{0.25, 0}};
    opt.record_collapse_states = true;
    const auto run = run_grw(psi, v, m, 0.5, {1e-16, 1.0, 9}, opt);
    REQUIRE(run.events.size() == 1);
    CHECK(run.events[0].time == doctest::Approx(0.25));
    REQUIRE(run.collapse_states.size() == 1);
    CHECK(run.collapse_states[0].first.time == doctest::Approx(0.25));
    CHECK(std::abs(norm_squared(run.collapse_states[0].second) - 1.0) < 1e-12);
    CHECK(run.energies.size() == run.snapshots.size());
  }
  SUBCASE("same seed, same run") {
    GrwRunOptions opt;
    opt.propagation = {1e-3, 100};
    const auto a = run_grw(psi, v, m, 1.0, {5.0, 1.0, 77}, opt);
    const auto b = run_grw(psi, v, m, 1.0, {5.0, 1.0, 77}, opt);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t e = 0; e < a.events.size(); ++e) {
      CHECK(a.events[e].time == b.events[e].time);
      CHECK(a.events[e].center == b.events[e].center);
    }
    CHECK(a.snapshots.back().amplitudes == b.snapshots.back().amplitudes);
  }
}
