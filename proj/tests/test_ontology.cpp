#include <doctest.h>

#include <cmath>

#include "ontosim/errors.hpp"
#include "ontosim/ontology.hpp"
#include "ontosim/schrodinger.hpp"

using namespace ontosim;

TEST_CASE("matter density") {
  SUBCASE("one particle") {
    const GridSpec g(1, -10.0, 10.0, 64);
    const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 1.0, 0.3, 1.2)));
    const auto md = matter_density(psi, Masses::uniform(1));
    for (std::size_t i = 0; i < 64; ++i) CHECK(md.values[i] == std::norm(psi.amplitudes[i]));
    CHECK(md.total() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(md.coordinate(3) == g.coordinate(3));
  }
  const GridSpec g(2, -10.0, 10.0, 64);
  const auto f = gaussian_packet(g, -3.0, 1.0, 0.7);
  const auto h = gaussian_packet(g, 3.0, -1.0, 0.7);
  WaveFunction psi(g);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) psi.amplitudes[i * 64 + j] = f[i] * h[j] + h[i] * f[j];
  psi = normalize(psi);
  SUBCASE("exchange-symmetric pair") {
    const auto r1 = marginal_density(psi, 0), r2 = marginal_density(psi, 1);
    for (std::size_t i = 0; i < 64; ++i) REQUIRE(std::abs(r1[i] - r2[i]) < 1e-14);
    const auto md = matter_density(psi, Masses({1.5, 1.5}));
    for (std::size_t i = 0; i < 64; ++i) CHECK(md.values[i] == doctest::Approx(3.0 * r1[i]).epsilon(1e-13));
  }
  SUBCASE("direct double sum") {
    const Masses m({1.0, 2.5});
    const auto md = matter_density(psi, m);
    const double dx = g.spacing();
    for (std::size_t x = 0; x < 64; ++x) {
      double direct = 0.0;
      for (std::size_t o = 0; o < 64; ++o)
        direct += (1.0 * std::norm(psi.amplitudes[x * 64 + o]) + 2.5 * std::norm(psi.amplitudes[o * 64 + x])) * dx;
      CHECK(std::abs(md.values[x] - direct) < 1e-12);
    }
    CHECK(md.total() == doctest::Approx(3.5).epsilon(1e-8));
  }
}

TEST_CASE("flashes") {
  CHECK(flashes_from_events({}).empty());
  const auto one = flashes_from_events({{1.0, 0, 0.5, 0.3}});
  REQUIRE(one.size() == 1);
  CHECK(one[0].time == 1.0);
  CHECK(one[0].position == 0.5);
  CHECK(one[0].particle == 0);
  const auto many = flashes_from_events({{0.1, 0, -1.0, 0.1}, {0.2, 1, 2.0, 0.1}, {0.4, 0, 3.0, 0.1}});
  REQUIRE(many.size() == 3);
  CHECK(many[2].position == 3.0);
  CHECK(many[1].particle == 1);
}

TEST_CASE("flash sparseness at the standard rate") {
  // With the standard lambda and any natural time unit up to a microsecond,
  // t_final <= 1e4 units gives N lambda t << 1e-10: no flashes.
  const GridSpec g(1, -8.0, 8.0, 16);
  const Masses m = Masses::uniform(1);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 0.0, 0.0, 1.0)));
  const double lambda = si::rate_to_natural(si::kDefaultLambda, 1e-6);
  CHECK(lambda * 1e4 < 1e-10);
  GrwRunOptions opt;
  opt.propagation = {1.0, 1 << 30};
  const auto run = run_grw(psi, PotentialField::harmonic(g, m, 1.0), m, 1e4, {lambda, 1.0, 3}, opt);
  CHECK(flashes_from_events(run.events).empty());
}

TEST_CASE("region partitions") {
  const GridSpec g(1, -10.0, 10.0, 64);
  CHECK_THROWS_AS(RegionPartition({{"a", -10.0, 0.0}, {"b", 1.0, 10.0}}, -10.0, 10.0), InvalidArgument);
  CHECK_THROWS_AS(RegionPartition({{"a", -10.0, 0.0}}, -10.0, 10.0), InvalidArgument);
  const auto halves = RegionPartition::halves(g, 0.0);
  REQUIRE(halves.size() == 2);
  CHECK(halves.regions()[0].name == "left");
  CHECK(halves.locate(-0.01) == 0);
  CHECK(halves.locate(0.0) == 1);
  CHECK(halves.locate(9.99) == 1);
}

TEST_CASE("region masses") {
  const GridSpec g(1, -16.0, 16.0, 256);
  WaveFunction psi(g);
  const auto l = gaussian_packet(g, -5.0, 0.0, 0.8);
  const auto r = gaussian_packet(g, 5.0, 0.0, 0.8);
  for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = l[i] + r[i];
  psi = normalize(psi);
  const Masses m({2.0});
  const auto md = matter_density(psi, m);
  const auto halves = region_masses(md, RegionPartition::halves(g));
  CHECK(std::abs(halves[0] - 1.0) < 1e-8);
  CHECK(std::abs(halves[1] - 1.0) < 1e-8);
  CHECK(std::abs(halves[0] + halves[1] - 2.0) < 1e-10);
  CHECK(region_masses(md, RegionPartition::whole(g))[0] == doctest::Approx(2.0).epsilon(1e-10));

  const auto after = apply_collapse(psi, 0, 5.0, 1.0);
  const auto post = region_masses(matter_density(after, m), RegionPartition::halves(g));
  CHECK(post[1] > 0.999 * 2.0);
  CHECK(post[0] > 0.0);
}

TEST_CASE("structured tails") {
  const GridSpec g(1, -64.0, 64.0, 2048);
  WaveFunction psi(g);
  const auto l = gaussian_packet(g, -20.0, 0.0, 0.2);
  const auto r = gaussian_packet(g, 20.0, 0.0, 0.2);
  for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = l[i] + r[i];
  psi = normalize(psi);
  const Masses m = Masses::uniform(1);
  const auto part = RegionPartition::halves(g);
  const auto before = matter_density(psi, m);

  SUBCASE("identity") {
    for (const auto& rep : structured_tails_report(before, before, part)) {
      CHECK(rep.weight_ratio == doctest::Approx(1.0));
      CHECK(rep.shape_correlation == doctest::Approx(1.0));
    }
  }
  SUBCASE("scaling one region") {
    auto scaled = before;
    for (std::size_t i = 0; i < scaled.values.size(); ++i)
      if (scaled.coordinate(i) < 0.0) scaled.values[i] *= 2.0;
    const auto rep = structured_tails_report(before, scaled, part);
    CHECK(rep[0].weight_ratio == doctest::Approx(2.0));
    CHECK(rep[0].shape_correlation == doctest::Approx(1.0));
    CHECK(rep[1].weight_ratio == doctest::Approx(1.0));
  }
  SUBCASE("collapse leaves a structured low-weight tail") {
    // sigma chosen so the left packet keeps ~1e-6 of the weight.
    const double sigma = 40.0 / std::sqrt(2.0 * std::log(1e6));
    const auto after = apply_collapse(psi, 0, 20.0, sigma);
    const auto rep = structured_tails_report(before, matter_density(after, m), part);
    CHECK(rep[0].weight_after < 1e-5);
    CHECK(rep[0].weight_after > 0.0);
    CHECK(rep[0].weight_ratio < 1e-5);
    CHECK(rep[0].shape_correlation > 0.99);
  }
  SUBCASE("degenerate region") {
    WaveFunction right_only = normalize(WaveFunction(g, r));
    for (std::size_t i = 0; i < 1024; ++i) right_only.amplitudes[i] = 0.0;
    const auto md = matter_density(right_only, m);
    CHECK_THROWS_AS(structured_tails_report(md, md, part), DegenerateRegion);
  }
}

TEST_CASE("mass conservation under evolution") {
  const GridSpec g(1, -20.0, 20.0, 256);
  const Masses m({3.0});
  const auto v = PotentialField::harmonic(g, m, 0.5);
  const auto psi = normalize(WaveFunction(g, gaussian_packet(g, 2.0, 1.0, 1.0)));
  for (const auto& snap : evolve(psi, v, m, 5.0, {1e-3, 500}))
    CHECK(std::abs(matter_density(snap, m).total() - 3.0) < 1e-8);
}
