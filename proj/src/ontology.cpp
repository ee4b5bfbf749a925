#include "ontosim/ontology.hpp"

#include <algorithm>
#include <cmath>

#include "ontosim/errors.hpp"

namespace ontosim {

double MatterDensityField::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spacing;
}

MatterDensityField matter_density(const WaveFunction& psi, const Masses& masses) {
  const GridSpec& g = psi.grid;
  if (masses.size() != static_cast<std::size_t>(g.n_particles()))
    throw InvalidArgument("matter_density: one mass per particle required");
  MatterDensityField m{g.extent_min(), g.spacing(),
                       std::vector<double>(g.points_per_axis(), 0.0), psi.time};
  for (int k = 0; k < g.n_particles(); ++k) {
    const auto rho = marginal_density(psi, k);
    const double mk = masses[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < rho.size(); ++i) m.values[i] += mk * rho[i];
  }
  return m;
}

std::vector<FlashEvent> flashes_from_events(const std::vector<CollapseEvent>& events) {
  std::vector<FlashEvent> flashes;
  flashes.reserve(events.size());
  for (const auto& e : events) flashes.push_back({e.time, e.center, e.particle});
  return flashes;
}

RegionPartition::RegionPartition(std::vector<Region> regions, double extent_min,
                                 double extent_max)
    : regions_(std::move(regions)) {
  if (regions_.empty()) throw InvalidArgument("partition needs at least one region");
  std::sort(regions_.begin(), regions_.end(),
            [](const Region& a, const Region& b) { return a.lo < b.lo; });
  if (regions_.front().lo != extent_min || regions_.back().hi != extent_max)
    throw InvalidArgument("partition must cover the whole extent");
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (!(regions_[i].hi > regions_[i].lo))
      throw InvalidArgument("region '" + regions_[i].name + "' is empty");
    if (i > 0 && regions_[i].lo != regions_[i - 1].hi)
      throw InvalidArgument("regions '" + regions_[i - 1].name + "' and '" + regions_[i].name +
                            "' overlap or leave a gap");
  }
}

RegionPartition RegionPartition::halves(const GridSpec& grid, double cut) {
  return RegionPartition({{"left", grid.extent_min(), cut}, {"right", cut, grid.extent_max()}},
                         grid.extent_min(), grid.extent_max());
}

RegionPartition RegionPartition::whole(const GridSpec& grid) {
  return RegionPartition({{"all", grid.extent_min(), grid.extent_max()}}, grid.extent_min(),
                         grid.extent_max());
}

std::size_t RegionPartition::locate(double x) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (x >= regions_[i].lo && x < regions_[i].hi) return i;
  throw InvalidArgument("position outside partition");
}

namespace {

std::vector<double> integrate(const std::vector<double>& values, double x0, double dx,
                              const RegionPartition& partition) {
  std::vector<double> out(partition.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i)
    out[partition.locate(x0 + static_cast<double>(i) * dx)] += values[i] * dx;
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return saa == sbb ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::vector<double> region_masses(const MatterDensityField& m, const RegionPartition& partition) {
  return integrate(m.values, m.extent_min, m.spacing, partition);
}

std::vector<double> region_integrals(const std::vector<double>& density, const GridSpec& grid,
                                     const RegionPartition& partition) {
  return integrate(density, grid.extent_min(), grid.spacing(), partition);
}

std::vector<RegionTailReport> structured_tails_report(const MatterDensityField& before,
                                                      const MatterDensityField& after,
                                                      const RegionPartition& partition) {
  if (before.values.size() != after.values.size() || before.spacing != after.spacing ||
      before.extent_min != after.extent_min)
    throw InvalidArgument("structured_tails_report: fields must share a grid");
  const auto wb = region_masses(before, partition);
  const auto wa = region_masses(after, partition);
  std::vector<RegionTailReport> out;
  for (std::size_t r = 0; r < partition.size(); ++r) {
    const auto& region = partition.regions()[r];
    if (wb[r] < 1e-12)
      throw DegenerateRegion("region '" + region.name + "' has no weight before");
    std::vector<double> fb, fa;
    for (std::size_t i = 0; i < before.values.size(); ++i) {
      if (partition.locate(before.coordinate(i)) != r) continue;
      fb.push_back(before.values[i] / wb[r]);
      fa.push_back(wa[r] > 0.0 ? after.values[i] / wa[r] : 0.0);
    }
    out.push_back({region.name, wb[r], wa[r], wa[r] / wb[r], pearson(fb, fa)});
  }
  return out;
}

}  // namespace ontosim
