#pragma once

#include <string>
#include <vector>

#include "ontosim/grid.hpp"
#include "ontosim/grw.hpp"

namespace ontosim {

/// Matter density m(x) = sum_k m_k rho_k(x) on the physical axis (mass per
/// unit length), sampled at the grid's axis points.
struct MatterDensityField {
  double extent_min = 0.0;
  double spacing = 1.0;
  std::vector<double> values;
  double time = 0.0;

  double coordinate(std::size_t i) const { return extent_min + static_cast<double>(i) * spacing; }
  double total() const;
};

MatterDensityField matter_density(const WaveFunction& psi, const Masses& masses);

/// A flash of the flash ontology. particle is bookkeeping only: flashes carry
/// no identity over time.
struct FlashEvent {
  double time = 0.0;
  double position = 0.0;
  int particle = 0;
};

std::vector<FlashEvent> flashes_from_events(const std::vector<CollapseEvent>& events);

struct Region {
  std::string name;
  double lo;
  double hi;
};

/// Named half-open intervals [lo, hi) that tile the grid extent exactly.
class RegionPartition {
 public:
  RegionPartition(std::vector<Region> regions, double extent_min, double extent_max);
  /// Splits [extent_min, extent_max) at `cut` into "left" and "right".
  static RegionPartition halves(const GridSpec& grid, double cut = 0.0);
  static RegionPartition whole(const GridSpec& grid);

  const std::vector<Region>& regions() const { return regions_; }
  std::size_t size() const { return regions_.size(); }
  /// Region index containing x.
  std::size_t locate(double x) const;

 private:
  std::vector<Region> regions_;
};

/// Integral of m over each region (grid points assigned by coordinate).
std::vector<double> region_masses(const MatterDensityField& m, const RegionPartition& partition);

/// Mass per region of a plain density sampled on an axis (same convention).
std::vector<double> region_integrals(const std::vector<double>& density, const GridSpec& grid,
                                     const RegionPartition& partition);

struct RegionTailReport {
  std::string name;
  double weight_before = 0.0;
  double weight_after = 0.0;
  double weight_ratio = 0.0;
  /// Pearson correlation of the region-restricted, mass-normalized fields.
  double shape_correlation = 0.0;
};

/// Compares two matter densities region by region. Throws DegenerateRegion if
/// a region has before-weight < 1e-12.
std::vector<RegionTailReport> structured_tails_report(const MatterDensityField& before,
                                                      const MatterDensityField& after,
                                                      const RegionPartition& partition);

}  // namespace ontosim
