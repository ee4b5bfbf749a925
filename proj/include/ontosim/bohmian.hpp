#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ontosim/grid.hpp"
#include "ontosim/schrodinger.hpp"
#include "ontosim/spectral.hpp"
#include "ontosim/stats.hpp"

namespace ontosim {

struct ParticleConfiguration {
  std::vector<double> positions;
  double time = 0.0;
};

/// Sampled path of one configuration. positions holds times.size() rows of
/// N coordinates each.
struct Trajectory {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  int n_particles = 1;
  std::vector<double> times;
  std::vector<double> positions;
  /// Integration steps in which at least one RK4 stage hit a node region.
  std::size_t node_steps = 0;

  std::span<const double> at(std::size_t sample) const {
    return std::span<const double>(positions).subspan(sample * static_cast<std::size_t>(n_particles),
                                                      static_cast<std::size_t>(n_particles));
  }
};

/// Relative |psi|^2 threshold below which the guiding velocity is not trusted.
inline constexpr double kNodeEpsilon = 1e-12;

/// A wave-function snapshot prepared for velocity queries: amplitudes plus
/// spectrally computed gradients along every particle axis.
class GuidanceField {
 public:
  GuidanceField(const WaveFunction& psi, const SpectralTransform& fft);
  explicit GuidanceField(const WaveFunction& psi);

  struct Velocity {
    std::vector<double> v;
    bool node = false;
  };

  /// Evaluates the guiding equation v_k = Im(psi* d_k psi / |psi|^2) / m_k at
  /// configuration q, with psi and its gradient multilinearly interpolated
  /// (periodic). Sets node when the interpolated |psi|^2 falls below
  /// kNodeEpsilon * max |psi|^2; v is then left unspecified.
  void velocity(std::span<const double> q, const Masses& masses, std::span<double> out,
                bool& node) const;
  Velocity velocity(std::span<const double> q, const Masses& masses) const;

  const GridSpec& grid() const { return grid_; }
  double time() const { return time_; }

 private:
  GridSpec grid_;
  double time_;
  std::vector<Complex> psi_;
  std::vector<std::vector<Complex>> gradient_;
  double node_threshold_;
};

/// Guiding velocities for a configuration; convenience wrapper building a
/// GuidanceField.
GuidanceField::Velocity velocity_field(const WaveFunction& psi,
                                       std::span<const double> q, const Masses& masses);

/// Result of one RK4 step. last_velocity carries the most recent finite
/// velocity, used in place of any stage that lands in a node region.
struct AdvanceResult {
  std::vector<double> positions;
  bool node = false;
};

/// Classical RK4 step of the guiding equation using fields at t, t+dt/2 and
/// t+dt. Positions are wrapped into the grid extent.
AdvanceResult advance_configuration(const GuidanceField& at_t, const GuidanceField& at_mid,
                                    const GuidanceField& at_next, std::span<const double> q,
                                    double dt, const Masses& masses,
                                    std::vector<double>& last_velocity);

AdvanceResult advance_configuration(const WaveFunction& psi_t, const WaveFunction& psi_mid,
                                    const WaveFunction& psi_next, std::span<const double> q,
                                    double dt, const Masses& masses);

/// Draws i.i.d. configurations from |psi0|^2: inverse CDF over the flattened
/// grid, then uniform jitter within the chosen cell (cells are centered on
/// grid points). Sample i uses RngStream(seed, i).
std::vector<ParticleConfiguration> sample_initial_positions(const WaveFunction& psi0,
                                                            std::size_t count,
                                                            std::uint64_t seed);

struct EnsembleResult {
  std::vector<Trajectory> trajectories;
  /// Wave function at every sample time (shared by all trajectories).
  std::vector<WaveFunction> snapshots;
  std::size_t node_steps = 0;
  std::size_t trajectories_with_nodes = 0;
};

/// Evolves the wave once and n_traj configurations alongside it, recording
/// samples at t = 0 and every config.steps_per_output steps. Trajectory i is a
/// function of (seed, i) only.
EnsembleResult run_ensemble(const WaveFunction& psi0, const PotentialField& v,
                            const Masses& masses, double t_final, std::size_t n_traj,
                            std::uint64_t seed, const PropagatorConfig& config);

/// Bins positions of one particle and compares them with a grid density by
/// chi-square. Positions are assigned to the grid cell centered on their
/// nearest point; the occupied cell range is split into `bins` runs of equal
/// cell count, with the outer bins extended to the grid edges.
struct BinnedComparison {
  GofReport report;
  std::vector<double> edges;          ///< bin edges (cell boundaries)
  std::vector<std::uint64_t> counts;  ///< observed per bin
  std::vector<double> expected;       ///< probability per bin
};
BinnedComparison binned_density_test(std::span<const double> positions,
                                     const std::vector<double>& density, const GridSpec& grid,
                                     int bins);

/// Equivariance check at snapshot `sample`: positions of particle k against
/// the marginal |psi_t|^2.
BinnedComparison equivariance_test(const EnsembleResult& ensemble, std::size_t sample, int k,
                                   int bins);

/// Counts consecutive samples whose displacement (minimum-image) exceeds
/// v_max * sample spacing.
std::size_t continuity_violations(const Trajectory& traj, double v_max, double extent_length);

}  // namespace ontosim
