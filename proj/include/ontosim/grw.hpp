#pragma once

#include <cstdint>
#include <vector>

#include "ontosim/grid.hpp"
#include "ontosim/rng.hpp"
#include "ontosim/schrodinger.hpp"

namespace ontosim {

/// Collapse parameters in natural units (hbar = 1).
struct GrwParams {
  double lambda_rate = 1.0;  ///< per-particle jump rate
  double sigma = 1.0;        ///< localization width
  std::uint64_t seed = 0;

  void validate() const;
};

/// Physical-unit conversions for the collapse constants.
namespace si {
inline constexpr double kDefaultLambda = 1e-16;  ///< s^-1
inline constexpr double kDefaultSigma = 1e-7;    ///< m
/// Converts a rate in s^-1 to natural units given the time unit in seconds.
inline double rate_to_natural(double rate_per_second, double time_unit_seconds) {
  return rate_per_second * time_unit_seconds;
}
inline double length_to_natural(double meters, double length_unit_meters) {
  return meters / length_unit_meters;
}
}  // namespace si

struct CollapseEvent {
  double time = 0.0;
  int particle = 0;  ///< 0-based
  double center = 0.0;
  /// p(center) at the moment of the jump.
  double weight = 0.0;
};

/// Waiting time to the next jump: exponential with rate N * lambda.
double next_jump_interval(int n_particles, double lambda_rate, RngStream& rng);

/// Uniform on {0, ..., N-1}.
int pick_collapsing_particle(int n_particles, RngStream& rng);

/// (2 pi s^2)^(-1/2) exp(-d^2 / (2 s^2)) summed over the periodic images of
/// d on an axis of the given length.
double periodic_gaussian(double d, double sigma, double length);

/// Localization operator L^x_{x_k} on the whole configuration grid; depends on
/// coordinate k only.
std::vector<double> localization_weights(const GridSpec& grid, double center, int k,
                                         double sigma);

/// Collapse-center density p(x) = ||(L^x_{x_k})^{1/2} psi||^2 at every grid
/// point x of axis k: the k-marginal of |psi|^2 circularly convolved with the
/// localization kernel.
std::vector<double> collapse_center_distribution(const WaveFunction& psi, int k, double sigma);

/// psi' = L^{1/2} psi / ||L^{1/2} psi||. Throws ZeroOverlap when the squared
/// norm of L^{1/2} psi is below 1e-300.
WaveFunction apply_collapse(const WaveFunction& psi, int k, double center, double sigma);

/// Draws a grid point from the discrete density p by inverse CDF.
std::size_t sample_center_index(const std::vector<double>& p, RngStream& rng);

/// A collapse applied at a fixed time regardless of the Poisson schedule; the
/// center is still drawn from p(x).
struct ForcedCollapse {
  double time = 0.0;
  int particle = 0;
};

struct GrwRunOptions {
  PropagatorConfig propagation;
  std::vector<ForcedCollapse> forced;
  /// Keep the wave function immediately before and after every collapse.
  bool record_collapse_states = false;
};

struct GrwRun {
  std::vector<WaveFunction> snapshots;
  std::vector<CollapseEvent> events;
  std::vector<double> energies;  ///< <H> at each snapshot
  /// (before, after) pairs, one per event, when record_collapse_states is set.
  std::vector<std::pair<WaveFunction, WaveFunction>> collapse_states;
};

/// Alternates Strang steps with collapses. Jump times are scheduled from an
/// exponential clock of rate N lambda on RngStream(seed, 0) and applied at the
/// nearest step boundary; only jumps scheduled at or before t_final occur.
/// ZeroOverlap propagates with the event time and particle in the message.
GrwRun run_grw(const WaveFunction& psi0, const PotentialField& v, const Masses& masses,
               double t_final, const GrwParams& params, const GrwRunOptions& options);

}  // namespace ontosim
