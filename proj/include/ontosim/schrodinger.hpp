#pragma once

#include <filesystem>
#include <vector>

#include "ontosim/grid.hpp"
#include "ontosim/spectral.hpp"

namespace ontosim {

struct PropagatorConfig {
  double dt = 1e-3;
  int steps_per_output = 1;

  void validate() const;
};

/// Strang-split spectral propagator for a fixed (grid, V, masses, dt):
///   e^{-i V dt/2} F^{-1} e^{-i T(k) dt} F e^{-i V dt/2}.
/// Phase tables are built once; advance() is const and may be called from
/// several threads on distinct wave functions.
class SplitOperator {
 public:
  SplitOperator(const PotentialField& v, const Masses& masses, double dt);

  void advance(WaveFunction& psi) const;
  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }
  const SpectralTransform& transform() const { return fft_; }

 private:
  GridSpec grid_;
  double dt_;
  SpectralTransform fft_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> kinetic_;  // includes the 1/size FFT normalization
};

/// One Strang step of length dt; the input is not modified.
WaveFunction step(const WaveFunction& psi, const PotentialField& v, const Masses& masses,
                  double dt);

/// Number of dt steps that lands within dt/2 of t_final.
long long step_count(double t_final, double dt);

/// Propagates to t_final and returns deep-copied snapshots at t = 0 and every
/// steps_per_output steps, plus the final state if it is off-cadence.
std::vector<WaveFunction> evolve(const WaveFunction& psi, const PotentialField& v,
                                 const Masses& masses, double t_final,
                                 const PropagatorConfig& config);

/// Writes snap_NNNNN.bin dumps and an index.json listing (file, time) pairs.
void write_snapshot_series(const std::filesystem::path& dir,
                           const std::vector<WaveFunction>& snapshots);

/// Closed-form free evolution (V = 0) of the packet
/// (2 pi s0^2)^(-1/4) exp(-(x-x0)^2/(4 s0^2) + i k0 x), tabulated on a 1D grid
/// at time t. Not renormalized on the grid.
WaveFunction analytic_free_gaussian(const GridSpec& grid, double x0, double k0, double s0,
                                    double m, double t);

/// Density width s(t) = s0 sqrt(1 + (t / (2 m s0^2))^2) of the free packet.
double free_gaussian_width(double s0, double m, double t);

/// Closed-form coherent state of the oscillator m w^2 x^2 / 2: the ground
/// state displaced to (x0, p0) at t = 0, evaluated at time t.
WaveFunction analytic_coherent_state(const GridSpec& grid, double x0, double p0, double m,
                                     double omega, double t);

/// L2 distance sqrt(sum |a - b|^2 dx^D).
double l2_distance(const WaveFunction& a, const WaveFunction& b);

}  // namespace ontosim
