#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ontosim {

using Complex = std::complex<double>;

/// Discretized configuration space for N particles on a periodic 1D axis each.
///
/// Points on one axis sit at x_i = extent_min + i * spacing, i = 0..M-1, so
/// the grid covers the half-open interval [extent_min, extent_max). The full
/// grid is the M^N tensor product, stored flat in row-major order: particle 0
/// is the slowest-varying coordinate, particle N-1 the fastest.
class GridSpec {
 public:
  static constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 26;

  GridSpec(int n_particles, double extent_min, double extent_max, std::size_t points_per_axis,
           std::size_t max_points = kDefaultMaxPoints);

  int n_particles() const { return n_particles_; }
  int space_dim() const { return 1; }
  /// Dimension of configuration space, N * space_dim.
  int config_dim() const { return n_particles_; }
  double extent_min() const { return extent_min_; }
  double extent_max() const { return extent_max_; }
  double length() const { return extent_max_ - extent_min_; }
  std::size_t points_per_axis() const { return points_; }
  double spacing() const { return length() / static_cast<double>(points_); }
  /// Volume element dx^D of one configuration-space cell.
  double cell_volume() const;
  std::size_t size() const { return size_; }

  double coordinate(std::size_t axis_index) const {
    return extent_min_ + static_cast<double>(axis_index) * spacing();
  }
  std::vector<double> axis() const;

  /// Flat-index stride of particle k's axis.
  std::size_t stride(int k) const { return strides_[static_cast<std::size_t>(k)]; }
  std::size_t axis_index(std::size_t flat, int k) const { return (flat / stride(k)) % points_; }

  /// Maps a position into [extent_min, extent_max).
  double wrap(double x) const;

  bool operator==(const GridSpec& other) const;

 private:
  int n_particles_;
  double extent_min_;
  double extent_max_;
  std::size_t points_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

struct WaveFunction {
  explicit WaveFunction(GridSpec g) : grid(std::move(g)), amplitudes(grid.size()) {}
  WaveFunction(GridSpec g, std::vector<Complex> amps, double t = 0.0);

  GridSpec grid;
  std::vector<Complex> amplitudes;
  double time = 0.0;
};

/// Positive per-particle masses, natural units.
class Masses {
 public:
  explicit Masses(std::vector<double> values);
  static Masses uniform(int n, double m = 1.0) { return Masses(std::vector<double>(n, m)); }

  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }
  double total() const;
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Real potential sampled on the configuration grid, tagged with the analytic
/// family that produced it.
struct PotentialField {
  GridSpec grid;
  std::vector<double> values;
  std::string family;
  std::map<std::string, double> params;

  static PotentialField free(const GridSpec& grid);
  /// Sum over particles of m_k w^2 (x_k - center)^2 / 2.
  static PotentialField harmonic(const GridSpec& grid, const Masses& masses, double omega,
                                 double center = 0.0);
  /// Two harmonic wells at +-half_separation joined at x = 0:
  /// m w^2 min((x-a)^2, (x+a)^2) / 2 per particle.
  static PotentialField double_well(const GridSpec& grid, const Masses& masses, double omega,
                                    double half_separation);
  /// Transverse profile of a two-slit screen: `height` everywhere on the axis
  /// except inside two openings of width `slit_width` centered at
  /// +-separation/2.
  static PotentialField barrier_with_slits(const GridSpec& grid, double separation,
                                           double slit_width, double height);

  /// Adds a constant offset (family unchanged).
  PotentialField shifted(double c) const;
};

WaveFunction normalize(const WaveFunction& psi);
double norm_squared(const WaveFunction& psi);
/// Marginal |psi|^2 density of particle k (0-based) on its axis.
std::vector<double> marginal_density(const WaveFunction& psi, int k);
/// <psi|H|psi> / <psi|psi>, kinetic part evaluated spectrally.
double expectation_energy(const WaveFunction& psi, const PotentialField& v, const Masses& masses);

/// Mean and standard deviation of particle k's marginal density.
struct Moments {
  double mean;
  double stddev;
};
Moments marginal_moments(const WaveFunction& psi, int k);

/// Tabulates a normalized-on-R Gaussian packet
/// (2 pi s^2)^(-1/4) exp(-(x-x0)^2 / (4 s^2) + i k0 x) on a 1D axis.
std::vector<Complex> gaussian_packet(const GridSpec& grid, double x0, double k0, double s);

/// Builds a product state psi(x_1..x_N) = prod_k f_k(x_k) from per-axis factors.
WaveFunction product_state(const GridSpec& grid, const std::vector<std::vector<Complex>>& factors);

}  // namespace ontosim
