#include "ontosim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ontosim/errors.hpp"
#include "ontosim/spectral.hpp"

namespace ontosim {

namespace {

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

}  // namespace

GridSpec::GridSpec(int n_particles, double extent_min, double extent_max,
                   std::size_t points_per_axis, std::size_t max_points)
    : n_particles_(n_particles),
      extent_min_(extent_min),
      extent_max_(extent_max),
      points_(points_per_axis) {
  if (n_particles < 1) throw InvalidGrid("n_particles must be >= 1");
  if (!std::isfinite(extent_min) || !std::isfinite(extent_max) || !(extent_max > extent_min))
    throw InvalidGrid("extent_max must exceed extent_min");
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis))
    throw InvalidGrid("points_per_axis must be a power of two >= 8, got " +
                      std::to_string(points_per_axis));
  std::size_t total = 1;
  for (int k = 0; k < n_particles; ++k) {
    if (total > max_points / points_per_axis)
      throw MemoryCap("grid of " + std::to_string(points_per_axis) + "^" +
                      std::to_string(n_particles) + " points exceeds cap " +
                      std::to_string(max_points));
    total *= points_per_axis;
  }
  size_ = total;
  strides_.assign(static_cast<std::size_t>(n_particles), 1);
  for (int k = n_particles - 2; k >= 0; --k)
    strides_[static_cast<std::size_t>(k)] = strides_[static_cast<std::size_t>(k + 1)] * points_;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), config_dim()); }

std::vector<double> GridSpec::axis() const {
  std::vector<double> xs(points_);
  for (std::size_t i = 0; i < points_; ++i) xs[i] = coordinate(i);
  return xs;
}

double GridSpec::wrap(double x) const {
  double r = std::fmod(x - extent_min_, length());
  if (r < 0) r += length();
  double w = extent_min_ + r;
  return w >= extent_max_ ? extent_min_ : w;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return n_particles_ == other.n_particles_ && extent_min_ == other.extent_min_ &&
         extent_max_ == other.extent_max_ && points_ == other.points_;
}

WaveFunction::WaveFunction(GridSpec g, std::vector<Complex> amps, double t)
    : grid(std::move(g)), amplitudes(std::move(amps)), time(t) {
  if (amplitudes.size() != grid.size())
    throw InvalidArgument("amplitude count " + std::to_string(amplitudes.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
}

Masses::Masses(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("masses: at least one particle required");
  for (double m : values_)
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("masses must be positive");
}

double Masses::total() const {
  double s = 0;
  for (double m : values_) s += m;
  return s;
}

namespace {

template <class PerParticle>
PotentialField separable(const GridSpec& grid, PerParticle per_particle, std::string family,
                         std::map<std::string, double> params) {
  PotentialField v{grid, std::vector<double>(grid.size(), 0.0), std::move(family),
                   std::move(params)};
  const std::size_t m = grid.points_per_axis();
  for (int k = 0; k < grid.n_particles(); ++k) {
    std::vector<double> axis_values(m);
    for (std::size_t i = 0; i < m; ++i) axis_values[i] = per_particle(k, grid.coordinate(i));
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
      v.values[idx] += axis_values[grid.axis_index(idx, k)];
  }
  return v;
}

}  // namespace

PotentialField PotentialField::free(const GridSpec& grid) {
  return PotentialField{grid, std::vector<double>(grid.size(), 0.0), "free", {}};
}

PotentialField PotentialField::harmonic(const GridSpec& grid, const Masses& masses, double omega,
                                        double center) {
  if (!(omega > 0.0)) throw InvalidArgument("harmonic: omega must be positive");
  if (masses.size() != static_cast<std::size_t>(grid.n_particles()))
    throw InvalidArgument("harmonic: one mass per particle required");
  return separable(
      grid,
      [&](int k, double x) {
        return 0.5 * masses[static_cast<std::size_t>(k)] * omega * omega * (x - center) *
               (x - center);
      },
      "harmonic", {{"omega", omega}, {"center", center}});
}

PotentialField PotentialField::double_well(const GridSpec& grid, const Masses& masses,
                                           double omega, double half_separation) {
  if (!(omega > 0.0)) throw InvalidArgument("double_well: omega must be positive");
  if (!(half_separation > 0.0))
    throw InvalidArgument("double_well: half_separation must be positive");
  if (masses.size() != static_cast<std::size_t>(grid.n_particles()))
    throw InvalidArgument("double_well: one mass per particle required");
  return separable(
      grid,
      [&](int k, double x) {
        const double d = std::abs(x) - half_separation;
        return 0.5 * masses[static_cast<std::size_t>(k)] * omega * omega * d * d;
      },
      "double-well", {{"omega", omega}, {"half_separation", half_separation}});
}

PotentialField PotentialField::barrier_with_slits(const GridSpec& grid, double separation,
                                                  double slit_width, double height) {
  if (!(slit_width > 0.0) || !(separation > slit_width))
    throw InvalidArgument("barrier_with_slits: need separation > slit_width > 0");
  if (!(height >= 0.0)) throw InvalidArgument("barrier_with_slits: height must be >= 0");
  const double half = 0.5 * separation;
  return separable(
      grid,
      [&](int, double x) {
        const bool open = std::abs(x - half) < 0.5 * slit_width ||
                          std::abs(x + half) < 0.5 * slit_width;
        return open ? 0.0 : height;
      },
      "barrier-with-slits",
      {{"separation", separation}, {"slit_width", slit_width}, {"height", height}});
}

PotentialField PotentialField::shifted(double c) const {
  PotentialField out = *this;
  for (double& v : out.values) v += c;
  return out;
}

double norm_squared(const WaveFunction& psi) {
  double s = 0.0;
  for (const Complex& a : psi.amplitudes) s += std::norm(a);
  return s * psi.grid.cell_volume();
}

WaveFunction normalize(const WaveFunction& psi) {
  const double n2 = norm_squared(psi);
  if (!(n2 >= 1e-300)) throw ZeroNorm("cannot normalize: norm^2 = " + std::to_string(n2));
  WaveFunction out = psi;
  const double scale = 1.0 / std::sqrt(n2);
  for (Complex& a : out.amplitudes) a *= scale;
  return out;
}

std::vector<double> marginal_density(const WaveFunction& psi, int k) {
  const GridSpec& g = psi.grid;
  if (k < 0 || k >= g.n_particles())
    throw IndexOutOfRange("particle index " + std::to_string(k) + " outside [0, " +
                          std::to_string(g.n_particles()) + ")");
  std::vector<double> rho(g.points_per_axis(), 0.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    rho[g.axis_index(idx, k)] += std::norm(psi.amplitudes[idx]);
  // Integrating out the other N-1 axes contributes dx^(N-1).
  const double w = std::pow(g.spacing(), g.config_dim() - 1);
  for (double& r : rho) r *= w;
  return rho;
}

Moments marginal_moments(const WaveFunction& psi, int k) {
  const auto rho = marginal_density(psi, k);
  const double dx = psi.grid.spacing();
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double x = psi.grid.coordinate(i);
    m0 += rho[i] * dx;
    m1 += rho[i] * x * dx;
    m2 += rho[i] * x * x * dx;
  }
  const double mean = m1 / m0;
  return {mean, std::sqrt(std::max(0.0, m2 / m0 - mean * mean))};
}

double expectation_energy(const WaveFunction& psi, const PotentialField& v, const Masses& masses) {
  const GridSpec& g = psi.grid;
  if (!(v.grid == g)) throw InvalidArgument("potential grid does not match wave function grid");
  if (masses.size() != static_cast<std::size_t>(g.n_particles()))
    throw InvalidArgument("one mass per particle required");

  double potential = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = std::norm(psi.amplitudes[i]);
    potential += p * v.values[i];
    weight += p;
  }
  if (!(weight > 0.0)) throw ZeroNorm("expectation_energy of a zero state");

  SpectralTransform fft(g);
  std::vector<Complex> hat = psi.amplitudes;
  fft.forward(hat);
  const auto ks = wavenumbers(g);
  double kinetic = 0.0, weight_hat = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = std::norm(hat[i]);
    double t = 0.0;
    for (int k = 0; k < g.n_particles(); ++k) {
      const double kk = ks[g.axis_index(i, k)];
      t += kk * kk / (2.0 * masses[static_cast<std::size_t>(k)]);
    }
    kinetic += p * t;
    weight_hat += p;
  }
  return kinetic / weight_hat + potential / weight;
}

std::vector<Complex> gaussian_packet(const GridSpec& grid, double x0, double k0, double s) {
  if (!(s > 0.0)) throw InvalidArgument("gaussian_packet: width must be positive");
  const double amp = std::pow(2.0 * std::numbers::pi * s * s, -0.25);
  std::vector<Complex> f(grid.points_per_axis());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = grid.coordinate(i);
    const double d = x - x0;
    f[i] = amp * std::exp(Complex(-d * d / (4.0 * s * s), k0 * x));
  }
  return f;
}

WaveFunction product_state(const GridSpec& grid,
                           const std::vector<std::vector<Complex>>& factors) {
  if (factors.size() != static_cast<std::size_t>(grid.n_particles()))
    throw InvalidArgument("product_state: one factor per particle required");
  for (const auto& f : factors)
    if (f.size() != grid.points_per_axis())
      throw InvalidArgument("product_state: factor length must equal points_per_axis");
  WaveFunction psi(grid);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    Complex a = 1.0;
    for (int k = 0; k < grid.n_particles(); ++k)
      a *= factors[static_cast<std::size_t>(k)][grid.axis_index(idx, k)];
    psi.amplitudes[idx] = a;
  }
  return psi;
}

}  // namespace ontosim
