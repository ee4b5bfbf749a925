#include "ontosim/schrodinger.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ontosim/errors.hpp"
#include "ontosim/field_io.hpp"

namespace ontosim {

void PropagatorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (steps_per_output < 1) throw InvalidArgument("steps_per_output must be >= 1");
}

SplitOperator::SplitOperator(const PotentialField& v, const Masses& masses, double dt)
    : grid_(v.grid), dt_(dt), fft_(v.grid) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (masses.size() != static_cast<std::size_t>(grid_.n_particles()))
    throw InvalidArgument("one mass per particle required");
  half_potential_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i)
    half_potential_[i] = std::polar(1.0, -0.5 * v.values[i] * dt);

  const auto ks = wavenumbers(grid_);
  const double inv = 1.0 / static_cast<double>(grid_.size());
  kinetic_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    double t = 0.0;
    for (int k = 0; k < grid_.n_particles(); ++k) {
      const double kk = ks[grid_.axis_index(i, k)];
      t += kk * kk / (2.0 * masses[static_cast<std::size_t>(k)]);
    }
    kinetic_[i] = std::polar(inv, -t * dt);
  }
}

void SplitOperator::advance(WaveFunction& psi) const {
  auto& a = psi.amplitudes;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= half_potential_[i];
  fft_.forward(a);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= kinetic_[i];
  fft_.backward(a);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= half_potential_[i];
  psi.time += dt_;
}

WaveFunction step(const WaveFunction& psi, const PotentialField& v, const Masses& masses,
                  double dt) {
  if (!(v.grid == psi.grid)) throw InvalidArgument("potential grid does not match");
  SplitOperator op(v, masses, dt);
  WaveFunction out = psi;
  op.advance(out);
  return out;
}

long long step_count(double t_final, double dt) {
  if (t_final < 0.0) throw InvalidArgument("t_final must be >= 0");
  return std::llround(t_final / dt);
}

std::vector<WaveFunction> evolve(const WaveFunction& psi, const PotentialField& v,
                                 const Masses& masses, double t_final,
                                 const PropagatorConfig& config) {
  config.validate();
  const long long n = step_count(t_final, config.dt);
  std::vector<WaveFunction> snapshots{psi};
  if (n == 0) return snapshots;

  SplitOperator op(v, masses, config.dt);
  WaveFunction cur = psi;
  const double t0 = psi.time;
  for (long long s = 1; s <= n; ++s) {
    op.advance(cur);
    // Pin the clock to t0 + s*dt so it does not accumulate rounding drift.
    cur.time = t0 + static_cast<double>(s) * config.dt;
    if (s % config.steps_per_output == 0 || s == n) snapshots.push_back(cur);
  }
  return snapshots;
}

void write_snapshot_series(const std::filesystem::path& dir,
                           const std::vector<WaveFunction>& snapshots) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.bin", i);
    write_dump(dir / name, snapshots[i]);
    index.push_back({{"file", name}, {"time", snapshots[i].time}});
  }
  std::ofstream out(dir / "index.json");
  out << nlohmann::json{{"snapshots", index}}.dump(2) << '\n';
}

WaveFunction analytic_free_gaussian(const GridSpec& grid, double x0, double k0, double s0,
                                    double m, double t) {
  if (grid.n_particles() != 1) throw InvalidArgument("analytic_free_gaussian is single-particle");
  if (!(s0 > 0.0) || !(m > 0.0)) throw InvalidArgument("need s0 > 0 and m > 0");
  const double tau = t / (2.0 * m * s0 * s0);
  const Complex spread(1.0, tau);
  const Complex pre = std::pow(2.0 * std::numbers::pi * s0 * s0, -0.25) / std::sqrt(spread);
  const double v = k0 / m;
  WaveFunction psi(grid);
  psi.time = t;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i);
    const double d = x - x0 - v * t;
    const Complex exponent =
        -d * d / (4.0 * s0 * s0 * spread) + Complex(0.0, k0 * x - k0 * k0 * t / (2.0 * m));
    psi.amplitudes[i] = pre * std::exp(exponent);
  }
  return psi;
}

double free_gaussian_width(double s0, double m, double t) {
  const double tau = t / (2.0 * m * s0 * s0);
  return s0 * std::sqrt(1.0 + tau * tau);
}

WaveFunction analytic_coherent_state(const GridSpec& grid, double x0, double p0, double m,
                                     double omega, double t) {
  if (grid.n_particles() != 1) throw InvalidArgument("analytic_coherent_state is single-particle");
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  const double q = x0 * c + p0 / (m * omega) * s;
  const double p = p0 * c - m * omega * x0 * s;
  const double amp = std::pow(m * omega / std::numbers::pi, 0.25);
  WaveFunction psi(grid);
  psi.time = t;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i);
    const double d = x - q;
    psi.amplitudes[i] =
        amp * std::exp(Complex(-0.5 * m * omega * d * d, p * x - 0.5 * p * q - 0.5 * omega * t));
  }
  return psi;
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("l2_distance: grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(s * a.grid.cell_volume());
}

}  // namespace ontosim
