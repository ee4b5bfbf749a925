#include "ontosim/grw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ontosim/errors.hpp"
#include "ontosim/spectral.hpp"

namespace ontosim {

void GrwParams::validate() const {
  if (!(lambda_rate > 0.0) || !std::isfinite(lambda_rate))
    throw InvalidArgument("lambda_rate must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
}

double next_jump_interval(int n_particles, double lambda_rate, RngStream& rng) {
  if (n_particles < 1) throw InvalidArgument("n_particles must be >= 1");
  return rng.exponential(static_cast<double>(n_particles) * lambda_rate);
}

int pick_collapsing_particle(int n_particles, RngStream& rng) {
  if (n_particles < 1) throw InvalidArgument("n_particles must be >= 1");
  return static_cast<int>(rng.below(static_cast<std::uint64_t>(n_particles)));
}

double periodic_gaussian(double d, double sigma, double length) {
  if (sigma < 0.25 * length) {
    // Image sum; images beyond ~40 sigma underflow.
    const long long images = static_cast<long long>(std::ceil(40.0 * sigma / length)) + 1;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
    double s = 0.0;
    for (long long n = -images; n <= images; ++n) {
      const double e = d + static_cast<double>(n) * length;
      s += std::exp(-e * e / (2.0 * sigma * sigma));
    }
    return norm * s;
  }
  // Poisson-summed form, fast for broad kernels.
  const double a = 2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma / (length * length);
  double s = 1.0;
  for (int j = 1; j < 1000; ++j) {
    const double term = std::exp(-a * j * j);
    if (term < 1e-20) break;
    s += 2.0 * term * std::cos(2.0 * std::numbers::pi * j * d / length);
  }
  return s / length;
}

std::vector<double> localization_weights(const GridSpec& grid, double center, int k,
                                         double sigma) {
  if (k < 0 || k >= grid.n_particles()) throw IndexOutOfRange("particle index out of range");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  std::vector<double> axis(grid.points_per_axis());
  for (std::size_t i = 0; i < axis.size(); ++i)
    axis[i] = periodic_gaussian(grid.coordinate(i) - center, sigma, grid.length());
  std::vector<double> w(grid.size());
  for (std::size_t idx = 0; idx < w.size(); ++idx) w[idx] = axis[grid.axis_index(idx, k)];
  return w;
}

std::vector<double> collapse_center_distribution(const WaveFunction& psi, int k, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const GridSpec& g = psi.grid;
  const auto rho = marginal_density(psi, k);
  const std::size_t m = g.points_per_axis();
  const double dx = g.spacing();

  // p(x_i) = sum_j rho_j K(x_i - x_j) dx, a circular convolution on the axis.
  GridSpec axis_grid(1, g.extent_min(), g.extent_max(), m);
  SpectralTransform fft(axis_grid);
  std::vector<Complex> a(m), b(m);
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = rho[j];
    b[j] = periodic_gaussian(static_cast<double>(j) * dx, sigma, g.length());
  }
  fft.forward(a);
  fft.forward(b);
  for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
  fft.backward(a);
  std::vector<double> p(m);
  const double scale = dx / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = std::max(0.0, a[i].real() * scale);
  return p;
}

WaveFunction apply_collapse(const WaveFunction& psi, int k, double center, double sigma) {
  const GridSpec& g = psi.grid;
  if (k < 0 || k >= g.n_particles()) throw IndexOutOfRange("particle index out of range");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  std::vector<double> root(g.points_per_axis());
  for (std::size_t i = 0; i < root.size(); ++i)
    root[i] = std::sqrt(periodic_gaussian(g.coordinate(i) - center, sigma, g.length()));

  WaveFunction out = psi;
  double n2 = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    out.amplitudes[idx] *= root[g.axis_index(idx, k)];
    n2 += std::norm(out.amplitudes[idx]);
  }
  n2 *= g.cell_volume();
  if (!(n2 >= 1e-300)) {
    std::ostringstream msg;
    msg << "collapse at x = " << center << " on particle " << k << " has zero overlap with the state";
    throw ZeroOverlap(msg.str());
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (Complex& a : out.amplitudes) a *= scale;
  return out;
}

std::size_t sample_center_index(const std::vector<double>& p, RngStream& rng) {
  double total = 0.0;
  for (double x : p) total += x;
  if (!(total > 0.0)) throw ZeroNorm("collapse-center density is zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the last partial sum.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return p.size() - 1;
}

GrwRun run_grw(const WaveFunction& psi0, const PotentialField& v, const Masses& masses,
               double t_final, const GrwParams& params, const GrwRunOptions& options) {
  params.validate();
  const PropagatorConfig& cfg = options.propagation;
  cfg.validate();
  const GridSpec& g = psi0.grid;
  const int n = g.n_particles();
  const long long steps = step_count(t_final, cfg.dt);
  const double t0 = psi0.time;

  std::vector<ForcedCollapse> forced = options.forced;
  std::stable_sort(forced.begin(), forced.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  for (const auto& f : forced)
    if (f.particle < 0 || f.particle >= n) throw IndexOutOfRange("forced collapse particle");

  RngStream rng(params.seed, 0);
  // Events land on the step boundary nearest their scheduled time, never
  // before the first step.
  auto boundary_of = [&](double t) { return std::max(1LL, std::llround((t - t0) / cfg.dt)); };

  GrwRun run;
  run.snapshots.push_back(psi0);
  run.energies.push_back(expectation_energy(psi0, v, masses));
  if (steps == 0) return run;

  double next_jump = t0 + next_jump_interval(n, params.lambda_rate, rng);
  std::size_t next_forced = 0;
  SplitOperator op(v, masses, cfg.dt);
  WaveFunction cur = psi0;

  auto collapse = [&](int particle, double time) {
    const auto p = collapse_center_distribution(cur, particle, params.sigma);
    const std::size_t idx = sample_center_index(p, rng);
    const double center = g.coordinate(idx);
    try {
      if (options.record_collapse_states) {
        WaveFunction after = apply_collapse(cur, particle, center, params.sigma);
        run.collapse_states.emplace_back(cur, after);
        cur = std::move(after);
      } else {
        cur = apply_collapse(cur, particle, center, params.sigma);
      }
    } catch (const ZeroOverlap& e) {
      std::ostringstream msg;
      msg << e.what() << " (event at t = " << time << ")";
      throw ZeroOverlap(msg.str());
    }
    run.events.push_back({time, particle, center, p[idx]});
  };

  for (long long s = 1; s <= steps; ++s) {
    op.advance(cur);
    cur.time = t0 + static_cast<double>(s) * cfg.dt;
    while (next_jump <= t0 + t_final && boundary_of(next_jump) <= s) {
      collapse(pick_collapsing_particle(n, rng), cur.time);
      next_jump += next_jump_interval(n, params.lambda_rate, rng);
    }
    while (next_forced < forced.size() && boundary_of(forced[next_forced].time) <= s) {
      collapse(forced[next_forced].particle, cur.time);
      ++next_forced;
    }
    if (s % cfg.steps_per_output == 0 || s == steps) {
      run.snapshots.push_back(cur);
      run.energies.push_back(expectation_energy(cur, v, masses));
    }
  }
  return run;
}

}  // namespace ontosim
