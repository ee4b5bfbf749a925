#include "ontosim/bohmian.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ontosim/errors.hpp"
#include "ontosim/parallel.hpp"
#include "ontosim/rng.hpp"

namespace ontosim {

namespace {

constexpr int kMaxParticles = 8;

struct Stencil {
  std::array<std::size_t, kMaxParticles> lo{}, hi{};
  std::array<double, kMaxParticles> frac{};
};

Stencil locate(const GridSpec& g, std::span<const double> q) {
  Stencil s;
  const double dx = g.spacing();
  const auto m = static_cast<long long>(g.points_per_axis());
  for (int k = 0; k < g.n_particles(); ++k) {
    const double u = (q[static_cast<std::size_t>(k)] - g.extent_min()) / dx;
    const double fl = std::floor(u);
    long long i0 = static_cast<long long>(fl) % m;
    if (i0 < 0) i0 += m;
    s.lo[static_cast<std::size_t>(k)] = static_cast<std::size_t>(i0);
    s.hi[static_cast<std::size_t>(k)] = static_cast<std::size_t>((i0 + 1) % m);
    s.frac[static_cast<std::size_t>(k)] = u - fl;
  }
  return s;
}

}  // namespace

GuidanceField::GuidanceField(const WaveFunction& psi, const SpectralTransform& fft)
    : grid_(psi.grid), time_(psi.time), psi_(psi.amplitudes) {
  if (grid_.n_particles() > kMaxParticles)
    throw InvalidArgument("guidance supports at most " + std::to_string(kMaxParticles) +
                          " particles");
  std::vector<Complex> hat = psi.amplitudes;
  fft.forward(hat);
  const auto ks = wavenumbers(grid_);
  const std::size_t m = grid_.points_per_axis();
  const double inv = 1.0 / static_cast<double>(grid_.size());
  gradient_.resize(static_cast<std::size_t>(grid_.n_particles()));
  for (int k = 0; k < grid_.n_particles(); ++k) {
    auto& d = gradient_[static_cast<std::size_t>(k)];
    d = hat;
    for (std::size_t idx = 0; idx < d.size(); ++idx) {
      const std::size_t j = grid_.axis_index(idx, k);
      d[idx] *= j == m / 2 ? Complex(0.0) : Complex(0.0, ks[j] * inv);
    }
    fft.backward(d);
  }
  double peak = 0.0;
  for (const Complex& a : psi_) peak = std::max(peak, std::norm(a));
  node_threshold_ = kNodeEpsilon * peak;
}

GuidanceField::GuidanceField(const WaveFunction& psi)
    : GuidanceField(psi, SpectralTransform(psi.grid)) {}

void GuidanceField::velocity(std::span<const double> q, const Masses& masses,
                             std::span<double> out, bool& node) const {
  const int n = grid_.n_particles();
  const Stencil s = locate(grid_, q);
  Complex value = 0.0;
  std::array<Complex, kMaxParticles> grad{};
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    std::size_t idx = 0;
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const bool upper = (corner >> k) & 1u;
      idx += (upper ? s.hi[ku] : s.lo[ku]) * grid_.stride(k);
      w *= upper ? s.frac[ku] : 1.0 - s.frac[ku];
    }
    value += w * psi_[idx];
    for (int k = 0; k < n; ++k)
      grad[static_cast<std::size_t>(k)] += w * gradient_[static_cast<std::size_t>(k)][idx];
  }
  const double density = std::norm(value);
  node = !(density >= node_threshold_) || density == 0.0;
  if (node) return;
  for (int k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out[ku] = (std::conj(value) * grad[ku]).imag() / density / masses[ku];
  }
}

GuidanceField::Velocity GuidanceField::velocity(std::span<const double> q,
                                                const Masses& masses) const {
  Velocity r;
  r.v.assign(static_cast<std::size_t>(grid_.n_particles()), 0.0);
  velocity(q, masses, r.v, r.node);
  return r;
}

GuidanceField::Velocity velocity_field(const WaveFunction& psi, std::span<const double> q,
                                       const Masses& masses) {
  if (q.size() != static_cast<std::size_t>(psi.grid.n_particles()))
    throw InvalidArgument("configuration size does not match particle count");
  return GuidanceField(psi).velocity(q, masses);
}

AdvanceResult advance_configuration(const GuidanceField& at_t, const GuidanceField& at_mid,
                                    const GuidanceField& at_next, std::span<const double> q,
                                    double dt, const Masses& masses,
                                    std::vector<double>& last_velocity) {
  const std::size_t n = q.size();
  if (last_velocity.size() != n) last_velocity.assign(n, 0.0);
  std::array<std::array<double, kMaxParticles>, 4> k{};
  std::array<double, kMaxParticles> probe{};
  AdvanceResult r;

  auto stage = [&](const GuidanceField& f, int s) {
    bool node = false;
    std::span<double> out(k[static_cast<std::size_t>(s)].data(), n);
    f.velocity(std::span<const double>(probe.data(), n), masses, out, node);
    if (node) {
      std::copy(last_velocity.begin(), last_velocity.end(), out.begin());
      r.node = true;
    } else {
      std::copy(out.begin(), out.end(), last_velocity.begin());
    }
  };

  std::copy(q.begin(), q.end(), probe.begin());
  stage(at_t, 0);
  for (std::size_t i = 0; i < n; ++i) probe[i] = q[i] + 0.5 * dt * k[0][i];
  stage(at_mid, 1);
  for (std::size_t i = 0; i < n; ++i) probe[i] = q[i] + 0.5 * dt * k[1][i];
  stage(at_mid, 2);
  for (std::size_t i = 0; i < n; ++i) probe[i] = q[i] + dt * k[2][i];
  stage(at_next, 3);

  r.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    r.positions[i] =
        at_t.grid().wrap(q[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]));
  return r;
}

AdvanceResult advance_configuration(const WaveFunction& psi_t, const WaveFunction& psi_mid,
                                    const WaveFunction& psi_next, std::span<const double> q,
                                    double dt, const Masses& masses) {
  SpectralTransform fft(psi_t.grid);
  GuidanceField a(psi_t, fft), b(psi_mid, fft), c(psi_next, fft);
  std::vector<double> last(q.size(), 0.0);
  return advance_configuration(a, b, c, q, dt, masses, last);
}

std::vector<ParticleConfiguration> sample_initial_positions(const WaveFunction& psi0,
                                                            std::size_t count,
                                                            std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be >= 1");
  const GridSpec& g = psi0.grid;
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += std::norm(psi0.amplitudes[i]);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw ZeroNorm("cannot sample from a zero wave function");
  const double dx = g.spacing();

  std::vector<ParticleConfiguration> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng(seed, s);
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    auto& cfg = out[s];
    cfg.time = psi0.time;
    cfg.positions.resize(static_cast<std::size_t>(g.n_particles()));
    for (int k = 0; k < g.n_particles(); ++k) {
      const double x = g.coordinate(g.axis_index(idx, k)) + (rng.uniform() - 0.5) * dx;
      cfg.positions[static_cast<std::size_t>(k)] = g.wrap(x);
    }
  }
  return out;
}

EnsembleResult run_ensemble(const WaveFunction& psi0, const PotentialField& v,
                            const Masses& masses, double t_final, std::size_t n_traj,
                            std::uint64_t seed, const PropagatorConfig& config) {
  config.validate();
  if (n_traj < 1) throw InvalidArgument("n_traj must be >= 1");
  const GridSpec& g = psi0.grid;
  const int n = g.n_particles();
  const long long steps = step_count(t_final, config.dt);

  EnsembleResult result;
  const auto initial = sample_initial_positions(psi0, n_traj, seed);
  result.trajectories.resize(n_traj);
  std::vector<std::vector<double>> current(n_traj), last_velocity(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    auto& tr = result.trajectories[i];
    tr.seed = seed;
    tr.index = i;
    tr.n_particles = n;
    tr.times.push_back(psi0.time);
    tr.positions = initial[i].positions;
    current[i] = initial[i].positions;
    last_velocity[i].assign(static_cast<std::size_t>(n), 0.0);
  }
  result.snapshots.push_back(psi0);
  if (steps == 0) return result;

  SplitOperator full(v, masses, config.dt);
  SplitOperator half(v, masses, 0.5 * config.dt);
  const SpectralTransform& fft = full.transform();

  WaveFunction cur = psi0;
  const double t0 = psi0.time;
  GuidanceField field_t(cur, fft);
  for (long long s = 1; s <= steps; ++s) {
    WaveFunction mid = cur;
    half.advance(mid);
    WaveFunction next = cur;
    full.advance(next);
    next.time = t0 + static_cast<double>(s) * config.dt;
    const GuidanceField field_mid(mid, fft), field_next(next, fft);
    const bool record = s % config.steps_per_output == 0 || s == steps;

    parallel_for(n_traj, [&](std::size_t i) {
      auto r = advance_configuration(field_t, field_mid, field_next, current[i], config.dt,
                                     masses, last_velocity[i]);
      auto& tr = result.trajectories[i];
      if (r.node) ++tr.node_steps;
      current[i] = std::move(r.positions);
      if (record) {
        tr.times.push_back(next.time);
        tr.positions.insert(tr.positions.end(), current[i].begin(), current[i].end());
      }
    });
    if (record) result.snapshots.push_back(next);
    cur = std::move(next);
    field_t = field_next;
  }
  for (const auto& tr : result.trajectories) {
    result.node_steps += tr.node_steps;
    if (tr.node_steps > 0) ++result.trajectories_with_nodes;
  }
  return result;
}

std::size_t continuity_violations(const Trajectory& traj, double v_max, double extent_length) {
  std::size_t bad = 0;
  const auto n = static_cast<std::size_t>(traj.n_particles);
  for (std::size_t s = 1; s < traj.times.size(); ++s) {
    const double limit = v_max * (traj.times[s] - traj.times[s - 1]);
    for (std::size_t k = 0; k < n; ++k) {
      double d = std::abs(traj.at(s)[k] - traj.at(s - 1)[k]);
      d = std::min(d, extent_length - d);
      if (d > limit) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

}  // namespace ontosim

namespace ontosim {

BinnedComparison binned_density_test(std::span<const double> positions,
                                     const std::vector<double>& density, const GridSpec& grid,
                                     int bins) {
  const std::size_t m = grid.points_per_axis();
  if (density.size() != m) throw InvalidArgument("density must live on one grid axis");
  if (bins < 2) throw InvalidArgument("need at least two bins");
  const double peak = *std::max_element(density.begin(), density.end());
  std::size_t lo = 0, hi = m - 1;
  while (lo < m && density[lo] <= 1e-10 * peak) ++lo;
  while (hi > lo && density[hi] <= 1e-10 * peak) --hi;
  const std::size_t cells = hi - lo + 1;
  const auto nb = static_cast<std::size_t>(bins);
  if (cells < nb) throw InvalidArgument("occupied region has fewer cells than bins");

  // bin_of_cell maps each grid cell onto its bin.
  std::vector<std::size_t> bin_of_cell(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (i < lo) bin_of_cell[i] = 0;
    else if (i > hi) bin_of_cell[i] = nb - 1;
    else bin_of_cell[i] = std::min(nb - 1, (i - lo) * nb / cells);
  }
  BinnedComparison out;
  out.counts.assign(nb, 0);
  out.expected.assign(nb, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.expected[bin_of_cell[i]] += density[i];
    total += density[i];
  }
  for (double& e : out.expected) e /= total;

  const double dx = grid.spacing();
  out.edges.push_back(grid.extent_min() - 0.5 * dx);
  for (std::size_t i = 1; i < m; ++i)
    if (bin_of_cell[i] != bin_of_cell[i - 1]) out.edges.push_back(grid.coordinate(i) - 0.5 * dx);
  out.edges.push_back(grid.extent_max() - 0.5 * dx);

  const auto mm = static_cast<long long>(m);
  for (double x : positions) {
    long long cell = std::llround((x - grid.extent_min()) / dx) % mm;
    if (cell < 0) cell += mm;
    ++out.counts[bin_of_cell[static_cast<std::size_t>(cell)]];
  }
  out.report = chi_square_gof(out.counts, out.expected);
  return out;
}

BinnedComparison equivariance_test(const EnsembleResult& ensemble, std::size_t sample, int k,
                                   int bins) {
  if (sample >= ensemble.snapshots.size()) throw IndexOutOfRange("sample index out of range");
  const WaveFunction& psi = ensemble.snapshots[sample];
  std::vector<double> xs;
  xs.reserve(ensemble.trajectories.size());
  for (const auto& tr : ensemble.trajectories)
    xs.push_back(tr.at(sample)[static_cast<std::size_t>(k)]);
  return binned_density_test(xs, marginal_density(psi, k), psi.grid, bins);
}

}  // namespace ontosim
