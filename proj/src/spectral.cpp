#include "ontosim/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace ontosim {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct SpectralTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpectralTransform::SpectralTransform(const GridSpec& grid)
    : plans_(std::make_unique<Plans>()), size_(grid.size()) {
  std::vector<int> dims(static_cast<std::size_t>(grid.n_particles()),
                        static_cast<int>(grid.points_per_axis()));
  // Planning never touches the data with FFTW_ESTIMATE, and the plan choice is
  // deterministic, so any scratch buffer works and results are reproducible.
  std::vector<Complex> scratch(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft(grid.n_particles(), dims.data(), as_fftw(scratch.data()),
                                  as_fftw(scratch.data()), FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft(grid.n_particles(), dims.data(), as_fftw(scratch.data()),
                                   as_fftw(scratch.data()), FFTW_BACKWARD, flags);
}

SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

void SpectralTransform::forward(std::span<Complex> data) const {
  fftw_execute_dft(plans_->forward, as_fftw(data.data()), as_fftw(data.data()));
}

void SpectralTransform::backward(std::span<Complex> data) const {
  fftw_execute_dft(plans_->backward, as_fftw(data.data()), as_fftw(data.data()));
}

std::vector<double> wavenumbers(const GridSpec& grid) {
  const std::size_t m = grid.points_per_axis();
  const double dk = 2.0 * std::numbers::pi / grid.length();
  std::vector<double> k(m);
  for (std::size_t j = 0; j < m; ++j) {
    const long long n = j < m / 2 ? static_cast<long long>(j)
                                  : static_cast<long long>(j) - static_cast<long long>(m);
    k[j] = dk * static_cast<double>(n);
  }
  return k;
}

std::vector<Complex> spectral_gradient(const WaveFunction& psi, int k,
                                       const SpectralTransform& fft) {
  const GridSpec& g = psi.grid;
  const std::size_t m = g.points_per_axis();
  std::vector<Complex> hat = psi.amplitudes;
  fft.forward(hat);
  const auto ks = wavenumbers(g);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const std::size_t j = g.axis_index(idx, k);
    hat[idx] *= j == m / 2 ? Complex(0.0) : Complex(0.0, ks[j] * inv);
  }
  fft.backward(hat);
  return hat;
}

}  // namespace ontosim
