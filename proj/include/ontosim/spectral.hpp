#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ontosim/grid.hpp"

namespace ontosim {

/// In-place N-dimensional FFT over a configuration grid (FFTW backend).
///
/// forward computes sum_x psi(x) e^{-i k x}; backward is the unnormalized
/// inverse, so backward(forward(a)) == size() * a. Instances are cheap to
/// share across threads once built; construction serializes on a global
/// planner lock.
class SpectralTransform {
 public:
  explicit SpectralTransform(const GridSpec& grid);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;
  SpectralTransform(SpectralTransform&&) noexcept;
  SpectralTransform& operator=(SpectralTransform&&) noexcept;

  void forward(std::span<Complex> data) const;
  void backward(std::span<Complex> data) const;
  std::size_t size() const { return size_; }

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_;
};

/// Angular wavenumbers of one axis in FFT order (0, dk, ..., -dk); the
/// Nyquist entry is -M/2 dk.
std::vector<double> wavenumbers(const GridSpec& grid);

/// Spectral derivative d psi / d x_k. The Nyquist mode is dropped.
std::vector<Complex> spectral_gradient(const WaveFunction& psi, int k,
                                       const SpectralTransform& fft);

}  // namespace ontosim
