#pragma once

#include <array>
#include <cstdint>

namespace ontosim {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Reproducible random stream identified by (seed, label).
///
/// The seed is the Philox key; the label occupies the two high counter words
/// and a block index the two low ones, so distinct labels never share a
/// counter value. All derived variates are computed with fixed bit recipes,
/// making every stream bitwise identical across platforms and compilers.
/// Value type: copy it to fork, never share one instance between threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t label);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t label() const { return label_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open() { return 1.0 - uniform(); }
  /// Exponential variate with the given rate.
  double exponential(double rate);
  /// Uniform integer on [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, one draw per call).
  double normal();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t label_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace ontosim
