#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "ontosim/grid.hpp"

namespace ontosim {

// Binary field dump, all little-endian:
//
//   offset  size  field
//   0       4     magic "ONTO"
//   4       4     version (u32, currently 1)
//   8       4     N, particle count (u32)
//   12      4     D, space dimension per particle (u32, always 1)
//   16      4     M, points per axis (u32)
//   20      8     extent_min (f64)
//   28      8     extent_max (f64)
//   36      16*S  amplitudes as interleaved (re, im) f64 pairs, S = M^N,
//                 in the grid's row-major flat order
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 36;

void write_dump(std::ostream& out, const WaveFunction& psi);
void write_dump(const std::filesystem::path& path, const WaveFunction& psi);
/// Throws FormatError (with byte offset) on bad magic, version or truncation.
WaveFunction read_dump(std::istream& in);
WaveFunction read_dump(const std::filesystem::path& path);

// CSV export. The first line is a comment carrying the grid so the file can be
// converted back without loss:
//   # ONTO version=1 N=2 D=1 M=128 extent_min=-16 extent_max=16
// followed by a header row x1,...,xN,re,im,abs2 and one row per grid point in
// flat order. Numbers are printed with 17 significant digits.
void write_csv(std::ostream& out, const WaveFunction& psi);
/// Throws FormatError (with line number) on malformed input.
WaveFunction read_csv(std::istream& in);

}  // namespace ontosim
