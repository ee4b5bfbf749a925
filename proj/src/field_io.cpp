#include "ontosim/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "ontosim/errors.hpp"

namespace ontosim {

static_assert(std::endian::native == std::endian::little,
              "field dumps are written by memcpy and assume a little-endian host");

namespace {

template <class T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in, long long& offset, const char* what) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw FormatError(std::string("truncated dump while reading ") + what, offset + in.gcount());
  offset += static_cast<long long>(sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_dump(std::ostream& out, const WaveFunction& psi) {
  const GridSpec& g = psi.grid;
  out.write("ONTO", 4);
  put<std::uint32_t>(out, kDumpVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n_particles()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.space_dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  put<double>(out, g.extent_min());
  put<double>(out, g.extent_max());
  for (const Complex& a : psi.amplitudes) {
    put<double>(out, a.real());
    put<double>(out, a.imag());
  }
}

void write_dump(const std::filesystem::path& path, const WaveFunction& psi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_dump(out, psi);
  if (!out) throw Error("write failed for " + path.string());
}

WaveFunction read_dump(std::istream& in) {
  long long offset = 0;
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4) throw FormatError("truncated dump while reading magic", in.gcount());
  if (std::memcmp(magic.data(), "ONTO", 4) != 0) throw FormatError("bad magic, expected ONTO", 0);
  offset = 4;
  const auto version = get<std::uint32_t>(in, offset, "version");
  if (version != kDumpVersion)
    throw FormatError("unsupported dump version " + std::to_string(version), 4);
  const auto n = get<std::uint32_t>(in, offset, "N");
  const auto d = get<std::uint32_t>(in, offset, "D");
  const auto m = get<std::uint32_t>(in, offset, "M");
  const auto lo = get<double>(in, offset, "extent_min");
  const auto hi = get<double>(in, offset, "extent_max");
  if (d != 1) throw FormatError("unsupported space dimension " + std::to_string(d), 12);
  if (n < 1 || n > 64) throw FormatError("implausible particle count " + std::to_string(n), 8);

  GridSpec grid = [&] {
    try {
      return GridSpec(static_cast<int>(n), lo, hi, m);
    } catch (const Error& e) {
      throw FormatError(std::string("invalid grid in header: ") + e.what(), 8);
    }
  }();
  WaveFunction psi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double re = get<double>(in, offset, "amplitudes");
    const double im = get<double>(in, offset, "amplitudes");
    psi.amplitudes[i] = {re, im};
  }
  return psi;
}

WaveFunction read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_dump(in);
}

void write_csv(std::ostream& out, const WaveFunction& psi) {
  const GridSpec& g = psi.grid;
  out << std::setprecision(17);
  out << "# ONTO version=" << kDumpVersion << " N=" << g.n_particles() << " D=" << g.space_dim()
      << " M=" << g.points_per_axis() << " extent_min=" << g.extent_min()
      << " extent_max=" << g.extent_max() << '\n';
  for (int k = 0; k < g.n_particles(); ++k) out << 'x' << (k + 1) << ',';
  out << "re,im,abs2\n";
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    for (int k = 0; k < g.n_particles(); ++k) out << g.coordinate(g.axis_index(idx, k)) << ',';
    const Complex a = psi.amplitudes[idx];
    out << a.real() << ',' << a.imag() << ',' << std::norm(a) << '\n';
  }
}

WaveFunction read_csv(std::istream& in) {
  std::string line;
  long long line_no = 1;
  if (!std::getline(in, line) || line.rfind("# ONTO", 0) != 0)
    throw FormatError("missing '# ONTO' grid comment", line_no);

  std::map<std::string, std::string> header;
  std::istringstream hs(line.substr(6));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header token '" + tok + "'", 1);
    header[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto field = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError("header lacks " + key, 1);
    return it->second;
  };
  if (std::stoul(field("version")) != kDumpVersion)
    throw FormatError("unsupported version " + field("version"), 1);
  if (std::stoul(field("D")) != 1) throw FormatError("unsupported D " + field("D"), 1);
  const int n = std::stoi(field("N"));
  const std::size_t m = std::stoul(field("M"));
  // strtod reads back the 17-digit values exactly.
  const double lo = std::strtod(field("extent_min").c_str(), nullptr);
  const double hi = std::strtod(field("extent_max").c_str(), nullptr);
  GridSpec grid = [&] {
    try {
      return GridSpec(n, lo, hi, m);
    } catch (const Error& e) {
      throw FormatError(std::string("invalid grid in header: ") + e.what(), 1);
    }
  }();

  ++line_no;
  if (!std::getline(in, line)) throw FormatError("missing column header", line_no);

  WaveFunction psi(grid);
  const std::size_t columns = static_cast<std::size_t>(n) + 3;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    ++line_no;
    if (!std::getline(in, line))
      throw FormatError("expected " + std::to_string(grid.size()) + " data rows", line_no);
    std::vector<double> values;
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      values.push_back(std::strtod(p, &end));
      if (end == p) throw FormatError("unparsable number", line_no);
      p = end;
      if (*p == ',') ++p;
    }
    if (values.size() != columns)
      throw FormatError("expected " + std::to_string(columns) + " columns", line_no);
    psi.amplitudes[idx] = {values[static_cast<std::size_t>(n)],
                           values[static_cast<std::size_t>(n) + 1]};
  }
  return psi;
}

}  // namespace ontosim
