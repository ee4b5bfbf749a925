#include <doctest.h>

#include <cstring>
#include <sstream>

#include "ontosim/errors.hpp"
#include "ontosim/field_io.hpp"
#include "ontosim/rng.hpp"

using namespace ontosim;

namespace {

WaveFunction sample_state(int n, std::size_t m) {
  const GridSpec g(n, -3.5, 4.25, m);
  WaveFunction psi(g);
  RngStream rng(17, 0);
  for (auto& a : psi.amplitudes) a = {rng.normal() * 1e-3, rng.normal() * 1e7};
  psi.time = 0.125;
  return psi;
}

}  // namespace

TEST_CASE("dump layout and round trip") {
  const auto psi = sample_state(2, 8);
  std::stringstream buf;
  write_dump(buf, psi);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == kDumpHeaderBytes + 16 * 64);
  CHECK(bytes.substr(0, 4) == "ONTO");
  std::uint32_t header[4];
  std::memcpy(header, bytes.data() + 4, 16);
  CHECK(header[0] == 1);
  CHECK(header[1] == 2);
  CHECK(header[2] == 1);
  CHECK(header[3] == 8);
  double extent[2];
  std::memcpy(extent, bytes.data() + 20, 16);
  CHECK(extent[0] == -3.5);
  CHECK(extent[1] == 4.25);
  double first[2];
  std::memcpy(first, bytes.data() + 36, 16);
  CHECK(first[0] == psi.amplitudes[0].real());
  CHECK(first[1] == psi.amplitudes[0].imag());

  const auto back = read_dump(buf);
  CHECK(back.grid == psi.grid);
  CHECK(back.amplitudes == psi.amplitudes);
}

TEST_CASE("dump errors carry offsets") {
  const auto psi = sample_state(1, 16);
  std::stringstream buf;
  write_dump(buf, psi);
  const std::string bytes = buf.str();

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad);
    try {
      read_dump(in);
      FAIL("no throw");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("bad version") {
    std::string bad = bytes;
    bad[4] = 9;
    std::istringstream in(bad);
    try {
      read_dump(in);
      FAIL("no throw");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 4);
    }
  }
  SUBCASE("truncated amplitudes") {
    std::istringstream in(bytes.substr(0, 36 + 16 * 5 + 3));
    try {
      read_dump(in);
      FAIL("no throw");
    } catch (const FormatError& e) {
      CHECK(e.offset() >= 36 + 16 * 5);
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    std::istringstream in(bytes.substr(0, 10));
    CHECK_THROWS_AS(read_dump(in), FormatError);
  }
}

TEST_CASE("csv round trip is bitwise") {
  for (int n : {1, 2}) {
    const auto psi = sample_state(n, 8);
    std::stringstream csv;
    write_csv(csv, psi);
    const std::string text = csv.str();
    CHECK(text.rfind("# ONTO version=1 N=" + std::to_string(n), 0) == 0);
    const auto back = read_csv(csv);
    CHECK(back.grid == psi.grid);
    CHECK(back.amplitudes == psi.amplitudes);
    std::stringstream dump1, dump2;
    write_dump(dump1, psi);
    write_dump(dump2, back);
    CHECK(dump1.str().substr(36) == dump2.str().substr(36));
  }
}

TEST_CASE("csv columns for N=2") {
  const auto psi = sample_state(2, 8);
  std::stringstream csv;
  write_csv(csv, psi);
  std::string comment, header, row;
  std::getline(csv, comment);
  std::getline(csv, header);
  CHECK(header == "x1,x2,re,im,abs2");
  // Second row: x1 = first point, x2 = second point (particle 2 varies fastest).
  std::getline(csv, row);
  std::getline(csv, row);
  std::istringstream fields(row);
  std::string x1, x2;
  std::getline(fields, x1, ',');
  std::getline(fields, x2, ',');
  CHECK(std::stod(x1) == psi.grid.coordinate(0));
  CHECK(std::stod(x2) == psi.grid.coordinate(1));
  int rows = 2;
  while (std::getline(csv, row)) ++rows;
  CHECK(rows == 64);
}

TEST_CASE("malformed csv") {
  std::istringstream in("# ONTO version=1 N=1 D=1 M=8 extent_min=0 extent_max=1\nx1,re,im,abs2\n0,1,2\n");
  CHECK_THROWS_AS(read_csv(in), FormatError);
  std::istringstream none("x1,re,im\n");
  CHECK_THROWS_AS(read_csv(none), FormatError);
}
