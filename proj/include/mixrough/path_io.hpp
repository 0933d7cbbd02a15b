#pragma once

// Binary dump of sample paths and area tables.
//
// Layout (all integers and floats little-endian):
//   char[8]  magic "MXRPATH\0"
//   u32      version (1 = path, 2 = path followed by area cells)
//   u32      flags (bit 0: Hurst index present)
//   u64      N (grid steps)
//   u64      c (components)
//   f64      T
//   f64      H (NaN when absent)
//   u64      seed
//   u64      stream
//   f64[(N+1) * c]   node values, row-major (node, component)
// version 2 only:
//   u64      D (area dimension, equals c)
//   f64[N * D * D]   cell areas, (cell, i, j) row-major

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixrough/calculus.hpp"
#include "mixrough/errors.hpp"
#include "mixrough/grid.hpp"

namespace mixrough {

inline constexpr std::array<char, 8> kPathMagic{'M', 'X', 'R', 'P', 'A', 'T', 'H', '\0'};

struct PathHeader {
  std::uint32_t version = 1;
  std::uint64_t steps = 0;
  std::uint64_t components = 0;
  double horizon = 0.0;
  std::optional<double> hurst;
  RngSeed seed;
};

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw ContractError("path dump: truncated stream");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

inline void write_header(std::ostream& out, const PathHeader& h) {
  out.write(kPathMagic.data(), kPathMagic.size());
  put_le<std::uint32_t>(out, h.version);
  put_le<std::uint32_t>(out, h.hurst ? 1u : 0u);
  put_le<std::uint64_t>(out, h.steps);
  put_le<std::uint64_t>(out, h.components);
  put_le<double>(out, h.horizon);
  put_le<double>(out, h.hurst.value_or(std::numeric_limits<double>::quiet_NaN()));
  put_le<std::uint64_t>(out, h.seed.seed);
  put_le<std::uint64_t>(out, h.seed.stream);
}

}  // namespace detail

inline void write_path(std::ostream& out, const SamplePath& path, std::optional<double> hurst, RngSeed seed) {
  detail::write_header(out, {1, path.grid().steps(), path.components(), path.grid().horizon(), hurst, seed});
  for (std::size_t k = 0; k < path.grid().nodes(); ++k) {
    for (std::size_t c = 0; c < path.components(); ++c) detail::put_le<double>(out, path(k, c));
  }
}

inline void write_area_table(std::ostream& out, const LevyAreaTable& table, std::optional<double> hurst,
                             RngSeed seed) {
  const std::size_t d = table.dimension();
  detail::write_header(out, {2, table.grid().steps(), d, table.grid().horizon(), hurst, seed});
  for (double v : table.node_block()) detail::put_le<double>(out, v);
  detail::put_le<std::uint64_t>(out, d);
  for (double v : table.cell_block()) detail::put_le<double>(out, v);
}

struct PathDump {
  PathHeader header;
  SamplePath path;
  std::vector<double> cells;  // version 2 only
};

inline PathDump read_path(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kPathMagic) throw ContractError("path dump: bad magic");
  PathHeader h;
  h.version = detail::get_le<std::uint32_t>(in);
  if (h.version != 1 && h.version != 2) throw ContractError("path dump: unsupported version");
  const auto flags = detail::get_le<std::uint32_t>(in);
  h.steps = detail::get_le<std::uint64_t>(in);
  h.components = detail::get_le<std::uint64_t>(in);
  h.horizon = detail::get_le<double>(in);
  const double hurst = detail::get_le<double>(in);
  if (flags & 1u) h.hurst = hurst;
  h.seed.seed = detail::get_le<std::uint64_t>(in);
  h.seed.stream = detail::get_le<std::uint64_t>(in);
  SamplePath path(TimeGrid(h.horizon, h.steps), h.components);
  for (std::size_t k = 0; k <= h.steps; ++k) {
    for (std::size_t c = 0; c < h.components; ++c) path(k, c) = detail::get_le<double>(in);
  }
  std::vector<double> cells;
  if (h.version == 2) {
    const auto d = detail::get_le<std::uint64_t>(in);
    if (d != h.components) throw ContractError("path dump: area dimension does not match components");
    cells.resize(h.steps * d * d);
    for (double& v : cells) v = detail::get_le<double>(in);
  }
  return {h, std::move(path), std::move(cells)};
}

inline void write_path_file(const std::string& file, const SamplePath& path, std::optional<double> hurst,
                            RngSeed seed) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ContractError("cannot open " + file + " for writing");
  write_path(out, path, hurst, seed);
}

inline PathDump read_path_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ContractError("cannot open " + file);
  return read_path(in);
}

}  // namespace mixrough
