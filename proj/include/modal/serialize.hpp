#ifndef MODAL_SERIALIZE_HPP
#define MODAL_SERIALIZE_HPP

// Gamma matrix file formats.
//
// csv:  "# modalgamma v1 engine=<id> nmax=<int> lmin=<int> lmax=<int> integrator=<id>"
//       optional further lines starting with '#'
//       n_max lines of n_max comma-separated shortest round-trip decimals
//
// bin:  "MGAM" | u32 version = 1 | u64 rows | u64 cols | rows*cols f64
//       all little-endian, row-major

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modal/basis.hpp"
#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"

namespace modal {

enum class GammaFormat { csv, bin };

inline GammaFormat parse_gamma_format(std::string_view name) {
  if (name == "csv") return GammaFormat::csv;
  if (name == "bin") return GammaFormat::bin;
  throw ConfigError("unknown output format '" + std::string(name) + "' (expected csv or bin)");
}

inline std::string_view to_string(GammaFormat f) noexcept { return f == GammaFormat::csv ? "csv" : "bin"; }

inline constexpr std::uint32_t gamma_bin_version = 1;

/// `comments` lines are written after the header, each prefixed with "# ".
inline void write_gamma_csv(std::ostream& out, const GammaMatrix& g, const std::vector<std::string>& comments = {}) {
  const auto& m = g.meta();
  out << "# modalgamma v1 engine=" << (m.engine.empty() ? "unknown" : m.engine) << " nmax=" << g.size()
      << " lmin=" << m.l_min << " lmax=" << m.l_max << " integrator=" << (m.integrator.empty() ? "none" : m.integrator)
      << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j) out << ',';
      detail::write_double(out, g(i, j));
    }
    out << '\n';
  }
}

inline GammaMatrix read_gamma_csv(std::istream& in) {
  using Kind = FormatError::Kind;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(Kind::corrupt_header, "gamma csv: missing header");
  const auto tok = detail::split_ws(line);
  GammaMetadata meta;
  int nmax = -1;
  auto value_of = [](std::string_view t, std::string_view key, std::string& out) {
    if (t.size() <= key.size() || t.substr(0, key.size()) != key || t[key.size()] != '=') return false;
    out = std::string(t.substr(key.size() + 1));
    return true;
  };
  if (tok.size() != 8 || tok[0] != "#" || tok[1] != "modalgamma" || tok[2] != "v1" ||
      !value_of(tok[3], "engine", meta.engine) || !detail::parse_keyed_int(tok[4], "nmax", nmax) ||
      !detail::parse_keyed_int(tok[5], "lmin", meta.l_min) || !detail::parse_keyed_int(tok[6], "lmax", meta.l_max) ||
      !value_of(tok[7], "integrator", meta.integrator) || nmax < 0) {
    throw FormatError(Kind::corrupt_header, "gamma csv: corrupt header");
  }
  const auto n = static_cast<std::size_t>(nmax);
  GammaMatrix g(n, meta);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (row == 0) continue;
      throw FormatError(Kind::corrupt_header, "gamma csv: comment line inside payload");
    }
    if (row >= n) throw FormatError(Kind::dimension_mismatch, "gamma csv: more than nmax rows");
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = line.find(',', pos);
      const std::string_view cell(line.data() + pos, (end == std::string::npos ? line.size() : end) - pos);
      double v = 0.0;
      if (!detail::parse_number(cell, v)) {
        throw FormatError(Kind::dimension_mismatch, "gamma csv: bad value in row " + std::to_string(row));
      }
      if (col >= n) throw FormatError(Kind::dimension_mismatch, "gamma csv: row " + std::to_string(row) + " too long");
      g(row, col++) = v;
      if (end == std::string::npos) break;
      pos = end + 1;
    }
    if (col != n) throw FormatError(Kind::dimension_mismatch, "gamma csv: row " + std::to_string(row) + " too short");
    ++row;
  }
  if (row != n) throw FormatError(Kind::truncated_payload, "gamma csv: truncated payload");
  return g;
}

namespace detail {

inline void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  out.write(buf, bytes);
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline void write_gamma_bin(std::ostream& out, const GammaMatrix& g) {
  out.write("MGAM", 4);
  detail::put_le(out, gamma_bin_version, 4);
  detail::put_le(out, g.size(), 8);
  detail::put_le(out, g.size(), 8);
  for (double v : g.data()) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
}

/// Reads the whole stream; never returns a partially filled matrix.
inline GammaMatrix read_gamma_bin(std::istream& in) {
  using Kind = FormatError::Kind;
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t header = 4 + 4 + 8 + 8;
  if (bytes.size() < header || std::memcmp(bytes.data(), "MGAM", 4) != 0) {
    throw FormatError(Kind::corrupt_header, "gamma bin: corrupt header");
  }
  if (detail::get_le(bytes.data() + 4, 4) != gamma_bin_version) {
    throw FormatError(Kind::corrupt_header, "gamma bin: unsupported version");
  }
  const std::uint64_t rows = detail::get_le(bytes.data() + 8, 8);
  const std::uint64_t cols = detail::get_le(bytes.data() + 16, 8);
  if (rows != cols) throw FormatError(Kind::dimension_mismatch, "gamma bin: matrix is not square");
  if (rows > (std::uint64_t{1} << 28)) throw FormatError(Kind::corrupt_header, "gamma bin: implausible dimensions");
  const std::uint64_t payload = rows * cols * 8;
  const std::size_t available = bytes.size() - header;
  if (available < payload) throw FormatError(Kind::truncated_payload, "gamma bin: truncated payload");
  if (available > payload) throw FormatError(Kind::dimension_mismatch, "gamma bin: trailing bytes after payload");
  GammaMatrix g(static_cast<std::size_t>(rows));
  auto out = g.data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::bit_cast<double>(detail::get_le(bytes.data() + header + 8 * k, 8));
  }
  return g;
}

inline void serialize_gamma(const std::string& path, const GammaMatrix& g, GammaFormat format,
                            const std::vector<std::string>& comments = {}) {
  std::ofstream out(path, format == GammaFormat::bin ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (format == GammaFormat::csv) {
    write_gamma_csv(out, g, comments);
  } else {
    write_gamma_bin(out, g);
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline GammaMatrix deserialize_gamma(const std::string& path, GammaFormat format) {
  std::ifstream in(path, format == GammaFormat::bin ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open '" + path + "'");
  return format == GammaFormat::csv ? read_gamma_csv(in) : read_gamma_bin(in);
}

}  // namespace modal

#endif  // MODAL_SERIALIZE_HPP
