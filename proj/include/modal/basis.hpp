#ifndef MODAL_BASIS_HPP
#define MODAL_BASIS_HPP

// Mode mapping n <-> (i, j, k), sampled basis tables, the multi-resolution
// radial grid, and their text file formats.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modal/error.hpp"
#include "modal/geometry.hpp"

namespace modal {

struct ModeTriple {
  int i = 0;
  int j = 0;
  int k = 0;

  constexpr std::array<int, 3> as_array() const noexcept { return {i, j, k}; }
  friend constexpr auto operator<=>(const ModeTriple&, const ModeTriple&) = default;
};

/// One-to-one map from mode index n to an ordered triple of 1D basis
/// indices.  Immutable after construction.
class ModeMapping {
 public:
  ModeMapping() = default;

  /// Validates: every triple ordered, every index < p_max, no duplicates.
  ModeMapping(int p_max, std::vector<ModeTriple> entries) : p_max_(p_max), entries_(std::move(entries)) {
    if (p_max_ < 1) throw std::invalid_argument("ModeMapping: p_max must be >= 1");
    for (std::size_t n = 0; n < entries_.size(); ++n) {
      const auto& e = entries_[n];
      if (!(e.i <= e.j && e.j <= e.k)) throw std::invalid_argument("ModeMapping: unordered triple at n = " + std::to_string(n));
      if (e.i < 0 || e.k >= p_max_) throw std::invalid_argument("ModeMapping: index out of range at n = " + std::to_string(n));
      if (!index_.emplace(e, static_cast<int>(n)).second) {
        throw std::invalid_argument("ModeMapping: duplicate triple at n = " + std::to_string(n));
      }
    }
  }

  int p_max() const noexcept { return p_max_; }
  int n_max() const noexcept { return static_cast<int>(entries_.size()); }
  const std::vector<ModeTriple>& entries() const noexcept { return entries_; }

  const ModeTriple& operator[](int n) const {
    if (n < 0 || n >= n_max()) throw std::out_of_range("ModeMapping: mode index " + std::to_string(n) + " out of range");
    return entries_[static_cast<std::size_t>(n)];
  }

  /// Mode index of a triple, or -1 if the triple is not mapped.
  int index_of(const ModeTriple& t) const noexcept {
    auto it = index_.find(t);
    return it == index_.end() ? -1 : it->second;
  }

  friend bool operator==(const ModeMapping& a, const ModeMapping& b) {
    return a.p_max_ == b.p_max_ && a.entries_ == b.entries_;
  }

 private:
  int p_max_ = 1;
  std::vector<ModeTriple> entries_;
  std::map<ModeTriple, int> index_;
};

/// All i <= j <= k < p_max, k ascending, then j, then i.  n_max = C(p_max+2, 3).
inline ModeMapping default_mode_mapping(int p_max) {
  if (p_max < 1) throw std::invalid_argument("default_mode_mapping: p_max must be >= 1");
  std::vector<ModeTriple> entries;
  for (int k = 0; k < p_max; ++k)
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= j; ++i) entries.push_back({i, j, k});
  return ModeMapping(p_max, std::move(entries));
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if constexpr (std::is_floating_point_v<T>) {
    if (!token.empty() && token.front() == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Parses "key=<int>" and checks the key.
inline bool parse_keyed_int(std::string_view token, std::string_view key, int& out) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key || token[key.size()] != '=') return false;
  return parse_number(token.substr(key.size() + 1), out);
}

inline void write_double(std::ostream& os, double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  os.write(buf, ptr - buf);
}

}  // namespace detail

/// Parses the modalmap v1 text format:
///   modalmap v1 p_max=<int> n_max=<int>
///   <n> <i> <j> <k>        (one per entry, n = 0, 1, 2, ...)
inline ModeMapping load_mode_mapping(std::istream& in) {
  using Kind = ParseError::Kind;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(Kind::header, "mode mapping: missing header at line 1");
  const auto head = detail::split_ws(line);
  int p_max = 0;
  int n_max = 0;
  if (head.size() != 4 || head[0] != "modalmap" || head[1] != "v1" || !detail::parse_keyed_int(head[2], "p_max", p_max) ||
      !detail::parse_keyed_int(head[3], "n_max", n_max) || p_max < 1 || n_max < 0) {
    throw ParseError(Kind::header, "mode mapping: bad header at line 1");
  }

  std::vector<ModeTriple> entries;
  std::map<ModeTriple, int> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    const std::string where = " at line " + std::to_string(line_no);
    std::array<int, 4> v{};
    if (tok.size() != 4) throw ParseError(Kind::malformed, "malformed line" + where);
    for (std::size_t c = 0; c < 4; ++c) {
      if (!detail::parse_number(tok[c], v[c])) throw ParseError(Kind::malformed, "malformed line" + where);
    }
    if (v[0] != static_cast<int>(entries.size())) {
      throw ParseError(Kind::malformed, "malformed line" + where + ": expected mode index " + std::to_string(entries.size()));
    }
    const ModeTriple t{v[1], v[2], v[3]};
    if (!(t.i <= t.j && t.j <= t.k)) throw ParseError(Kind::unordered, "unordered triple" + where);
    if (t.i < 0 || t.k >= p_max) throw ParseError(Kind::index_range, "index out of range [0, p_max)" + where);
    if (!seen.emplace(t, v[0]).second) throw ParseError(Kind::duplicate, "duplicate triple" + where);
    entries.push_back(t);
  }
  if (static_cast<int>(entries.size()) != n_max) {
    throw ParseError(Kind::header, "mode mapping: header declares n_max=" + std::to_string(n_max) + " but file has " +
                                       std::to_string(entries.size()) + " entries");
  }
  return ModeMapping(p_max, std::move(entries));
}

inline ModeMapping load_mode_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mode mapping file '" + path + "'");
  return load_mode_mapping(in);
}

inline void save_mode_mapping(std::ostream& out, const ModeMapping& mapping) {
  out << "modalmap v1 p_max=" << mapping.p_max() << " n_max=" << mapping.n_max() << '\n';
  for (int n = 0; n < mapping.n_max(); ++n) {
    const auto& e = mapping[n];
    out << n << ' ' << e.i << ' ' << e.j << ' ' << e.k << '\n';
  }
}

inline void save_mode_mapping(const std::string& path, const ModeMapping& mapping) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mode mapping file '" + path + "'");
  save_mode_mapping(out, mapping);
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Radial grid

/// Shape of the synthetic line-of-sight profile: a Gaussian peak at the
/// last-scattering distance on top of a flat floor.
struct PeakProfile {
  double center = 14000.0;
  double width = 150.0;
  double floor = 0.05;

  /// Peak width used for primordial basis index `index`.  Each index gets a
  /// slightly broader peak so that different modes do not share one radial
  /// integral.
  double width_for(int index) const noexcept { return width * (1.0 + 0.25 * index); }

  double operator()(double r, int index = 0) const noexcept {
    const double s = width_for(index);
    const double d = r - center;
    return std::exp(-d * d / (2.0 * s * s)) + floor;
  }
};

/// Strictly increasing radial samples.  Grids built by default_radial_grid
/// also record their three resolution zones.
class RadialGrid {
 public:
  RadialGrid() = default;

  explicit RadialGrid(std::vector<double> r, std::array<int, 3> zone_counts = {0, 0, 0})
      : r_(std::move(r)), zone_counts_(zone_counts) {
    if (r_.size() < 2) throw std::invalid_argument("RadialGrid: need at least 2 samples");
    if (r_.front() < 0.0) throw std::invalid_argument("RadialGrid: samples must be >= 0");
    for (std::size_t k = 1; k < r_.size(); ++k) {
      if (!(r_[k] > r_[k - 1])) throw std::invalid_argument("RadialGrid: samples must be strictly increasing");
    }
  }

  std::size_t size() const noexcept { return r_.size(); }
  std::span<const double> r() const noexcept { return r_; }
  double operator[](std::size_t x) const noexcept { return r_[x]; }
  const std::array<int, 3>& zone_counts() const noexcept { return zone_counts_; }
  bool has_zones() const noexcept { return zone_counts_[0] + zone_counts_[1] + zone_counts_[2] > 0; }

 private:
  std::vector<double> r_;
  std::array<int, 3> zone_counts_{0, 0, 0};
};

/// Three uniform zones: [0, c - 5w), [c - 5w, c + 5w], (c + 5w, r_max], with
/// 25% / 50% / 25% of the points (outer zones rounded, middle takes the rest).
inline RadialGrid default_radial_grid(int total = 216, double r_max = 16000.0, const PeakProfile& peak = {}) {
  if (total < 12) throw std::invalid_argument("default_radial_grid: need at least 12 points");
  const double a = peak.center - 5.0 * peak.width;
  const double b = peak.center + 5.0 * peak.width;
  if (!(a > 0.0) || !(r_max > b)) throw std::invalid_argument("default_radial_grid: peak zone must lie inside (0, r_max)");
  const int outer = static_cast<int>(std::lround(0.25 * total));
  const int middle = total - 2 * outer;

  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < outer; ++k) r.push_back(a * k / outer);
  for (int k = 0; k < middle; ++k) r.push_back(a + (b - a) * k / (middle - 1));
  for (int k = 1; k <= outer; ++k) r.push_back(b + (r_max - b) * k / outer);
  return RadialGrid(std::move(r), {outer, middle, outer});
}

// ---------------------------------------------------------------------------
// Basis tables

/// Sampled inputs of both engines.  Flat row-major storage with l fastest:
///   q        [p_max][L]
///   q_tilde  [p_max][R][L]
///   C, v     [L]
/// where L = l_max - l_min + 1.  All accessors take the physical multipole.
class BasisTables {
 public:
  BasisTables() = default;

  BasisTables(int p_max, int l_min, int l_max, int radial_count, std::vector<double> q, std::vector<double> q_tilde,
              std::vector<double> cl, std::vector<double> vl)
      : p_max_(p_max),
        l_min_(l_min),
        l_max_(l_max),
        radial_(radial_count),
        q_(std::move(q)),
        q_tilde_(std::move(q_tilde)),
        cl_(std::move(cl)),
        vl_(std::move(vl)) {
    if (p_max_ < 1 || l_min_ < 0 || l_max_ < l_min_ || radial_ < 1) {
      throw std::invalid_argument("BasisTables: bad dimensions");
    }
    const auto L = static_cast<std::size_t>(l_count());
    const auto P = static_cast<std::size_t>(p_max_);
    if (q_.size() != P * L || q_tilde_.size() != P * static_cast<std::size_t>(radial_) * L || cl_.size() != L ||
        vl_.size() != L) {
      throw std::invalid_argument("BasisTables: table sizes do not match dimensions");
    }
  }

  int p_max() const noexcept { return p_max_; }
  int l_min() const noexcept { return l_min_; }
  int l_max() const noexcept { return l_max_; }
  int l_count() const noexcept { return l_max_ - l_min_ + 1; }
  int radial_count() const noexcept { return radial_; }

  double q(int i, int ell) const noexcept { return q_[offset(i) + static_cast<std::size_t>(ell - l_min_)]; }
  double q_tilde(int i, std::size_t x, int ell) const noexcept {
    return q_tilde_[(offset(i) * static_cast<std::size_t>(radial_)) + x * static_cast<std::size_t>(l_count()) +
                    static_cast<std::size_t>(ell - l_min_)];
  }
  double C(int ell) const noexcept { return cl_[static_cast<std::size_t>(ell - l_min_)]; }
  double v(int ell) const noexcept { return vl_[static_cast<std::size_t>(ell - l_min_)]; }

  /// q_i over l = l_min..l_max.
  std::span<const double> q_row(int i) const noexcept { return {q_.data() + offset(i), static_cast<std::size_t>(l_count())}; }
  /// q~_i(r_x, l) over l = l_min..l_max.
  std::span<const double> q_tilde_row(int i, std::size_t x) const noexcept {
    return {q_tilde_.data() + offset(i) * static_cast<std::size_t>(radial_) + x * static_cast<std::size_t>(l_count()),
            static_cast<std::size_t>(l_count())};
  }

  MultipoleView C_view() const noexcept { return {l_min_, cl_}; }
  MultipoleView v_view() const noexcept { return {l_min_, vl_}; }

  std::span<const double> q_data() const noexcept { return q_; }
  std::span<const double> q_tilde_data() const noexcept { return q_tilde_; }
  std::span<const double> C_data() const noexcept { return cl_; }
  std::span<const double> v_data() const noexcept { return vl_; }

  /// Positivity of C, v_l = (2l+1)^(1/6) to 1e-14 relative, all entries finite.
  void validate() const {
    for (int ell = l_min_; ell <= l_max_; ++ell) {
      if (!(C(ell) > 0.0)) throw NumericalError("BasisTables: C_l <= 0 at l = " + std::to_string(ell));
      const double expect = std::pow(2.0 * ell + 1.0, 1.0 / 6.0);
      if (!(std::fabs(v(ell) - expect) <= 1e-14 * expect)) {
        throw NumericalError("BasisTables: v_l != (2l+1)^(1/6) at l = " + std::to_string(ell));
      }
    }
    auto all_finite = [](std::span<const double> s) {
      return std::all_of(s.begin(), s.end(), [](double x) { return std::isfinite(x); });
    };
    if (!all_finite(q_) || !all_finite(q_tilde_) || !all_finite(cl_) || !all_finite(vl_)) {
      throw NumericalError("BasisTables: non-finite table entry");
    }
  }

 private:
  std::size_t offset(int i) const noexcept { return static_cast<std::size_t>(i) * static_cast<std::size_t>(l_count()); }

  int p_max_ = 1;
  int l_min_ = 2;
  int l_max_ = 2;
  int radial_ = 1;
  std::vector<double> q_;
  std::vector<double> q_tilde_;
  std::vector<double> cl_;
  std::vector<double> vl_;
};

inline double v_weight(int ell) { return std::pow(2.0 * ell + 1.0, 1.0 / 6.0); }

/// Deterministic stand-in for cosmological inputs:
///   q_i(l)      = P_i(x),  x = 2 (l - l_min)/(l_max - l_min) - 1  (x = 0 when l_min = l_max)
///   C_l         = 1 / (l (l + 1))
///   v_l         = (2l + 1)^(1/6)
///   q~_i(r, l)  = q_i(l) * peak(r, i)
inline BasisTables synthesize_basis(int p_max, int l_min, int l_max, const RadialGrid& grid,
                                    const PeakProfile& peak = {}) {
  if (p_max < 1) throw std::invalid_argument("synthesize_basis: p_max must be >= 1");
  if (l_min < 2 || l_max < l_min) throw std::invalid_argument("synthesize_basis: require 2 <= l_min <= l_max");
  const auto L = static_cast<std::size_t>(l_max - l_min + 1);
  const auto P = static_cast<std::size_t>(p_max);
  const std::size_t R = grid.size();

  std::vector<double> q(P * L), q_tilde(P * R * L), cl(L), vl(L);
  for (std::size_t l = 0; l < L; ++l) {
    const int ell = l_min + static_cast<int>(l);
    const double x = (l_max == l_min) ? 0.0 : 2.0 * (ell - l_min) / static_cast<double>(l_max - l_min) - 1.0;
    cl[l] = 1.0 / (static_cast<double>(ell) * (ell + 1.0));
    vl[l] = v_weight(ell);
    double p_prev = 1.0;
    double p = x;
    q[l] = 1.0;
    for (std::size_t i = 1; i < P; ++i) {
      q[i * L + l] = p;
      const double n = static_cast<double>(i);
      const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
      p_prev = p;
      p = p_next;
    }
  }
  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t x = 0; x < R; ++x) {
      const double w = peak(grid[x], static_cast<int>(i));
      for (std::size_t l = 0; l < L; ++l) q_tilde[(i * R + x) * L + l] = q[i * L + l] * w;
    }
  }
  return BasisTables(p_max, l_min, l_max, static_cast<int>(R), std::move(q), std::move(q_tilde), std::move(cl),
                     std::move(vl));
}

// ---------------------------------------------------------------------------
// modalbasis v1 text format

/// Tables together with the radial samples they were built on.
struct BasisFile {
  BasisTables tables;
  RadialGrid grid;
};

/// Writes
///   modalbasis v1 p_max=<int> lmin=<int> lmax=<int> R=<int>
///   [C]       L values
///   [v]       L values
///   [q]       p_max lines of L values
///   [r]       R values
///   [qtilde]  p_max * R lines of L values (index i major, then r)
inline void save_basis(std::ostream& out, const BasisTables& tables, const RadialGrid& grid) {
  if (grid.size() != static_cast<std::size_t>(tables.radial_count())) {
    throw std::invalid_argument("save_basis: grid size does not match tables");
  }
  auto write_row = [&out](std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) out << ' ';
      detail::write_double(out, values[k]);
    }
    out << '\n';
  };
  out << "modalbasis v1 p_max=" << tables.p_max() << " lmin=" << tables.l_min() << " lmax=" << tables.l_max()
      << " R=" << tables.radial_count() << '\n';
  out << "[C]\n";
  write_row(tables.C_data());
  out << "[v]\n";
  write_row(tables.v_data());
  out << "[q]\n";
  for (int i = 0; i < tables.p_max(); ++i) write_row(tables.q_row(i));
  out << "[r]\n";
  write_row(grid.r());
  out << "[qtilde]\n";
  for (int i = 0; i < tables.p_max(); ++i)
    for (std::size_t x = 0; x < grid.size(); ++x) write_row(tables.q_tilde_row(i, x));
}

inline void save_basis(const std::string& path, const BasisTables& tables, const RadialGrid& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write basis file '" + path + "'");
  save_basis(out, tables, grid);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline BasisFile load_basis(std::istream& in) {
  using Kind = ParseError::Kind;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(Kind::header, "basis file: missing header at line 1");
  const auto head = detail::split_ws(line);
  int p_max = 0, l_min = 0, l_max = 0, R = 0;
  if (head.size() != 6 || head[0] != "modalbasis" || head[1] != "v1" || !detail::parse_keyed_int(head[2], "p_max", p_max) ||
      !detail::parse_keyed_int(head[3], "lmin", l_min) || !detail::parse_keyed_int(head[4], "lmax", l_max) ||
      !detail::parse_keyed_int(head[5], "R", R) || p_max < 1 || l_min < 0 || l_max < l_min || R < 2) {
    throw ParseError(Kind::header, "basis file: bad header at line 1");
  }
  const auto L = static_cast<std::size_t>(l_max - l_min + 1);
  const auto P = static_cast<std::size_t>(p_max);
  const auto nR = static_cast<std::size_t>(R);

  int line_no = 1;
  std::map<std::string, std::vector<double>> sections;
  std::vector<double>* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() == 1 && tok[0].size() > 2 && tok[0].front() == '[' && tok[0].back() == ']') {
      const std::string name(tok[0].substr(1, tok[0].size() - 2));
      if (name != "C" && name != "v" && name != "q" && name != "r" && name != "qtilde") {
        throw ParseError(Kind::malformed, "unknown section [" + name + "] at line " + std::to_string(line_no));
      }
      if (sections.count(name)) throw ParseError(Kind::duplicate, "duplicate section at line " + std::to_string(line_no));
      current = &sections[name];
      continue;
    }
    if (!current) throw ParseError(Kind::malformed, "value outside a section at line " + std::to_string(line_no));
    for (auto t : tok) {
      double value = 0.0;
      if (!detail::parse_number(t, value)) throw ParseError(Kind::malformed, "malformed line at line " + std::to_string(line_no));
      current->push_back(value);
    }
  }
  auto take = [&](const char* name, std::size_t expected) {
    auto it = sections.find(name);
    if (it == sections.end()) throw ParseError(Kind::malformed, std::string("basis file: missing section [") + name + "]");
    if (it->second.size() != expected) {
      throw ParseError(Kind::malformed, std::string("basis file: section [") + name + "] has " +
                                            std::to_string(it->second.size()) + " values, expected " +
                                            std::to_string(expected));
    }
    return std::move(it->second);
  };
  auto cl = take("C", L);
  auto vl = take("v", L);
  auto q = take("q", P * L);
  auto r = take("r", nR);
  auto q_tilde = take("qtilde", P * nR * L);
  BasisFile file{BasisTables(p_max, l_min, l_max, R, std::move(q), std::move(q_tilde), std::move(cl), std::move(vl)),
                 RadialGrid(std::move(r))};
  return file;
}

inline BasisFile load_basis(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open basis file '" + path + "'");
  return load_basis(in);
}

}  // namespace modal

#endif  // MODAL_BASIS_HPP
