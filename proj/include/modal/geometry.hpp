#ifndef MODAL_GEOMETRY_HPP
#define MODAL_GEOMETRY_HPP

// Geometric weights of multipole triples and the flattened sparse domain of
// ordered (l1 <= l2 <= l3) triples that satisfy the triangle and parity
// conditions.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modal/error.hpp"

namespace modal {

struct MultipoleTriple {
  int l1 = 0;
  int l2 = 0;
  int l3 = 0;

  constexpr int sum() const noexcept { return l1 + l2 + l3; }
  constexpr bool is_ordered() const noexcept { return l1 <= l2 && l2 <= l3; }
  friend constexpr auto operator<=>(const MultipoleTriple&, const MultipoleTriple&) = default;
};

/// Read-only table indexed by physical multipole l, with storage starting at
/// l_min.
struct MultipoleView {
  int l_min = 0;
  std::span<const double> values;

  int l_max() const noexcept { return l_min + static_cast<int>(values.size()) - 1; }
  double operator[](int ell) const noexcept { return values[static_cast<std::size_t>(ell - l_min)]; }
};

/// 1 when the triple closes a triangle and has an even sum, 0 otherwise.
constexpr int theta_indicator(const MultipoleTriple& t) noexcept {
  if (t.l1 < 0 || t.l2 < 0 || t.l3 < 0) return 0;
  if (t.sum() % 2 != 0) return 0;
  if (t.l1 > t.l2 + t.l3 || t.l2 > t.l1 + t.l3 || t.l3 > t.l1 + t.l2) return 0;
  return 1;
}

/// Number of distinct orderings of an ordered triple: 1, 3 or 6.
constexpr int permutation_multiplicity(const MultipoleTriple& t) noexcept {
  if (t.l1 == t.l2 && t.l2 == t.l3) return 1;
  if (t.l1 == t.l2 || t.l2 == t.l3 || t.l1 == t.l3) return 3;
  return 6;
}

/// ln(k!) for k in [0, size).  Entries come from lgamma, so each is
/// accurate independently of the others.
class LogFactorialTable {
 public:
  LogFactorialTable() = default;
  explicit LogFactorialTable(int max_argument) : table_(static_cast<std::size_t>(max_argument) + 1) {
    if (max_argument < 0) throw std::invalid_argument("LogFactorialTable: negative size");
    for (std::size_t k = 0; k < table_.size(); ++k) table_[k] = std::lgamma(static_cast<double>(k) + 1.0);
  }

  /// Table sufficient for every triple with components <= l_max.
  static LogFactorialTable for_lmax(int l_max) { return LogFactorialTable(3 * l_max + 2); }

  int max_argument() const noexcept { return static_cast<int>(table_.size()) - 1; }
  double operator()(int k) const noexcept { return table_[static_cast<std::size_t>(k)]; }

 private:
  std::vector<double> table_;
};

namespace detail {

// [3j(l1 l2 l3; 0 0 0)]^2 for a theta-valid triple, in closed form:
//   (L1! L2! L3! / (L+1)!) * (g! / ((g-l1)! (g-l2)! (g-l3)!))^2,  L = 2g.
template <class LogFact>
double wigner3j_zero_squared(const MultipoleTriple& t, LogFact&& lnfact) {
  const int L = t.sum();
  const int g = L / 2;
  const double log_w = lnfact(L - 2 * t.l1) + lnfact(L - 2 * t.l2) + lnfact(L - 2 * t.l3) - lnfact(L + 1) +
                       2.0 * (lnfact(g) - lnfact(g - t.l1) - lnfact(g - t.l2) - lnfact(g - t.l3));
  return std::exp(log_w);
}

inline double triple_degeneracy(const MultipoleTriple& t) noexcept {
  return (2.0 * t.l1 + 1.0) * (2.0 * t.l2 + 1.0) * (2.0 * t.l3 + 1.0);
}

}  // namespace detail

/// Exact geometric weight h^2 = (2l1+1)(2l2+1)(2l3+1)/(4 pi) * 3j(l1 l2 l3;000)^2,
/// evaluated in the log domain.  Exactly zero when theta_indicator is 0.
inline double h2_exact(const MultipoleTriple& t, const LogFactorialTable& lnfact) {
  if (!theta_indicator(t)) return 0.0;
  if (t.sum() + 1 > lnfact.max_argument()) {
    throw std::out_of_range("h2_exact: log-factorial table too small for triple");
  }
  return detail::triple_degeneracy(t) / (4.0 * std::numbers::pi) * detail::wigner3j_zero_squared(t, lnfact);
}

inline double h2_exact(const MultipoleTriple& t) {
  if (!theta_indicator(t)) return 0.0;
  auto lnfact = [](int k) { return std::lgamma(static_cast<double>(k) + 1.0); };
  return detail::triple_degeneracy(t) / (4.0 * std::numbers::pi) * detail::wigner3j_zero_squared(t, lnfact);
}

/// Gosper (Stirling-type) approximation to h^2.  Evaluated unconditionally;
/// callers gate on theta_indicator.
inline double h2_gosper(const MultipoleTriple& t) noexcept {
  const double L = t.sum();
  const double L1 = L - 2.0 * t.l1;
  const double L2 = L - 2.0 * t.l2;
  const double L3 = L - 2.0 * t.l3;
  constexpr double third = 1.0 / 3.0;
  constexpr double sixth = 1.0 / 6.0;
  const double ratio = detail::triple_degeneracy(t) * (L + third) /
                       ((L + 1.0) * (L1 + third) * (L2 + third) * (L3 + third));
  const double root = std::sqrt((L1 + sixth) * (L2 + sixth) * (L3 + sixth) / (L + sixth));
  return ratio * root / (2.0 * std::numbers::pi * std::numbers::pi);
}

namespace detail {

inline void require_positive_spectrum(const MultipoleTriple& t, const MultipoleView& cl) {
  for (int ell : {t.l1, t.l2, t.l3}) {
    if (!(cl[ell] > 0.0)) {
      throw NumericalError("geometric prefactor: C_l must be positive (l = " + std::to_string(ell) + ")");
    }
  }
}

}  // namespace detail

/// Per-triple prefactor of the direct 3D sum, Gosper form:
///   z = 1/(72 pi^2) (2l1+1)(2l2+1)(2l3+1)(L+1/3) / [(L+1) prod(Li+1/3) v1 v2 v3]
///       * sqrt(prod(Li+1/6) / ((L+1/6) C1 C2 C3))
inline double geometric_prefactor(const MultipoleTriple& t, const MultipoleView& cl, const MultipoleView& vl) {
  detail::require_positive_spectrum(t, cl);
  const double L = t.sum();
  const double L1 = L - 2.0 * t.l1;
  const double L2 = L - 2.0 * t.l2;
  const double L3 = L - 2.0 * t.l3;
  constexpr double third = 1.0 / 3.0;
  constexpr double sixth = 1.0 / 6.0;
  const double vvv = vl[t.l1] * vl[t.l2] * vl[t.l3];
  const double ccc = cl[t.l1] * cl[t.l2] * cl[t.l3];
  const double ratio = detail::triple_degeneracy(t) * (L + third) /
                       ((L + 1.0) * (L1 + third) * (L2 + third) * (L3 + third) * vvv);
  const double root = std::sqrt((L1 + sixth) * (L2 + sixth) * (L3 + sixth) / ((L + sixth) * ccc));
  return ratio * root / (72.0 * std::numbers::pi * std::numbers::pi);
}

/// Same prefactor with the exact 3j weight: h2_exact / (36 v1 v2 v3 sqrt(C1 C2 C3)).
inline double exact_prefactor(const MultipoleTriple& t, const MultipoleView& cl, const MultipoleView& vl,
                              const LogFactorialTable& lnfact) {
  detail::require_positive_spectrum(t, cl);
  const double vvv = vl[t.l1] * vl[t.l2] * vl[t.l3];
  const double ccc = cl[t.l1] * cl[t.l2] * cl[t.l3];
  return h2_exact(t, lnfact) / (36.0 * vvv * std::sqrt(ccc));
}

/// The set of ordered theta-valid triples in [l_min, l_max]^3, flattened into
/// one index range.  Enumeration is lexicographic: l1 outer, l2 >= l1, then
/// l3 from the first value >= l2 giving an even sum, in steps of 2, up to
/// min(l1 + l2, l_max).
///
/// Storage is one record per (l1, l2) row, so random access costs a binary
/// search over O(l_max^2) rows and sequential traversal is O(1) per step.
class TriangularDomain {
 public:
  using index_type = std::int64_t;

 private:
  struct Row {
    int l1;
    int l2;
    int l3_first;
    int count;
    index_type offset;
  };

 public:
  TriangularDomain() = default;

  TriangularDomain(int l_min, int l_max) : l_min_(l_min), l_max_(l_max) {
    if (l_min < 2 || l_max < l_min) {
      throw std::invalid_argument("TriangularDomain: require 2 <= l_min <= l_max (got " + std::to_string(l_min) +
                                  ", " + std::to_string(l_max) + ")");
    }
    index_type offset = 0;
    for (int l1 = l_min; l1 <= l_max; ++l1) {
      for (int l2 = l1; l2 <= l_max; ++l2) {
        const int first = (l1 % 2 == 0) ? l2 : l2 + 1;
        const int last = std::min(l1 + l2, l_max);
        if (last < first) continue;
        const int count = (last - first) / 2 + 1;
        rows_.push_back(Row{l1, l2, first, count, offset});
        offset += count;
      }
    }
    size_ = offset;
  }

  int l_min() const noexcept { return l_min_; }
  int l_max() const noexcept { return l_max_; }
  index_type size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  MultipoleTriple operator[](index_type index) const {
    if (index < 0 || index >= size_) throw std::out_of_range("TriangularDomain: index out of range");
    const auto& row = row_containing(index);
    return MultipoleTriple{row.l1, row.l2, row.l3_first + 2 * static_cast<int>(index - row.offset)};
  }

  /// Forward cursor over the flattened space.
  class Cursor {
   public:
    MultipoleTriple operator*() const noexcept {
      const Row& row = (*rows_)[row_];
      return MultipoleTriple{row.l1, row.l2, row.l3_first + 2 * within_};
    }
    Cursor& operator++() noexcept {
      if (++within_ == (*rows_)[row_].count) {
        ++row_;
        within_ = 0;
      }
      return *this;
    }

   private:
    friend class TriangularDomain;
    Cursor(const std::vector<Row>* rows, std::size_t row, int within) : rows_(rows), row_(row), within_(within) {}
    const std::vector<Row>* rows_;
    std::size_t row_;
    int within_;
  };

  /// Cursor positioned at `index`; index must be < size().
  Cursor cursor_at(index_type index) const {
    if (index < 0 || index >= size_) throw std::out_of_range("TriangularDomain: index out of range");
    const auto& row = row_containing(index);
    return Cursor(&rows_, static_cast<std::size_t>(&row - rows_.data()), static_cast<int>(index - row.offset));
  }

  /// Calls fn(triple) for every index in [begin, end), in order.
  template <class Fn>
  void for_each(index_type begin, index_type end, Fn&& fn) const {
    if (begin >= end) return;
    auto cursor = cursor_at(begin);
    for (index_type i = begin; i < end; ++i, ++cursor) fn(*cursor);
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for_each(0, size_, std::forward<Fn>(fn));
  }

 private:
  const Row& row_containing(index_type index) const {
    auto it = std::upper_bound(rows_.begin(), rows_.end(), index,
                               [](index_type value, const Row& row) { return value < row.offset; });
    return *std::prev(it);
  }

  int l_min_ = 2;
  int l_max_ = 2;
  index_type size_ = 0;
  std::vector<Row> rows_;
};

inline TriangularDomain enumerate_domain(int l_min, int l_max) { return TriangularDomain(l_min, l_max); }

}  // namespace modal

#endif  // MODAL_GEOMETRY_HPP
