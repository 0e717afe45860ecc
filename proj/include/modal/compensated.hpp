#ifndef MODAL_COMPENSATED_HPP
#define MODAL_COMPENSATED_HPP

#include <cmath>
#include <cstddef>
#include <span>

namespace modal {

/// Neumaier's variant of Kahan summation.  The running error term is
/// carried separately and folded in on value().
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Compensated dot product of two equal-length ranges.
inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept {
  CompensatedSum s;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) s.add(a[i] * b[i]);
  return s.value();
}

}  // namespace modal

#endif  // MODAL_COMPENSATED_HPP
