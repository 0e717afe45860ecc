#ifndef MODAL_COMPARE_HPP
#define MODAL_COMPARE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"

namespace modal {

/// max_ij |a_ij - b_ij| / max(|a_ij|, |b_ij|).  Cells where both are exactly
/// zero contribute nothing.
inline double max_relative_deviation(const GammaMatrix& a, const GammaMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_deviation: shape mismatch");
  double worst = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double scale = std::max(std::fabs(x[k]), std::fabs(y[k]));
    if (scale == 0.0) continue;
    worst = std::max(worst, std::fabs(x[k] - y[k]) / scale);
  }
  return worst;
}

/// Frobenius norm.
inline double frobenius_norm(const GammaMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

/// Percentage RMSE between the two matrices after scaling each to unit
/// Frobenius norm: 100 sqrt(mean((A/|A| - B/|B|)^2)).
inline double rmse_percent(const GammaMatrix& a, const GammaMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmse_percent: shape mismatch");
  if (a.size() == 0) throw std::invalid_argument("rmse_percent: empty matrices");
  const double na = frobenius_norm(a);
  const double nb = frobenius_norm(b);
  if (na == 0.0 || nb == 0.0) throw NumericalError("rmse_percent: zero matrix has no unit normalisation");
  const auto x = a.data();
  const auto y = b.data();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] / na - y[k] / nb;
    s += d * d;
  }
  return 100.0 * std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace modal

#endif  // MODAL_COMPARE_HPP
