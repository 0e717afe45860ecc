#ifndef MODAL_QUADRATURE_HPP
#define MODAL_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modal/compensated.hpp"
#include "modal/error.hpp"

namespace modal {

/// Gauss-Legendre rule on [-1, 1].  Nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

struct LegendrePair {
  double p_n;    // P_n(x)
  double p_nm1;  // P_{n-1}(x)
};

inline LegendrePair legendre_pair(int n, double x) noexcept {
  double p_prev = 1.0;
  double p = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = p_next;
  }
  return {p, p_prev};
}

}  // namespace detail

/// n-point Gauss-Legendre rule.  Nodes are the roots of P_n found by Newton
/// iteration from the Chebyshev-angle guess cos(pi (4b+3)/(4n+2)); weights
/// are 2/((1-x^2) P_n'(x)^2) with P_n' from the converged node.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  constexpr int max_iterations = 100;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);

  const int half = (n + 1) / 2;
  for (int b = 0; b < half; ++b) {
    // b = 0 is the largest root.
    double x = std::cos(std::numbers::pi * (4.0 * b + 3.0) / (4.0 * n + 2.0));
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
      const auto [p, pm1] = detail::legendre_pair(n, x);
      const double dp = n * (pm1 - x * p) / (1.0 - x * x);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) <= 2.0 * eps * std::fmax(std::fabs(x), eps)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("gauss_legendre: Newton iteration did not converge for n = " + std::to_string(n));
    }
    // Middle node of an odd rule is exactly zero by symmetry.
    if (n % 2 == 1 && b == half - 1) x = 0.0;
    const auto [p, pm1] = detail::legendre_pair(n, x);
    const double dp = n * (pm1 - x * p) / (1.0 - x * x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    const auto hi = static_cast<std::size_t>(n - 1 - b);
    const auto lo = static_cast<std::size_t>(b);
    rule.nodes[hi] = x;
    rule.nodes[lo] = -x;
    rule.weights[hi] = w;
    rule.weights[lo] = w;
  }
  return rule;
}

/// Number of nodes that integrates a product of three P_l, l <= l_max,
/// exactly (degree 3 l_max), plus two guard nodes.
inline int default_mu_points(int l_max) { return (3 * l_max + 1 + 1) / 2 + 2; }

/// P_l(mu_b) for l in [0, l_max] at every node, node-major with l fastest.
class LegendreTable {
 public:
  LegendreTable() = default;

  LegendreTable(int l_max, std::span<const double> nodes)
      : l_max_(l_max), n_nodes_(nodes.size()), values_((static_cast<std::size_t>(l_max) + 1) * nodes.size()) {
    if (l_max < 0) throw std::invalid_argument("LegendreTable: l_max must be >= 0");
    const std::size_t stride = static_cast<std::size_t>(l_max) + 1;
    for (std::size_t b = 0; b < n_nodes_; ++b) {
      double* row = values_.data() + b * stride;
      const double mu = nodes[b];
      row[0] = 1.0;
      if (l_max >= 1) row[1] = mu;
      for (int l = 1; l < l_max; ++l) {
        row[l + 1] = ((2.0 * l + 1.0) * mu * row[l] - l * row[l - 1]) / (l + 1.0);
      }
    }
  }

  int l_max() const noexcept { return l_max_; }
  std::size_t node_count() const noexcept { return n_nodes_; }

  double operator()(int ell, std::size_t node) const noexcept {
    return values_[node * (static_cast<std::size_t>(l_max_) + 1) + static_cast<std::size_t>(ell)];
  }

  /// P_l(mu_node) for l = 0..l_max.
  std::span<const double> node_row(std::size_t node) const noexcept {
    const std::size_t stride = static_cast<std::size_t>(l_max_) + 1;
    return {values_.data() + node * stride, stride};
  }

 private:
  int l_max_ = 0;
  std::size_t n_nodes_ = 0;
  std::vector<double> values_;
};

inline LegendreTable legendre_table(int l_max, const QuadratureRule& rule) { return LegendreTable(l_max, rule.nodes); }

// ---------------------------------------------------------------------------
// Radial integrators.  All three are linear in y and accumulate with
// compensated summation.

enum class Integrator { trapezium, hermite, spline };

inline std::string_view to_string(Integrator method) noexcept {
  switch (method) {
    case Integrator::trapezium: return "trap";
    case Integrator::hermite: return "hermite";
    case Integrator::spline: return "spline";
  }
  return "?";
}

inline Integrator parse_integrator(std::string_view name) {
  if (name == "trap" || name == "trapezium") return Integrator::trapezium;
  if (name == "hermite") return Integrator::hermite;
  if (name == "spline") return Integrator::spline;
  throw ConfigError("unknown integrator '" + std::string(name) + "' (expected trap, hermite or spline)");
}

namespace detail {

inline void check_samples(std::span<const double> r, std::span<const double> y, std::size_t min_len,
                          const char* who) {
  if (r.size() != y.size()) {
    throw std::invalid_argument(std::string(who) + ": length mismatch (grid " + std::to_string(r.size()) +
                                ", samples " + std::to_string(y.size()) + ")");
  }
  if (r.size() < min_len) {
    throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(min_len) + " samples");
  }
}

}  // namespace detail

/// sum_k (r_{k+1} - r_k) (y_k + y_{k+1}) / 2
inline double integrate_trapezium(std::span<const double> r, std::span<const double> y) {
  detail::check_samples(r, y, 2, "integrate_trapezium");
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < r.size(); ++k) sum.add(0.5 * (r[k + 1] - r[k]) * (y[k] + y[k + 1]));
  return sum.value();
}

/// Integral of the piecewise Hermite cubic whose end slopes are the forward
/// secants s_k = dy_k/dr_k:
///   1/2 sum_k dr_k [y_k + y_{k+1} + dr_k/6 (s_k - s_{k+1})].
/// The final interval has no s_{k+1}; it is clamped to s_k, so that interval
/// reduces to the trapezium.
inline double integrate_hermite(std::span<const double> r, std::span<const double> y) {
  detail::check_samples(r, y, 3, "integrate_hermite");
  const std::size_t intervals = r.size() - 1;
  CompensatedSum sum;
  double h = r[1] - r[0];
  double slope = (y[1] - y[0]) / h;
  for (std::size_t k = 0; k < intervals; ++k) {
    double h_next = h;
    double slope_next = slope;
    if (k + 1 < intervals) {
      h_next = r[k + 2] - r[k + 1];
      slope_next = (y[k + 2] - y[k + 1]) / h_next;
    }
    sum.add(0.5 * h * (y[k] + y[k + 1] + h / 6.0 * (slope - slope_next)));
    h = h_next;
    slope = slope_next;
  }
  return sum.value();
}

/// Integral of the natural cubic spline through (r_k, y_k).  Second
/// derivatives M come from the tridiagonal system with M_0 = M_{n-1} = 0;
/// each interval then contributes h (y_k + y_{k+1})/2 - h^3 (M_k + M_{k+1})/24.
inline double integrate_spline(std::span<const double> r, std::span<const double> y) {
  detail::check_samples(r, y, 4, "integrate_spline");
  const std::size_t n = r.size();
  std::vector<double> h(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = r[k + 1] - r[k];
    if (!(h[k] > 0.0)) throw std::invalid_argument("integrate_spline: grid must be strictly increasing");
  }

  // Thomas algorithm on the interior unknowns M_1..M_{n-2}.
  const std::size_t m = n - 2;
  std::vector<double> diag(m), rhs(m), second(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = i + 1;
    diag[i] = 2.0 * (h[k - 1] + h[k]);
    rhs[i] = 6.0 * ((y[k + 1] - y[k]) / h[k] - (y[k] - y[k - 1]) / h[k - 1]);
  }
  for (std::size_t i = 1; i < m; ++i) {
    const double factor = h[i] / diag[i - 1];
    diag[i] -= factor * h[i];
    rhs[i] -= factor * rhs[i - 1];
  }
  for (std::size_t i = m; i-- > 0;) {
    const double upper = (i + 1 < m) ? h[i + 1] * second[i + 2] : 0.0;
    if (diag[i] == 0.0) throw NumericalError("integrate_spline: singular tridiagonal system");
    second[i + 1] = (rhs[i] - upper) / diag[i];
  }

  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    sum.add(0.5 * h[k] * (y[k] + y[k + 1]));
    sum.add(-h[k] * h[k] * h[k] * (second[k] + second[k + 1]) / 24.0);
  }
  return sum.value();
}

inline double integrate(Integrator method, std::span<const double> r, std::span<const double> y) {
  switch (method) {
    case Integrator::trapezium: return integrate_trapezium(r, y);
    case Integrator::hermite: return integrate_hermite(r, y);
    case Integrator::spline: return integrate_spline(r, y);
  }
  throw std::invalid_argument("integrate: unknown method");
}

}  // namespace modal

#endif  // MODAL_QUADRATURE_HPP
