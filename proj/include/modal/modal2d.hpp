#ifndef MODAL_MODAL2D_HPP
#define MODAL_MODAL2D_HPP

// Separable evaluation of Gamma'_{nn'}:
//
//   Gamma'_{nn'} = 1/(48 pi) int r^2 dr int dmu perm[ P_{aa'}(r, mu) ]_{a in ijk, a' in i'j'k'}
//   P_{ab}(r, mu) = sum_l (2l+1)/(v_l sqrt(C_l)) q~_b(r, l) q_a(l) P_l(mu)
//
// The mu integral is done first, at every radial sample, by Gauss-Legendre
// quadrature; the radial integral follows.  There is no path that swaps the
// two.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modal/basis.hpp"
#include "modal/compensated.hpp"
#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"
#include "modal/quadrature.hpp"
#include "modal/scheduler.hpp"

namespace modal {

inline constexpr std::size_t default_ptable_budget = std::size_t{2} << 30;  // 2 GiB

/// Everything the separable engine reads.  Non-owning.
struct Modal2DInputs {
  const BasisTables& tables;
  const RadialGrid& grid;
  const ModeMapping& mapping;
  const QuadratureRule& rule;
  const LegendreTable& legendre;
  Integrator integrator = Integrator::trapezium;
};

namespace detail {

inline void check_2d_inputs(const Modal2DInputs& in) {
  if (in.grid.size() != static_cast<std::size_t>(in.tables.radial_count())) {
    throw std::invalid_argument("modal2d: radial grid size does not match basis tables");
  }
  if (in.mapping.p_max() > in.tables.p_max()) {
    throw std::invalid_argument("modal2d: mode mapping uses more basis functions than the tables provide");
  }
  if (in.legendre.node_count() != in.rule.size()) {
    throw std::invalid_argument("modal2d: Legendre table and quadrature rule disagree on node count");
  }
  if (in.legendre.l_max() < in.tables.l_max()) {
    throw std::invalid_argument("modal2d: Legendre table does not reach l_max");
  }
}

/// (2l+1)/(v_l sqrt(C_l)) over the table's l range.
inline std::vector<double> l_weights(const BasisTables& tables) {
  std::vector<double> w(static_cast<std::size_t>(tables.l_count()));
  for (int ell = tables.l_min(); ell <= tables.l_max(); ++ell) {
    if (!(tables.C(ell) > 0.0)) throw NumericalError("modal2d: C_l must be positive (l = " + std::to_string(ell) + ")");
    w[static_cast<std::size_t>(ell - tables.l_min())] = (2.0 * ell + 1.0) / (tables.v(ell) * std::sqrt(tables.C(ell)));
  }
  return w;
}

/// Permanent of the 3x3 matrix m[row][col], written as six products.
inline double permanent3(const double m[3][3]) noexcept {
  const double s1 = m[0][0] * m[1][1] * m[2][2];
  const double s2 = m[0][0] * m[1][2] * m[2][1];
  const double s3 = m[0][1] * m[1][0] * m[2][2];
  const double s4 = m[0][1] * m[1][2] * m[2][0];
  const double s5 = m[0][2] * m[1][0] * m[2][1];
  const double s6 = m[0][2] * m[1][1] * m[2][0];
  return s1 + s2 + s3 + s4 + s5 + s6;
}

inline GammaMetadata metadata_2d(const Modal2DInputs& in, const char* engine) {
  return GammaMetadata{engine,
                       in.tables.l_min(),
                       in.tables.l_max(),
                       in.mapping.p_max(),
                       std::string(to_string(in.integrator)),
                       "",
                       fingerprint(in.grid),
                       fingerprint(in.mapping)};
}

inline constexpr double inv_48pi = 1.0 / (48.0 * std::numbers::pi);

}  // namespace detail

/// P[a][b][x][m], mu node index innermost.
class PTable {
 public:
  PTable() = default;
  PTable(int p_max, std::size_t radial, std::size_t nodes)
      : p_max_(p_max), radial_(radial), nodes_(nodes),
        values_(static_cast<std::size_t>(p_max) * static_cast<std::size_t>(p_max) * radial * nodes) {}

  static std::size_t bytes_required(int p_max, std::size_t radial, std::size_t nodes) noexcept {
    return static_cast<std::size_t>(p_max) * static_cast<std::size_t>(p_max) * radial * nodes * sizeof(double);
  }

  int p_max() const noexcept { return p_max_; }
  std::size_t radial_count() const noexcept { return radial_; }
  std::size_t node_count() const noexcept { return nodes_; }

  double operator()(int a, int b, std::size_t x, std::size_t m) const noexcept { return values_[index(a, b, x) + m]; }

  /// P[a][b][x][*] over the mu nodes.
  std::span<const double> nodes_at(int a, int b, std::size_t x) const noexcept { return {values_.data() + index(a, b, x), nodes_}; }
  std::span<double> nodes_at(int a, int b, std::size_t x) noexcept { return {values_.data() + index(a, b, x), nodes_}; }

 private:
  std::size_t index(int a, int b, std::size_t x) const noexcept {
    return ((static_cast<std::size_t>(a) * static_cast<std::size_t>(p_max_) + static_cast<std::size_t>(b)) * radial_ + x) * nodes_;
  }

  int p_max_ = 0;
  std::size_t radial_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> values_;
};

/// Precomputes P_{ab}(r_x, mu_m) for every (a, b, x, m).  Each entry is a
/// compensated sum in ascending l.  Parallel over (a, b) slabs; each slab is
/// written by exactly one worker, so the table does not depend on `workers`.
inline PTable build_ptable(const BasisTables& tables, const RadialGrid& grid, const QuadratureRule& rule,
                           const LegendreTable& legendre, std::size_t budget_bytes = default_ptable_budget,
                           int workers = 1) {
  if (grid.size() != static_cast<std::size_t>(tables.radial_count())) {
    throw std::invalid_argument("build_ptable: radial grid size does not match basis tables");
  }
  if (legendre.node_count() != rule.size() || legendre.l_max() < tables.l_max()) {
    throw std::invalid_argument("build_ptable: Legendre table inconsistent with rule or l range");
  }
  const int P = tables.p_max();
  const std::size_t R = grid.size();
  const std::size_t M = rule.size();
  const std::size_t required = PTable::bytes_required(P, R, M);
  if (required > budget_bytes) {
    throw NumericalError("build_ptable: table needs " + std::to_string(required) + " bytes, budget allows " +
                         std::to_string(budget_bytes));
  }

  const auto weights = detail::l_weights(tables);
  const auto L = static_cast<std::size_t>(tables.l_count());
  const auto l_offset = static_cast<std::size_t>(tables.l_min());
  PTable table(P, R, M);

  const auto plan = make_plan(static_cast<std::int64_t>(P) * P, workers);
  run_chunks(plan, [&](int, ChunkRange range) {
    std::vector<double> g(L);
    for (std::int64_t slab = range.begin; slab < range.end; ++slab) {
      const int a = static_cast<int>(slab / P);
      const int b = static_cast<int>(slab % P);
      const auto qa = tables.q_row(a);
      for (std::size_t x = 0; x < R; ++x) {
        const auto qb = tables.q_tilde_row(b, x);
        for (std::size_t l = 0; l < L; ++l) g[l] = weights[l] * qb[l] * qa[l];
        auto out = table.nodes_at(a, b, x);
        for (std::size_t m = 0; m < M; ++m) {
          const auto pl = legendre.node_row(m).subspan(l_offset, L);
          out[m] = compensated_dot(g, pl);
        }
      }
    }
  });
  return table;
}

/// One entry from the precomputed table.
inline double gamma2d_entry(int n, int n_prime, const PTable& ptable, const ModeMapping& mapping, const RadialGrid& grid,
                            const QuadratureRule& rule, Integrator integrator = Integrator::trapezium) {
  const auto rows = mapping[n].as_array();
  const auto cols = mapping[n_prime].as_array();
  if (ptable.radial_count() != grid.size() || ptable.node_count() != rule.size()) {
    throw std::invalid_argument("gamma2d_entry: table dimensions do not match grid or rule");
  }
  const std::size_t R = grid.size();
  const std::size_t M = rule.size();

  std::vector<double> radial(R);
  for (std::size_t x = 0; x < R; ++x) {
    std::span<const double> cell[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) cell[a][b] = ptable.nodes_at(rows[a], cols[b], x);
    CompensatedSum mu_sum;
    for (std::size_t m = 0; m < M; ++m) {
      const double mat[3][3] = {{cell[0][0][m], cell[0][1][m], cell[0][2][m]},
                                {cell[1][0][m], cell[1][1][m], cell[1][2][m]},
                                {cell[2][0][m], cell[2][1][m], cell[2][2][m]}};
      mu_sum.add(rule.weights[m] * detail::permanent3(mat));
    }
    radial[x] = grid[x] * grid[x] * mu_sum.value();
  }
  return detail::inv_48pi * integrate(integrator, grid.r(), radial);
}

/// Reference evaluation without the table: the nine l-sums are recomputed
/// at every (r, mu) point.
inline double gamma2d_entry_naive(int n, int n_prime, const BasisTables& tables, const RadialGrid& grid,
                                  const QuadratureRule& rule, const LegendreTable& legendre,
                                  const ModeMapping& mapping, Integrator integrator = Integrator::trapezium) {
  const auto rows = mapping[n].as_array();
  const auto cols = mapping[n_prime].as_array();
  const auto weights = detail::l_weights(tables);
  const auto L = static_cast<std::size_t>(tables.l_count());
  const auto l_offset = static_cast<std::size_t>(tables.l_min());
  const std::size_t R = grid.size();
  const std::size_t M = rule.size();

  std::vector<double> factor(L);
  std::vector<double> radial(R);
  for (std::size_t x = 0; x < R; ++x) {
    CompensatedSum mu_sum;
    for (std::size_t m = 0; m < M; ++m) {
      const auto pl = legendre.node_row(m).subspan(l_offset, L);
      for (std::size_t l = 0; l < L; ++l) factor[l] = weights[l] * pl[l];
      double mat[3][3];
      for (int a = 0; a < 3; ++a) {
        const auto qa = tables.q_row(rows[a]);
        for (int b = 0; b < 3; ++b) {
          const auto qb = tables.q_tilde_row(cols[b], x);
          CompensatedSum s;
          for (std::size_t l = 0; l < L; ++l) s.add(factor[l] * qa[l] * qb[l]);
          mat[a][b] = s.value();
        }
      }
      mu_sum.add(rule.weights[m] * detail::permanent3(mat));
    }
    radial[x] = grid[x] * grid[x] * mu_sum.value();
  }
  return detail::inv_48pi * integrate(integrator, grid.r(), radial);
}

/// Full matrix from a prebuilt table.  Cells are split across workers; each
/// cell is written once by one worker, so the result is bitwise independent
/// of the worker count.
inline GammaMatrix gamma2d_matrix(const Modal2DInputs& in, const PTable& ptable, int workers = 1) {
  detail::check_2d_inputs(in);
  const int n_max = in.mapping.n_max();
  GammaMatrix gamma(static_cast<std::size_t>(n_max), detail::metadata_2d(in, "modal2d"));
  const auto plan = make_plan(static_cast<std::int64_t>(n_max) * n_max, workers);
  run_chunks(plan, [&](int, ChunkRange range) {
    for (std::int64_t cell = range.begin; cell < range.end; ++cell) {
      const int n = static_cast<int>(cell / n_max);
      const int np = static_cast<int>(cell % n_max);
      gamma(static_cast<std::size_t>(n), static_cast<std::size_t>(np)) =
          gamma2d_entry(n, np, ptable, in.mapping, in.grid, in.rule, in.integrator);
    }
  });
  return gamma;
}

/// Builds the table, then the matrix.
inline GammaMatrix gamma2d_matrix(const Modal2DInputs& in, int workers = 1,
                                  std::size_t budget_bytes = default_ptable_budget) {
  detail::check_2d_inputs(in);
  const auto ptable = build_ptable(in.tables, in.grid, in.rule, in.legendre, budget_bytes, workers);
  return gamma2d_matrix(in, ptable, workers);
}

/// Every cell through gamma2d_entry_naive.
inline GammaMatrix gamma2d_matrix_naive(const Modal2DInputs& in, int workers = 1) {
  detail::check_2d_inputs(in);
  const int n_max = in.mapping.n_max();
  GammaMatrix gamma(static_cast<std::size_t>(n_max), detail::metadata_2d(in, "modal2d-naive"));
  const auto plan = make_plan(static_cast<std::int64_t>(n_max) * n_max, workers);
  run_chunks(plan, [&](int, ChunkRange range) {
    for (std::int64_t cell = range.begin; cell < range.end; ++cell) {
      const int n = static_cast<int>(cell / n_max);
      const int np = static_cast<int>(cell % n_max);
      gamma(static_cast<std::size_t>(n), static_cast<std::size_t>(np)) =
          gamma2d_entry_naive(n, np, in.tables, in.grid, in.rule, in.legendre, in.mapping, in.integrator);
    }
  });
  return gamma;
}

}  // namespace modal

#endif  // MODAL_MODAL2D_HPP
