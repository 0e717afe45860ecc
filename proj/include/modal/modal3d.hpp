#ifndef MODAL_MODAL3D_HPP
#define MODAL_MODAL3D_HPP

// Direct evaluation of Gamma'_{nn'} over the sparse triangular domain:
//
//   Gamma'_{nn'} = sum_{ordered valid t} mult(t) z(t) y_n(t) x_{n'}(t)
//
//   y_n(t)   = sum over the 6 assignments of (i,j,k) to (l1,l2,l3) of q q q
//   x_n'(t)  = int r^2 dr  sum over the 6 assignments of (i',j',k') of q~ q~ q~
//   z(t)     = Gosper or exact-3j prefactor
//
// The optimised driver fills blocks of B triples into two B x n_max panels
// P (late factors y) and X (mult * z * x) and accumulates Gamma += P^T X.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modal/basis.hpp"
#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"
#include "modal/geometry.hpp"
#include "modal/quadrature.hpp"
#include "modal/scheduler.hpp"

namespace modal {

enum class H2Mode { gosper, exact };

inline std::string_view to_string(H2Mode mode) noexcept { return mode == H2Mode::gosper ? "gosper" : "exact"; }

inline H2Mode parse_h2_mode(std::string_view name) {
  if (name == "gosper") return H2Mode::gosper;
  if (name == "exact") return H2Mode::exact;
  throw ConfigError("unknown h2 mode '" + std::string(name) + "' (expected gosper or exact)");
}

inline constexpr int default_block_size = 64;

struct Modal3DInputs {
  const BasisTables& tables;
  const RadialGrid& grid;
  const ModeMapping& mapping;
  Integrator integrator = Integrator::trapezium;
};

struct Modal3DOptions {
  H2Mode h2_mode = H2Mode::gosper;
  int block = default_block_size;
  int workers = 1;
};

namespace detail {

// The six assignments of three slots to (l1, l2, l3).
inline constexpr std::array<std::array<int, 3>, 6> slot_perms = {
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

inline void check_3d_inputs(const Modal3DInputs& in) {
  if (in.grid.size() != static_cast<std::size_t>(in.tables.radial_count())) {
    throw std::invalid_argument("modal3d: radial grid size does not match basis tables");
  }
  if (in.mapping.p_max() > in.tables.p_max()) {
    throw std::invalid_argument("modal3d: mode mapping uses more basis functions than the tables provide");
  }
  if (in.tables.l_min() < 2) throw std::invalid_argument("modal3d: l_min must be >= 2");
}

inline GammaMetadata metadata_3d(const Modal3DInputs& in, H2Mode mode, const char* engine) {
  return GammaMetadata{engine,
                       in.tables.l_min(),
                       in.tables.l_max(),
                       in.mapping.p_max(),
                       std::string(to_string(in.integrator)),
                       std::string(to_string(mode)),
                       fingerprint(in.grid),
                       fingerprint(in.mapping)};
}

/// z(t) for the chosen weight, without the permutation multiplicity.
class TriplePrefactor {
 public:
  TriplePrefactor(const BasisTables& tables, H2Mode mode)
      : cl_(tables.C_view()), vl_(tables.v_view()), mode_(mode) {
    if (mode_ == H2Mode::exact) lnfact_ = LogFactorialTable::for_lmax(tables.l_max());
  }

  double operator()(const MultipoleTriple& t) const {
    return mode_ == H2Mode::gosper ? geometric_prefactor(t, cl_, vl_) : exact_prefactor(t, cl_, vl_, lnfact_);
  }

 private:
  MultipoleView cl_;
  MultipoleView vl_;
  H2Mode mode_;
  LogFactorialTable lnfact_;
};

}  // namespace detail

/// x_{n'}(t): radial integral of r^2 times the symmetrised q~ triple product.
inline double radial_integral_x(const MultipoleTriple& t, int n_prime, const BasisTables& tables, const RadialGrid& grid,
                                const ModeMapping& mapping, Integrator integrator = Integrator::trapezium) {
  const auto idx = mapping[n_prime].as_array();
  const std::array<int, 3> ells = {t.l1, t.l2, t.l3};
  std::vector<double> f(grid.size());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double s = 0.0;
    for (const auto& p : detail::slot_perms) {
      s += tables.q_tilde(idx[p[0]], x, ells[0]) * tables.q_tilde(idx[p[1]], x, ells[1]) *
           tables.q_tilde(idx[p[2]], x, ells[2]);
    }
    f[x] = grid[x] * grid[x] * s;
  }
  return integrate(integrator, grid.r(), f);
}

/// y_n(t): symmetrised q triple product.
inline double late_product_y(const MultipoleTriple& t, int n, const BasisTables& tables, const ModeMapping& mapping) {
  const auto idx = mapping[n].as_array();
  const std::array<int, 3> ells = {t.l1, t.l2, t.l3};
  double s = 0.0;
  for (const auto& p : detail::slot_perms) {
    s += tables.q(idx[p[0]], ells[0]) * tables.q(idx[p[1]], ells[1]) * tables.q(idx[p[2]], ells[2]);
  }
  return s;
}

namespace detail {

/// Per-worker scratch for one triple: q~_b(r_x, l_c) gathered contiguous in
/// x, and q_b(l_c).
class TripleGather {
 public:
  TripleGather(const BasisTables& tables, std::size_t radial)
      : tables_(tables), radial_(radial), p_(static_cast<std::size_t>(tables.p_max())),
        qt_(3 * p_ * radial), q_(3 * p_), integrand_(radial) {}

  void load(const MultipoleTriple& t) {
    const std::array<int, 3> ells = {t.l1, t.l2, t.l3};
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t b = 0; b < p_; ++b) {
        q_[c * p_ + b] = tables_.q(static_cast<int>(b), ells[c]);
        double* dst = qt_.data() + (c * p_ + b) * radial_;
        for (std::size_t x = 0; x < radial_; ++x) dst[x] = tables_.q_tilde(static_cast<int>(b), x, ells[c]);
      }
    }
  }

  double late(const ModeTriple& m) const noexcept {
    const std::array<int, 3> idx = m.as_array();
    double s = 0.0;
    for (const auto& p : slot_perms) {
      s += q_[0 * p_ + static_cast<std::size_t>(idx[p[0]])] * q_[1 * p_ + static_cast<std::size_t>(idx[p[1]])] *
           q_[2 * p_ + static_cast<std::size_t>(idx[p[2]])];
    }
    return s;
  }

  double radial(const ModeTriple& m, const RadialGrid& grid, Integrator integrator) {
    const std::array<int, 3> idx = m.as_array();
    const double* a[3];
    const double* b[3];
    const double* c[3];
    for (std::size_t s = 0; s < 3; ++s) {
      const auto u = static_cast<std::size_t>(idx[s]);
      a[s] = qt_.data() + (0 * p_ + u) * radial_;
      b[s] = qt_.data() + (1 * p_ + u) * radial_;
      c[s] = qt_.data() + (2 * p_ + u) * radial_;
    }
    for (std::size_t x = 0; x < radial_; ++x) {
      double s = 0.0;
      for (const auto& p : slot_perms) s += a[p[0]][x] * b[p[1]][x] * c[p[2]][x];
      integrand_[x] = grid[x] * grid[x] * s;
    }
    return integrate(integrator, grid.r(), integrand_);
  }

 private:
  const BasisTables& tables_;
  std::size_t radial_;
  std::size_t p_;
  std::vector<double> qt_;
  std::vector<double> q_;
  std::vector<double> integrand_;
};

/// gamma += P^T X over `rows` filled rows of the two B x n panels.
inline void accumulate_block(GammaMatrix& gamma, std::span<const double> panel_p, std::span<const double> panel_x,
                             std::size_t rows) {
  const std::size_t n = gamma.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto out = gamma.row(i);
    for (std::size_t b = 0; b < rows; ++b) {
      const double p = panel_p[b * n + i];
      const double* xrow = panel_x.data() + b * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += p * xrow[j];
    }
  }
}

}  // namespace detail

/// Blocked, chunk-parallel evaluation.  Each worker owns a contiguous range
/// of the flattened triple space, private panels of 2 * B * n_max values and a
/// private partial matrix; partials are merged in ascending worker order.
/// Bitwise reproducible for fixed (workers, block).
inline GammaMatrix gamma3d_matrix(const Modal3DInputs& in, const Modal3DOptions& opt = {}) {
  detail::check_3d_inputs(in);
  if (opt.block < 1) throw std::invalid_argument("gamma3d_matrix: block size must be >= 1");
  if (opt.workers < 1) throw std::invalid_argument("gamma3d_matrix: worker count must be >= 1");

  const auto meta = detail::metadata_3d(in, opt.h2_mode, "modal3d");
  const auto n = static_cast<std::size_t>(in.mapping.n_max());
  const auto domain = enumerate_domain(in.tables.l_min(), in.tables.l_max());
  const detail::TriplePrefactor prefactor(in.tables, opt.h2_mode);
  const auto block = static_cast<std::size_t>(opt.block);

  const auto plan = make_plan(domain.size(), opt.workers);
  std::vector<GammaMatrix> partials(static_cast<std::size_t>(opt.workers), GammaMatrix(n, meta));

  run_chunks(plan, [&](int worker, ChunkRange range) {
    auto& gamma = partials[static_cast<std::size_t>(worker)];
    std::vector<double> panel_p(block * n), panel_x(block * n);
    detail::TripleGather gather(in.tables, in.grid.size());
    std::size_t filled = 0;
    domain.for_each(range.begin, range.end, [&](const MultipoleTriple& t) {
      gather.load(t);
      const double weight = permutation_multiplicity(t) * prefactor(t);
      double* prow = panel_p.data() + filled * n;
      double* xrow = panel_x.data() + filled * n;
      for (std::size_t m = 0; m < n; ++m) {
        const auto& mode = in.mapping[static_cast<int>(m)];
        prow[m] = gather.late(mode);
        xrow[m] = weight * gather.radial(mode, in.grid, in.integrator);
      }
      if (++filled == block) {
        detail::accumulate_block(gamma, panel_p, panel_x, filled);
        filled = 0;
      }
    });
    if (filled > 0) detail::accumulate_block(gamma, panel_p, panel_x, filled);
  });

  auto merged = merge_partials(partials);
  merged.meta() = meta;
  return merged;
}

/// Reference evaluation with the original loop structure: primordial mode
/// outermost, then the triangular l1/l2/l3 loops, accumulating one column
/// vector per l1 and folding it into Gamma.  Single-threaded.
inline GammaMatrix gamma3d_naive(const Modal3DInputs& in, H2Mode mode = H2Mode::gosper) {
  detail::check_3d_inputs(in);
  const int n_max = in.mapping.n_max();
  const int l_min = in.tables.l_min();
  const int l_max = in.tables.l_max();
  GammaMatrix gamma(static_cast<std::size_t>(n_max), detail::metadata_3d(in, mode, "modal3d-naive"));
  const detail::TriplePrefactor prefactor(in.tables, mode);

  std::vector<double> mvec(static_cast<std::size_t>(n_max));
  for (int np = 0; np < n_max; ++np) {
    for (int l1 = l_min; l1 <= l_max; ++l1) {
      std::fill(mvec.begin(), mvec.end(), 0.0);
      for (int l2 = l1; l2 <= l_max; ++l2) {
        for (int l3 = l2 + (l1 % 2); l3 <= std::min(l1 + l2, l_max); l3 += 2) {
          const MultipoleTriple t{l1, l2, l3};
          const double x = radial_integral_x(t, np, in.tables, in.grid, in.mapping, in.integrator);
          const double z = permutation_multiplicity(t) * prefactor(t);
          for (int m = 0; m < n_max; ++m) {
            const double y = late_product_y(t, m, in.tables, in.mapping);
            mvec[static_cast<std::size_t>(m)] += x * y * z;
          }
        }
      }
      for (int m = 0; m < n_max; ++m) gamma(static_cast<std::size_t>(m), static_cast<std::size_t>(np)) += mvec[static_cast<std::size_t>(m)];
    }
  }
  return gamma;
}

}  // namespace modal

#endif  // MODAL_MODAL3D_HPP
