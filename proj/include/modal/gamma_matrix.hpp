#ifndef MODAL_GAMMA_MATRIX_HPP
#define MODAL_GAMMA_MATRIX_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modal/basis.hpp"

namespace modal {

/// 64-bit FNV-1a, used to tie a result to the grid and mapping it came from.
class Fingerprint {
 public:
  Fingerprint& add(std::uint64_t word) noexcept {
    for (int b = 0; b < 8; ++b) {
      hash_ ^= (word >> (8 * b)) & 0xffu;
      hash_ *= 0x100000001b3ull;
    }
    return *this;
  }
  Fingerprint& add(double x) noexcept { return add(std::bit_cast<std::uint64_t>(x)); }
  Fingerprint& add(int x) noexcept { return add(static_cast<std::uint64_t>(static_cast<std::int64_t>(x))); }

  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fingerprint(const RadialGrid& grid) {
  Fingerprint f;
  f.add(static_cast<std::uint64_t>(grid.size()));
  for (double r : grid.r()) f.add(r);
  return f.value();
}

inline std::uint64_t fingerprint(const ModeMapping& mapping) {
  Fingerprint f;
  f.add(mapping.p_max()).add(mapping.n_max());
  for (const auto& e : mapping.entries()) f.add(e.i).add(e.j).add(e.k);
  return f.value();
}

struct GammaMetadata {
  std::string engine;       // "modal2d", "modal2d-naive", "modal3d", "modal3d-naive", ...
  int l_min = 0;
  int l_max = 0;
  int p_max = 0;
  std::string integrator;   // "trap", "hermite", "spline"
  std::string h2_mode;      // "gosper", "exact", or empty for the 2D engine
  std::uint64_t grid_fingerprint = 0;
  std::uint64_t mapping_fingerprint = 0;

  /// Shape-relevant identity: everything except the engine label.
  bool compatible_with(const GammaMetadata& o) const noexcept {
    return l_min == o.l_min && l_max == o.l_max && p_max == o.p_max && integrator == o.integrator &&
           h2_mode == o.h2_mode && grid_fingerprint == o.grid_fingerprint && mapping_fingerprint == o.mapping_fingerprint;
  }
};

/// Dense n_max x n_max projection matrix.  Rows are late-time modes n,
/// columns primordial modes n'.  Row-major.
class GammaMatrix {
 public:
  GammaMatrix() = default;
  explicit GammaMatrix(std::size_t n, GammaMetadata meta = {}) : n_(n), data_(n * n, 0.0), meta_(std::move(meta)) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * n_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * n_ + col]; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * n_, n_}; }

  const GammaMetadata& meta() const noexcept { return meta_; }
  GammaMetadata& meta() noexcept { return meta_; }

  /// Bitwise equality of values (metadata ignored).
  bool same_values(const GammaMatrix& o) const noexcept {
    if (n_ != o.n_) return false;
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if (std::bit_cast<std::uint64_t>(data_[k]) != std::bit_cast<std::uint64_t>(o.data_[k])) return false;
    }
    return true;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
  GammaMetadata meta_;
};

}  // namespace modal

#endif  // MODAL_GAMMA_MATRIX_HPP
