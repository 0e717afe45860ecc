#ifndef MODAL_SCHEDULER_HPP
#define MODAL_SCHEDULER_HPP

// Static contiguous partitioning of a flat iteration space, a worker pool
// that runs one task per chunk, and the fixed-order merge of per-worker
// partial results.

#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

#include "modal/gamma_matrix.hpp"

namespace modal {

struct ChunkRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t size() const noexcept { return end - begin; }
  friend bool operator==(const ChunkRange&, const ChunkRange&) = default;
};

struct ChunkPlan {
  int workers = 1;
  std::int64_t total = 0;
  std::vector<ChunkRange> ranges;
};

/// The first N mod W workers get ceil(N/W) iterations, the rest floor(N/W).
inline ChunkPlan make_plan(std::int64_t total, int workers) {
  if (total < 0) throw std::invalid_argument("make_plan: negative iteration count");
  if (workers < 1) throw std::invalid_argument("make_plan: worker count must be >= 1");
  ChunkPlan plan{workers, total, {}};
  plan.ranges.reserve(static_cast<std::size_t>(workers));
  const std::int64_t base = total / workers;
  const std::int64_t extra = total % workers;
  std::int64_t start = 0;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t len = base + (w < extra ? 1 : 0);
    plan.ranges.push_back({start, start + len});
    start += len;
  }
  return plan;
}

/// Runs fn(worker, range) for every chunk of the plan, one thread per chunk
/// beyond the first (worker 0 runs on the calling thread).  The first
/// exception thrown by any worker is rethrown after all have joined.
template <class Fn>
void run_chunks(const ChunkPlan& plan, Fn&& fn) {
  const auto n = plan.ranges.size();
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t w) {
    try {
      fn(static_cast<int>(w), plan.ranges[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(n > 0 ? n - 1 : 0);
    for (std::size_t w = 1; w < n; ++w) threads.emplace_back(body, w);
    if (n > 0) body(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Entrywise sum of partial results in ascending list order.
inline GammaMatrix merge_partials(const std::vector<GammaMatrix>& partials) {
  if (partials.empty()) throw std::invalid_argument("merge_partials: no partials");
  const auto& first = partials.front();
  for (const auto& p : partials) {
    if (p.size() != first.size()) throw std::invalid_argument("merge_partials: shape mismatch");
    if (!p.meta().compatible_with(first.meta())) throw std::invalid_argument("merge_partials: metadata fingerprint mismatch");
  }
  GammaMatrix out(first.size(), first.meta());
  auto dst = out.data();
  for (const auto& p : partials) {
    auto src = p.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return out;
}

}  // namespace modal

#endif  // MODAL_SCHEDULER_HPP
