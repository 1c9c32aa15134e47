#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace lsh {

/// Worker count used by every parallel loop in the library. Zero restores
/// the default (hardware concurrency, or LSH_THREADS when set).
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n, never on the worker count, so callers that write
/// per-index results get identical output for any number of threads.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)> &body);

/// Pairwise tree reduction in fixed index order.
double pairwise_sum(std::span<const double> values);

/// SplitMix64 finalizer; used to derive independent RNG streams from a
/// (seed, stream index) pair.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lsh
