#ifndef QQLAB_PARALLEL_HPP_
#define QQLAB_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "qqlab/rng.hpp"

namespace qqlab {

namespace detail {
inline std::atomic<unsigned> &worker_count_storage() {
  static std::atomic<unsigned> count{
      std::max(1u, std::thread::hardware_concurrency())};
  return count;
}
} // namespace detail

/// Number of worker threads used by replicate-parallel estimators.
inline unsigned worker_count() { return detail::worker_count_storage().load(); }

inline void set_worker_count(unsigned n) {
  detail::worker_count_storage().store(std::max(1u, n));
}

/// Replicates per chunk. Chunk boundaries depend only on the replicate count,
/// never on the worker count, which is what makes results bit-identical under
/// any degree of parallelism.
inline constexpr std::size_t kChunkSize = 1u << 13;

/// Half-open replicate range assigned to one chunk, with its private stream.
struct Chunk {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
  UniformStream rng;

  std::size_t size() const { return end - begin; }
};

/// Runs `fn(Chunk&)` over fixed chunks of [0, n) and returns the per-chunk
/// results in chunk order. Chunk c draws from `stream.substream(c)`.
template <class Fn>
auto map_chunks(std::size_t n, const UniformStream &stream, Fn &&fn)
    -> std::vector<std::invoke_result_t<Fn &, Chunk &>> {
  using Result = std::invoke_result_t<Fn &, Chunk &>;
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Result> results(n_chunks);

  auto run_one = [&](std::size_t c) {
    Chunk chunk{c, c * kChunkSize, std::min(n, (c + 1) * kChunkSize),
                stream.substream(c)};
    results[c] = fn(chunk);
  };

  const std::size_t n_workers =
      std::min<std::size_t>(worker_count(), n_chunks);
  if (n_workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      run_one(c);
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < n_chunks;
           c = next.fetch_add(1)) {
        try {
          run_one(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto &w : workers) {
    w.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return results;
}

/// Draws n scalar replicates `draw(rng)` and concatenates them in chunk order.
template <class Draw>
std::vector<double> sample_replicates(std::size_t n, const UniformStream &stream,
                                      Draw &&draw) {
  auto parts = map_chunks(n, stream, [&](Chunk &chunk) {
    std::vector<double> out;
    out.reserve(chunk.size());
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      out.push_back(draw(chunk.rng));
    }
    return out;
  });
  std::vector<double> all;
  all.reserve(n);
  for (auto &p : parts) {
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

} // namespace qqlab

#endif // QQLAB_PARALLEL_HPP_
