#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace otstab {

/// Fixed shard count for Monte Carlo loops. Results depend only on the shard
/// layout, never on how many hardware threads execute it.
inline constexpr std::size_t kShards = 16;

/// Number of items shard `s` of `shards` handles when `total` items are split.
inline std::size_t shard_size(std::size_t total, std::size_t shards, std::size_t s) {
  return total / shards + (s < total % shards ? 1 : 0);
}

/// Runs fn(shard) for shard in [0, shards), concurrently when the machine has
/// more than one hardware thread. The first exception is rethrown.
template <class Fn>
void for_each_shard(std::size_t shards, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(shards, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t s = 0; s < shards; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < shards; s = next++) {
        try {
          fn(s);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace otstab
