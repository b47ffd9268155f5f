// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dimerpa {

inline int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Static block partition of [0, n); fn(i) must only write slot i.
/// Results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t t = std::clamp<std::size_t>(threads <= 0 ? 1 : static_cast<std::size_t>(threads), 1,
                                                std::max<std::size_t>(n, 1));
  if (t == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(t);
    for (std::size_t w = 0; w < t; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t lo = n * w / t;
        const std::size_t hi = n * (w + 1) / t;
        try {
          for (std::size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      });
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace dimerpa
