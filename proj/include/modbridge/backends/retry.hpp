#pragma once

#include <cstdint>
#include <functional>

#include "modbridge/backends/descriptor.hpp"
#include "modbridge/error.hpp"

namespace mb {

using Sleeper = std::function<void(double seconds)>;

// Sleeps on the calling thread.
Sleeper real_sleeper();

// Delay before retry `attempt` (0-based): initial * multiplier^attempt, capped
// at max_seconds, scaled by a jitter factor in [0.5, 1] drawn from
// `jitter_seed`.
double backoff_delay(const RetryBackoff& b, int attempt, std::uint64_t jitter_seed);

// Runs fn, retrying TransientError up to max_retries times. The last
// transient error is rethrown once the budget is spent.
template <typename Fn>
auto with_retries(int max_retries, const RetryBackoff& backoff, const Sleeper& sleep,
                  std::uint64_t jitter_seed, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransientError&) {
      if (attempt >= max_retries) throw;
      sleep(backoff_delay(backoff, attempt, jitter_seed));
    }
  }
}

}  // namespace mb
