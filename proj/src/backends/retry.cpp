#include "modbridge/backends/retry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "modbridge/util/rng.hpp"

namespace mb {

Sleeper real_sleeper() {
  return [](double seconds) {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
}

double backoff_delay(const RetryBackoff& b, int attempt, std::uint64_t jitter_seed) {
  const double raw = b.initial_seconds * std::pow(b.multiplier, attempt);
  const double capped = std::min(raw, std::min(b.max_seconds, 60.0));
  Rng rng(jitter_seed + static_cast<std::uint64_t>(attempt));
  return capped * (0.5 + 0.5 * rng.uniform());
}

}  // namespace mb
