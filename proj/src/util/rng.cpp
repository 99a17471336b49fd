#include "modbridge/util/rng.hpp"

#include <cmath>

#include "modbridge/error.hpp"

namespace mb {

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "Rng::below needs a positive bound");
  // Reject the tail that would bias the modulo.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  std::uint64_t v;
  do {
    v = next();
  } while (v > limit);
  return v % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace mb
