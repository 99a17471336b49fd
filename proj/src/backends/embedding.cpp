#include "modbridge/backends/embedding.hpp"

#include <cmath>

#include "modbridge/error.hpp"

namespace mb {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::invariant_violation, "empty embedding");
  double norm2 = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::invariant_violation, "non-finite embedding value");
    norm2 += v * v;
  }
  if (!(norm2 > 0.0)) fail(ErrorCode::invariant_violation, "zero embedding");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : values) v *= inv;
  return EmbeddingVector(std::move(values));
}

}  // namespace mb
