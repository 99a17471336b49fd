#pragma once

#include <vector>

namespace mb {

// Unit-norm vector. Normalization happens at construction.
class EmbeddingVector {
 public:
  // Throws invariant_violation for empty, zero or non-finite input.
  static EmbeddingVector normalized(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

}  // namespace mb
