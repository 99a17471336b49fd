#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modbridge/backends/embedding.hpp"

namespace mb {

struct AlignmentCounts {
  std::size_t hits = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t edits() const { return substitutions + deletions + insertions; }
  bool operator==(const AlignmentCounts&) const = default;
};

// Lowercase, drop ASCII punctuation, split on whitespace.
std::vector<std::string> mer_tokens(std::string_view text);

// Unit-cost alignment of hypothesis against reference. Among alignments with
// the fewest edits, the one with the most hits is chosen, so the result (and
// MER) is the same whichever side is called the reference.
AlignmentCounts align(const std::vector<std::string>& hypothesis,
                      const std::vector<std::string>& reference);

// (S+D+I)/(H+S+D+I); 0 when both sides are empty.
double mer(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference);
double mer_text(std::string_view hypothesis, std::string_view reference);

// Floor added to both energies, as a fraction of the estimate's energy so the
// ratio stays exactly scale invariant. Bounds the raw value to about +-120 dB.
inline constexpr double kSiSnrEpsilon = 1e-12;
inline constexpr double kSiSnrClampDb = 100.0;

// Scale-invariant SNR in dB after mean removal, before clamping.
double si_snr_unclamped(const std::vector<double>& estimate, const std::vector<double>& reference);
// Clamped to [-100, 100] dB. Throws length_mismatch or empty_signal.
double si_snr(const std::vector<double>& estimate, const std::vector<double>& reference);

// max(0, a.b), in [0, 1]. Throws dimension_mismatch.
double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace mb
