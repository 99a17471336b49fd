#include "modbridge/metrics/native.hpp"

#include <limits>

#include <algorithm>
#include <cctype>
#include <cmath>

#include "modbridge/error.hpp"
#include "modbridge/util/text.hpp"

namespace mb {

std::vector<std::string> mer_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    cleaned.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
  }
  return split_words(cleaned);
}

AlignmentCounts align(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cell(i, j) aligns ref[0, i) with hyp[0, j).
  std::vector<AlignmentCounts> row(m + 1), prev(m + 1);
  auto better = [](const AlignmentCounts& a, const AlignmentCounts& b) {
    if (a.edits() != b.edits()) return a.edits() < b.edits();
    return a.hits > b.hits;
  };
  for (std::size_t j = 0; j <= m; ++j) prev[j] = AlignmentCounts{0, 0, 0, j};
  for (std::size_t i = 1; i <= n; ++i) {
    row[0] = AlignmentCounts{0, 0, i, 0};
    for (std::size_t j = 1; j <= m; ++j) {
      AlignmentCounts diag = prev[j - 1];
      if (ref[i - 1] == hyp[j - 1])
        ++diag.hits;
      else
        ++diag.substitutions;
      AlignmentCounts del = prev[j];
      ++del.deletions;
      AlignmentCounts ins = row[j - 1];
      ++ins.insertions;
      AlignmentCounts best = diag;
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      row[j] = best;
    }
    std::swap(row, prev);
  }
  return prev[m];
}

double mer(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference) {
  const auto c = align(hypothesis, reference);
  const std::size_t total = c.hits + c.edits();
  return total == 0 ? 0.0 : static_cast<double>(c.edits()) / static_cast<double>(total);
}

double mer_text(std::string_view hypothesis, std::string_view reference) {
  return mer(mer_tokens(hypothesis), mer_tokens(reference));
}

double si_snr_unclamped(const std::vector<double>& estimate, const std::vector<double>& reference) {
  if (estimate.size() != reference.size())
    fail(ErrorCode::length_mismatch, std::to_string(estimate.size()) + " vs " +
                                         std::to_string(reference.size()) + " samples");
  if (estimate.empty()) fail(ErrorCode::empty_signal, "si_snr of an empty signal");
  const double n = static_cast<double>(estimate.size());
  double mean_e = 0.0, mean_s = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    mean_e += estimate[i];
    mean_s += reference[i];
  }
  mean_e /= n;
  mean_s /= n;
  double dot = 0.0, ss = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double e = estimate[i] - mean_e, s = reference[i] - mean_s;
    dot += e * s;
    ss += s * s;
    ee += e * e;
  }
  // A constant estimate recovers nothing of the reference.
  if (ee == 0.0) return -std::numeric_limits<double>::infinity();
  const double scale = ss > 0.0 ? dot / ss : 0.0;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double st = scale * (reference[i] - mean_s);
    const double r = (estimate[i] - mean_e) - st;
    target += st * st;
    noise += r * r;
  }
  const double floor = kSiSnrEpsilon * ee;
  return 10.0 * std::log10((target + floor) / (noise + floor));
}

double si_snr(const std::vector<double>& estimate, const std::vector<double>& reference) {
  return std::clamp(si_snr_unclamped(estimate, reference), -kSiSnrClampDb, kSiSnrClampDb);
}

double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension())
    fail(ErrorCode::dimension_mismatch, std::to_string(a.dimension()) + " vs " +
                                            std::to_string(b.dimension()));
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) dot += a.values()[i] * b.values()[i];
  return std::clamp(dot, 0.0, 1.0);
}

}  // namespace mb
