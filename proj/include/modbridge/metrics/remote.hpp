#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "modbridge/backends/blob_store.hpp"
#include "modbridge/backends/sidecar.hpp"

namespace mb {

enum class MetricKind { fid, pesq };
std::string_view to_string(MetricKind k);

// Corpus FID and paired PESQ. Inputs are raw file bytes.
class MetricService {
 public:
  virtual ~MetricService() = default;
  virtual double fid(const std::vector<std::string>& generated,
                     const std::vector<std::string>& references) = 0;
  // Mean over (reference, degraded) pairs.
  virtual double pesq(const std::vector<std::pair<std::string, std::string>>& pairs) = 0;
};

// Talks to the sidecar's /v1/metric endpoints. Transport failures after
// retries surface as sidecar_unavailable.
class SidecarMetricService : public MetricService {
 public:
  explicit SidecarMetricService(SidecarClient client) : client_(std::move(client)) {}
  double fid(const std::vector<std::string>& generated,
             const std::vector<std::string>& references) override;
  double pesq(const std::vector<std::pair<std::string, std::string>>& pairs) override;

 private:
  SidecarClient client_;
};

// Offline stand-in. FID is the Frechet distance between Gaussians fitted to
// digest-seeded embeddings of the files; PESQ maps SI-SNR linearly from
// [-25, 25] dB onto [-0.5, 4.5], so a clip against itself scores 4.5.
class MockMetricService : public MetricService {
 public:
  explicit MockMetricService(int embedding_dim = 64) : dim_(embedding_dim) {}
  double fid(const std::vector<std::string>& generated,
             const std::vector<std::string>& references) override;
  double pesq(const std::vector<std::pair<std::string, std::string>>& pairs) override;

 private:
  int dim_;
};

// Frechet distance between Gaussians fitted to the rows of a and b.
double frechet_distance(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b);

inline constexpr double kPesqMin = -0.5;
inline constexpr double kPesqMax = 4.5;

// Loads the blobs, calls the service and range-checks the answer
// (fid >= 0, pesq in [-0.5, 4.5]); out-of-range values are range_violation.
// For pesq, generated[i] is scored against references[i].
double remote_metric(MetricService& service, MetricKind kind, const std::vector<BlobRef>& generated,
                     const std::vector<BlobRef>& references, const BlobStore& store);

}  // namespace mb
