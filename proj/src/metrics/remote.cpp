#include "modbridge/metrics/remote.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "modbridge/error.hpp"
#include "modbridge/metrics/native.hpp"
#include "modbridge/util/digest.hpp"
#include "modbridge/util/media.hpp"
#include "modbridge/util/rng.hpp"

namespace mb {

std::string_view to_string(MetricKind k) { return k == MetricKind::fid ? "fid" : "pesq"; }

namespace {

json blob_input(const std::string& bytes, const std::string& media_type, const char* group) {
  return {{"kind", media_type.rfind("audio/", 0) == 0 ? "audio" : "image"},
          {"media_type", media_type},
          {"data_b64", base64_encode(bytes)},
          {"group", group}};
}

std::string sniff_media_type(const std::string& bytes) {
  if (bytes.rfind("RIFF", 0) == 0) return "audio/wav";
  if (bytes.rfind("\x89PNG", 0) == 0) return "image/png";
  return "application/octet-stream";
}

template <typename Fn>
auto unavailable_on_transport(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::transport_error || e.code() == ErrorCode::timeout ||
        e.code() == ErrorCode::rate_limited)
      fail(ErrorCode::sidecar_unavailable, e.what());
    throw;
  }
}

double number_output(const json& outputs, const char* key, std::size_t index) {
  if (index >= outputs.size() || !outputs[index].contains(key) || !outputs[index].at(key).is_number())
    fail(ErrorCode::transport_error, std::string("sidecar metric reply lacks '") + key + "'");
  return outputs[index].at(key).get<double>();
}

std::vector<double> mock_embedding(const std::string& bytes, int dim) {
  Rng rng(leading_u64(sha256(bytes)));
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

double SidecarMetricService::fid(const std::vector<std::string>& generated,
                                 const std::vector<std::string>& references) {
  json inputs = json::array();
  for (const auto& g : generated) inputs.push_back(blob_input(g, sniff_media_type(g), "generated"));
  for (const auto& r : references) inputs.push_back(blob_input(r, sniff_media_type(r), "reference"));
  return unavailable_on_transport([&] {
    const json outputs =
        client_.call("/v1/metric/fid", SidecarClient::make_envelope("metric_fid", "fid", json::object(), inputs));
    return number_output(outputs, "value", 0);
  });
}

double SidecarMetricService::pesq(const std::vector<std::pair<std::string, std::string>>& pairs) {
  json inputs = json::array();
  for (const auto& [ref, deg] : pairs) {
    inputs.push_back(blob_input(ref, "audio/wav", "reference"));
    inputs.push_back(blob_input(deg, "audio/wav", "degraded"));
  }
  return unavailable_on_transport([&] {
    const json outputs = client_.call(
        "/v1/metric/pesq", SidecarClient::make_envelope("metric_pesq", "pesq", json::object(), inputs));
    if (outputs.size() != pairs.size())
      fail(ErrorCode::transport_error, "sidecar pesq returned a different number of scores");
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const double s = number_output(outputs, "score", i);
      if (!(s >= kPesqMin && s <= kPesqMax))
        fail(ErrorCode::range_violation, "pesq score " + std::to_string(s));
      sum += s;
    }
    return sum / static_cast<double>(outputs.size());
  });
}

double frechet_distance(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b) {
  require(!a.empty() && !b.empty(), "frechet_distance needs non-empty sets");
  const auto dim = static_cast<Eigen::Index>(a.front().size());
  auto fit = [dim](const std::vector<std::vector<double>>& rows, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(static_cast<Eigen::Index>(rows[i].size()) == dim, "inconsistent feature dimension");
      for (Eigen::Index k = 0; k < dim; ++k) x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
    mu = x.colwise().mean();
    const Eigen::MatrixXd centred = x.rowwise() - mu.transpose();
    const double denom = rows.size() > 1 ? static_cast<double>(rows.size() - 1) : 1.0;
    cov = centred.transpose() * centred / denom;
  };
  Eigen::VectorXd mu1, mu2;
  Eigen::MatrixXd s1, s2;
  fit(a, mu1, s1);
  fit(b, mu2, s2);
  // tr sqrt(S1 S2) = tr sqrt(sqrt(S1) S2 sqrt(S1)), and the inner matrix is
  // symmetric positive semi-definite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(s1);
  const Eigen::VectorXd l1 = e1.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root1 = e1.eigenvectors() * l1.asDiagonal() * e1.eigenvectors().transpose();
  const Eigen::MatrixXd inner = root1 * s2 * root1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2((inner + inner.transpose()) / 2.0);
  const double tr_sqrt = e2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, d);
}

double MockMetricService::fid(const std::vector<std::string>& generated,
                              const std::vector<std::string>& references) {
  std::vector<std::vector<double>> a, b;
  for (const auto& g : generated) a.push_back(mock_embedding(g, dim_));
  for (const auto& r : references) b.push_back(mock_embedding(r, dim_));
  return frechet_distance(a, b);
}

double MockMetricService::pesq(const std::vector<std::pair<std::string, std::string>>& pairs) {
  double sum = 0.0;
  for (const auto& [ref_bytes, deg_bytes] : pairs) {
    const auto ref = decode_wav(ref_bytes);
    auto deg = decode_wav(deg_bytes);
    if (ref.sample_rate_hz != deg.sample_rate_hz)
      fail(ErrorCode::invalid_params, "pesq pair has different sample rates");
    std::vector<double> r = ref.samples;
    const std::size_t n = std::min(r.size(), deg.samples.size());
    if (n == 0) fail(ErrorCode::empty_signal, "pesq of an empty clip");
    r.resize(n);
    deg.samples.resize(n);
    const double snr = std::clamp(si_snr(deg.samples, r), -25.0, 25.0);
    sum += kPesqMin + (kPesqMax - kPesqMin) * (snr + 25.0) / 50.0;
  }
  return sum / static_cast<double>(pairs.size());
}

double remote_metric(MetricService& service, MetricKind kind, const std::vector<BlobRef>& generated,
                     const std::vector<BlobRef>& references, const BlobStore& store) {
  require(!generated.empty() && !references.empty(),
          std::string(to_string(kind)) + " needs non-empty generated and reference lists");
  if (kind == MetricKind::pesq)
    require(generated.size() == references.size(), "pesq needs paired lists of equal length");
  std::vector<std::string> gen, ref;
  for (const auto& g : generated) gen.push_back(store.read(g));
  for (const auto& r : references) ref.push_back(store.read(r));
  double value;
  if (kind == MetricKind::fid) {
    value = service.fid(gen, ref);
    if (!(std::isfinite(value) && value >= 0.0))
      fail(ErrorCode::range_violation, "fid " + std::to_string(value));
  } else {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < gen.size(); ++i) pairs.emplace_back(std::move(ref[i]), std::move(gen[i]));
    value = service.pesq(pairs);
    if (!(value >= kPesqMin && value <= kPesqMax))
      fail(ErrorCode::range_violation, "pesq " + std::to_string(value));
  }
  return value;
}

}  // namespace mb
