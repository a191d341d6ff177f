#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_loom/sentiment.hpp"

namespace opinion_loom::sentiment {

inline constexpr std::string_view kDefaultSidecarUrl = "http://127.0.0.1:8091";
inline constexpr std::string_view kSidecarUrlEnv = "OPINION_LOOM_SIDECAR_URL";

/// OPINION_LOOM_SIDECAR_URL or the default loopback address.
std::string sidecar_url_from_env();

struct SidecarOptions {
  /// Concurrent POST /score requests.
  std::size_t max_in_flight = 4;
  /// Texts per request; the service rejects batches above 64.
  std::size_t batch_size = 64;
  std::chrono::milliseconds timeout{30000};
};

struct SidecarHealth {
  std::string status;
  std::string model;
};

/// Client for the sentiment sidecar:
///   POST /score  {"texts": [...]} -> {"scores": [{"p_negative", "p_neutral", "p_positive"}...]}
///   GET  /health -> {"status": "ok", "model": "..."}
/// Transport failures and 5xx map to SidecarUnavailable; any other non-200
/// status or a body that breaks the protocol maps to SidecarMalformedResponse.
class SidecarScorer : public Scorer {
 public:
  explicit SidecarScorer(std::string base_url = sidecar_url_from_env(), SidecarOptions options = {});

  SidecarHealth health() const;

  ValenceScore score(std::string_view text) const override;
  std::vector<ValenceScore> score_batch(const std::vector<std::string>& texts) const override;
  std::string name() const override { return "sidecar"; }

  const std::string& base_url() const noexcept { return base_url_; }

  static std::string encode_request(const std::vector<std::string>& texts);
  /// Parses a /score body; `offset` shifts indices reported in ScoringError.
  static std::vector<ValenceScore> decode_response(std::string_view body, std::size_t expected,
                                                   std::size_t offset = 0);

 private:
  std::vector<ValenceScore> post_batch(const std::vector<std::string>& texts, std::size_t offset) const;

  std::string base_url_;
  SidecarOptions options_;
};

}  // namespace opinion_loom::sentiment
