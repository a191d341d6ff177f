#include "opinion_loom/sidecar.hpp"

#include <cstdlib>
#include <future>

#include <httplib.h>
#include <json.hpp>

#include "http_util.hpp"

namespace opinion_loom::sentiment {

using nlohmann::json;

namespace {

httplib::Client make_client(const detail::ParsedUrl& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  return client;
}

[[noreturn]] void throw_for_status(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw Error(ErrorKind::SidecarUnavailable, what + ": " + httplib::to_string(res.error()));
  }
  std::string detail = res->body;
  try {
    const json body = json::parse(res->body);
    if (body.contains("error") && body["error"].is_string()) detail = body["error"].get<std::string>();
  } catch (const json::exception&) {
  }
  const ErrorKind kind = res->status >= 500 ? ErrorKind::SidecarUnavailable : ErrorKind::SidecarMalformedResponse;
  throw Error(kind, what + ": HTTP " + std::to_string(res->status) + " " + detail);
}

}  // namespace

std::string sidecar_url_from_env() {
  const char* env = std::getenv(std::string(kSidecarUrlEnv).c_str());
  return env && *env ? std::string(env) : std::string(kDefaultSidecarUrl);
}

SidecarScorer::SidecarScorer(std::string base_url, SidecarOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  detail::parse_url(base_url_);
  if (options_.max_in_flight == 0 || options_.batch_size == 0) {
    throw Error(ErrorKind::InvalidArgument, "sidecar in-flight bound and batch size must be positive");
  }
}

SidecarHealth SidecarScorer::health() const {
  const auto url = detail::parse_url(base_url_);
  auto client = make_client(url, options_.timeout);
  const auto res = client.Get(url.path + "/health");
  if (!res || res->status != 200) throw_for_status(res, "GET /health");
  try {
    const json body = json::parse(res->body);
    return {body.at("status").get<std::string>(), body.value("model", std::string{})};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SidecarMalformedResponse, std::string("GET /health body: ") + e.what());
  }
}

std::string SidecarScorer::encode_request(const std::vector<std::string>& texts) {
  return json{{"texts", texts}}.dump();
}

std::vector<ValenceScore> SidecarScorer::decode_response(std::string_view body, std::size_t expected,
                                                         std::size_t offset) {
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SidecarMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("scores") || !parsed["scores"].is_array()) {
    throw Error(ErrorKind::SidecarMalformedResponse, "response lacks a \"scores\" array");
  }
  const json& scores = parsed["scores"];
  if (scores.size() != expected) {
    throw Error(ErrorKind::SidecarMalformedResponse, "response has " + std::to_string(scores.size()) +
                                                         " scores for " + std::to_string(expected) + " texts");
  }
  std::vector<ValenceScore> out;
  out.reserve(expected);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    try {
      const json& s = scores[k];
      out.push_back(ValenceScore::from_probabilities(s.at("p_negative").get<double>(), s.at("p_neutral").get<double>(),
                                                     s.at("p_positive").get<double>()));
    } catch (const std::exception& e) {
      throw ScoringError(ErrorKind::SidecarMalformedResponse, offset + k,
                         "score " + std::to_string(offset + k) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ValenceScore> SidecarScorer::post_batch(const std::vector<std::string>& texts, std::size_t offset) const {
  const auto url = detail::parse_url(base_url_);
  auto client = make_client(url, options_.timeout);
  const auto res = client.Post(url.path + "/score", encode_request(texts), "application/json");
  if (!res || res->status != 200) throw_for_status(res, "POST /score");
  return decode_response(res->body, texts.size(), offset);
}

ValenceScore SidecarScorer::score(std::string_view text) const {
  return post_batch({std::string(text)}, 0).front();
}

std::vector<ValenceScore> SidecarScorer::score_batch(const std::vector<std::string>& texts) const {
  std::vector<ValenceScore> out;
  out.reserve(texts.size());
  std::size_t next = 0;
  while (next < texts.size()) {
    // One wave of at most max_in_flight concurrent requests.
    std::vector<std::future<std::vector<ValenceScore>>> wave;
    for (std::size_t slot = 0; slot < options_.max_in_flight && next < texts.size(); ++slot) {
      const std::size_t end = std::min(texts.size(), next + options_.batch_size);
      std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(next),
                                     texts.begin() + static_cast<std::ptrdiff_t>(end));
      wave.push_back(std::async(std::launch::async, [this, chunk = std::move(chunk), next] {
        return post_batch(chunk, next);
      }));
      next = end;
    }
    for (auto& f : wave) {
      auto part = f.get();
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

}  // namespace opinion_loom::sentiment
