#include "opinion_loom/llm_client.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "http_util.hpp"

namespace opinion_loom::dialog {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  const double ms = static_cast<double>(base_delay.count()) * std::pow(factor, attempt);
  return std::chrono::milliseconds(static_cast<std::chrono::milliseconds::rep>(ms));
}

std::string api_key_from_env() {
  const char* env = std::getenv(std::string(kApiKeyEnv).c_str());
  return env ? std::string(env) : std::string();
}

std::string_view chat_role(ChatRole role) {
  switch (role) {
    case ChatRole::system: return "system";
    case ChatRole::self: return "assistant";
    case ChatRole::peer: return "user";
  }
  return "user";
}

OpenAiChatBackend::OpenAiChatBackend(LlmSettings settings, std::string api_key, RetryPolicy retry)
    : settings_(std::move(settings)), api_key_(std::move(api_key)), retry_(std::move(retry)) {
  detail::parse_url(settings_.endpoint);
  if (retry_.max_attempts < 1) throw Error(ErrorKind::ConfigError, "retry policy needs at least one attempt");
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string OpenAiChatBackend::request_body(const GenerationRequest& request) const {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", request.system}});
  for (const auto& turn : request.history) {
    messages.push_back({{"role", std::string(chat_role(turn.role))}, {"content", turn.text}});
  }
  return json{{"model", settings_.model},
              {"messages", messages},
              {"temperature", settings_.temperature},
              {"max_tokens", settings_.max_tokens}}
      .dump();
}

std::string OpenAiChatBackend::parse_response(std::string_view body) {
  try {
    const json parsed = json::parse(body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendFailure, std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string OpenAiChatBackend::generate(const GenerationRequest& request) {
  const auto url = detail::parse_url(settings_.endpoint);
  const std::string body = request_body(request);
  const auto timeout = std::chrono::duration<double>(settings_.timeout_s);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);

  std::string last_error;
  for (int attempt = 0; attempt < retry_.max_attempts; ++attempt) {
    if (attempt > 0) retry_.sleep(retry_.delay_after(attempt - 1));

    httplib::Client client(url.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = client.Post(url.path.empty() ? "/" : url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_response(res->body);
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    const bool retryable = res->status == 429 || res->status >= 500;
    if (!retryable) break;
  }
  throw Error(ErrorKind::BackendFailure, "chat completion for " + request.agent_id + " round " +
                                             std::to_string(request.round) + " failed: " + last_error);
}

}  // namespace opinion_loom::dialog
