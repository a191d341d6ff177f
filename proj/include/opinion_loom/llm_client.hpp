#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

#include "opinion_loom/backends.hpp"

namespace opinion_loom::dialog {

inline constexpr std::string_view kApiKeyEnv = "OPINION_LOOM_API_KEY";

/// Connection settings for an OpenAI-compatible chat-completions endpoint.
struct LlmSettings {
  /// Full URL of the chat-completions resource.
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double temperature = 1.0;
  int max_tokens = 256;
  double timeout_s = 60.0;
  /// Total attempts per message, including the first.
  int max_retries = 5;

  bool operator==(const LlmSettings& other) const = default;
};

/// Exponential backoff: attempt k (0-based) waits base * factor^k before
/// attempt k + 1.
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds delay_after(int attempt) const;
};

/// The API key from OPINION_LOOM_API_KEY, empty when unset.
std::string api_key_from_env();

/// Maps history roles onto chat roles: self -> assistant, peer -> user.
std::string_view chat_role(ChatRole role);

/// Agent backend over HTTP. Transport errors, 429 and 5xx responses are
/// retried per the policy; other statuses fail immediately.
class OpenAiChatBackend : public AgentBackend {
 public:
  OpenAiChatBackend(LlmSettings settings, std::string api_key, RetryPolicy retry = {});

  std::string generate(const GenerationRequest& request) override;

  /// {model, messages:[{role, content}...], temperature, max_tokens}
  std::string request_body(const GenerationRequest& request) const;
  /// Content of the first choice's message.
  static std::string parse_response(std::string_view body);

  const LlmSettings& settings() const noexcept { return settings_; }

 private:
  LlmSettings settings_;
  std::string api_key_;
  RetryPolicy retry_;
};

}  // namespace opinion_loom::dialog
