#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "opinion_loom/core.hpp"

namespace opinion_loom {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Canonical text of a prompt: the system prompt, then one "<role>: <text>"
/// block per history turn, each terminated by a newline.
std::string canonical_prompt(const PromptRecord& prompt);

std::string prompt_sha256(const PromptRecord& prompt);

/// RFC 3339 UTC timestamp with millisecond precision, e.g. 2025-01-02T03:04:05.678Z.
std::string rfc3339_utc(std::chrono::system_clock::time_point when);
std::string rfc3339_utc_now();

}  // namespace opinion_loom
