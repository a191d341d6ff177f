#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_loom/core.hpp"

namespace opinion_loom::dialog {

inline constexpr std::string_view kDefaultTopic = "What kind of person is Noah?";
inline constexpr std::string_view kNoMessagesVisible = "(no messages visible)";

/// Prompt templates with {topic}, {stance} and {others_opinions} placeholders.
/// Paragraphs are separated by a single newline.
struct PromptBundle {
  std::string system;
  std::string starter;
  std::string turn_template;

  static const PromptBundle& standard();
};

/// Replaces every occurrence of `placeholder` in `text`.
std::string substitute(std::string_view text, std::string_view placeholder, std::string_view value);

std::string build_system_prompt(std::string_view topic);

std::string build_starter_prompt(std::string_view topic, Stance stance);

struct PeerMessage {
  std::string agent_id;
  std::string text;
  std::optional<double> weight;
};

/// Block substituted for {others_opinions}: one "- <id>: <text>" line per peer,
/// ordered by descending weight then agent id, each on its own line.
std::string format_others(std::vector<PeerMessage> others);

std::string build_turn_prompt(std::string_view topic, std::vector<PeerMessage> others);

}  // namespace opinion_loom::dialog
