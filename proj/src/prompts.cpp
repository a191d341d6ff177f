#include "opinion_loom/prompts.hpp"

#include <algorithm>
#include <sstream>

namespace opinion_loom::dialog {

namespace {

constexpr std::string_view kSystemTemplate =
    "You, along with other individuals like yourself, are participating in a discussion about the topic {topic} "
    "on an online microblogging platform such as Twitter or Weibo. The discussion takes place over several "
    "\"rounds\".\n"
    "In each round, every participant posts a short message expressing their views on {topic}. After reading the "
    "messages posted by others, you will compose a new short message on the same topic. You may choose to maintain "
    "your original stance, modify it partially, or completely change your view based on what others have said.\n"
    "During the entire discussion, you are not allowed to communicate with anyone outside the group or leave the "
    "discussion space to seek external information about {topic}.\n"
    "You must rely solely on your initial understanding of the topic and the perspectives shared by other "
    "participants to form or revise your opinion.\n"
    "Keep in mind: You should act as a real person who can form highly objective opinions. Politeness is not "
    "required.";

constexpr std::string_view kStarterTemplate =
    "Please compose a short message on the topic, clearly expressing your stance as {stance}.\n"
    "Topic: {topic}\n"
    "Follow the format exactly as shown below to create a new short message less than 100 words on {topic}.\n"
    "Your message:";

constexpr std::string_view kTurnTemplate =
    "Here is what others have said: {others_opinions}\n"
    "Combine others' messages with your previous opinions. Follow the format exactly as shown below to create a "
    "new short message less than 100 words on {topic}.\n"
    "Your message:";

std::string format_weight(double w) {
  std::ostringstream out;
  out.precision(4);
  out << w;
  return out.str();
}

}  // namespace

const PromptBundle& PromptBundle::standard() {
  static const PromptBundle bundle{std::string(kSystemTemplate), std::string(kStarterTemplate),
                                   std::string(kTurnTemplate)};
  return bundle;
}

std::string substitute(std::string_view text, std::string_view placeholder, std::string_view value) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(placeholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(value);
    pos = hit + placeholder.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string build_system_prompt(std::string_view topic) {
  return substitute(PromptBundle::standard().system, "{topic}", topic);
}

std::string build_starter_prompt(std::string_view topic, Stance stance) {
  const std::string with_stance = substitute(PromptBundle::standard().starter, "{stance}", stance_phrase(stance));
  return substitute(with_stance, "{topic}", topic);
}

std::string format_others(std::vector<PeerMessage> others) {
  if (others.empty()) return std::string(kNoMessagesVisible);
  std::stable_sort(others.begin(), others.end(), [](const PeerMessage& a, const PeerMessage& b) {
    const double wa = a.weight.value_or(0.0);
    const double wb = b.weight.value_or(0.0);
    if (wa != wb) return wa > wb;
    return a.agent_id < b.agent_id;
  });
  std::string block;
  for (const auto& peer : others) {
    block += "\n- ";
    block += peer.agent_id;
    block += ": ";
    block += peer.text;
    if (peer.weight) {
      block += " (weight ";
      block += format_weight(*peer.weight);
      block += ")";
    }
  }
  return block;
}

std::string build_turn_prompt(std::string_view topic, std::vector<PeerMessage> others) {
  // Topic first so peer text containing "{topic}" is never rewritten.
  const std::string with_topic = substitute(PromptBundle::standard().turn_template, "{topic}", topic);
  return substitute(with_topic, "{others_opinions}", format_others(std::move(others)));
}

}  // namespace opinion_loom::dialog
