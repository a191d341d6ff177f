#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_loom/core.hpp"
#include "opinion_loom/sentiment.hpp"

namespace opinion_loom::dialog {

/// Everything a backend sees when asked for one message.
struct GenerationRequest {
  std::string agent_id;
  int round = 1;
  std::string system;
  /// Ordered turns after the system prompt. "self" turns are the agent's own
  /// earlier messages; "peer" turns are the starter or turn prompts.
  std::vector<ChatTurn> history;
};

/// Produces one agent message. Implementations must be callable from
/// several threads at once for different agents.
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

/// Replays fixed texts: round r returns the r-th message.
class ScriptedBackend : public AgentBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> messages);

  /// Reads a UTF-8 script file: messages separated by lines containing only "---".
  static ScriptedBackend from_file(const std::filesystem::path& path);
  static std::vector<std::string> parse_script(std::string_view content);

  std::string generate(const GenerationRequest& request) override;

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::vector<std::string> messages_;
};

/// Hidden opinion dynamics driving the ground-truth backend.
struct LatentDynamics {
  ModelVariant variant = ModelVariant::DG;
  InfluenceMatrix w = InfluenceMatrix::identity(2);
  std::optional<SusceptibilityProfile> s;
  OpinionVector x1{0.5, 0.5};
  /// Agent order of w, s and x1.
  std::vector<std::string> agent_ids;
};

/// Emits lexicon text whose score tracks the latent free run: at round t the
/// text for agent i scores within 0.05 of x_i(t). Output depends only on
/// (seed, agent, round).
class GroundTruthBackend : public AgentBackend {
 public:
  GroundTruthBackend(LatentDynamics latent, std::shared_ptr<const sentiment::LexiconScorer> lexicon,
                     std::uint64_t seed);

  std::string generate(const GenerationRequest& request) override;

  /// Latent opinion of `agent_id` at 1-based `round`.
  double target(std::string_view agent_id, int round) const;

 private:
  std::size_t index_of(std::string_view agent_id) const;

  LatentDynamics latent_;
  std::shared_ptr<const sentiment::LexiconScorer> lexicon_;
  std::uint64_t seed_;
};

std::shared_ptr<AgentBackend> ground_truth_backend(LatentDynamics latent,
                                                   std::shared_ptr<const sentiment::LexiconScorer> lexicon,
                                                   std::uint64_t seed);

}  // namespace opinion_loom::dialog
