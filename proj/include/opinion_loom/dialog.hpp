#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opinion_loom/backends.hpp"
#include "opinion_loom/core.hpp"
#include "opinion_loom/llm_client.hpp"
#include "opinion_loom/prompts.hpp"

namespace opinion_loom::dialog {

struct DialogOptions {
  /// Annotate peer lines with "(weight w)" from the prompt weights and order
  /// them by descending weight.
  bool weighted_prompts = false;
  /// Keep the whole conversation in each agent's history instead of only the
  /// previous round.
  bool full_history = false;
  /// Agents later in the generation order see peers' messages from the
  /// current round. Off means synchronous rounds.
  bool sequential_updates = false;
  /// Generate the agents of a round concurrently (ignored for sequential updates).
  bool parallel = true;

  bool operator==(const DialogOptions& other) const = default;
};

/// Latent dynamics parameters as written in a config file.
struct LatentConfig {
  ModelVariant variant = ModelVariant::DG;
  Eigen::MatrixXd w;
  std::optional<Eigen::VectorXd> s;
  Eigen::VectorXd x1;

  LatentDynamics to_dynamics(std::vector<std::string> agent_ids) const;
};

bool operator==(const LatentConfig& a, const LatentConfig& b);

struct RunConfig {
  std::string topic = std::string(kDefaultTopic);
  int rounds = 20;
  ModelVariant variant = ModelVariant::DG;
  Topology topology = Topology::fully_connected(2);
  std::vector<AgentSpec> agent_specs;
  LlmSettings llm;
  std::uint64_t seed = 0;
  DialogOptions options;
  /// Weights shown in prompts when options.weighted_prompts is set; falls
  /// back to the latent W.
  std::optional<Eigen::MatrixXd> prompt_weights;
  /// Parameters for ground_truth agents.
  std::optional<LatentConfig> latent;

  std::size_t n_agents() const noexcept { return agent_specs.size(); }
  std::vector<std::string> agent_ids() const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

using BackendMap = std::map<std::string, std::shared_ptr<AgentBackend>>;

/// A backend gave up; carries the transcript up to the failure.
class BackendFailure : public Error {
 public:
  BackendFailure(std::string agent_id, int round, const std::string& cause, Transcript partial);

  const std::string& agent_id() const noexcept { return agent_id_; }
  int round() const noexcept { return round_; }
  const Transcript& partial() const noexcept { return partial_; }

 private:
  std::string agent_id_;
  int round_;
  Transcript partial_;
};

/// Runs the multi-round discussion.
///
/// Round 1 sends each agent the system prompt and its starter prompt. From
/// round 2 on, agent i receives the system prompt, (FJ only) its own round-1
/// message, its own previous message, and a turn prompt quoting the previous
/// round's messages of the peers it can see. Every agent of a round is built
/// from the same frozen state of the previous round. `generation_order`
/// permutes the order agents are asked in (sequential mode only).
Transcript run_discussion(const RunConfig& config, const BackendMap& backends,
                          const std::vector<std::size_t>& generation_order = {});

}  // namespace opinion_loom::dialog
