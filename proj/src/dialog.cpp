#include "opinion_loom/dialog.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <set>

#include "opinion_loom/provenance.hpp"

namespace opinion_loom::dialog {

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_optional_matrix(const std::optional<Eigen::MatrixXd>& a, const std::optional<Eigen::MatrixXd>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_matrix(*a, *b);
}

bool same_optional_vector(const std::optional<Eigen::VectorXd>& a, const std::optional<Eigen::VectorXd>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_matrix(*a, *b);
}

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::ConfigError, message); }

struct Outcome {
  std::optional<Message> message;
  PromptRecord prompt;
  std::string error;
};

}  // namespace

LatentDynamics LatentConfig::to_dynamics(std::vector<std::string> agent_ids) const {
  LatentDynamics latent;
  latent.variant = variant;
  latent.w = validate_influence_matrix(w);
  if (s) latent.s = SusceptibilityProfile(*s);
  latent.x1 = OpinionVector(x1);
  latent.agent_ids = std::move(agent_ids);
  return latent;
}

bool operator==(const LatentConfig& a, const LatentConfig& b) {
  return a.variant == b.variant && same_matrix(a.w, b.w) && same_optional_vector(a.s, b.s) && same_matrix(a.x1, b.x1);
}

std::vector<std::string> RunConfig::agent_ids() const {
  std::vector<std::string> ids;
  for (const auto& spec : agent_specs) ids.push_back(spec.agent_id);
  return ids;
}

void RunConfig::validate() const {
  if (rounds < 1) config_error("rounds must be >= 1, got " + std::to_string(rounds));
  const std::size_t n = agent_specs.size();
  if (n < 2) config_error("a discussion needs at least two agents");
  std::set<std::string> seen;
  for (const auto& spec : agent_specs) {
    if (spec.agent_id.empty()) config_error("agent id must not be empty");
    if (!seen.insert(spec.agent_id).second) config_error("duplicate agent id '" + spec.agent_id + "'");
  }
  if (topology.size() != n) config_error("topology size does not match the number of agents");
  if (prompt_weights) {
    if (prompt_weights->rows() != static_cast<Eigen::Index>(n) || prompt_weights->cols() != static_cast<Eigen::Index>(n)) {
      config_error("prompt_weights must be n x n");
    }
    try {
      validate_influence_matrix(*prompt_weights);
    } catch (const Error& e) {
      config_error(std::string("prompt_weights: ") + e.what());
    }
  }
  if (options.weighted_prompts && !prompt_weights && !latent) {
    config_error("weighted prompts need prompt_weights or a latent W");
  }
  const bool needs_latent = std::any_of(agent_specs.begin(), agent_specs.end(),
                                        [](const AgentSpec& a) { return a.backend == BackendKind::ground_truth; });
  if (needs_latent && !latent) config_error("ground_truth agents need a [latent] section");
  if (latent) {
    if (latent->w.rows() != static_cast<Eigen::Index>(n) || latent->x1.size() != static_cast<Eigen::Index>(n) ||
        (latent->s && latent->s->size() != static_cast<Eigen::Index>(n))) {
      config_error("latent dimensions must match the number of agents");
    }
    if (latent->s.has_value() != (latent->variant == ModelVariant::FJ)) {
      config_error("latent s must be given exactly when the latent variant is fj");
    }
    try {
      latent->to_dynamics(agent_ids());
    } catch (const Error& e) {
      config_error(std::string("latent: ") + e.what());
    }
  }
  if (llm.max_retries < 1) config_error("llm.max_retries must be >= 1");
  if (!(llm.timeout_s > 0.0)) config_error("llm.timeout_s must be positive");
  if (llm.max_tokens < 1) config_error("llm.max_tokens must be >= 1");
  if (seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) config_error("seed must fit in int64");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const bool latent_equal = a.latent.has_value() == b.latent.has_value() && (!a.latent || *a.latent == *b.latent);
  return a.topic == b.topic && a.rounds == b.rounds && a.variant == b.variant && a.topology == b.topology &&
         a.agent_specs == b.agent_specs && a.llm == b.llm && a.seed == b.seed && a.options == b.options &&
         same_optional_matrix(a.prompt_weights, b.prompt_weights) && latent_equal;
}

BackendFailure::BackendFailure(std::string agent_id, int round, const std::string& cause, Transcript partial)
    : Error(ErrorKind::BackendFailure, "agent " + agent_id + " round " + std::to_string(round) + ": " + cause),
      agent_id_(std::move(agent_id)),
      round_(round),
      partial_(std::move(partial)) {}

Transcript run_discussion(const RunConfig& config, const BackendMap& backends,
                          const std::vector<std::size_t>& generation_order) {
  config.validate();
  const std::size_t n = config.n_agents();
  const auto ids = config.agent_ids();
  for (const auto& id : ids) {
    const auto it = backends.find(id);
    if (it == backends.end() || !it->second) config_error("no backend for agent '" + id + "'");
  }

  std::vector<std::size_t> order = generation_order;
  if (order.empty()) {
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
  }
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (sorted.size() != n || sorted[i] != i) config_error("generation order is not a permutation of the agents");
    }
  }

  std::optional<Eigen::MatrixXd> weights;
  if (config.options.weighted_prompts) weights = config.prompt_weights ? *config.prompt_weights : config.latent->w;

  const std::string system = build_system_prompt(config.topic);
  const bool sequential = config.options.sequential_updates;
  const bool concurrent = config.options.parallel && !sequential;

  Transcript transcript;
  transcript.topic = config.topic;
  transcript.variant = config.variant;
  transcript.agent_specs = config.agent_specs;
  transcript.topology = config.topology;

  // Per-agent history as last sent plus the reply, for full-history mode.
  std::vector<std::vector<ChatTurn>> conversation(n);

  for (int round = 1; round <= config.rounds; ++round) {
    const std::vector<Message>* previous = round > 1 ? &transcript.rounds.back() : nullptr;
    std::vector<std::optional<Message>> current(n);

    auto build_prompt = [&](std::size_t i) {
      PromptRecord prompt;
      prompt.agent_id = ids[i];
      prompt.round = round;
      prompt.system = system;
      if (round == 1) {
        prompt.history.push_back({ChatRole::peer, build_starter_prompt(config.topic, config.agent_specs[i].stance)});
        return prompt;
      }
      std::vector<PeerMessage> others;
      for (std::size_t j : config.topology.visible_peers(i)) {
        const Message& latest = sequential && current[j] ? *current[j] : (*previous)[j];
        PeerMessage peer{ids[j], latest.text, std::nullopt};
        if (weights) peer.weight = (*weights)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        others.push_back(std::move(peer));
      }
      const std::string turn = build_turn_prompt(config.topic, std::move(others));
      if (config.options.full_history) {
        prompt.history = conversation[i];
      } else {
        if (config.variant == ModelVariant::FJ && round > 2) {
          prompt.history.push_back({ChatRole::self, transcript.rounds.front()[i].text});
        }
        prompt.history.push_back({ChatRole::self, (*previous)[i].text});
      }
      prompt.history.push_back({ChatRole::peer, turn});
      return prompt;
    };

    auto generate = [&](std::size_t i, PromptRecord prompt) {
      Outcome outcome;
      try {
        GenerationRequest request{ids[i], round, prompt.system, prompt.history};
        std::string text = backends.at(ids[i])->generate(request);
        outcome.message = Message::make(ids[i], round, std::move(text), prompt_sha256(prompt), rfc3339_utc_now());
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
      outcome.prompt = std::move(prompt);
      return outcome;
    };

    std::vector<Outcome> outcomes(n);
    if (concurrent) {
      std::vector<std::future<Outcome>> pending(n);
      for (std::size_t i : order) pending[i] = std::async(std::launch::async, generate, i, build_prompt(i));
      for (std::size_t i = 0; i < n; ++i) outcomes[i] = pending[i].get();
    } else {
      for (std::size_t i : order) {
        outcomes[i] = generate(i, build_prompt(i));
        if (sequential) current[i] = outcomes[i].message;
        if (!outcomes[i].message) break;
      }
    }

    std::vector<Message> messages;
    std::optional<std::size_t> failed;
    for (std::size_t i = 0; i < n; ++i) {
      if (outcomes[i].message) {
        messages.push_back(*outcomes[i].message);
        transcript.provenance.push_back(outcomes[i].prompt);
        conversation[i] = outcomes[i].prompt.history;
        conversation[i].push_back({ChatRole::self, outcomes[i].message->text});
      } else if (!failed && !outcomes[i].error.empty()) {
        failed = i;
      }
    }
    if (!failed && messages.size() != n) {
      // Sequential generation stopped at the first failure.
      for (std::size_t i : order) {
        if (!outcomes[i].message) {
          failed = i;
          break;
        }
      }
    }
    transcript.rounds.push_back(std::move(messages));
    if (failed) {
      transcript.complete = false;
      throw BackendFailure(ids[*failed], round, outcomes[*failed].error, std::move(transcript));
    }
  }
  return transcript;
}

}  // namespace opinion_loom::dialog
