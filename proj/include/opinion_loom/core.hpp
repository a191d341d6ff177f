#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opinion_loom/errors.hpp"

namespace opinion_loom {

/// Tolerance on |row sum - 1| for an influence matrix.
inline constexpr double kRowSumTolerance = 1e-9;

/// Slack allowed outside [0,1] for opinion entries. Convex combinations with
/// rows that sum to 1 within kRowSumTolerance can overshoot by that much.
inline constexpr double kOpinionRangeSlack = 1e-9;

/// Messages longer than this are flagged, never truncated.
inline constexpr std::size_t kMessageWordLimit = 100;

enum class Stance { strongly_positive, positive, neutral, negative, strongly_negative };

/// Lowercase phrase used in prompts ("strongly positive").
std::string_view stance_phrase(Stance stance);
/// Identifier form ("strongly_positive").
std::string_view stance_id(Stance stance);
/// Accepts either the identifier or the phrase form.
Stance parse_stance(std::string_view text);

enum class ModelVariant { DG, FJ };

std::string_view to_string(ModelVariant variant);
/// Case-insensitive "dg" / "fj".
ModelVariant parse_variant(std::string_view text);

// ---------------------------------------------------------------------------

/// Per-agent opinions at one round, every entry in [0,1].
class OpinionVector {
 public:
  explicit OpinionVector(Eigen::VectorXd values);
  OpinionVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& values() const noexcept { return values_; }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

  bool operator==(const OpinionVector& other) const { return values_ == other.values_; }

 private:
  Eigen::VectorXd values_;
};

/// T rounds of opinions for n labelled agents.
///
/// The type admits T = 1 (a free run of a single round); estimators require
/// at least one transition and reject shorter series with TooFewRounds.
class OpinionTrajectory {
 public:
  OpinionTrajectory(std::vector<OpinionVector> rounds, std::vector<std::string> agent_ids);
  /// Agent ids default to "a1".."an".
  explicit OpinionTrajectory(std::vector<OpinionVector> rounds);
  /// Columns are rounds: data is n x T.
  static OpinionTrajectory from_matrix(const Eigen::MatrixXd& data,
                                       std::vector<std::string> agent_ids = {});

  std::size_t agents() const noexcept { return agent_ids_.size(); }
  std::size_t rounds() const noexcept { return rounds_.size(); }

  /// Zero-based round index.
  const OpinionVector& at(std::size_t round_index) const { return rounds_.at(round_index); }
  const std::vector<OpinionVector>& series() const noexcept { return rounds_; }
  const std::vector<std::string>& agent_ids() const noexcept { return agent_ids_; }

  /// n x T matrix, column t is round t+1.
  Eigen::MatrixXd matrix() const;

  /// First `count` rounds.
  OpinionTrajectory prefix(std::size_t count) const;

  bool operator==(const OpinionTrajectory& other) const = default;

 private:
  std::vector<OpinionVector> rounds_;
  std::vector<std::string> agent_ids_;
};

std::vector<std::string> default_agent_ids(std::size_t n);

// ---------------------------------------------------------------------------

/// Directed observation graph: has_edge(i, j) means agent i sees agent j.
/// Self-loops are always present.
class Topology {
 public:
  static Topology fully_connected(std::size_t n);
  /// Diagonal entries are forced true.
  static Topology from_adjacency(const std::vector<std::vector<bool>>& adjacency);

  std::size_t size() const noexcept { return n_; }
  bool has_edge(std::size_t i, std::size_t j) const { return adjacency_.at(i * n_ + j) != 0; }
  std::size_t row_degree(std::size_t i) const;
  /// Peers j != i with has_edge(i, j), ascending.
  std::vector<std::size_t> visible_peers(std::size_t i) const;
  bool is_fully_connected() const;

  std::vector<std::vector<bool>> adjacency() const;

  bool operator==(const Topology& other) const = default;

 private:
  Topology(std::size_t n, std::vector<std::uint8_t> adjacency);

  std::size_t n_ = 0;
  std::vector<std::uint8_t> adjacency_;
};

/// Directed Watts-Strogatz construction: each node observes its k nearest ring
/// neighbours, and each of those k out-edges is redirected with probability p
/// to a uniformly chosen node it does not yet observe. Row degree stays k + 1.
Topology topology_small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Row-stochastic trust weights. Only obtainable through validation.
class InfluenceMatrix {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double trace() const { return entries_.trace(); }

  static InfluenceMatrix identity(std::size_t n);
  static InfluenceMatrix uniform(std::size_t n);

  bool operator==(const InfluenceMatrix& other) const { return entries_ == other.entries_; }

 private:
  friend InfluenceMatrix validate_influence_matrix(const Eigen::MatrixXd&, const Topology&);
  explicit InfluenceMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  Eigen::MatrixXd entries_;
};

/// Checks nonnegativity, row sums and support; returns a copy on success.
InfluenceMatrix validate_influence_matrix(const Eigen::MatrixXd& entries, const Topology& topology);
/// Same, against the fully connected topology.
InfluenceMatrix validate_influence_matrix(const Eigen::MatrixXd& entries);

/// Diagonal of the susceptibility matrix S, entries in [0,1].
class SusceptibilityProfile {
 public:
  explicit SusceptibilityProfile(Eigen::VectorXd values);
  SusceptibilityProfile(std::initializer_list<double> values);

  static SusceptibilityProfile constant(std::size_t n, double value);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double mean() const { return values_.mean(); }

  bool operator==(const SusceptibilityProfile& other) const { return values_ == other.values_; }

 private:
  Eigen::VectorXd values_;
};

// ---------------------------------------------------------------------------

std::size_t count_words(std::string_view text);

struct Message {
  std::string agent_id;
  int round = 1;
  std::string text;
  std::size_t word_count = 0;
  std::string prompt_sha256;
  std::string timestamp;

  static Message make(std::string agent_id, int round, std::string text,
                      std::string prompt_sha256 = {}, std::string timestamp = {});

  /// False when the message exceeds the soft word limit.
  bool within_word_limit() const noexcept { return word_count <= kMessageWordLimit; }

  bool operator==(const Message& other) const = default;
};

enum class BackendKind { llm_http, scripted, ground_truth };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct AgentSpec {
  std::string agent_id;
  BackendKind backend = BackendKind::scripted;
  Stance stance = Stance::neutral;
  std::map<std::string, std::string> backend_params;

  bool operator==(const AgentSpec& other) const = default;
};

enum class ChatRole { system, self, peer };

std::string_view to_string(ChatRole role);

struct ChatTurn {
  ChatRole role;
  std::string text;

  bool operator==(const ChatTurn& other) const = default;
};

/// The exact prompt sent for one message.
struct PromptRecord {
  std::string agent_id;
  int round = 1;
  std::string system;
  std::vector<ChatTurn> history;

  bool operator==(const PromptRecord& other) const = default;
};

struct Transcript {
  std::string topic;
  ModelVariant variant = ModelVariant::DG;
  std::vector<AgentSpec> agent_specs;
  Topology topology = Topology::fully_connected(2);
  /// rounds[r] holds the messages of round r+1 in agent_specs order.
  std::vector<std::vector<Message>> rounds;
  std::vector<PromptRecord> provenance;
  bool complete = true;

  std::vector<std::string> agent_ids() const;
  std::size_t message_count() const;
  /// Throws InvalidArgument unless every round has exactly one message per agent.
  void check_complete() const;
};

// ---------------------------------------------------------------------------

struct FitReport {
  ModelVariant variant = ModelVariant::DG;
  InfluenceMatrix w_hat = InfluenceMatrix::identity(2);
  std::optional<SusceptibilityProfile> s_hat;
  double residual_sum = 0.0;
  double self_trust_index = 0.0;
  std::optional<double> avg_susceptibility;
  OpinionTrajectory fitted_trajectory = OpinionTrajectory({OpinionVector{0.0, 0.0}});

  bool operator==(const FitReport& other) const = default;
};

}  // namespace opinion_loom
