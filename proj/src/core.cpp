#include "opinion_loom/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace opinion_loom {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void check_opinion_entries(const Eigen::VectorXd& values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "opinion vector needs at least two agents");
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteInput, "opinion entry " + std::to_string(i) + " is not finite");
    }
    if (v < -kOpinionRangeSlack || v > 1.0 + kOpinionRangeSlack) {
      std::ostringstream msg;
      msg << "opinion entry " << i << " = " << v << " outside [0,1]";
      throw Error(ErrorKind::OpinionOutOfRange, msg.str());
    }
  }
}

}  // namespace

std::string_view stance_phrase(Stance stance) {
  switch (stance) {
    case Stance::strongly_positive: return "strongly positive";
    case Stance::positive: return "positive";
    case Stance::neutral: return "neutral";
    case Stance::negative: return "negative";
    case Stance::strongly_negative: return "strongly negative";
  }
  return "neutral";
}

std::string_view stance_id(Stance stance) {
  switch (stance) {
    case Stance::strongly_positive: return "strongly_positive";
    case Stance::positive: return "positive";
    case Stance::neutral: return "neutral";
    case Stance::negative: return "negative";
    case Stance::strongly_negative: return "strongly_negative";
  }
  return "neutral";
}

Stance parse_stance(std::string_view text) {
  const std::string key = lowercase(text);
  for (Stance s : {Stance::strongly_positive, Stance::positive, Stance::neutral, Stance::negative,
                   Stance::strongly_negative}) {
    if (key == stance_id(s) || key == stance_phrase(s)) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown stance '" + std::string(text) + "'");
}

std::string_view to_string(ModelVariant variant) {
  return variant == ModelVariant::DG ? "dg" : "fj";
}

ModelVariant parse_variant(std::string_view text) {
  const std::string key = lowercase(text);
  if (key == "dg") return ModelVariant::DG;
  if (key == "fj") return ModelVariant::FJ;
  throw Error(ErrorKind::InvalidArgument, "unknown model variant '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

OpinionVector::OpinionVector(Eigen::VectorXd values) : values_(std::move(values)) {
  check_opinion_entries(values_);
}

OpinionVector::OpinionVector(std::initializer_list<double> values)
    : OpinionVector(Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

std::vector<std::string> default_agent_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("a" + std::to_string(i + 1));
  return ids;
}

OpinionTrajectory::OpinionTrajectory(std::vector<OpinionVector> rounds, std::vector<std::string> agent_ids)
    : rounds_(std::move(rounds)), agent_ids_(std::move(agent_ids)) {
  if (rounds_.empty()) {
    throw Error(ErrorKind::TooFewRounds, "trajectory has no rounds");
  }
  const std::size_t n = rounds_.front().size();
  if (agent_ids_.empty()) agent_ids_ = default_agent_ids(n);
  if (agent_ids_.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "agent id count does not match opinion vector length");
  }
  for (std::size_t t = 1; t < rounds_.size(); ++t) {
    if (rounds_[t].size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "round " + std::to_string(t + 1) + " has a different agent count");
    }
  }
  std::vector<std::string> sorted = agent_ids_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate agent id in trajectory");
  }
}

OpinionTrajectory::OpinionTrajectory(std::vector<OpinionVector> rounds)
    : OpinionTrajectory(std::move(rounds), {}) {}

OpinionTrajectory OpinionTrajectory::from_matrix(const Eigen::MatrixXd& data, std::vector<std::string> agent_ids) {
  std::vector<OpinionVector> rounds;
  rounds.reserve(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index t = 0; t < data.cols(); ++t) rounds.emplace_back(data.col(t));
  return OpinionTrajectory(std::move(rounds), std::move(agent_ids));
}

Eigen::MatrixXd OpinionTrajectory::matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(agents()), static_cast<Eigen::Index>(rounds()));
  for (std::size_t t = 0; t < rounds_.size(); ++t) out.col(static_cast<Eigen::Index>(t)) = rounds_[t].values();
  return out;
}

OpinionTrajectory OpinionTrajectory::prefix(std::size_t count) const {
  if (count == 0 || count > rounds_.size()) {
    throw Error(ErrorKind::InvalidArgument, "prefix length out of range");
  }
  return OpinionTrajectory({rounds_.begin(), rounds_.begin() + static_cast<std::ptrdiff_t>(count)}, agent_ids_);
}

// ---------------------------------------------------------------------------

Topology::Topology(std::size_t n, std::vector<std::uint8_t> adjacency) : n_(n), adjacency_(std::move(adjacency)) {
  for (std::size_t i = 0; i < n_; ++i) adjacency_[i * n_ + i] = 1;
}

Topology Topology::fully_connected(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "topology needs at least one agent");
  return Topology(n, std::vector<std::uint8_t>(n * n, 1));
}

Topology Topology::from_adjacency(const std::vector<std::vector<bool>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "topology needs at least one agent");
  std::vector<std::uint8_t> flat(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "adjacency row " + std::to_string(i) + " is not length n");
    }
    for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = adjacency[i][j] ? 1 : 0;
  }
  return Topology(n, std::move(flat));
}

std::size_t Topology::row_degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += has_edge(i, j) ? 1 : 0;
  return d;
}

std::vector<std::size_t> Topology::visible_peers(std::size_t i) const {
  std::vector<std::size_t> peers;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != i && has_edge(i, j)) peers.push_back(j);
  }
  return peers;
}

bool Topology::is_fully_connected() const {
  return std::all_of(adjacency_.begin(), adjacency_.end(), [](std::uint8_t v) { return v != 0; });
}

std::vector<std::vector<bool>> Topology::adjacency() const {
  std::vector<std::vector<bool>> out(n_, std::vector<bool>(n_, false));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = has_edge(i, j);
  return out;
}

// ---------------------------------------------------------------------------

InfluenceMatrix InfluenceMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return InfluenceMatrix(Eigen::MatrixXd::Identity(k, k));
}

InfluenceMatrix InfluenceMatrix::uniform(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return InfluenceMatrix(Eigen::MatrixXd::Constant(k, k, 1.0 / static_cast<double>(n)));
}

InfluenceMatrix validate_influence_matrix(const Eigen::MatrixXd& entries, const Topology& topology) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "influence matrix must be square and nonempty");
  }
  if (static_cast<std::size_t>(entries.rows()) != topology.size()) {
    throw Error(ErrorKind::DimensionMismatch, "influence matrix and topology sizes differ");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double w = entries(i, j);
      const std::string where = "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (!std::isfinite(w)) throw Error(ErrorKind::NonFiniteInput, "entry " + where + " is not finite");
      if (w < 0.0) throw Error(ErrorKind::NegativeEntry, "entry " + where + " is negative");
      if (w != 0.0 && !topology.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        throw Error(ErrorKind::SupportViolation, "entry " + where + " is nonzero on a non-edge");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum;
      throw Error(ErrorKind::RowSumViolation, msg.str());
    }
  }
  return InfluenceMatrix(entries);
}

InfluenceMatrix validate_influence_matrix(const Eigen::MatrixXd& entries) {
  if (entries.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "influence matrix is empty");
  return validate_influence_matrix(entries, Topology::fully_connected(static_cast<std::size_t>(entries.rows())));
}

SusceptibilityProfile::SusceptibilityProfile(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw Error(ErrorKind::InvalidArgument, "susceptibility profile is empty");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double s = values_(i);
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      std::ostringstream msg;
      msg << "susceptibility " << i << " = " << s << " outside [0,1]";
      throw Error(ErrorKind::SusceptibilityOutOfRange, msg.str());
    }
  }
}

SusceptibilityProfile::SusceptibilityProfile(std::initializer_list<double> values)
    : SusceptibilityProfile(
          Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

SusceptibilityProfile SusceptibilityProfile::constant(std::size_t n, double value) {
  return SusceptibilityProfile(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
}

// ---------------------------------------------------------------------------

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

Message Message::make(std::string agent_id, int round, std::string text, std::string prompt_sha256,
                      std::string timestamp) {
  if (round < 1) throw Error(ErrorKind::InvalidArgument, "message round must be >= 1");
  Message m;
  m.agent_id = std::move(agent_id);
  m.round = round;
  m.word_count = count_words(text);
  m.text = std::move(text);
  m.prompt_sha256 = std::move(prompt_sha256);
  m.timestamp = std::move(timestamp);
  return m;
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::llm_http: return "llm_http";
    case BackendKind::scripted: return "scripted";
    case BackendKind::ground_truth: return "ground_truth";
  }
  return "scripted";
}

BackendKind parse_backend_kind(std::string_view text) {
  const std::string key = lowercase(text);
  if (key == "llm_http") return BackendKind::llm_http;
  if (key == "scripted") return BackendKind::scripted;
  if (key == "ground_truth") return BackendKind::ground_truth;
  throw Error(ErrorKind::InvalidArgument, "unknown backend kind '" + std::string(text) + "'");
}

std::string_view to_string(ChatRole role) {
  switch (role) {
    case ChatRole::system: return "system";
    case ChatRole::self: return "self";
    case ChatRole::peer: return "peer";
  }
  return "peer";
}

std::vector<std::string> Transcript::agent_ids() const {
  std::vector<std::string> ids;
  ids.reserve(agent_specs.size());
  for (const auto& spec : agent_specs) ids.push_back(spec.agent_id);
  return ids;
}

std::size_t Transcript::message_count() const {
  std::size_t count = 0;
  for (const auto& round : rounds) count += round.size();
  return count;
}

void Transcript::check_complete() const {
  const auto ids = agent_ids();
  if (!complete) throw Error(ErrorKind::InvalidArgument, "transcript is flagged incomplete");
  if (rounds.empty()) throw Error(ErrorKind::TooFewRounds, "transcript has no rounds");
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    if (rounds[r].size() != ids.size()) {
      throw Error(ErrorKind::InvalidArgument,
                  "round " + std::to_string(r + 1) + " does not hold one message per agent");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (rounds[r][i].agent_id != ids[i] || rounds[r][i].round != static_cast<int>(r + 1)) {
        throw Error(ErrorKind::InvalidArgument,
                    "round " + std::to_string(r + 1) + " message order does not match agent order");
      }
    }
  }
}

}  // namespace opinion_loom
