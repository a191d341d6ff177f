#include "opinion_loom/sentiment.hpp"

#include <cmath>
#include <sstream>

namespace opinion_loom::sentiment {

namespace {

constexpr double kProbabilitySumTolerance = 1e-6;

}  // namespace

ValenceScore ValenceScore::from_probabilities(double p_negative, double p_neutral, double p_positive) {
  for (double p : {p_negative, p_neutral, p_positive}) {
    if (!std::isfinite(p)) throw Error(ErrorKind::NonFiniteInput, "class probability is not finite");
    if (p < 0.0) throw Error(ErrorKind::InvalidArgument, "class probability is negative");
  }
  const double sum = p_negative + p_neutral + p_positive;
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    std::ostringstream msg;
    msg << "class probabilities sum to " << sum;
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  ValenceScore v;
  v.p_negative = p_negative;
  v.p_neutral = p_neutral;
  v.p_positive = p_positive;
  v.scalar = expected_valence(v);
  return v;
}

double expected_valence(const ValenceScore& score) { return score.p_positive + 0.5 * score.p_neutral; }

std::vector<ValenceScore> Scorer::score_batch(const std::vector<std::string>& texts) const {
  std::vector<ValenceScore> out;
  out.reserve(texts.size());
  for (std::size_t k = 0; k < texts.size(); ++k) {
    try {
      out.push_back(score(texts[k]));
    } catch (const ScoringError&) {
      throw;
    } catch (const Error& e) {
      throw ScoringError(e.kind(), k, e.what());
    }
  }
  return out;
}

ScoredTranscript score_transcript_detailed(const Scorer& scorer, const Transcript& transcript,
                                           const ScalarPolicy& policy) {
  transcript.check_complete();
  const auto ids = transcript.agent_ids();

  std::vector<std::vector<ValenceScore>> scores;
  std::vector<OpinionVector> series;
  scores.reserve(transcript.rounds.size());
  series.reserve(transcript.rounds.size());
  for (std::size_t r = 0; r < transcript.rounds.size(); ++r) {
    std::vector<std::string> texts;
    for (const auto& m : transcript.rounds[r]) texts.push_back(m.text);

    std::vector<ValenceScore> round_scores;
    try {
      round_scores = scorer.score_batch(texts);
    } catch (const ScoringError& e) {
      const std::string agent = e.index() < ids.size() ? ids[e.index()] : "?";
      throw Error(e.kind(), "scoring agent " + agent + " round " + std::to_string(r + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "scoring round " + std::to_string(r + 1) + ": " + e.what());
    }
    if (round_scores.size() != texts.size()) {
      throw Error(ErrorKind::SidecarMalformedResponse,
                  "scorer returned " + std::to_string(round_scores.size()) + " scores for round " +
                      std::to_string(r + 1));
    }

    Eigen::VectorXd values(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      values(static_cast<Eigen::Index>(i)) = policy ? policy(round_scores[i]) : round_scores[i].scalar;
    }
    series.emplace_back(std::move(values));
    scores.push_back(std::move(round_scores));
  }
  return {OpinionTrajectory(std::move(series), ids), std::move(scores)};
}

OpinionTrajectory score_transcript(const Scorer& scorer, const Transcript& transcript, const ScalarPolicy& policy) {
  return score_transcript_detailed(scorer, transcript, policy).trajectory;
}

}  // namespace opinion_loom::sentiment
