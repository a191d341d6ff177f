#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "opinion_loom/core.hpp"

namespace opinion_loom::sentiment {

/// Class probabilities of one message plus the affective scalar in [0,1].
struct ValenceScore {
  double p_negative = 0.0;
  double p_neutral = 1.0;
  double p_positive = 0.0;
  double scalar = 0.5;

  /// Validates (nonnegative, sum to 1 within 1e-6) and fills scalar with
  /// expected_valence.
  static ValenceScore from_probabilities(double p_negative, double p_neutral, double p_positive);
  static ValenceScore neutral() { return {}; }

  bool operator==(const ValenceScore& other) const = default;
};

/// Expected valence with negative = 0, neutral = 0.5, positive = 1.
double expected_valence(const ValenceScore& score);

using ScalarPolicy = std::function<double(const ValenceScore&)>;

/// Raised for a failure tied to one text of a batch.
class ScoringError : public Error {
 public:
  ScoringError(ErrorKind kind, std::size_t index, const std::string& message)
      : Error(kind, message), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ValenceScore score(std::string_view text) const = 0;
  /// Scores in input order. The default scores one text at a time.
  virtual std::vector<ValenceScore> score_batch(const std::vector<std::string>& texts) const;
  virtual std::string name() const = 0;
};

enum class Polarity { negative, neutral, positive };

/// Word list mapping lowercase tokens to a polarity.
class Lexicon {
 public:
  Lexicon(std::vector<std::string> positive, std::vector<std::string> neutral, std::vector<std::string> negative);

  /// The word list shipped with the library.
  static const Lexicon& shipped();

  const Polarity* lookup(std::string_view token) const;
  const std::vector<std::string>& words(Polarity polarity) const;

 private:
  std::vector<std::string> positive_;
  std::vector<std::string> neutral_;
  std::vector<std::string> negative_;
  std::unordered_map<std::string, Polarity> index_;
};

/// Lowercased ASCII word tokens (letters and apostrophes).
std::vector<std::string> tokenize(std::string_view text);

/// Token-count sentiment model. With pseudo-count alpha the class
/// probabilities are (count_c + alpha) / (total + 3 alpha); text with no
/// lexicon tokens scores (0, 1, 0).
class LexiconScorer : public Scorer {
 public:
  static constexpr std::size_t kMaxComposedWords = 90;
  static constexpr double kComposeTolerance = 0.05;

  explicit LexiconScorer(const Lexicon& lexicon = Lexicon::shipped(), double alpha = 0.0);

  ValenceScore score(std::string_view text) const override;
  std::string name() const override { return "lexicon"; }

  ValenceScore score_counts(std::size_t negative, std::size_t neutral, std::size_t positive) const;

  /// Builds a message whose score lies as close to `target` as the lexicon
  /// allows with at most kMaxComposedWords lexicon words. Word choice and
  /// order depend only on `seed`. Throws UnreachableScore when the best
  /// achievable score is further than kComposeTolerance from the target.
  std::string compose(double target, std::uint64_t seed) const;

 private:
  Lexicon lexicon_;
  double alpha_;
};

/// Per-message scores alongside the scalar trajectory.
struct ScoredTranscript {
  OpinionTrajectory trajectory;
  /// scores[round][agent]
  std::vector<std::vector<ValenceScore>> scores;
};

/// x_i(t) = policy(score of agent i's round-t message). The transcript must
/// be complete. Scorer failures are rethrown with round and agent context.
ScoredTranscript score_transcript_detailed(const Scorer& scorer, const Transcript& transcript,
                                           const ScalarPolicy& policy = {});

OpinionTrajectory score_transcript(const Scorer& scorer, const Transcript& transcript,
                                   const ScalarPolicy& policy = {});

}  // namespace opinion_loom::sentiment
