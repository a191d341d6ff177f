#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

#include "opinion_loom/sentiment.hpp"

namespace opinion_loom::sentiment {

namespace {

const std::vector<std::string>& shipped_positive() {
  static const std::vector<std::string> words = {
      "kind",       "honest",    "generous",  "thoughtful", "friendly",   "caring",     "reliable",
      "trustworthy", "warm",     "helpful",   "admirable",  "wonderful",  "brilliant",  "loyal",
      "compassionate", "cheerful", "sincere",  "respectful", "patient",   "brave",      "wise",
      "good",       "great",     "excellent", "likable",    "decent",     "genuine",    "charming",
      "considerate", "dependable", "nice",    "smart",      "talented",   "inspiring",  "humble",
      "fair",       "gentle",    "supportive", "positive",  "delightful",
  };
  return words;
}

const std::vector<std::string>& shipped_neutral() {
  static const std::vector<std::string> words = {
      "average",  "ordinary", "typical",   "unclear", "uncertain", "maybe",  "perhaps", "moderate",
      "balanced", "mixed",    "neutral",   "unknown", "undecided", "plain",  "regular", "normal",
      "somewhat", "unsure",   "ambiguous", "middling",
  };
  return words;
}

const std::vector<std::string>& shipped_negative() {
  static const std::vector<std::string> words = {
      "rude",       "dishonest", "selfish",    "arrogant",   "cruel",      "lazy",       "unreliable",
      "manipulative", "cold",    "hostile",    "deceitful",  "careless",   "mean",       "bad",
      "terrible",   "awful",     "untrustworthy", "greedy",  "petty",      "shallow",    "toxic",
      "annoying",   "irresponsible", "insincere", "disrespectful", "impatient", "cowardly", "foolish",
      "horrible",   "nasty",     "unpleasant", "unkind",     "harsh",      "bitter",     "negative",
      "boastful",   "stubborn",  "spiteful",   "vain",       "dreadful",
  };
  return words;
}

}  // namespace

Lexicon::Lexicon(std::vector<std::string> positive, std::vector<std::string> neutral,
                 std::vector<std::string> negative)
    : positive_(std::move(positive)), neutral_(std::move(neutral)), negative_(std::move(negative)) {
  auto add = [this](const std::vector<std::string>& words, Polarity polarity) {
    for (const auto& w : words) {
      const auto tokens = tokenize(w);
      if (tokens.size() != 1 || tokens.front() != w) {
        throw Error(ErrorKind::InvalidArgument, "lexicon entry '" + w + "' is not a single lowercase token");
      }
      if (!index_.emplace(w, polarity).second) {
        throw Error(ErrorKind::InvalidArgument, "lexicon entry '" + w + "' appears twice");
      }
    }
  };
  add(positive_, Polarity::positive);
  add(neutral_, Polarity::neutral);
  add(negative_, Polarity::negative);
}

const Lexicon& Lexicon::shipped() {
  static const Lexicon lexicon(shipped_positive(), shipped_neutral(), shipped_negative());
  return lexicon;
}

const Polarity* Lexicon::lookup(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& Lexicon::words(Polarity polarity) const {
  switch (polarity) {
    case Polarity::positive: return positive_;
    case Polarity::neutral: return neutral_;
    case Polarity::negative: return negative_;
  }
  return neutral_;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalpha(c) || c == '\'') {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

LexiconScorer::LexiconScorer(const Lexicon& lexicon, double alpha) : lexicon_(lexicon), alpha_(alpha) {
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw Error(ErrorKind::InvalidArgument, "lexicon smoothing must be a finite nonnegative number");
  }
}

ValenceScore LexiconScorer::score_counts(std::size_t negative, std::size_t neutral, std::size_t positive) const {
  const std::size_t total = negative + neutral + positive;
  if (total == 0) return ValenceScore::neutral();
  const double denom = static_cast<double>(total) + 3.0 * alpha_;
  return ValenceScore::from_probabilities((static_cast<double>(negative) + alpha_) / denom,
                                          (static_cast<double>(neutral) + alpha_) / denom,
                                          (static_cast<double>(positive) + alpha_) / denom);
}

ValenceScore LexiconScorer::score(std::string_view text) const {
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& token : tokenize(text)) {
    if (const Polarity* p = lexicon_.lookup(token)) ++counts[static_cast<int>(*p)];
  }
  return score_counts(counts[static_cast<int>(Polarity::negative)], counts[static_cast<int>(Polarity::neutral)],
                      counts[static_cast<int>(Polarity::positive)]);
}

std::string LexiconScorer::compose(double target, std::uint64_t seed) const {
  if (!std::isfinite(target)) throw Error(ErrorKind::NonFiniteInput, "compose target is not finite");

  const bool has_pos = !lexicon_.words(Polarity::positive).empty();
  const bool has_neu = !lexicon_.words(Polarity::neutral).empty();
  const bool has_neg = !lexicon_.words(Polarity::negative).empty();

  // Exhaustive search over word counts; the first minimum wins, so ties favour shorter texts.
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t best[3] = {0, 0, 0};  // negative, neutral, positive
  for (std::size_t total = 1; total <= kMaxComposedWords; ++total) {
    for (std::size_t pos = 0; pos <= total; ++pos) {
      if (pos > 0 && !has_pos) break;
      for (std::size_t neu = 0; neu + pos <= total; ++neu) {
        if (neu > 0 && !has_neu) break;
        const std::size_t neg = total - pos - neu;
        if (neg > 0 && !has_neg) continue;
        const double denom = static_cast<double>(total) + 3.0 * alpha_;
        const double scalar = (static_cast<double>(pos) + alpha_ + 0.5 * (static_cast<double>(neu) + alpha_)) / denom;
        const double error = std::abs(scalar - target);
        if (error < best_error) {
          best_error = error;
          best[0] = neg;
          best[1] = neu;
          best[2] = pos;
        }
      }
    }
  }
  if (!(best_error <= kComposeTolerance)) {
    throw Error(ErrorKind::UnreachableScore,
                "lexicon cannot express opinion " + std::to_string(target) + " within tolerance");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::string> words;
  for (Polarity polarity : {Polarity::negative, Polarity::neutral, Polarity::positive}) {
    const auto& pool = lexicon_.words(polarity);
    const std::size_t count = best[static_cast<int>(polarity)];
    if (count == 0) continue;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t k = 0; k < count; ++k) words.push_back(pool[pick(rng)]);
  }
  std::shuffle(words.begin(), words.end(), rng);

  std::string text = "In my view this person is";
  for (std::size_t k = 0; k < words.size(); ++k) {
    text += k == 0 ? " " : ", ";
    text += words[k];
  }
  text += ".";
  return text;
}

}  // namespace opinion_loom::sentiment
