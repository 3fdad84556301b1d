#pragma once

// Rule-based valence scoring compatible with the VADER 3.3.2 heuristics,
// plus the aggregations built on it: per-user means, per-side time series,
// the Right-minus-Left side effect and the follower-count regression.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lexdiv/corpus.hpp"

namespace lexdiv::sentiment {

struct SentimentConfig {
  std::unordered_map<std::string, double> lexicon;
  std::unordered_map<std::string, double> boosters;
  std::unordered_set<std::string> negations;
  // Single code point emoji -> textual description, substituted before scoring.
  std::unordered_map<std::string, std::string> emoji_descriptions;
  double alpha = 15.0;
  double booster_increment = 0.293;
  double negation_scalar = -0.74;
  double caps_boost = 0.733;
  double exclamation_boost = 0.292;
  int max_exclamations = 4;
  double question_boost = 0.18;      // per mark, for 2 or 3 marks
  double question_boost_many = 0.96;  // more than 3 marks

  void validate() const;

  // Lexicon from a "token<TAB>valence[<TAB>...]" file and the standard
  // booster/negation lists; emoji file is optional ("" skips it).
  static SentimentConfig from_files(const std::string& lexicon_path, const std::string& emoji_path = {});
  // Built-in ~200 entry lexicon for offline use.
  static SentimentConfig builtin();
};

std::unordered_map<std::string, double> load_lexicon(const std::string& path);
std::unordered_map<std::string, std::string> load_emoji_descriptions(const std::string& path);
std::unordered_map<std::string, double> default_boosters(double increment = 0.293);
std::unordered_set<std::string> default_negations();

struct Score {
  double compound = 0.0;
  double positive = 0.0;
  double negative = 0.0;
  double neutral = 0.0;
  bool all_zero = true;  // no token carried valence
};

Score score_text(std::string_view text, const SentimentConfig& config);
inline double score_compound(std::string_view text, const SentimentConfig& config) {
  return score_text(text, config).compound;
}

struct UserProfile {
  double mean = 0.0;
  std::size_t scored = 0;  // tweets with valence
  std::size_t total = 0;
  bool defined() const { return scored > 0; }
};

// Mean compound over the tweets that carried valence. Throws on empty input.
UserProfile user_sentiment_profile(const std::vector<Score>& tweets);

enum class Granularity { Daily, Weekly };
std::optional<Granularity> parse_granularity(std::string_view s);

struct DatedScore {
  Date date;
  Side side = Side::Unknown;
  Score score;
};

struct SeriesPoint {
  Date bucket_start;
  Side side = Side::Unknown;
  double mean = 0.0;
  std::size_t n = 0;
  bool missing() const { return n == 0; }
};

// One point per bucket per side between the first and last dated tweet;
// buckets without scored tweets are emitted with n = 0.
std::vector<SeriesPoint> side_series(const std::vector<DatedScore>& scores, Granularity granularity);
// bucket_start, side, mean ("NA" when missing), n
void write_series(std::ostream& os, const std::vector<SeriesPoint>& series);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> side_coefficient;
  std::optional<double> interaction;
  double p_value = 1.0;
  std::optional<double> interaction_p_value;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;
  std::size_t permutations = 0;
};

struct UserMean {
  std::string user;
  Side side = Side::Unknown;
  double mean = 0.0;
  double weight = 1.0;  // scored tweet count
};

struct PermutationOptions {
  std::size_t permutations = 10000;
  std::uint64_t seed = 0;
};

// Two-stage estimate: user means regressed on a Right indicator with tweet
// count weights. slope is the Right-minus-Left difference; the p value comes
// from shuffling side labels across users.
RegressionResult side_effect(const std::vector<UserMean>& users, const PermutationOptions& options = {});

struct PopularityPoint {
  std::int64_t followers = 0;
  double mean = 0.0;
  Side side = Side::Unknown;
};

// OLS of user mean sentiment on log10(followers). With with_side, adds a
// Right indicator and its product with log10(followers). Users with zero
// followers are dropped and counted in `excluded`.
RegressionResult popularity_regression(const std::vector<PopularityPoint>& points, bool with_side = false,
                                       const PermutationOptions& options = {});

void write_regression(std::ostream& os, const std::string& model, const RegressionResult& r, bool header = true);

}  // namespace lexdiv::sentiment
