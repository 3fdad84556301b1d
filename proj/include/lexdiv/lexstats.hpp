#pragma once

// Per-lexeme counts across the two subcorpora. Two counters are kept side by
// side: tweet-level document frequency (feeds the rates and the fold score)
// and raw token occurrences (feed the eligibility thresholds).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lexdiv/corpus.hpp"

namespace lexdiv::lexstats {

struct LexemeStats {
  std::string lexeme;
  std::uint64_t tweets_left = 0;
  std::uint64_t tweets_right = 0;
  std::uint64_t tokens_left = 0;
  std::uint64_t tokens_right = 0;
  double rate_left = 0.0;   // tweets per million tweets of the side
  double rate_right = 0.0;
  std::uint64_t users_total = 0;
  std::uint64_t users_left = 0;
  std::uint64_t users_right = 0;
  double user_share = 0.0;  // users_total / all users

  std::uint64_t tokens_total() const { return tokens_left + tokens_right; }
};

struct EligibilityProfile {
  std::string name;
  std::uint64_t min_either = 0;
  std::uint64_t min_total = 0;
  std::uint64_t min_users = 0;
  double min_user_token_ratio = 0.0;
  std::uint64_t min_both = 0;

  static EligibilityProfile freq() { return {"FREQ", 200, 300, 200, 0.05, 0}; }
  static EligibilityProfile embed() { return {"EMBED", 0, 0, 0, 0.0, 100}; }

  bool accepts(const LexemeStats& s) const;
};

struct FrequencyResult {
  std::uint64_t tweets = 0;
  double rate = 0.0;
};

// Tweets containing the lexeme at least once, and that count per million
// tweets. Throws on an empty subcorpus.
FrequencyResult tweet_frequency(std::string_view lexeme,
                                const std::vector<std::vector<std::string>>& subcorpus);

// log2(right / left). Both rates must be positive.
double log2_fold(double left_rate, double right_rate);

// Streaming accumulator. Merging two counters fed with disjoint tweet sets
// gives the same table as one counter fed with all of them.
class Counter {
 public:
  void add(Side side, std::string_view user, const std::vector<std::string>& lexemes);
  void merge(const Counter& other);

  std::uint64_t tweets(Side side) const { return side == Side::Left ? tweets_left_ : tweets_right_; }
  std::uint64_t users() const { return user_ids_.size(); }

  // One row per lexeme, sorted lexicographically. Rates for a side with no
  // tweets are 0.
  std::vector<LexemeStats> table() const;

 private:
  struct Entry {
    std::uint64_t tweets[2] = {0, 0};
    std::uint64_t tokens[2] = {0, 0};
    std::unordered_set<std::uint32_t> users[2];
  };
  std::uint32_t intern_user(std::string_view user);

  std::map<std::string, Entry, std::less<>> entries_;
  std::unordered_map<std::string, std::uint32_t> user_ids_;
  std::vector<std::string> user_names_;
  std::uint64_t tweets_left_ = 0;
  std::uint64_t tweets_right_ = 0;
};

std::vector<std::string> eligible_lexicon(const std::vector<LexemeStats>& table,
                                          const EligibilityProfile& profile);

// Rows that pass the profile and have both rates positive, ordered by
// |log2 fold| descending then lexeme.
std::vector<LexemeStats> fold_ranking(const std::vector<LexemeStats>& table,
                                      const EligibilityProfile& profile);

// lexeme, tweets_l, tweets_r, rate_l, rate_r, log2_fold, users_total, user_share
void write_fold_table(std::ostream& os, const std::vector<LexemeStats>& ranked);

// Full counter table including token counts, for downstream joins.
void write_counts(std::ostream& os, const std::vector<LexemeStats>& table);
std::vector<LexemeStats> read_counts(const std::string& path);

}  // namespace lexdiv::lexstats
