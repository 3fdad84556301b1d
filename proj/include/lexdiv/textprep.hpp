#pragma once

// Tweet text preparation: rule-based cleaning, tweet-level exclusion,
// tokenization into words/emoji/emoticons, lemmatization and type/token
// statistics.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexdiv/corpus.hpp"

namespace lexdiv::textprep {

std::vector<std::string> default_emoticons();
std::vector<std::string> default_bot_keywords();
// One entry per line; blank lines and '#' comments skipped.
std::vector<std::string> load_word_list(const std::string& path);

struct CleanRuleSet {
  bool remove_urls = true;
  bool remove_mentions = true;
  bool remove_times = true;
  bool strip_hashmarks = true;
  bool strip_punct_keep_emoticons = true;
  bool lowercase = true;
  bool collapse_whitespace = true;
  bool normalize_reduplication = true;
  bool strip_emoji_modifiers = true;
  bool drop_bot_keywords = true;
  std::vector<std::string> bot_keywords = default_bot_keywords();
  // Matched case-insensitively; kept (lowercased) through punctuation removal.
  std::vector<std::string> emoticons = default_emoticons();

  void validate() const;
};

// Preset for the sentiment channel: URLs, mentions, times, hashmarks and
// emoji modifiers go, while case, punctuation and letter repetition stay for
// the emphasis heuristics.
CleanRuleSet sentiment_channel_rules();

// Applies the cleaning rules until the output is stable, so the result is
// always a fixed point: clean_text(clean_text(x)) == clean_text(x).
std::string clean_text(std::string_view raw, const CleanRuleSet& rules = {});

// Letter runs only: a character repeated 3+ times becomes 2, and a 2-3
// character unit repeated 3+ times becomes 2 units ("hahaha" -> "haha").
std::u32string normalize_reduplication(std::u32string_view word);

bool is_excluded_tweet(const TweetRecord& tweet, const CleanRuleSet& rules = {});

enum class TokenKind { Word, Emoji, Emoticon, HashtagWord, Number, Other };
const char* to_string(TokenKind kind);

struct Token {
  std::string surface;
  std::string lemma;
  TokenKind kind = TokenKind::Other;

  bool operator==(const Token&) const = default;
};

// Whitespace segmentation; emoji (and regional-indicator flag pairs) become
// their own tokens even when written without spaces.
std::vector<Token> tokenize(std::string_view cleaned,
                            const std::vector<std::string>& emoticons = default_emoticons());

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemma(std::string_view word) const = 0;
};

// Exception table first, then ordered English suffix rules. The rules are
// iterated to a fixed point, which makes the mapping idempotent.
class RuleLemmatizer final : public Lemmatizer {
 public:
  RuleLemmatizer();
  // Adds "form<TAB or space>lemma" entries from a file, overriding builtins.
  void load_exceptions(const std::string& path);
  void add_exception(std::string form, std::string lemma);
  std::string lemma(std::string_view word) const override;
  const std::unordered_map<std::string, std::string>& exceptions() const { return exceptions_; }

 private:
  std::string step(const std::string& word) const;
  std::unordered_map<std::string, std::string> exceptions_;
};

// Fills token.lemma. Non-word tokens pass through with lemma = surface.
Token lemmatize(Token token, const Lemmatizer& lemmatizer);

struct CorpusStats {
  std::uint64_t token_count = 0;
  std::uint64_t type_count = 0;
  double ttr = 0.0;
  std::uint64_t tweet_count = 0;
  std::uint64_t user_count = 0;
  bool empty = true;
};

CorpusStats corpus_stats(const std::vector<std::vector<std::string>>& corpus);

class CorpusStatsAccumulator {
 public:
  void add(std::string_view user, const std::vector<std::string>& tokens);
  CorpusStats result() const;

 private:
  std::uint64_t tokens_ = 0;
  std::uint64_t tweets_ = 0;
  std::set<std::string, std::less<>> types_;
  std::set<std::string, std::less<>> users_;
};

// Clean + tokenize + lemmatize in one go; returns lexemes (lemmas).
std::vector<std::string> lexemes(std::string_view raw, const CleanRuleSet& rules, const Lemmatizer& lemmatizer);

}  // namespace lexdiv::textprep
