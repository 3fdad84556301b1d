#pragma once

// Semantic proximity annotation: passage sampling, pair scheduling, an
// append-only rating log, per-target scores and rater agreement.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexdiv/corpus.hpp"

namespace lexdiv::annotate {

inline constexpr std::size_t kWindowChars = 60;

struct Passage {
  std::string id;  // unique within a session
  std::string tweet_id;
  std::string user_id;
  Side side = Side::Unknown;
  std::string target;
  std::string text_window;
  std::size_t full_len = 0;  // code points of the source text
};

struct ContextRules {
  std::size_t min_chars = 70;
  std::size_t min_words = 10;
  double min_ttr = 0.6;
  double max_top2_letter_ratio = 0.4;  // strict
  double max_caps_ratio = 0.5;         // capitalized : uncapitalized words, strict
};

struct ContextCheck {
  bool ok = true;
  std::vector<std::string> failed;  // min_chars, min_words, ttr, letter_concentration, capitalization
};

ContextCheck check_context(std::string_view text, const ContextRules& rules = {});

// Code point offset of the first usable occurrence of target: case-insensitive,
// an optional plural "s"/"es" after letter-final targets, no letters or
// digits glued to word-like ends, and never next to a hyphen.
std::optional<std::size_t> find_target(std::string_view text, std::string_view target);

// Target ±60 code points, cut on code point boundaries.
std::string context_window(std::string_view text, std::size_t target_pos, std::size_t target_len,
                           std::size_t radius = kWindowChars);

// Display text for annotators: URLs dropped, whitespace collapsed.
std::string display_text(const TweetRecord& tweet);

// Candidates of one side that pass the context rules and contain the target;
// one per user (longest, seeded tie-break), then the n longest overall.
// Throws InvalidArgument naming the shortfall when fewer than n qualify.
std::vector<Passage> sample_passages(const std::vector<TweetRecord>& corpus, std::string_view target, Side side,
                                     std::size_t n, std::uint64_t seed, const ContextRules& rules = {});

enum class PairKind { LR, LL, RR };
const char* to_string(PairKind k);
std::optional<PairKind> parse_pair_kind(std::string_view s);

struct Pair {
  std::string pair_id;
  std::string target;
  std::size_t passage_a = 0;  // indexes into Schedule::passages
  std::size_t passage_b = 0;
  PairKind kind = PairKind::LR;
};

struct Schedule {
  std::string session;
  std::uint64_t seed = 0;
  std::vector<std::string> targets;
  std::vector<Passage> passages;
  std::vector<Pair> pairs;  // presentation order

  std::optional<std::size_t> find_pair(std::string_view pair_id) const;
  std::map<std::string, std::map<PairKind, std::size_t>> composition() const;
  // Throws State unless every target has 20 LR, 10 LL, 10 RR pairs and each
  // of its passages appears exactly twice.
  void check_composition() const;
};

struct TargetPassages {
  std::string target;
  std::vector<Passage> left;   // 20
  std::vector<Passage> right;  // 20
};

// Per target: 20 left-right, 10 left-left, 10 right-right pairs with every
// passage used twice; presentation order is a seeded shuffle of all pairs.
Schedule build_session(const std::string& session, const std::vector<TargetPassages>& targets, std::uint64_t seed);

std::string schedule_to_json(const Schedule& s);
Schedule schedule_from_json(std::string_view json);

struct Progress {
  std::size_t done = 0;
  std::size_t total = 0;
};

struct Rating {
  std::string pair_id;
  std::string annotator;
  int value = 0;
  std::string ts;
};

struct TargetScores {
  std::string target;
  double divergence = 0.0;        // 4 - mean LR rating
  double polysemy_left = 0.0;     // 4 - mean LL rating
  double polysemy_right = 0.0;    // 4 - mean RR rating
  double divergence_se = 0.0;
  double polysemy_left_se = 0.0;
  double polysemy_right_se = 0.0;
  std::size_t n_lr = 0, n_ll = 0, n_rr = 0;
};

// In-memory session state rebuilt from the event log. All mutation goes
// through one mutex and is appended to the log before state changes.
class Session {
 public:
  // New session directory holding schedule.json and an empty events.jsonl.
  static void create(const std::filesystem::path& dir, const Schedule& schedule);
  static Session open(const std::filesystem::path& dir);
  // Replays log lines on top of a schedule without touching disk.
  static Session replay(const Schedule& schedule, const std::vector<std::string>& event_lines);

  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const Schedule& schedule() const { return schedule_; }
  const std::filesystem::path& dir() const { return dir_; }

  // First pair in presentation order the annotator has neither rated nor
  // failed.
  std::optional<std::size_t> next_pair(std::string_view annotator) const;
  Progress progress(std::string_view annotator) const;

  // Errors: InvalidArgument for unknown pair or value outside 1..4, State for
  // a repeat rating by the same annotator.
  Rating record_rating(std::string_view pair_id, std::string_view annotator, int value);
  void record_failure(std::string_view pair_id, std::string_view annotator, std::string_view reason);
  // Audit record of a machine exchange; does not change state.
  void record_exchange(std::string_view pair_id, std::string_view annotator, std::string_view request,
                       std::string_view response);

  std::vector<Rating> ratings() const;
  std::optional<int> rating(std::string_view pair_id, std::string_view annotator) const;
  std::set<std::string> annotators() const;
  std::set<std::string> failed(std::string_view annotator) const;
  // Canonical dump of the derived state, for replay comparisons.
  std::string state_digest() const;

 private:
  Session() = default;
  void apply(const std::string& line, bool strict);
  void append(const std::string& line);

  Schedule schedule_;
  std::filesystem::path dir_;
  std::map<std::pair<std::string, std::string>, Rating> ratings_;  // (annotator, pair_id)
  std::map<std::string, std::set<std::string>> failed_;           // annotator -> pair ids
  std::vector<std::string> arrival_;                               // rating keys in log order
  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

// Throws State naming the missing pairs unless every listed annotator rated
// every pair.
std::vector<TargetScores> session_scores(const Schedule& schedule, const std::vector<Rating>& ratings,
                                         const std::vector<std::string>& annotators);
std::string scores_to_json(const std::vector<TargetScores>& scores);
void write_scores(std::ostream& os, const std::vector<TargetScores>& scores);

// Spearman rho between two raters over the same items. Empty when either
// side has no rank variance. Requires equal lengths and n >= 3.
std::optional<double> agreement(const std::vector<double>& a, const std::vector<double>& b);

struct AgreementRow {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t n = 0;
  std::optional<double> rho;
};

// Pairwise agreement over pairs rated by both annotators, optionally
// restricted to a set of targets.
std::vector<AgreementRow> session_agreement(const Session& session, const std::vector<std::string>& annotators,
                                            const std::set<std::string>& only_targets = {});

std::string now_timestamp();

}  // namespace lexdiv::annotate
