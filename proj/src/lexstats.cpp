#include "lexdiv/lexstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"

namespace lexdiv::lexstats {

namespace {

int side_index(Side side) {
  switch (side) {
    case Side::Left: return 0;
    case Side::Right: return 1;
    default: fail(ErrorKind::InvalidArgument, "lexeme counts need a left or right side label");
  }
}

double per_million(std::uint64_t count, std::uint64_t total) {
  return total == 0 ? 0.0 : 1e6 * static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

bool EligibilityProfile::accepts(const LexemeStats& s) const {
  if (std::max(s.tokens_left, s.tokens_right) < min_either) return false;
  if (s.tokens_total() < min_total) return false;
  if (s.users_total < min_users) return false;
  if (min_user_token_ratio > 0.0) {
    if (s.tokens_total() == 0) return false;
    const double ratio = static_cast<double>(s.users_total) / static_cast<double>(s.tokens_total());
    if (ratio < min_user_token_ratio) return false;
  }
  return std::min(s.tokens_left, s.tokens_right) >= min_both;
}

FrequencyResult tweet_frequency(std::string_view lexeme,
                                const std::vector<std::vector<std::string>>& subcorpus) {
  if (subcorpus.empty()) fail(ErrorKind::InvalidArgument, "tweet frequency of an empty subcorpus is undefined");
  FrequencyResult r;
  for (const auto& tweet : subcorpus)
    if (std::find(tweet.begin(), tweet.end(), lexeme) != tweet.end()) ++r.tweets;
  r.rate = per_million(r.tweets, subcorpus.size());
  return r;
}

double log2_fold(double left_rate, double right_rate) {
  if (!(left_rate > 0.0) || !(right_rate > 0.0))
    fail(ErrorKind::InvalidArgument,
         "log2 fold needs positive rates on both sides; filter with an eligibility profile first");
  // Larger over smaller, so swapping the sides negates the score bit for bit.
  return right_rate >= left_rate ? std::log2(right_rate / left_rate) : -std::log2(left_rate / right_rate);
}

std::uint32_t Counter::intern_user(std::string_view user) {
  auto [it, inserted] = user_ids_.try_emplace(std::string(user), static_cast<std::uint32_t>(user_names_.size()));
  if (inserted) user_names_.emplace_back(user);
  return it->second;
}

void Counter::add(Side side, std::string_view user, const std::vector<std::string>& lexemes) {
  const int k = side_index(side);
  const std::uint32_t uid = intern_user(user);
  (k == 0 ? tweets_left_ : tweets_right_) += 1;
  std::set<std::string_view> seen;
  for (const auto& lx : lexemes) {
    auto it = entries_.find(lx);
    if (it == entries_.end()) it = entries_.emplace(lx, Entry{}).first;
    Entry& e = it->second;
    e.tokens[k] += 1;
    if (seen.insert(it->first).second) {
      e.tweets[k] += 1;
      e.users[k].insert(uid);
    }
  }
}

void Counter::merge(const Counter& other) {
  std::vector<std::uint32_t> remap(other.user_names_.size());
  for (std::size_t i = 0; i < other.user_names_.size(); ++i) remap[i] = intern_user(other.user_names_[i]);
  tweets_left_ += other.tweets_left_;
  tweets_right_ += other.tweets_right_;
  for (const auto& [lexeme, src] : other.entries_) {
    auto it = entries_.find(lexeme);
    if (it == entries_.end()) it = entries_.emplace(lexeme, Entry{}).first;
    Entry& dst = it->second;
    for (int k = 0; k < 2; ++k) {
      dst.tweets[k] += src.tweets[k];
      dst.tokens[k] += src.tokens[k];
      for (auto u : src.users[k]) dst.users[k].insert(remap[u]);
    }
  }
}

std::vector<LexemeStats> Counter::table() const {
  std::vector<LexemeStats> out;
  out.reserve(entries_.size());
  const auto population = static_cast<double>(user_names_.size());
  for (const auto& [lexeme, e] : entries_) {
    LexemeStats s;
    s.lexeme = lexeme;
    s.tweets_left = e.tweets[0];
    s.tweets_right = e.tweets[1];
    s.tokens_left = e.tokens[0];
    s.tokens_right = e.tokens[1];
    s.rate_left = per_million(s.tweets_left, tweets_left_);
    s.rate_right = per_million(s.tweets_right, tweets_right_);
    s.users_left = e.users[0].size();
    s.users_right = e.users[1].size();
    std::size_t both = 0;
    const auto& small = e.users[0].size() < e.users[1].size() ? e.users[0] : e.users[1];
    const auto& large = e.users[0].size() < e.users[1].size() ? e.users[1] : e.users[0];
    for (auto u : small) both += large.count(u);
    s.users_total = s.users_left + s.users_right - both;
    s.user_share = population > 0 ? static_cast<double>(s.users_total) / population : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> eligible_lexicon(const std::vector<LexemeStats>& table,
                                          const EligibilityProfile& profile) {
  std::vector<std::string> out;
  for (const auto& s : table)
    if (profile.accepts(s)) out.push_back(s.lexeme);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LexemeStats> fold_ranking(const std::vector<LexemeStats>& table,
                                      const EligibilityProfile& profile) {
  std::vector<std::pair<double, const LexemeStats*>> scored;
  for (const auto& s : table)
    if (profile.accepts(s) && s.rate_left > 0 && s.rate_right > 0)
      scored.emplace_back(std::abs(log2_fold(s.rate_left, s.rate_right)), &s);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->lexeme < b.second->lexeme;
  });
  std::vector<LexemeStats> out;
  out.reserve(scored.size());
  for (const auto& [score, s] : scored) out.push_back(*s);
  return out;
}

void write_fold_table(std::ostream& os, const std::vector<LexemeStats>& ranked) {
  os << "lexeme\ttweets_l\ttweets_r\trate_l\trate_r\tlog2_fold\tusers_total\tuser_share\n";
  for (const auto& s : ranked) {
    os << s.lexeme << '\t' << s.tweets_left << '\t' << s.tweets_right << '\t' << format_number(s.rate_left)
       << '\t' << format_number(s.rate_right) << '\t' << format_number(log2_fold(s.rate_left, s.rate_right))
       << '\t' << s.users_total << '\t' << format_number(s.user_share) << '\n';
  }
}

void write_counts(std::ostream& os, const std::vector<LexemeStats>& table) {
  os << "lexeme\ttweets_l\ttweets_r\ttokens_l\ttokens_r\trate_l\trate_r\tusers_total\tusers_l\tusers_r\tuser_share\n";
  for (const auto& s : table) {
    os << s.lexeme << '\t' << s.tweets_left << '\t' << s.tweets_right << '\t' << s.tokens_left << '\t'
       << s.tokens_right << '\t' << format_number(s.rate_left) << '\t' << format_number(s.rate_right) << '\t'
       << s.users_total << '\t' << s.users_left << '\t' << s.users_right << '\t' << format_number(s.user_share)
       << '\n';
  }
}

std::vector<LexemeStats> read_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "lexeme counts not found: " + path);
  std::vector<LexemeStats> out;
  std::string line;
  std::size_t lineno = 0;
  auto to_u64 = [&](std::string_view f) {
    std::uint64_t v = 0;
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size())
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad count");
    return v;
  };
  auto to_double = [&](std::string_view f) {
    auto v = parse_number(f);
    if (!v) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad number");
    return *v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("lexeme\t", 0) == 0) continue;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 11) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected 11 fields");
    LexemeStats s;
    s.lexeme = std::string(f[0]);
    s.tweets_left = to_u64(f[1]);
    s.tweets_right = to_u64(f[2]);
    s.tokens_left = to_u64(f[3]);
    s.tokens_right = to_u64(f[4]);
    s.rate_left = to_double(f[5]);
    s.rate_right = to_double(f[6]);
    s.users_total = to_u64(f[7]);
    s.users_left = to_u64(f[8]);
    s.users_right = to_u64(f[9]);
    s.user_share = to_double(f[10]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lexdiv::lexstats
