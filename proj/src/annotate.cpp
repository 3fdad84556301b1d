#include "lexdiv/annotate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "json.hpp"
#include "lexdiv/artifacts.hpp"
#include "lexdiv/delineate.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/stats.hpp"
#include "lexdiv/textprep.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::annotate {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using utf8::CodePoint;

namespace {

bool word_char(CodePoint c) { return utf8::is_letter(c) || utf8::is_ascii_digit(c); }

bool is_hyphen(CodePoint c) { return c == '-' || c == 0x2010 || c == 0x2011; }

// Word with leading/trailing non-alphanumerics removed.
std::u32string trim_word(std::u32string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && !word_char(w[b])) ++b;
  while (e > b && !word_char(w[e - 1])) --e;
  return std::u32string(w.substr(b, e - b));
}

std::vector<std::u32string> split_ws(const std::u32string& s) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && utf8::is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !utf8::is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::u32string lower(std::u32string s) {
  for (auto& c : s) c = utf8::to_lower(c);
  return s;
}

}  // namespace

ContextCheck check_context(std::string_view text, const ContextRules& rules) {
  ContextCheck out;
  const std::u32string cps = utf8::decode(text);
  auto flag = [&](const char* name) {
    out.ok = false;
    out.failed.emplace_back(name);
  };

  if (cps.size() < rules.min_chars) flag("min_chars");

  const auto words = split_ws(cps);
  if (words.size() < rules.min_words) flag("min_words");

  std::set<std::u32string> types;
  std::size_t tokens = 0;
  std::size_t capitalized = 0, uncapitalized = 0;
  for (const auto& w : words) {
    const std::u32string core = trim_word(w);
    if (core.empty()) continue;
    ++tokens;
    types.insert(lower(core));
    if (!utf8::is_letter(core.front())) continue;
    if (utf8::is_upper(core.front())) {
      ++capitalized;
    } else if (std::none_of(core.begin(), core.end(), [](CodePoint c) { return utf8::is_upper(c); })) {
      ++uncapitalized;
    }
  }
  const double ttr = tokens ? static_cast<double>(types.size()) / static_cast<double>(tokens) : 0.0;
  if (ttr < rules.min_ttr) flag("ttr");

  std::map<CodePoint, std::size_t> letters;
  std::size_t letter_total = 0;
  for (CodePoint c : cps) {
    if (!utf8::is_letter(c)) continue;
    ++letters[utf8::to_lower(c)];
    ++letter_total;
  }
  std::vector<std::size_t> counts;
  for (const auto& [c, n] : letters) counts.push_back(n);
  std::sort(counts.rbegin(), counts.rend());
  const std::size_t top2 = (counts.size() > 0 ? counts[0] : 0) + (counts.size() > 1 ? counts[1] : 0);
  if (letter_total == 0 ||
      static_cast<double>(top2) / static_cast<double>(letter_total) >= rules.max_top2_letter_ratio)
    flag("letter_concentration");

  double caps_ratio = 0.0;
  if (uncapitalized > 0)
    caps_ratio = static_cast<double>(capitalized) / static_cast<double>(uncapitalized);
  else if (capitalized > 0)
    caps_ratio = INFINITY;
  if (caps_ratio >= rules.max_caps_ratio) flag("capitalization");
  return out;
}

std::optional<std::size_t> find_target(std::string_view text, std::string_view target) {
  const std::u32string hay = lower(utf8::decode(text));
  const std::u32string needle = lower(utf8::decode(target));
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  const bool word_start = word_char(needle.front());
  const bool word_end = word_char(needle.back());
  const bool pluralizable = utf8::is_letter(needle.back());

  auto end_ok = [&](std::size_t e) {
    if (e >= hay.size()) return true;
    if (is_hyphen(hay[e])) return false;
    return !(word_end && word_char(hay[e]));
  };

  for (std::size_t p = hay.find(needle); p != std::u32string::npos; p = hay.find(needle, p + 1)) {
    if (p > 0) {
      if (is_hyphen(hay[p - 1])) continue;
      if (word_start && word_char(hay[p - 1])) continue;
    }
    const std::size_t e = p + needle.size();
    if (end_ok(e)) return p;
    if (!pluralizable) continue;
    if (e < hay.size() && hay[e] == 's' && end_ok(e + 1)) return p;
    if (e + 1 < hay.size() && hay[e] == 'e' && hay[e + 1] == 's' && end_ok(e + 2)) return p;
  }
  return std::nullopt;
}

std::string context_window(std::string_view text, std::size_t target_pos, std::size_t target_len,
                           std::size_t radius) {
  const std::u32string cps = utf8::decode(text);
  if (target_pos > cps.size()) return {};
  const std::size_t b = target_pos > radius ? target_pos - radius : 0;
  const std::size_t e = std::min(cps.size(), target_pos + target_len + radius);
  return utf8::encode(std::u32string_view(cps).substr(b, e - b));
}

std::string display_text(const TweetRecord& tweet) {
  textprep::CleanRuleSet rules;
  rules.remove_mentions = false;
  rules.remove_times = false;
  rules.strip_hashmarks = false;
  rules.strip_punct_keep_emoticons = false;
  rules.lowercase = false;
  rules.normalize_reduplication = false;
  rules.strip_emoji_modifiers = false;
  rules.drop_bot_keywords = false;
  return textprep::clean_text(tweet.raw ? *tweet.raw : tweet.text, rules);
}

std::vector<Passage> sample_passages(const std::vector<TweetRecord>& corpus, std::string_view target, Side side,
                                     std::size_t n, std::uint64_t seed, const ContextRules& rules) {
  struct Candidate {
    const TweetRecord* rec;
    std::string text;
    std::size_t pos;
    std::size_t len;
    std::uint64_t key;
  };
  std::vector<Candidate> candidates;
  for (const auto& rec : corpus) {
    if (rec.side != side) continue;
    std::string text = display_text(rec);
    const auto pos = find_target(text, target);
    if (!pos) continue;
    if (!check_context(text, rules).ok) continue;
    const std::size_t len = utf8::length(text);
    candidates.push_back({&rec, std::move(text), *pos, len, 0});
  }
  // Keys are drawn in tweet id order so the tie-break ignores corpus order.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return delineate::tweet_id_less(a.rec->id, b.rec->id); });
  Rng rng(mix_seed(seed, fnv1a64(std::string(target) + "/" + to_string(side))));
  for (auto& c : candidates) c.key = rng.next();

  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.len != b.len) return a.len > b.len;
    return a.key < b.key;
  };
  std::map<std::string, const Candidate*> per_user;
  for (const auto& c : candidates) {
    auto [it, inserted] = per_user.emplace(c.rec->user, &c);
    if (!inserted && better(c, *it->second)) it->second = &c;
  }
  std::vector<const Candidate*> chosen;
  chosen.reserve(per_user.size());
  for (const auto& [user, c] : per_user) chosen.push_back(c);
  std::sort(chosen.begin(), chosen.end(), [&](const Candidate* a, const Candidate* b) { return better(*a, *b); });

  if (chosen.size() < n) {
    fail(ErrorKind::InvalidArgument, "target '" + std::string(target) + "' on side " + to_string(side) + ": " +
                                         std::to_string(chosen.size()) + " qualifying tweets, " +
                                         std::to_string(n) + " needed (short by " +
                                         std::to_string(n - chosen.size()) + ")");
  }
  const std::size_t target_len = utf8::decode(target).size();
  std::vector<Passage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& c = *chosen[i];
    Passage p;
    p.tweet_id = c.rec->id;
    p.user_id = c.rec->user;
    p.side = side;
    p.target = std::string(target);
    p.text_window = context_window(c.text, c.pos, target_len);
    p.full_len = c.len;
    out.push_back(std::move(p));
  }
  return out;
}

const char* to_string(PairKind k) {
  switch (k) {
    case PairKind::LR: return "LR";
    case PairKind::LL: return "LL";
    case PairKind::RR: return "RR";
  }
  return "?";
}

std::optional<PairKind> parse_pair_kind(std::string_view s) {
  if (s == "LR") return PairKind::LR;
  if (s == "LL") return PairKind::LL;
  if (s == "RR") return PairKind::RR;
  return std::nullopt;
}

std::optional<std::size_t> Schedule::find_pair(std::string_view pair_id) const {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].pair_id == pair_id) return i;
  return std::nullopt;
}

std::map<std::string, std::map<PairKind, std::size_t>> Schedule::composition() const {
  std::map<std::string, std::map<PairKind, std::size_t>> out;
  for (const auto& t : targets) out[t];
  for (const auto& p : pairs) ++out[p.target][p.kind];
  return out;
}

void Schedule::check_composition() const {
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.pair_id).second) fail(ErrorKind::State, "duplicate pair id " + p.pair_id);
    if (p.passage_a >= passages.size() || p.passage_b >= passages.size() || p.passage_a == p.passage_b)
      fail(ErrorKind::State, "pair " + p.pair_id + " references invalid passages");
    const Passage& a = passages[p.passage_a];
    const Passage& b = passages[p.passage_b];
    if (a.target != p.target || b.target != p.target)
      fail(ErrorKind::State, "pair " + p.pair_id + " mixes targets");
    const bool mixed = a.side != b.side;
    const bool ok = p.kind == PairKind::LR ? mixed
                    : p.kind == PairKind::LL ? (a.side == Side::Left && b.side == Side::Left)
                                             : (a.side == Side::Right && b.side == Side::Right);
    if (!ok) fail(ErrorKind::State, "pair " + p.pair_id + " sides do not match kind " + to_string(p.kind));
  }
  std::vector<std::size_t> uses(passages.size(), 0);
  for (const auto& p : pairs) {
    ++uses[p.passage_a];
    ++uses[p.passage_b];
  }
  for (std::size_t i = 0; i < passages.size(); ++i)
    if (uses[i] != 2)
      fail(ErrorKind::State, "passage " + passages[i].id + " used " + std::to_string(uses[i]) + " times");

  const auto comp = composition();
  for (const auto& t : targets) {
    const auto& c = comp.at(t);
    auto get = [&](PairKind k) {
      auto it = c.find(k);
      return it == c.end() ? std::size_t{0} : it->second;
    };
    if (get(PairKind::LR) != 20 || get(PairKind::LL) != 10 || get(PairKind::RR) != 10)
      fail(ErrorKind::State, "target '" + t + "' has " + std::to_string(get(PairKind::LR)) + " LR, " +
                                 std::to_string(get(PairKind::LL)) + " LL, " + std::to_string(get(PairKind::RR)) +
                                 " RR pairs; expected 20/10/10");
  }
  if (comp.size() != targets.size()) fail(ErrorKind::State, "pairs reference targets outside the schedule");
}

Schedule build_session(const std::string& session, const std::vector<TargetPassages>& targets, std::uint64_t seed) {
  require(!targets.empty(), "build_session: no targets");
  Schedule s;
  s.session = session;
  s.seed = seed;
  Rng rng(mix_seed(seed, fnv1a64("schedule")));
  std::set<std::string> seen;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const auto& t = targets[ti];
    require(seen.insert(t.target).second, "build_session: duplicate target '" + t.target + "'");
    if (t.left.size() != 20 || t.right.size() != 20)
      fail(ErrorKind::InvalidArgument, "target '" + t.target + "' needs 20 left and 20 right passages, has " +
                                           std::to_string(t.left.size()) + " and " +
                                           std::to_string(t.right.size()));
    s.targets.push_back(t.target);
    std::vector<std::size_t> left, right;
    auto add = [&](const Passage& p, Side side, std::vector<std::size_t>& into) {
      require(p.side == side, "target '" + t.target + "': passage on the wrong side");
      Passage copy = p;
      copy.target = t.target;
      copy.id = "t" + std::to_string(ti) + "p" + std::to_string(s.passages.size());
      into.push_back(s.passages.size());
      s.passages.push_back(std::move(copy));
    };
    for (const auto& p : t.left) add(p, Side::Left, left);
    for (const auto& p : t.right) add(p, Side::Right, right);

    auto push = [&](std::size_t a, std::size_t b, PairKind kind) {
      if (rng.bernoulli(0.5)) std::swap(a, b);
      s.pairs.push_back({"", t.target, a, b, kind});
    };
    rng.shuffle(left);
    rng.shuffle(right);
    for (std::size_t k = 0; k + 1 < left.size(); k += 2) push(left[k], left[k + 1], PairKind::LL);
    for (std::size_t k = 0; k + 1 < right.size(); k += 2) push(right[k], right[k + 1], PairKind::RR);
    rng.shuffle(left);
    rng.shuffle(right);
    for (std::size_t k = 0; k < left.size(); ++k) push(left[k], right[k], PairKind::LR);
  }
  rng.shuffle(s.pairs);
  const std::size_t width = std::to_string(s.pairs.size()).size();
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    std::string num = std::to_string(i + 1);
    s.pairs[i].pair_id = "p" + std::string(width - num.size(), '0') + num;
  }
  s.check_composition();
  return s;
}

std::string schedule_to_json(const Schedule& s) {
  json j;
  j["session"] = s.session;
  j["seed"] = s.seed;
  j["targets"] = s.targets;
  json ps = json::array();
  for (const auto& p : s.passages) {
    ps.push_back({{"id", p.id},
                  {"tweet_id", p.tweet_id},
                  {"user_id", p.user_id},
                  {"side", to_string(p.side)},
                  {"target", p.target},
                  {"text_window", p.text_window},
                  {"full_len", p.full_len}});
  }
  j["passages"] = std::move(ps);
  json pairs = json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"target", p.target},
                     {"a", p.passage_a},
                     {"b", p.passage_b},
                     {"kind", to_string(p.kind)}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(1) + "\n";
}

Schedule schedule_from_json(std::string_view text) {
  Schedule s;
  try {
    const json j = json::parse(text);
    s.session = j.at("session").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.targets = j.at("targets").get<std::vector<std::string>>();
    for (const auto& p : j.at("passages")) {
      Passage x;
      x.id = p.at("id").get<std::string>();
      x.tweet_id = p.at("tweet_id").get<std::string>();
      x.user_id = p.at("user_id").get<std::string>();
      x.side = parse_side(p.at("side").get<std::string>());
      x.target = p.at("target").get<std::string>();
      x.text_window = p.at("text_window").get<std::string>();
      x.full_len = p.at("full_len").get<std::size_t>();
      s.passages.push_back(std::move(x));
    }
    for (const auto& p : j.at("pairs")) {
      Pair x;
      x.pair_id = p.at("pair_id").get<std::string>();
      x.target = p.at("target").get<std::string>();
      x.passage_a = p.at("a").get<std::size_t>();
      x.passage_b = p.at("b").get<std::size_t>();
      const auto kind = parse_pair_kind(p.at("kind").get<std::string>());
      if (!kind) fail(ErrorKind::Parse, "schedule: bad pair kind in " + x.pair_id);
      x.kind = *kind;
      s.pairs.push_back(std::move(x));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("schedule: ") + e.what());
  }
  return s;
}

Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

void Session::create(const fs::path& dir, const Schedule& schedule) {
  schedule.check_composition();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  const fs::path events = dir / "events.jsonl";
  if (fs::exists(events) && fs::file_size(events) > 0)
    fail(ErrorKind::State, "session " + dir.string() + " already has ratings");
  artifacts::write_file_atomic(dir / "schedule.json", schedule_to_json(schedule));
  artifacts::write_file_atomic(events, "");
}

Session Session::open(const fs::path& dir) {
  const fs::path sched = dir / "schedule.json";
  if (!fs::exists(sched)) fail(ErrorKind::MissingInput, "no schedule at " + sched.string());
  Session s;
  s.schedule_ = schedule_from_json(artifacts::read_file(sched));
  s.schedule_.check_composition();
  s.dir_ = dir;
  const fs::path events = dir / "events.jsonl";
  if (!fs::exists(events)) return s;
  const std::string content = artifacts::read_file(events);
  std::size_t start = 0;
  while (start < content.size()) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      // Unterminated tail: a write cut short by a crash. Apply it only if it
      // is a complete record.
      try {
        s.apply(content.substr(start), true);
      } catch (const Error&) {
      }
      break;
    }
    const std::string line = content.substr(start, nl - start);
    if (!line.empty()) s.apply(line, true);
    start = nl + 1;
  }
  return s;
}

Session Session::replay(const Schedule& schedule, const std::vector<std::string>& event_lines) {
  schedule.check_composition();
  Session s;
  s.schedule_ = schedule;
  for (const auto& line : event_lines)
    if (!line.empty()) s.apply(line, true);
  return s;
}

void Session::apply(const std::string& line, bool strict) {
  json e;
  try {
    e = json::parse(line);
  } catch (const json::exception& ex) {
    fail(ErrorKind::Parse, std::string("event log: ") + ex.what());
  }
  const std::string type = e.value("type", "");
  if (type == "rating") {
    Rating r;
    r.pair_id = e.at("pair_id").get<std::string>();
    r.annotator = e.at("annotator").get<std::string>();
    r.value = e.at("value").get<int>();
    r.ts = e.value("ts", "");
    if (!schedule_.find_pair(r.pair_id)) {
      if (strict) fail(ErrorKind::Parse, "event log: unknown pair " + r.pair_id);
      return;
    }
    auto key = std::make_pair(r.annotator, r.pair_id);
    if (ratings_.count(key)) {
      if (strict) fail(ErrorKind::Parse, "event log: repeated rating for " + r.pair_id + " by " + r.annotator);
      return;
    }
    ratings_.emplace(key, r);
    arrival_.push_back(r.annotator + "\t" + r.pair_id);
  } else if (type == "machine_failed") {
    failed_[e.at("annotator").get<std::string>()].insert(e.at("pair_id").get<std::string>());
  } else if (type == "llm_exchange") {
  } else if (strict) {
    fail(ErrorKind::Parse, "event log: unknown event type '" + type + "'");
  }
}

void Session::append(const std::string& line) {
  if (dir_.empty()) return;
  const fs::path path = dir_ / "events.jsonl";
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorKind::Io, "cannot open " + path.string());
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t w = ::write(fd, data.data() + off, data.size() - off);
    if (w < 0) {
      ::close(fd);
      fail(ErrorKind::Io, "write failed on " + path.string());
    }
    off += static_cast<std::size_t>(w);
  }
  ::fsync(fd);
  ::close(fd);
}

std::optional<std::size_t> Session::next_pair(std::string_view annotator) const {
  std::lock_guard lock(*mutex_);
  const std::string who(annotator);
  const auto fit = failed_.find(who);
  for (std::size_t i = 0; i < schedule_.pairs.size(); ++i) {
    const auto& id = schedule_.pairs[i].pair_id;
    if (ratings_.count({who, id})) continue;
    if (fit != failed_.end() && fit->second.count(id)) continue;
    return i;
  }
  return std::nullopt;
}

Progress Session::progress(std::string_view annotator) const {
  std::lock_guard lock(*mutex_);
  Progress p;
  p.total = schedule_.pairs.size();
  const std::string who(annotator);
  for (const auto& [key, r] : ratings_)
    if (key.first == who) ++p.done;
  return p;
}

Rating Session::record_rating(std::string_view pair_id, std::string_view annotator, int value) {
  std::lock_guard lock(*mutex_);
  if (!schedule_.find_pair(pair_id)) fail(ErrorKind::InvalidArgument, "unknown pair " + std::string(pair_id));
  if (annotator.empty()) fail(ErrorKind::InvalidArgument, "annotator is empty");
  if (value < 1 || value > 4)
    fail(ErrorKind::InvalidArgument, "rating " + std::to_string(value) + " outside 1..4");
  auto key = std::make_pair(std::string(annotator), std::string(pair_id));
  if (ratings_.count(key))
    fail(ErrorKind::State, "pair " + key.second + " already rated by " + key.first);
  Rating r{key.second, key.first, value, now_timestamp()};
  json e;
  e["type"] = "rating";
  e["ts"] = r.ts;
  e["pair_id"] = r.pair_id;
  e["annotator"] = r.annotator;
  e["value"] = r.value;
  append(e.dump());
  ratings_.emplace(key, r);
  arrival_.push_back(r.annotator + "\t" + r.pair_id);
  return r;
}

void Session::record_failure(std::string_view pair_id, std::string_view annotator, std::string_view reason) {
  std::lock_guard lock(*mutex_);
  if (!schedule_.find_pair(pair_id)) fail(ErrorKind::InvalidArgument, "unknown pair " + std::string(pair_id));
  json e;
  e["type"] = "machine_failed";
  e["ts"] = now_timestamp();
  e["pair_id"] = std::string(pair_id);
  e["annotator"] = std::string(annotator);
  e["reason"] = std::string(reason);
  append(e.dump());
  failed_[std::string(annotator)].insert(std::string(pair_id));
}

void Session::record_exchange(std::string_view pair_id, std::string_view annotator, std::string_view request,
                              std::string_view response) {
  std::lock_guard lock(*mutex_);
  json e;
  e["type"] = "llm_exchange";
  e["ts"] = now_timestamp();
  e["pair_id"] = std::string(pair_id);
  e["annotator"] = std::string(annotator);
  e["request"] = std::string(request);
  e["response"] = std::string(response);
  append(e.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::vector<Rating> Session::ratings() const {
  std::lock_guard lock(*mutex_);
  std::vector<Rating> out;
  out.reserve(ratings_.size());
  for (const auto& [key, r] : ratings_) out.push_back(r);
  return out;
}

std::optional<int> Session::rating(std::string_view pair_id, std::string_view annotator) const {
  std::lock_guard lock(*mutex_);
  auto it = ratings_.find({std::string(annotator), std::string(pair_id)});
  if (it == ratings_.end()) return std::nullopt;
  return it->second.value;
}

std::set<std::string> Session::annotators() const {
  std::lock_guard lock(*mutex_);
  std::set<std::string> out;
  for (const auto& [key, r] : ratings_) out.insert(key.first);
  return out;
}

std::set<std::string> Session::failed(std::string_view annotator) const {
  std::lock_guard lock(*mutex_);
  auto it = failed_.find(std::string(annotator));
  return it == failed_.end() ? std::set<std::string>{} : it->second;
}

std::string Session::state_digest() const {
  std::lock_guard lock(*mutex_);
  std::ostringstream os;
  os << "session\t" << schedule_.session << "\t" << schedule_.pairs.size() << "\n";
  for (const auto& [key, r] : ratings_) os << "rating\t" << key.first << "\t" << key.second << "\t" << r.value << "\n";
  for (const auto& [who, ids] : failed_)
    for (const auto& id : ids) os << "failed\t" << who << "\t" << id << "\n";
  return os.str();
}

std::vector<TargetScores> session_scores(const Schedule& schedule, const std::vector<Rating>& ratings,
                                         const std::vector<std::string>& annotators) {
  require(!annotators.empty(), "session_scores: no annotators");
  std::map<std::pair<std::string, std::string>, int> lookup;
  for (const auto& r : ratings) lookup[{r.annotator, r.pair_id}] = r.value;

  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  std::map<std::string, std::map<PairKind, std::vector<double>>> means;
  for (const auto& p : schedule.pairs) {
    double sum = 0.0;
    for (const auto& a : annotators) {
      auto it = lookup.find({a, p.pair_id});
      if (it == lookup.end()) {
        ++missing_count;
        if (missing.size() < 10) missing.push_back(p.pair_id + " (" + a + ")");
        continue;
      }
      sum += it->second;
    }
    means[p.target][p.kind].push_back(sum / static_cast<double>(annotators.size()));
  }
  if (missing_count > 0) {
    std::string msg = "session incomplete: " + std::to_string(missing_count) + " missing ratings:";
    for (const auto& m : missing) msg += " " + m;
    if (missing_count > missing.size()) msg += " ...";
    fail(ErrorKind::State, msg);
  }

  std::vector<TargetScores> out;
  for (const auto& t : schedule.targets) {
    TargetScores s;
    s.target = t;
    auto summarize = [&](PairKind k, double& score, double& se, std::size_t& n) {
      const auto& v = means[t][k];
      n = v.size();
      if (n == 0) {
        score = NAN;
        se = NAN;
        return;
      }
      score = 4.0 - stats::mean(v);
      se = n > 1 ? stats::sample_sd(v) / std::sqrt(static_cast<double>(n)) : 0.0;
    };
    summarize(PairKind::LR, s.divergence, s.divergence_se, s.n_lr);
    summarize(PairKind::LL, s.polysemy_left, s.polysemy_left_se, s.n_ll);
    summarize(PairKind::RR, s.polysemy_right, s.polysemy_right_se, s.n_rr);
    out.push_back(s);
  }
  return out;
}

std::string scores_to_json(const std::vector<TargetScores>& scores) {
  json arr = json::array();
  for (const auto& s : scores) {
    arr.push_back({{"target", s.target},
                   {"divergence", s.divergence},
                   {"divergence_se", s.divergence_se},
                   {"polysemy_left", s.polysemy_left},
                   {"polysemy_left_se", s.polysemy_left_se},
                   {"polysemy_right", s.polysemy_right},
                   {"polysemy_right_se", s.polysemy_right_se},
                   {"n_lr", s.n_lr},
                   {"n_ll", s.n_ll},
                   {"n_rr", s.n_rr}});
  }
  return arr.dump();
}

void write_scores(std::ostream& os, const std::vector<TargetScores>& scores) {
  os << "# scores are 4 - mean rating, range [0, 3]\n";
  os << "target\tdivergence\tdivergence_se\tpolysemy_left\tpolysemy_left_se\tpolysemy_right\tpolysemy_right_se"
        "\tn_lr\tn_ll\tn_rr\n";
  for (const auto& s : scores) {
    os << s.target << '\t' << format_number(s.divergence) << '\t' << format_number(s.divergence_se) << '\t'
       << format_number(s.polysemy_left) << '\t' << format_number(s.polysemy_left_se) << '\t'
       << format_number(s.polysemy_right) << '\t' << format_number(s.polysemy_right_se) << '\t' << s.n_lr << '\t'
       << s.n_ll << '\t' << s.n_rr << '\n';
  }
}

std::optional<double> agreement(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "agreement: rating vectors differ in length");
  require(a.size() >= 3, "agreement: needs at least 3 items");
  return stats::spearman(a, b);
}

std::vector<AgreementRow> session_agreement(const Session& session, const std::vector<std::string>& annotators,
                                            const std::set<std::string>& only_targets) {
  std::vector<AgreementRow> out;
  const auto& pairs = session.schedule().pairs;
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    for (std::size_t j = i + 1; j < annotators.size(); ++j) {
      AgreementRow row;
      row.annotator_a = annotators[i];
      row.annotator_b = annotators[j];
      std::vector<double> a, b;
      for (const auto& p : pairs) {
        if (!only_targets.empty() && !only_targets.count(p.target)) continue;
        const auto ra = session.rating(p.pair_id, row.annotator_a);
        const auto rb = session.rating(p.pair_id, row.annotator_b);
        if (!ra || !rb) continue;
        a.push_back(*ra);
        b.push_back(*rb);
      }
      row.n = a.size();
      if (row.n >= 3) row.rho = stats::spearman(a, b);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
  return buf;
}

}  // namespace lexdiv::annotate
