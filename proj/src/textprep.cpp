#include "lexdiv/textprep.hpp"

#include <algorithm>
#include <fstream>

#include "lexdiv/error.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::textprep {

using utf8::CodePoint;

std::vector<std::string> default_emoticons() {
  return {":)", ":(", ":-)", ";)", ":D", ":/", "<3", ":-(", ";-)", ":P", ":-D", ":'("};
}

std::vector<std::string> default_bot_keywords() { return {"threadreaderapp", "remindmeofthis"}; }

std::vector<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open list: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

void CleanRuleSet::validate() const {
  if (drop_bot_keywords && bot_keywords.empty())
    fail(ErrorKind::InvalidArgument, "bot keyword list is empty while drop_bot_keywords is set");
  for (const auto& e : emoticons)
    if (e.empty()) fail(ErrorKind::InvalidArgument, "empty emoticon entry");
}

namespace {

bool ascii_word_char(CodePoint c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool alnum(CodePoint c) { return utf8::is_letter(c) || utf8::is_ascii_digit(c); }

CodePoint ascii_lower(CodePoint c) { return (c >= 'A' && c <= 'Z') ? c + 32 : c; }

bool starts_with_ci(const std::u32string& s, std::size_t i, std::string_view prefix) {
  if (i + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k)
    if (ascii_lower(s[i + k]) != static_cast<CodePoint>(prefix[k])) return false;
  return true;
}

std::u32string remove_urls(const std::u32string& s) {
  static constexpr std::string_view kPrefixes[] = {"https://", "http://", "www.", "pic.twitter.com/", "t.co/"};
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool at_boundary = i == 0 || !alnum(s[i - 1]);
    bool hit = false;
    for (auto p : kPrefixes) {
      // A scheme is a URL even when glued to preceding text.
      const bool scheme = p.back() == '/' && p[p.size() - 2] == '/';
      if ((at_boundary || scheme) && starts_with_ci(s, i, p)) {
        hit = true;
        break;
      }
    }
    if (hit) {
      while (i < s.size() && !utf8::is_space(s[i])) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::u32string remove_mentions(const std::u32string& s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if ((s[i] == '@' || s[i] == 0xFF20) && (i == 0 || !ascii_word_char(s[i - 1])) &&
        i + 1 < s.size() && ascii_word_char(s[i + 1])) {
      ++i;
      while (i < s.size() && ascii_word_char(s[i])) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

// Matches \d{1,2}(:\d{2})?\s?[ap]m with word boundaries; returns match length.
std::size_t match_time(const std::u32string& s, std::size_t i) {
  if (i > 0 && alnum(s[i - 1])) return 0;
  std::size_t j = i;
  std::size_t digits = 0;
  while (j < s.size() && utf8::is_ascii_digit(s[j]) && digits < 3) { ++j; ++digits; }
  if (digits == 0 || digits > 2) return 0;
  if (j + 2 < s.size() && s[j] == ':' && utf8::is_ascii_digit(s[j + 1]) && utf8::is_ascii_digit(s[j + 2]))
    j += 3;
  if (j < s.size() && s[j] == ' ') ++j;
  if (j + 1 >= s.size()) return 0;
  const CodePoint a = ascii_lower(s[j]);
  if ((a != 'a' && a != 'p') || ascii_lower(s[j + 1]) != 'm') return 0;
  j += 2;
  if (j < s.size() && alnum(s[j])) return 0;
  return j - i;
}

// "at 3 pm" reads as one time expression; the preposition goes with it.
void drop_time_preposition(std::u32string& out) {
  std::size_t end = out.size();
  while (end > 0 && out[end - 1] == ' ') --end;
  if (end == out.size() || end < 2) return;
  if (ascii_lower(out[end - 2]) != 'a' || ascii_lower(out[end - 1]) != 't') return;
  if (end > 2 && alnum(out[end - 3])) return;
  out.resize(end - 2);
}

std::u32string remove_times(const std::u32string& s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (utf8::is_ascii_digit(s[i])) {
      if (std::size_t len = match_time(s, i)) {
        drop_time_preposition(out);
        i += len;
        out.push_back(' ');
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

struct EmoticonTable {
  std::vector<std::u32string> entries;  // lowercased, longest first

  explicit EmoticonTable(const std::vector<std::string>& list) {
    for (const auto& e : list) {
      std::u32string cps = utf8::decode(e);
      for (auto& c : cps) c = ascii_lower(c);
      entries.push_back(std::move(cps));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }

  std::size_t match(const std::u32string& s, std::size_t i) const {
    for (const auto& e : entries) {
      if (i + e.size() > s.size()) continue;
      bool eq = true;
      for (std::size_t k = 0; k < e.size() && eq; ++k) eq = ascii_lower(s[i + k]) == e[k];
      if (!eq) continue;
      if (alnum(e.front()) && i > 0 && alnum(s[i - 1])) continue;
      if (alnum(e.back()) && i + e.size() < s.size() && alnum(s[i + e.size()])) continue;
      return e.size();
    }
    return 0;
  }

  bool contains(std::string_view token) const {
    std::u32string cps = utf8::decode(token);
    for (auto& c : cps) c = ascii_lower(c);
    return std::find(entries.begin(), entries.end(), cps) != entries.end();
  }
};

bool emoji_related(CodePoint c) {
  return utf8::is_emoji(c) || utf8::is_regional_indicator(c) || utf8::is_emoji_modifier(c) ||
         utf8::is_emoji_decoration(c);
}

// Consumes one emoji sequence starting at i (base emoji with any modifiers,
// decorations and ZWJ-joined components) and returns its reduced form.
std::u32string reduce_emoji_sequence(const std::u32string& s, std::size_t& i) {
  std::vector<CodePoint> components;
  std::u32string flag;
  if (utf8::is_regional_indicator(s[i])) {
    flag.push_back(s[i++]);
    if (i < s.size() && utf8::is_regional_indicator(s[i])) flag.push_back(s[i++]);
    while (i < s.size() && (utf8::is_emoji_decoration(s[i]) && s[i] != utf8::kZeroWidthJoiner)) ++i;
    return flag;
  }
  bool expect_component = true;
  while (i < s.size()) {
    const CodePoint c = s[i];
    if (expect_component && utf8::is_emoji(c)) {
      components.push_back(c);
      expect_component = false;
      ++i;
    } else if (utf8::is_emoji_modifier(c) || (utf8::is_emoji_decoration(c) && c != utf8::kZeroWidthJoiner)) {
      ++i;
    } else if (c == utf8::kZeroWidthJoiner) {
      ++i;
      expect_component = true;
    } else {
      break;
    }
  }
  if (components.empty()) return {};
  for (CodePoint c : components)
    if (!utf8::is_gender_sign(c)) return std::u32string(1, c);
  return std::u32string(1, components.front());
}

std::u32string clean_once(const std::u32string& input, const CleanRuleSet& rules, const EmoticonTable& emoticons) {
  std::u32string s = input;
  if (rules.remove_urls) s = remove_urls(s);
  if (rules.remove_mentions) s = remove_mentions(s);
  if (rules.remove_times) s = remove_times(s);

  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const CodePoint c = s[i];
    if (utf8::is_space(c)) {
      out.push_back(' ');
      ++i;
      continue;
    }
    if (rules.strip_punct_keep_emoticons) {
      if (std::size_t len = emoticons.match(s, i)) {
        out.push_back(' ');
        for (std::size_t k = 0; k < len; ++k) out.push_back(rules.lowercase ? ascii_lower(s[i + k]) : s[i + k]);
        out.push_back(' ');
        i += len;
        continue;
      }
    }
    if (emoji_related(c)) {
      if (rules.strip_emoji_modifiers) {
        const std::size_t before = i;
        out += reduce_emoji_sequence(s, i);
        if (i == before) ++i;
      } else {
        out.push_back(c);
        ++i;
      }
      continue;
    }
    if (c == '#' && rules.strip_hashmarks) {
      out.push_back(' ');
      ++i;
      continue;
    }
    if (alnum(c)) {
      out.push_back(rules.lowercase ? utf8::to_lower(c) : c);
    } else if (rules.strip_punct_keep_emoticons) {
      if (!utf8::is_apostrophe(c)) out.push_back(' ');
    } else {
      out.push_back(c);
    }
    ++i;
  }

  if (rules.normalize_reduplication) {
    std::u32string normalized;
    normalized.reserve(out.size());
    std::size_t k = 0;
    while (k < out.size()) {
      if (!utf8::is_letter(out[k])) {
        normalized.push_back(out[k++]);
        continue;
      }
      std::size_t end = k;
      while (end < out.size() && utf8::is_letter(out[end])) ++end;
      normalized += normalize_reduplication(std::u32string_view(out).substr(k, end - k));
      k = end;
    }
    out.swap(normalized);
  }

  if (rules.collapse_whitespace) {
    std::u32string collapsed;
    collapsed.reserve(out.size());
    for (CodePoint c : out) {
      if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
      collapsed.push_back(c);
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    out.swap(collapsed);
  }
  return out;
}

}  // namespace

CleanRuleSet sentiment_channel_rules() {
  CleanRuleSet r;
  r.strip_punct_keep_emoticons = false;
  r.lowercase = false;
  r.normalize_reduplication = false;
  return r;
}

std::u32string normalize_reduplication(std::u32string_view word) {
  std::u32string cur(word);
  for (int round = 0; round < 16; ++round) {
    std::u32string next;
    next.reserve(cur.size());
    // Single characters: runs of 3+ shrink to 2.
    std::size_t i = 0;
    while (i < cur.size()) {
      std::size_t j = i;
      while (j < cur.size() && cur[j] == cur[i]) ++j;
      const std::size_t run = j - i;
      next.append(std::min<std::size_t>(run, 2), cur[i]);
      i = j;
    }
    // Units of 2 and 3 characters repeated 3+ times shrink to 2 repetitions.
    for (std::size_t unit = 2; unit <= 3; ++unit) {
      std::u32string reduced;
      reduced.reserve(next.size());
      std::size_t p = 0;
      while (p < next.size()) {
        if (p + unit <= next.size()) {
          std::size_t reps = 1;
          while (p + (reps + 1) * unit <= next.size() &&
                 std::equal(next.begin() + p, next.begin() + p + unit, next.begin() + p + reps * unit))
            ++reps;
          if (reps >= 3) {
            reduced.append(next, p, 2 * unit);
            p += reps * unit;
            continue;
          }
        }
        reduced.push_back(next[p++]);
      }
      next.swap(reduced);
    }
    if (next == cur) break;
    cur.swap(next);
  }
  return cur;
}

std::string clean_text(std::string_view raw, const CleanRuleSet& rules) {
  const EmoticonTable emoticons(rules.emoticons);
  std::u32string cur = utf8::decode(raw);
  for (int pass = 0; pass < 8; ++pass) {
    std::u32string next = clean_once(cur, rules, emoticons);
    if (next == cur) break;
    cur.swap(next);
  }
  return utf8::encode(cur);
}

bool is_excluded_tweet(const TweetRecord& tweet, const CleanRuleSet& rules) {
  if (tweet.lang != "en") return true;
  if (!rules.drop_bot_keywords) return false;
  const std::string lower = utf8::to_lower(tweet.text);
  for (const auto& kw : rules.bot_keywords)
    if (!kw.empty() && lower.find(utf8::to_lower(kw)) != std::string::npos) return true;
  return false;
}

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Emoji: return "emoji";
    case TokenKind::Emoticon: return "emoticon";
    case TokenKind::HashtagWord: return "hashtag_word";
    case TokenKind::Number: return "number";
    case TokenKind::Other: return "other";
  }
  return "other";
}

std::vector<Token> tokenize(std::string_view cleaned, const std::vector<std::string>& emoticon_list) {
  const EmoticonTable emoticons(emoticon_list);
  std::vector<Token> tokens;
  const std::u32string s = utf8::decode(cleaned);

  auto flush_text = [&](const std::u32string& run) {
    if (run.empty()) return;
    Token t;
    t.surface = utf8::encode(run);
    bool has_letter = false, all_digits = true;
    for (CodePoint c : run) {
      has_letter |= utf8::is_letter(c);
      all_digits &= utf8::is_ascii_digit(c);
    }
    t.kind = all_digits ? TokenKind::Number : has_letter ? TokenKind::Word : TokenKind::Other;
    t.lemma = t.surface;
    tokens.push_back(std::move(t));
  };

  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && utf8::is_space(s[i])) ++i;
    std::size_t end = i;
    while (end < s.size() && !utf8::is_space(s[end])) ++end;
    if (end == i) break;
    const std::u32string chunk = s.substr(i, end - i);
    const std::string chunk_utf8 = utf8::encode(chunk);
    if (emoticons.contains(chunk_utf8)) {
      tokens.push_back({chunk_utf8, chunk_utf8, TokenKind::Emoticon});
    } else {
      std::u32string run;
      std::size_t k = 0;
      while (k < chunk.size()) {
        const CodePoint c = chunk[k];
        if (utf8::is_emoji(c) || utf8::is_regional_indicator(c)) {
          flush_text(run);
          run.clear();
          std::u32string e(1, c);
          ++k;
          if (utf8::is_regional_indicator(c) && k < chunk.size() && utf8::is_regional_indicator(chunk[k]))
            e.push_back(chunk[k++]);
          while (k < chunk.size() && (utf8::is_emoji_modifier(chunk[k]) || utf8::is_emoji_decoration(chunk[k])))
            e.push_back(chunk[k++]);
          const std::string surface = utf8::encode(e);
          tokens.push_back({surface, surface, TokenKind::Emoji});
        } else {
          run.push_back(c);
          ++k;
        }
      }
      flush_text(run);
    }
    i = end;
  }
  return tokens;
}

Token lemmatize(Token token, const Lemmatizer& lemmatizer) {
  if (token.kind == TokenKind::Word || token.kind == TokenKind::HashtagWord) {
    token.lemma = lemmatizer.lemma(token.surface);
    if (token.lemma.empty()) token.lemma = token.surface;
  } else {
    token.lemma = token.surface;
  }
  return token;
}

void CorpusStatsAccumulator::add(std::string_view user, const std::vector<std::string>& tokens) {
  ++tweets_;
  tokens_ += tokens.size();
  for (const auto& t : tokens)
    if (types_.find(t) == types_.end()) types_.emplace(t);
  if (!user.empty() && users_.find(user) == users_.end()) users_.emplace(user);
}

CorpusStats CorpusStatsAccumulator::result() const {
  CorpusStats s;
  s.token_count = tokens_;
  s.type_count = types_.size();
  s.tweet_count = tweets_;
  s.user_count = users_.size();
  s.empty = tokens_ == 0;
  s.ttr = s.empty ? 0.0 : static_cast<double>(s.type_count) / static_cast<double>(s.token_count);
  return s;
}

CorpusStats corpus_stats(const std::vector<std::vector<std::string>>& corpus) {
  CorpusStatsAccumulator acc;
  for (const auto& tweet : corpus) acc.add({}, tweet);
  return acc.result();
}

std::vector<std::string> lexemes(std::string_view raw, const CleanRuleSet& rules, const Lemmatizer& lemmatizer) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(clean_text(raw, rules), rules.emoticons))
    out.push_back(lemmatize(std::move(tok), lemmatizer).lemma);
  return out;
}

}  // namespace lexdiv::textprep
