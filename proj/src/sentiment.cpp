#include "lexdiv/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/stats.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::sentiment {

namespace {

using utf8::CodePoint;

// Phrases whose valence replaces the computed one.
const std::map<std::string, double, std::less<>>& special_cases() {
  static const std::map<std::string, double, std::less<>> table = {
      {"the shit", 3.0},     {"the bomb", 3.0},      {"bad ass", 1.5},        {"badass", 1.5},
      {"bus stop", 0.0},     {"yeah right", -2.0},   {"kiss of death", -1.5}, {"to die for", 3.0},
      {"beating heart", 3.5}};
  return table;
}

bool ascii_punct(CodePoint c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

// str.isupper(): at least one cased character and no lowercase ones.
bool is_all_caps(std::string_view word) {
  bool cased = false;
  for (CodePoint c : utf8::decode(word)) {
    if (!utf8::is_letter(c)) continue;
    if (utf8::is_upper(c)) {
      cased = true;
    } else if (utf8::to_lower(c) == c) {
      return false;
    }
  }
  return cased;
}

std::string strip_punct_if_word(const std::string& token) {
  const std::u32string cps = utf8::decode(token);
  std::size_t b = 0, e = cps.size();
  while (b < e && ascii_punct(cps[b])) ++b;
  while (e > b && ascii_punct(cps[e - 1])) --e;
  if (e - b <= 2) return token;
  return utf8::encode(std::u32string_view(cps).substr(b, e - b));
}

std::string substitute_emoji(std::string_view text, const SentimentConfig& cfg) {
  if (cfg.emoji_descriptions.empty()) return std::string(text);
  std::string out;
  bool prev_space = true;
  for (CodePoint c : utf8::decode(text)) {
    std::string ch;
    utf8::append(ch, c);
    auto it = cfg.emoji_descriptions.find(ch);
    if (it != cfg.emoji_descriptions.end()) {
      if (!prev_space) out.push_back(' ');
      out += it->second;
      prev_space = false;
    } else {
      out += ch;
      prev_space = c == ' ';
    }
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::u32string cur;
  for (CodePoint c : utf8::decode(text)) {
    if (utf8::is_space(c)) {
      if (!cur.empty()) out.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(utf8::encode(cur));
  return out;
}

class Scorer {
 public:
  Scorer(const SentimentConfig& cfg, std::vector<std::string> words)
      : cfg_(cfg), words_(std::move(words)) {
    lower_.reserve(words_.size());
    std::size_t caps = 0;
    for (const auto& w : words_) {
      lower_.push_back(utf8::to_lower(w));
      if (is_all_caps(w)) ++caps;
    }
    const std::size_t diff = words_.size() - caps;
    cap_diff_ = diff > 0 && diff < words_.size();
  }

  std::vector<double> valences() {
    std::vector<double> out;
    out.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (cfg_.boosters.count(lower_[i]) ||
          (i + 1 < words_.size() && lower_[i] == "kind" && lower_[i + 1] == "of")) {
        out.push_back(0.0);
        continue;
      }
      out.push_back(valence_at(i));
    }
    but_check(out);
    return out;
  }

 private:
  bool in_lexicon(std::size_t i) const { return cfg_.lexicon.count(lower_[i]) > 0; }

  bool negated(const std::string& lw) const {
    return cfg_.negations.count(lw) > 0 || lw.find("n't") != std::string::npos;
  }

  double scalar_inc_dec(std::size_t j, double valence) const {
    double scalar = 0.0;
    auto it = cfg_.boosters.find(lower_[j]);
    if (it == cfg_.boosters.end()) return 0.0;
    scalar = it->second;
    if (valence < 0) scalar = -scalar;
    if (is_all_caps(words_[j]) && cap_diff_) scalar += valence > 0 ? cfg_.caps_boost : -cfg_.caps_boost;
    return scalar;
  }

  double valence_at(std::size_t i) const {
    auto it = cfg_.lexicon.find(lower_[i]);
    if (it == cfg_.lexicon.end()) return 0.0;
    const double base = it->second;
    double valence = base;
    const std::size_t n = words_.size();

    // "no" directly before a lexicon word negates it rather than scoring itself.
    if (lower_[i] == "no" && i + 1 < n && in_lexicon(i + 1)) valence = 0.0;
    if ((i > 0 && lower_[i - 1] == "no") || (i > 1 && lower_[i - 2] == "no") ||
        (i > 2 && lower_[i - 3] == "no" && (lower_[i - 1] == "or" || lower_[i - 1] == "nor")))
      valence = base * cfg_.negation_scalar;

    if (is_all_caps(words_[i]) && cap_diff_) valence += valence > 0 ? cfg_.caps_boost : -cfg_.caps_boost;

    for (std::size_t back = 0; back < 3; ++back) {
      if (i <= back) continue;
      const std::size_t j = i - (back + 1);
      if (in_lexicon(j)) continue;
      double s = scalar_inc_dec(j, valence);
      if (back == 1 && s != 0) s *= 0.95;
      if (back == 2 && s != 0) s *= 0.9;
      valence += s;
      valence = negation_check(valence, back, i);
      if (back == 2) valence = special_idioms_check(valence, i);
    }
    return least_check(valence, i);
  }

  double negation_check(double valence, std::size_t back, std::size_t i) const {
    const double n = cfg_.negation_scalar;
    if (back == 0) {
      if (negated(lower_[i - 1])) valence *= n;
    } else if (back == 1) {
      if (lower_[i - 2] == "never" && (lower_[i - 1] == "so" || lower_[i - 1] == "this")) {
        valence *= 1.25;
      } else if (lower_[i - 2] == "without" && lower_[i - 1] == "doubt") {
      } else if (negated(lower_[i - 2])) {
        valence *= n;
      }
    } else {
      // Operator grouping mirrors the reference implementation.
      if ((lower_[i - 3] == "never" && (lower_[i - 2] == "so" || lower_[i - 2] == "this")) ||
          (lower_[i - 1] == "so" || lower_[i - 1] == "this")) {
        valence *= 1.25;
      } else if (lower_[i - 3] == "without" && (lower_[i - 2] == "doubt" || lower_[i - 1] == "doubt")) {
      } else if (negated(lower_[i - 3])) {
        valence *= n;
      }
    }
    return valence;
  }

  double special_idioms_check(double valence, std::size_t i) const {
    const auto& cases = special_cases();
    const std::string onezero = lower_[i - 1] + " " + lower_[i];
    const std::string twoonezero = lower_[i - 2] + " " + lower_[i - 1] + " " + lower_[i];
    const std::string twoone = lower_[i - 2] + " " + lower_[i - 1];
    const std::string threetwoone = lower_[i - 3] + " " + lower_[i - 2] + " " + lower_[i - 1];
    const std::string threetwo = lower_[i - 3] + " " + lower_[i - 2];
    for (const std::string* seq : {&onezero, &twoonezero, &twoone, &threetwoone, &threetwo}) {
      if (auto it = cases.find(*seq); it != cases.end()) {
        valence = it->second;
        break;
      }
    }
    const std::size_t n = words_.size();
    if (n - 1 > i) {
      if (auto it = cases.find(lower_[i] + " " + lower_[i + 1]); it != cases.end()) valence = it->second;
    }
    if (n - 1 > i + 1) {
      if (auto it = cases.find(lower_[i] + " " + lower_[i + 1] + " " + lower_[i + 2]); it != cases.end())
        valence = it->second;
    }
    for (const std::string* gram : {&threetwoone, &threetwo, &twoone}) {
      if (auto it = cfg_.boosters.find(*gram); it != cfg_.boosters.end()) valence += it->second;
    }
    return valence;
  }

  double least_check(double valence, std::size_t i) const {
    if (i > 1 && !in_lexicon(i - 1) && lower_[i - 1] == "least") {
      if (lower_[i - 2] != "at" && lower_[i - 2] != "very") valence *= cfg_.negation_scalar;
    } else if (i > 0 && !in_lexicon(i - 1) && lower_[i - 1] == "least") {
      valence *= cfg_.negation_scalar;
    }
    return valence;
  }

  // Valences before the first "but" are halved, those after it raised by half.
  void but_check(std::vector<double>& v) const {
    auto it = std::find(lower_.begin(), lower_.end(), "but");
    if (it == lower_.end()) return;
    const auto bi = static_cast<std::size_t>(it - lower_.begin());
    for (std::size_t si = 0; si < v.size(); ++si) {
      if (si < bi) v[si] *= 0.5;
      else if (si > bi) v[si] *= 1.5;
    }
  }

  const SentimentConfig& cfg_;
  std::vector<std::string> words_;
  std::vector<std::string> lower_;
  bool cap_diff_ = false;
};

double punctuation_emphasis(std::string_view text, const SentimentConfig& cfg) {
  const auto ep = std::min<std::ptrdiff_t>(std::count(text.begin(), text.end(), '!'), cfg.max_exclamations);
  const auto qm = std::count(text.begin(), text.end(), '?');
  double q = 0.0;
  if (qm > 1) q = qm <= 3 ? static_cast<double>(qm) * cfg.question_boost : cfg.question_boost_many;
  return static_cast<double>(ep) * cfg.exclamation_boost + q;
}

std::string trim(std::string_view s) {
  const std::u32string cps = utf8::decode(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && utf8::is_space(cps[b])) ++b;
  while (e > b && utf8::is_space(cps[e - 1])) --e;
  return utf8::encode(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace

void SentimentConfig::validate() const {
  require(alpha > 0.0, "sentiment alpha must be positive");
  require(!lexicon.empty(), "sentiment lexicon is empty");
  require(max_exclamations >= 0, "max_exclamations must be non-negative");
}

std::unordered_map<std::string, double> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "sentiment lexicon not found: " + path);
  std::unordered_map<std::string, double> lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() < 2) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected token<TAB>valence");
    auto v = parse_number(f[1]);
    if (!v) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad valence");
    lex[std::string(f[0])] = *v;
  }
  return lex;
}

std::unordered_map<std::string, std::string> load_emoji_descriptions(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "emoji lexicon not found: " + path);
  std::unordered_map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = split_fields(line);
    if (f.size() < 2 || f[0].empty()) continue;
    out[std::string(f[0])] = std::string(f[1]);
  }
  return out;
}

std::unordered_map<std::string, double> default_boosters(double inc) {
  std::unordered_map<std::string, double> b;
  for (const char* w :
       {"absolutely", "amazingly", "awfully", "completely", "considerable", "considerably", "decidedly",
        "deeply", "effing", "enormous", "enormously", "entirely", "especially", "exceptional",
        "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin", "frackin", "fracking",
        "fricking", "frickin", "frigging", "friggin", "fully", "fuckin", "fucking", "fuggin", "fugging",
        "greatly", "hella", "highly", "hugely", "incredible", "incredibly", "intensely", "major", "majorly",
        "more", "most", "particularly", "purely", "quite", "really", "remarkably", "so", "substantially",
        "thoroughly", "total", "totally", "tremendous", "tremendously", "uber", "unbelievably", "unusually",
        "utter", "utterly", "very"})
    b[w] = inc;
  for (const char* w :
       {"almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
        "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely",
        "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of"})
    b[w] = -inc;
  return b;
}

std::unordered_set<std::string> default_negations() {
  return {"aint",     "arent",    "cannot",   "cant",     "couldnt",  "darent",   "didnt",    "doesnt",
          "ain't",    "aren't",   "can't",    "couldn't", "daren't",  "didn't",   "doesn't",  "dont",
          "hadnt",    "hasnt",    "havent",   "isnt",     "mightnt",  "mustnt",   "neither",  "don't",
          "hadn't",   "hasn't",   "haven't",  "isn't",    "mightn't", "mustn't",  "neednt",   "needn't",
          "never",    "none",     "nope",     "nor",      "not",      "nothing",  "nowhere",  "oughtnt",
          "shant",    "shouldnt", "uhuh",     "wasnt",    "werent",   "oughtn't", "shan't",   "shouldn't",
          "uh-uh",    "wasn't",   "weren't",  "without",  "wont",     "wouldnt",  "won't",    "wouldn't",
          "rarely",   "seldom",   "despite"};
}

SentimentConfig SentimentConfig::from_files(const std::string& lexicon_path, const std::string& emoji_path) {
  SentimentConfig cfg;
  cfg.lexicon = load_lexicon(lexicon_path);
  cfg.boosters = default_boosters(cfg.booster_increment);
  cfg.negations = default_negations();
  if (!emoji_path.empty()) cfg.emoji_descriptions = load_emoji_descriptions(emoji_path);
  cfg.validate();
  return cfg;
}

Score score_text(std::string_view raw, const SentimentConfig& cfg) {
  const std::string text = trim(substitute_emoji(raw, cfg));
  std::vector<std::string> words = split_whitespace(text);
  for (auto& w : words) w = strip_punct_if_word(w);

  Score out;
  if (words.empty()) return out;
  Scorer scorer(cfg, std::move(words));
  const std::vector<double> v = scorer.valences();
  out.all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });

  double sum = 0.0;
  for (double x : v) sum += x;
  const double amp = punctuation_emphasis(text, cfg);
  if (sum > 0) sum += amp;
  else if (sum < 0) sum -= amp;
  out.compound = std::clamp(sum / std::sqrt(sum * sum + cfg.alpha), -1.0, 1.0);

  double pos = 0.0, neg = 0.0, neu = 0.0;
  for (double x : v) {
    if (x > 0) pos += x + 1;
    if (x < 0) neg += x - 1;
    if (x == 0) neu += 1;
  }
  if (pos > std::fabs(neg)) pos += amp;
  else if (pos < std::fabs(neg)) neg -= amp;
  const double total = pos + std::fabs(neg) + neu;
  out.positive = std::fabs(pos / total);
  out.negative = std::fabs(neg / total);
  out.neutral = std::fabs(neu / total);
  return out;
}

UserProfile user_sentiment_profile(const std::vector<Score>& tweets) {
  require(!tweets.empty(), "user sentiment profile needs at least one tweet");
  UserProfile p;
  p.total = tweets.size();
  double sum = 0.0;
  for (const auto& s : tweets) {
    if (s.all_zero) continue;
    sum += s.compound;
    ++p.scored;
  }
  if (p.scored > 0) p.mean = sum / static_cast<double>(p.scored);
  return p;
}

std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "daily" || s == "day") return Granularity::Daily;
  if (s == "weekly" || s == "week") return Granularity::Weekly;
  return std::nullopt;
}

std::vector<SeriesPoint> side_series(const std::vector<DatedScore>& scores, Granularity granularity) {
  auto bucket = [&](const Date& d) {
    return days_from_civil(granularity == Granularity::Weekly ? week_start(d) : d);
  };
  std::map<std::pair<std::int64_t, int>, std::pair<double, std::size_t>> acc;
  std::optional<std::int64_t> first, last;
  for (const auto& s : scores) {
    if (s.side != Side::Left && s.side != Side::Right) continue;
    const std::int64_t b = bucket(s.date);
    first = first ? std::min(*first, b) : b;
    last = last ? std::max(*last, b) : b;
    if (s.score.all_zero) continue;
    auto& slot = acc[{b, s.side == Side::Left ? 0 : 1}];
    slot.first += s.score.compound;
    slot.second += 1;
  }
  std::vector<SeriesPoint> out;
  if (!first) return out;
  const std::int64_t step = granularity == Granularity::Weekly ? 7 : 1;
  for (std::int64_t b = *first; b <= *last; b += step) {
    for (int k = 0; k < 2; ++k) {
      SeriesPoint p;
      p.bucket_start = civil_from_days(b);
      p.side = k == 0 ? Side::Left : Side::Right;
      if (auto it = acc.find({b, k}); it != acc.end()) {
        p.n = it->second.second;
        p.mean = it->second.first / static_cast<double>(p.n);
      }
      out.push_back(p);
    }
  }
  return out;
}

void write_series(std::ostream& os, const std::vector<SeriesPoint>& series) {
  os << "bucket_start\tside\tmean\tn\n";
  for (const auto& p : series)
    os << format_date(p.bucket_start) << '\t' << to_string(p.side) << '\t'
       << (p.missing() ? std::string("NA") : format_number(p.mean)) << '\t' << p.n << '\n';
}

namespace {

// Weighted difference of means, right minus left.
double weighted_difference(const std::vector<double>& y, const std::vector<double>& w,
                           const std::vector<char>& right) {
  double sl = 0, wl = 0, sr = 0, wr = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (right[i]) {
      sr += w[i] * y[i];
      wr += w[i];
    } else {
      sl += w[i] * y[i];
      wl += w[i];
    }
  }
  return sr / wr - sl / wl;
}

}  // namespace

RegressionResult side_effect(const std::vector<UserMean>& users, const PermutationOptions& options) {
  std::vector<double> y, w;
  std::vector<char> right;
  std::size_t n_left = 0, n_right = 0;
  for (const auto& u : users) {
    if (u.side != Side::Left && u.side != Side::Right) continue;
    require(u.weight > 0 && std::isfinite(u.mean), "user weights must be positive and means finite");
    y.push_back(u.mean);
    w.push_back(u.weight);
    right.push_back(u.side == Side::Right);
    (u.side == Side::Right ? n_right : n_left) += 1;
  }
  if (n_left < 2 || n_right < 2) fail(ErrorKind::InvalidArgument, "side effect needs at least two users per side");

  RegressionResult r;
  r.n = y.size();
  std::vector<double> indicator(right.begin(), right.end());
  const auto fit = stats::least_squares({indicator}, y, w);
  r.slope = weighted_difference(y, w, right);
  r.intercept = fit.coefficients[0];
  r.r_squared = fit.r_squared;

  // Labels are permuted over (mean, weight) pairs, keeping group sizes.
  Rng rng(mix_seed(options.seed, fnv1a64("side_effect")));
  std::vector<char> perm = right;
  std::size_t extreme = 0;
  const double observed = std::fabs(r.slope);
  for (std::size_t k = 0; k < options.permutations; ++k) {
    rng.shuffle(perm);
    if (std::fabs(weighted_difference(y, w, perm)) >= observed - 1e-12) ++extreme;
  }
  r.permutations = options.permutations;
  r.p_value = static_cast<double>(extreme + 1) / static_cast<double>(options.permutations + 1);
  return r;
}

RegressionResult popularity_regression(const std::vector<PopularityPoint>& points, bool with_side,
                                       const PermutationOptions& options) {
  std::vector<double> logf, y, side, inter;
  RegressionResult r;
  for (const auto& p : points) {
    if (p.followers <= 0) {
      ++r.excluded;
      continue;
    }
    if (!std::isfinite(p.mean)) {
      ++r.excluded;
      continue;
    }
    const double lf = std::log10(static_cast<double>(p.followers));
    logf.push_back(lf);
    y.push_back(p.mean);
    const double s = p.side == Side::Right ? 1.0 : 0.0;
    side.push_back(s);
    inter.push_back(s * lf);
  }
  if (y.size() < 3) fail(ErrorKind::InvalidArgument, "popularity regression needs at least three users");
  r.n = y.size();

  auto predictors = [&](const std::vector<double>& lf_col) {
    std::vector<std::vector<double>> cols{lf_col};
    if (with_side) {
      cols.push_back(side);
      cols.push_back(inter);
    }
    return cols;
  };
  const auto fit = stats::least_squares(predictors(logf), y);
  r.intercept = fit.coefficients[0];
  r.slope = fit.coefficients[1];
  r.r_squared = fit.r_squared;
  if (with_side) {
    r.side_coefficient = fit.coefficients[2];
    r.interaction = fit.coefficients[3];
  }

  // Permuting the response breaks every association at once; each
  // coefficient gets its own tail count.
  Rng rng(mix_seed(options.seed, fnv1a64("popularity")));
  std::vector<double> shuffled = y;
  std::size_t extreme_slope = 0, extreme_inter = 0;
  for (std::size_t k = 0; k < options.permutations; ++k) {
    rng.shuffle(shuffled);
    const auto pf = stats::least_squares(predictors(logf), shuffled);
    if (std::fabs(pf.coefficients[1]) >= std::fabs(r.slope) - 1e-12) ++extreme_slope;
    if (with_side && std::fabs(pf.coefficients[3]) >= std::fabs(*r.interaction) - 1e-12) ++extreme_inter;
  }
  r.permutations = options.permutations;
  const double denom = static_cast<double>(options.permutations + 1);
  r.p_value = static_cast<double>(extreme_slope + 1) / denom;
  if (with_side) r.interaction_p_value = static_cast<double>(extreme_inter + 1) / denom;
  return r;
}

void write_regression(std::ostream& os, const std::string& model, const RegressionResult& r, bool header) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  if (header)
    os << "model\tslope\tintercept\tside\tinteraction\tp_value\tinteraction_p\tr_squared\tn\texcluded\tpermutations\n";
  os << model << '\t' << format_number(r.slope) << '\t' << format_number(r.intercept) << '\t'
     << opt(r.side_coefficient) << '\t' << opt(r.interaction) << '\t' << format_number(r.p_value) << '\t'
     << opt(r.interaction_p_value) << '\t' << format_number(r.r_squared) << '\t' << r.n << '\t' << r.excluded
     << '\t' << r.permutations << '\n';
}

}  // namespace lexdiv::sentiment
