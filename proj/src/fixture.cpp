#include "lexdiv/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lexdiv/artifacts.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/textprep.hpp"

namespace lexdiv::fixture {

namespace {

const std::vector<std::string> kPositive = {"good", "great", "love", "happy", "nice", "awesome", "glad", "win"};
const std::vector<std::string> kNegative = {"bad", "terrible", "hate", "sad", "awful", "angry", "ugly", "fail"};
const std::vector<std::string> kEmoji = {"\xF0\x9F\x98\x82", "\xF0\x9F\x94\xA5", "\xE2\x9C\xA8", "\xF0\x9F\x99\x8F"};

// Zipf-like sampler over a list: weight of rank r is 1 / (r + 1)^0.7.
class ZipfList {
 public:
  ZipfList() = default;
  explicit ZipfList(std::vector<std::string> words) : words_(std::move(words)) {
    double total = 0.0;
    for (std::size_t r = 0; r < words_.size(); ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), 0.7);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }
  const std::string& draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return words_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), words_.size() - 1)];
  }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<double> cdf_;
};

// Pronounceable, vowel-final pseudo words that the lemmatizer leaves alone
// and that carry no sentiment valence.
std::vector<std::string> pseudo_words(std::size_t n, Rng& rng, std::set<std::string>& taken) {
  static const std::string consonants = "bdfgklmnprtvz";
  static const std::string vowels = "aiou";
  static const std::string finals = "aio";
  textprep::RuleLemmatizer lemmatizer;
  std::vector<std::string> out;
  std::size_t guard = 0;
  while (out.size() < n) {
    if (++guard > n * 1000) fail(ErrorKind::Runtime, "fixture: cannot generate enough distinct words");
    const std::size_t syllables = 2 + rng.below(2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w.push_back(consonants[rng.below(consonants.size())]);
      w.push_back(s + 1 == syllables ? finals[rng.below(finals.size())] : vowels[rng.below(vowels.size())]);
    }
    if (taken.count(w) || lemmatizer.lemma(w) != w) continue;
    taken.insert(w);
    out.push_back(w);
  }
  return out;
}

std::string handle(Rng& rng) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  std::string h = "@";
  for (int i = 0; i < 7; ++i) h.push_back(letters[rng.below(letters.size())]);
  return h;
}

std::string url(Rng& rng) {
  static const std::string chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string u = "https://t.co/";
  for (int i = 0; i < 10; ++i) u.push_back(chars[rng.below(chars.size())]);
  return u;
}

}  // namespace

void FixtureSpec::validate() const {
  require(users_per_side >= 1, "fixture: users_per_side must be >= 1");
  require(tweets_per_side >= users_per_side * 10, "fixture: need at least 10 tweets per user");
  require(topics >= 2, "fixture: need at least 2 topics");
  require(topic_words >= 5 && general_words >= 5, "fixture: word lists too small");
  require(min_words >= 3 && min_words <= max_words, "fixture: bad tweet length range");
  require(sentiment_shift >= -1.0 && sentiment_shift <= 1.0, "fixture: sentiment_shift must be in [-1, 1]");
  require(topic_skew >= 0.0 && topic_skew < 1.0, "fixture: topic_skew must be in [0, 1)");
  require(control_rate > 0.0 && control_rate <= 1.0, "fixture: control_rate must be in (0, 1]");
  require(window.start <= window.end, "fixture: window start after end");
  std::set<std::string> names;
  auto check_word = [&](const std::string& w, const char* what) {
    require(!w.empty(), std::string("fixture: empty ") + what + " word");
    require(names.insert(w).second, "fixture: '" + w + "' planted twice");
    for (char c : w)
      require(c >= 'a' && c <= 'z', "fixture: planted words must be lowercase ASCII letters: '" + w + "'");
  };
  for (const auto& h : homonyms) {
    check_word(h.word, "homonym");
    require(h.left_topic < topics && h.right_topic < topics, "fixture: homonym topic out of range");
    require(h.left_topic != h.right_topic, "fixture: homonym '" + h.word + "' uses one topic on both sides");
    require(h.rate > 0.0 && h.rate <= 1.0, "fixture: homonym rate must be in (0, 1]");
  }
  for (const auto& c : controls) check_word(c, "control");
  for (const auto& s : frequency_skews) {
    check_word(s.word, "skew");
    require(s.factor > 0.0, "fixture: skew factor for '" + s.word + "' must be positive");
    require(s.base_rate > 0.0 && s.base_rate * std::max(1.0, s.factor) <= 1.0,
            "fixture: skew rates for '" + s.word + "' must stay in (0, 1]");
  }
}

FixtureSpec FixtureSpec::standard(std::uint64_t seed) {
  FixtureSpec s;
  s.seed = seed;
  s.homonyms.push_back({"kumo", 0, 5, 0.3});
  const char* controls[] = {"balu", "dira", "foga", "gimo", "kadu", "lino", "mafi", "nupo", "pari", "rolu",
                            "sibo", "tano", "vuka", "zeli", "bofa", "dunu", "fari", "gola", "kiti", "lupa"};
  for (const char* c : controls) s.controls.emplace_back(c);
  return s;
}

Fixture generate(const FixtureSpec& spec) {
  spec.validate();
  Fixture f;
  Rng rng(mix_seed(spec.seed, fnv1a64("fixture")));

  std::set<std::string> taken;
  for (const auto& h : spec.homonyms) taken.insert(h.word);
  for (const auto& c : spec.controls) taken.insert(c);
  for (const auto& s : spec.frequency_skews) taken.insert(s.word);
  for (const auto& w : kPositive) taken.insert(w);
  for (const auto& w : kNegative) taken.insert(w);
  const ZipfList general(pseudo_words(spec.general_words, rng, taken));
  std::vector<ZipfList> topic_lists;
  for (std::size_t t = 0; t < spec.topics; ++t) topic_lists.emplace_back(pseudo_words(spec.topic_words, rng, taken));

  // Outlets: poles plus the middle categories used by excluded users.
  using delineate::Category;
  const std::vector<std::pair<std::string, Category>> outlets = {
      {"1001", Category::Left},      {"1002", Category::Left},      {"1003", Category::Left},
      {"1004", Category::LeanLeft},  {"1005", Category::LeanLeft},  {"1006", Category::Center},
      {"1007", Category::Center},    {"1008", Category::LeanRight}, {"1009", Category::LeanRight},
      {"1010", Category::Right},     {"1011", Category::Right},     {"1012", Category::Right}};
  for (const auto& [id, cat] : outlets)
    f.outlets.push_back({id, "outlet_" + id, cat, static_cast<std::int64_t>(10000 + rng.below(5000000))});
  const std::vector<std::string> left_accounts = {"1001", "1002", "1003"};
  const std::vector<std::string> right_accounts = {"1008", "1009", "1010", "1011", "1012"};
  const std::vector<std::string> middle_accounts = {"1004", "1005", "1006", "1007"};

  auto follow_some = [&](const std::string& user, const std::vector<std::string>& pool, std::size_t min_n) {
    std::vector<std::string> shuffled = pool;
    rng.shuffle(shuffled);
    const std::size_t n = min_n + rng.below(pool.size() - min_n + 1);
    for (std::size_t i = 0; i < n; ++i) f.follower_records.emplace_back(shuffled[i], user);
  };

  struct UserState {
    std::string id;
    Side side;
    std::int64_t tweets = 0;
    std::int64_t likes = 0;
  };
  std::vector<UserState> users;
  std::uint64_t next_user = 500000;
  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t i = 0; i < spec.users_per_side; ++i) {
      UserState u{std::to_string(next_user++), side};
      follow_some(u.id, side == Side::Left ? left_accounts : right_accounts, 2);
      f.true_side[u.id] = side;
      users.push_back(u);
    }
  }
  for (std::size_t i = 0; i < spec.excluded_users; ++i) {
    const std::string id = std::to_string(next_user++);
    follow_some(id, left_accounts, 1);
    follow_some(id, middle_accounts, 1);
    f.true_side[id] = Side::Unknown;
  }
  rng.shuffle(f.follower_records);

  const std::int64_t days = days_from_civil(spec.window.end) - days_from_civil(spec.window.start) + 1;
  std::uint64_t next_tweet = 1400000000000000000ULL;
  const double pos_left = 0.5 - spec.sentiment_shift / 2.0;
  const double pos_right = 0.5 + spec.sentiment_shift / 2.0;

  for (Side side : {Side::Left, Side::Right}) {
    const std::size_t offset = side == Side::Left ? 0 : spec.users_per_side;
    std::vector<double> topic_cdf;
    double total = 0.0;
    for (std::size_t t = 0; t < spec.topics; ++t) {
      const bool first_half = t < spec.topics / 2;
      const bool favoured = (side == Side::Left) == first_half;
      total += favoured ? 1.0 + spec.topic_skew : 1.0 - spec.topic_skew;
      topic_cdf.push_back(total);
    }
    for (std::size_t k = 0; k < spec.tweets_per_side; ++k) {
      // Every user gets at least 10 tweets, the rest go at random.
      const std::size_t ui = k < spec.users_per_side * 10 ? k % spec.users_per_side : rng.below(spec.users_per_side);
      UserState& user = users[offset + ui];
      const double tu = rng.uniform() * total;
      const std::size_t topic = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::lower_bound(topic_cdf.begin(), topic_cdf.end(), tu) - topic_cdf.begin(),
                                   static_cast<std::ptrdiff_t>(spec.topics - 1)));

      const std::size_t n = spec.min_words + rng.below(spec.max_words - spec.min_words + 1);
      std::vector<std::string> words;
      for (std::size_t i = 0; i < n; ++i)
        words.push_back(rng.bernoulli(0.35) ? general.draw(rng) : topic_lists[topic].draw(rng));
      auto insert = [&](const std::string& w) { words.insert(words.begin() + rng.below(words.size() + 1), w); };
      for (const auto& h : spec.homonyms) {
        const std::size_t t = side == Side::Left ? h.left_topic : h.right_topic;
        if (topic == t && rng.bernoulli(h.rate)) insert(h.word);
      }
      for (std::size_t c = 0; c < spec.controls.size(); ++c)
        if (topic == c % spec.topics && rng.bernoulli(spec.control_rate)) insert(spec.controls[c]);
      for (const auto& s : spec.frequency_skews)
        if (rng.bernoulli(side == Side::Left ? s.base_rate : s.base_rate * s.factor)) insert(s.word);
      if (rng.bernoulli(0.4)) {
        const bool positive = rng.bernoulli(side == Side::Left ? pos_left : pos_right);
        const auto& pool = positive ? kPositive : kNegative;
        insert(pool[rng.below(pool.size())]);
      }

      // Surface noise the cleaning stage has to undo.
      if (rng.bernoulli(0.05)) {
        auto& w = words[rng.below(words.size())];
        w = "#" + w;
      }
      std::string text;
      if (rng.bernoulli(0.1)) text += handle(rng) + " ";
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) text += ' ';
        text += words[i];
      }
      if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');
      if (rng.bernoulli(0.03)) text += " at " + std::to_string(1 + rng.below(12)) + ":" +
                                       std::to_string(10 + rng.below(50)) + (rng.bernoulli(0.5) ? " PM" : " am");
      if (rng.bernoulli(0.15)) text += rng.bernoulli(0.5) ? "!" : ".";
      if (rng.bernoulli(0.05)) text += " " + kEmoji[rng.below(kEmoji.size())];
      if (rng.bernoulli(0.1)) text += " " + url(rng);

      TweetRecord rec;
      rec.id = std::to_string(next_tweet++);
      rec.user = user.id;
      rec.ts = format_date(civil_from_days(days_from_civil(spec.window.start) + static_cast<std::int64_t>(rng.below(
                                                                                     static_cast<std::uint64_t>(days))))) +
               "T12:00:00Z";
      rec.likes = static_cast<std::int64_t>(rng.below(30));
      rec.retweets = static_cast<std::int64_t>(rng.below(10));
      rec.lang = rng.bernoulli(0.01) ? "es" : "en";
      if (rng.bernoulli(0.003)) text += " @threadreaderapp unroll";
      rec.text = std::move(text);
      user.tweets += 1;
      user.likes += rec.likes;
      f.tweets.push_back(std::move(rec));
    }
  }
  // Interleave sides as a collection would.
  rng.shuffle(f.tweets);

  const Date created = civil_from_days(days_from_civil(spec.window.start) - 400);
  for (const auto& u : users) {
    delineate::UserProfile p;
    p.user_id = u.id;
    p.location_us = true;
    p.created_at = created;
    p.tweet_count_window = u.tweets;
    p.follows_count = 20 + static_cast<std::int64_t>(rng.below(500));
    p.followers_count = static_cast<std::int64_t>(std::pow(10.0, rng.uniform(0.8, 5.0)));
    p.likes_received = u.likes;
    f.profiles.push_back(p);
  }

  for (const auto& h : spec.homonyms)
    f.truth.push_back({h.word, "homonym", "topic " + std::to_string(h.left_topic) + " left, topic " +
                                              std::to_string(h.right_topic) + " right"});
  for (const auto& c : spec.controls) f.truth.push_back({c, "control", "same topic both sides"});
  for (const auto& s : spec.frequency_skews)
    f.truth.push_back({s.word, "frequency_skew", "log2_fold " + format_number(std::log2(s.factor))});
  if (spec.sentiment_shift != 0.0)
    f.truth.push_back({"*", "sentiment_shift", "positive share right minus left " + format_number(spec.sentiment_shift)});
  if (spec.topic_skew != 0.0) f.truth.push_back({"*", "topic_skew", format_number(spec.topic_skew)});
  return f;
}

FixtureFiles write_fixture(const Fixture& f, const std::filesystem::path& dir) {
  FixtureFiles out{dir / "registry.tsv", dir / "followers.tsv", dir / "profiles.jsonl", dir / "tweets.jsonl",
                   dir / "truth.tsv"};
  artifacts::write_atomic(out.registry, [&](std::ostream& os) {
    os << "account_id\tdisplay_name\tcategory\tfollower_count\n";
    for (const auto& o : f.outlets)
      os << o.account_id << '\t' << o.display_name << '\t' << delineate::to_string(o.category) << '\t'
         << o.follower_count << '\n';
  });
  artifacts::write_atomic(out.followers, [&](std::ostream& os) {
    for (const auto& [account, user] : f.follower_records) os << account << '\t' << user << '\n';
  });
  artifacts::write_atomic(out.profiles, [&](std::ostream& os) {
    for (const auto& p : f.profiles) {
      nlohmann::ordered_json j;
      j["user"] = p.user_id;
      j["location_us"] = p.location_us;
      j["created_at"] = format_date(p.created_at);
      j["tweet_count"] = p.tweet_count_window;
      j["follows"] = p.follows_count;
      j["followers"] = p.followers_count;
      j["likes"] = p.likes_received;
      os << j.dump() << '\n';
    }
  });
  artifacts::write_atomic(out.tweets, [&](std::ostream& os) { write_corpus(os, f.tweets); });
  artifacts::write_atomic(out.truth, [&](std::ostream& os) {
    for (const auto& t : f.truth) os << t.item << '\t' << t.kind << '\t' << t.detail << '\n';
  });
  return out;
}

FixtureFiles make_fixture(const FixtureSpec& spec, const std::filesystem::path& dir) {
  return write_fixture(generate(spec), dir);
}

std::vector<TruthRow> read_truth(const std::filesystem::path& path) {
  std::vector<TruthRow> out;
  std::istringstream in(artifacts::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) fail(ErrorKind::Parse, "truth table: expected 3 columns");
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  return out;
}

std::vector<sentiment::UserMean> user_means(std::size_t users_per_side, double base, double shift, double sigma,
                                            std::uint64_t seed) {
  Rng rng(mix_seed(seed, fnv1a64("user_means")));
  std::vector<sentiment::UserMean> out;
  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t i = 0; i < users_per_side; ++i) {
      sentiment::UserMean u;
      u.user = std::string(side == Side::Left ? "l" : "r") + std::to_string(i);
      u.side = side;
      u.mean = rng.normal(side == Side::Left ? base : base + shift, sigma);
      u.weight = 1.0;
      out.push_back(u);
    }
  }
  return out;
}

}  // namespace lexdiv::fixture
