#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lexdiv/lexstats.hpp"
#include "lexdiv/rng.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
using namespace lexdiv::lexstats;

namespace {

struct Tweet {
  Side side;
  std::string user;
  std::vector<std::string> lexemes;
};

std::vector<Tweet> random_tweets(Rng& rng, std::size_t n, std::size_t vocab, std::size_t users) {
  std::vector<Tweet> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tweet t{rng.bernoulli(0.5) ? Side::Left : Side::Right, "u" + std::to_string(rng.below(users)), {}};
    const auto len = rng.below(8);
    for (std::size_t k = 0; k < len; ++k) t.lexemes.push_back("w" + std::to_string(rng.below(vocab)));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<LexemeStats> table_of(const std::vector<Tweet>& tweets) {
  Counter c;
  for (const auto& t : tweets) c.add(t.side, t.user, t.lexemes);
  return c.table();
}

LexemeStats stats(std::uint64_t tl, std::uint64_t tr, std::uint64_t users) {
  LexemeStats s;
  s.lexeme = "x";
  s.tokens_left = tl;
  s.tokens_right = tr;
  s.users_total = users;
  return s;
}

std::vector<Tweet> swapped(std::vector<Tweet> tweets) {
  for (auto& t : tweets) t.side = t.side == Side::Left ? Side::Right : Side::Left;
  return tweets;
}

}  // namespace

TEST_SUITE("lexstats") {
  TEST_CASE("tweet frequency") {
    std::vector<std::vector<std::string>> corpus(10, {"a", "b"});
    corpus[0].push_back("x");
    corpus[3].push_back("x");
    const auto r = tweet_frequency("x", corpus);
    CHECK(r.tweets == 2);
    CHECK(r.rate == 200000.0);
    const auto none = tweet_frequency("zzz", corpus);
    CHECK(none.tweets == 0);
    CHECK(none.rate == 0.0);
    corpus[5] = {"y", "y", "y", "y", "y"};
    CHECK(tweet_frequency("y", corpus).tweets == 1);
    CHECK_THROWS(tweet_frequency("x", {}));
  }

  TEST_CASE("fold values") {
    CHECK(log2_fold(100, 200) == 1.0);
    CHECK(log2_fold(100, 400) == 2.0);
    CHECK(log2_fold(123.5, 123.5) == 0.0);
    CHECK(log2_fold(400, 50) == -3.0);
    CHECK_THROWS(log2_fold(0, 10));
    CHECK_THROWS(log2_fold(10, 0));
    CHECK_THROWS(log2_fold(-1, 10));
  }

  TEST_CASE("fold is antisymmetric and scale invariant") {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
      const double a = rng.uniform(1e-3, 1e6), b = rng.uniform(1e-3, 1e6);
      REQUIRE(log2_fold(a, b) == -log2_fold(b, a));
      REQUIRE(log2_fold(2 * a, 2 * b) == log2_fold(a, b));
      REQUIRE(std::abs(log2_fold(a, b) - std::log2(b / a)) <= 1e-12 * std::max(1.0, std::abs(std::log2(b / a))));
    }
  }

  TEST_CASE("eligibility examples") {
    const auto freq = EligibilityProfile::freq();
    const auto embed = EligibilityProfile::embed();
    CHECK(freq.accepts(stats(250, 60, 210)));
    // 290 tokens falls short of the 300 total even with every other threshold met.
    CHECK_FALSE(freq.accepts(stats(250, 40, 210)));
    CHECK_FALSE(freq.accepts(stats(199, 199, 300)));
    CHECK(embed.accepts(stats(199, 199, 300)));
    CHECK_FALSE(freq.accepts(stats(5000, 5000, 50)));
    CHECK_FALSE(freq.accepts(stats(5000, 5000, 499)));  // ratio 0.0499
    CHECK(freq.accepts(stats(5000, 5000, 500)));        // ratio 0.05
    CHECK_FALSE(embed.accepts(stats(99, 1000, 10)));
    CHECK(embed.accepts(stats(100, 100, 1)));
  }

  TEST_CASE("counter table") {
    Counter c;
    c.add(Side::Left, "a", {"x", "x", "y"});
    c.add(Side::Left, "b", {"x"});
    c.add(Side::Right, "a", {"y", "z"});
    c.add(Side::Right, "c", {});
    CHECK(c.tweets(Side::Left) == 2);
    CHECK(c.tweets(Side::Right) == 2);
    CHECK(c.users() == 3);
    const auto t = c.table();
    REQUIRE(t.size() == 3);
    CHECK(t[0].lexeme == "x");
    CHECK(t[0].tweets_left == 2);
    CHECK(t[0].tokens_left == 3);
    CHECK(t[0].rate_left == 1e6);
    CHECK(t[0].rate_right == 0.0);
    CHECK(t[0].users_total == 2);
    CHECK(t[1].lexeme == "y");
    CHECK(t[1].users_total == 1);
    CHECK(t[1].users_left == 1);
    CHECK(t[1].users_right == 1);
    CHECK(t[1].user_share == doctest::Approx(1.0 / 3.0));
    CHECK(t[2].rate_right == 500000.0);
  }

  TEST_CASE("counter matches a nested-loop recount") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
      const auto tweets = random_tweets(rng, 1 + rng.below(100), 15, 12);
      const auto table = table_of(tweets);
      std::set<std::string> vocab;
      std::set<std::string> all_users;
      std::uint64_t n[2] = {0, 0};
      for (const auto& t : tweets) {
        vocab.insert(t.lexemes.begin(), t.lexemes.end());
        all_users.insert(t.user);
        ++n[t.side == Side::Left ? 0 : 1];
      }
      REQUIRE(table.size() == vocab.size());
      std::size_t row = 0;
      for (const auto& w : vocab) {
        std::uint64_t tw[2] = {0, 0}, tk[2] = {0, 0};
        std::set<std::string> users[2], both;
        for (const auto& t : tweets) {
          const int s = t.side == Side::Left ? 0 : 1;
          bool in = false;
          for (const auto& l : t.lexemes)
            if (l == w) {
              ++tk[s];
              in = true;
            }
          if (in) {
            ++tw[s];
            users[s].insert(t.user);
            both.insert(t.user);
          }
        }
        const auto& r = table[row++];
        REQUIRE(r.lexeme == w);
        CHECK(r.tweets_left == tw[0]);
        CHECK(r.tweets_right == tw[1]);
        CHECK(r.tokens_left == tk[0]);
        CHECK(r.tokens_right == tk[1]);
        CHECK(r.users_left == users[0].size());
        CHECK(r.users_right == users[1].size());
        CHECK(r.users_total == both.size());
        CHECK(r.rate_left == doctest::Approx(n[0] ? 1e6 * tw[0] / n[0] : 0.0));
        CHECK(r.rate_right == doctest::Approx(n[1] ? 1e6 * tw[1] / n[1] : 0.0));
        CHECK(r.user_share == doctest::Approx(static_cast<double>(both.size()) / all_users.size()));
      }
    }
  }

  TEST_CASE("random tables: swapping sides negates folds, doubling changes nothing") {
    Rng rng(1000);
    const EligibilityProfile any{"ANY", 0, 0, 0, 0.0, 0};
    for (int trial = 0; trial < 1000; ++trial) {
      const auto tweets = random_tweets(rng, 20 + rng.below(60), 10, 15);
      const auto base = table_of(tweets);
      const auto mirror = table_of(swapped(tweets));
      auto doubled_tweets = tweets;
      doubled_tweets.insert(doubled_tweets.end(), tweets.begin(), tweets.end());
      const auto doubled = table_of(doubled_tweets);
      REQUIRE(base.size() == mirror.size());
      REQUIRE(base.size() == doubled.size());
      for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(doubled[i].rate_left == base[i].rate_left);
        CHECK(doubled[i].rate_right == base[i].rate_right);
        if (base[i].rate_left > 0 && base[i].rate_right > 0) {
          CHECK(log2_fold(mirror[i].rate_left, mirror[i].rate_right) ==
                -log2_fold(base[i].rate_left, base[i].rate_right));
          CHECK(log2_fold(doubled[i].rate_left, doubled[i].rate_right) ==
                log2_fold(base[i].rate_left, base[i].rate_right));
        }
      }
      const auto ranked = fold_ranking(base, any);
      for (std::size_t i = 1; i < ranked.size(); ++i)
        CHECK(std::abs(log2_fold(ranked[i - 1].rate_left, ranked[i - 1].rate_right)) >=
              std::abs(log2_fold(ranked[i].rate_left, ranked[i].rate_right)));
    }
  }

  TEST_CASE("raising min_both never adds lexemes") {
    Rng rng(77);
    const auto table = table_of(random_tweets(rng, 3000, 200, 100));
    std::vector<std::string> previous;
    for (std::uint64_t m = 0; m <= 60; m += 3) {
      EligibilityProfile p = EligibilityProfile::embed();
      p.min_both = m;
      const auto now = eligible_lexicon(table, p);
      CHECK(std::is_sorted(now.begin(), now.end()));
      if (m > 0) CHECK(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
      previous = now;
    }
  }

  TEST_CASE("merging disjoint counters equals one counter") {
    Rng rng(8);
    const auto tweets = random_tweets(rng, 500, 40, 30);
    Counter whole, a, b, c;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      whole.add(tweets[i].side, tweets[i].user, tweets[i].lexemes);
      (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add(tweets[i].side, tweets[i].user, tweets[i].lexemes);
    }
    Counter ab = a;
    ab.merge(b);
    ab.merge(c);
    Counter cb = c;
    cb.merge(b);
    cb.merge(a);
    std::ostringstream w, x, y;
    write_counts(w, whole.table());
    write_counts(x, ab.table());
    write_counts(y, cb.table());
    CHECK(x.str() == w.str());
    CHECK(y.str() == w.str());
  }

  TEST_CASE("table files round trip") {
    Rng rng(3);
    const auto table = table_of(random_tweets(rng, 200, 30, 20));
    testing::TempDir dir;
    std::ostringstream os;
    write_counts(os, table);
    testing::spit(dir / "counts.tsv", os.str());
    const auto back = read_counts(dir / "counts.tsv");
    std::ostringstream again;
    write_counts(again, back);
    CHECK(again.str() == os.str());

    const EligibilityProfile any{"ANY", 0, 0, 0, 0.0, 0};
    std::ostringstream fold;
    write_fold_table(fold, fold_ranking(table, any));
    const auto lines = testing::lines_of(fold.str());
    REQUIRE(!lines.empty());
    CHECK(lines[0] == "lexeme\ttweets_l\ttweets_r\trate_l\trate_r\tlog2_fold\tusers_total\tuser_share");
  }
}
