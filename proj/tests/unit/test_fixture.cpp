#include <cctype>
#include <cmath>
#include <map>

#include "doctest.h"
#include "lexdiv/error.hpp"
#include "lexdiv/fixture.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
using namespace lexdiv::fixture;

namespace {

FixtureSpec small(std::uint64_t seed) {
  auto s = FixtureSpec::standard(seed);
  s.users_per_side = 20;
  s.tweets_per_side = 2000;
  s.excluded_users = 5;
  return s;
}

std::size_t count_word(const std::string& text, const std::string& word) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
    const bool start_ok = pos == 0 || text[pos - 1] == ' ';
    const bool end_ok = pos + word.size() == text.size() || !std::isalpha(static_cast<unsigned char>(text[pos + word.size()]));
    if (start_ok && end_ok) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("fixture") {
  TEST_CASE("generation is deterministic per seed") {
    const auto a = generate(small(3));
    const auto b = generate(small(3));
    const auto c = generate(small(4));
    REQUIRE(a.tweets.size() == b.tweets.size());
    bool same = true;
    for (std::size_t i = 0; i < a.tweets.size(); ++i)
      same = same && serialize_record(a.tweets[i]) == serialize_record(b.tweets[i]);
    CHECK(same);
    CHECK(a.true_side == b.true_side);
    bool differs = a.tweets.size() != c.tweets.size();
    for (std::size_t i = 0; !differs && i < a.tweets.size(); ++i) differs = a.tweets[i].text != c.tweets[i].text;
    CHECK(differs);

    testing::TempDir d1, d2;
    const auto f1 = write_fixture(a, d1.path());
    const auto f2 = write_fixture(b, d2.path());
    CHECK(testing::slurp(f1.tweets) == testing::slurp(f2.tweets));
    CHECK(testing::slurp(f1.followers) == testing::slurp(f2.followers));
    CHECK(testing::slurp(f1.profiles) == testing::slurp(f2.profiles));
    CHECK(testing::slurp(f1.registry) == testing::slurp(f2.registry));
  }

  TEST_CASE("sides, volumes and the planted homonym") {
    const auto spec = small(5);
    const auto f = generate(spec);
    std::map<Side, std::size_t> users, tweets;
    for (const auto& [u, s] : f.true_side) ++users[s];
    CHECK(users[Side::Left] == spec.users_per_side);
    CHECK(users[Side::Right] == spec.users_per_side);
    std::map<Side, std::size_t> homonym;
    for (const auto& t : f.tweets) {
      CHECK(t.side == Side::Unknown);
      const auto it = f.true_side.find(t.user);
      if (it == f.true_side.end()) continue;
      ++tweets[it->second];
      homonym[it->second] += count_word(t.text, "kumo");
    }
    CHECK(tweets[Side::Left] == spec.tweets_per_side);
    CHECK(tweets[Side::Right] == spec.tweets_per_side);
    CHECK(homonym[Side::Left] > 0);
    CHECK(homonym[Side::Right] > 0);
    const auto kinds = [&] {
      std::map<std::string, std::string> m;
      for (const auto& row : f.truth) m[row.item] = row.kind;
      return m;
    }();
    CHECK(kinds.at("kumo") == "homonym");
    CHECK(kinds.at("balu") == "control");
  }

  TEST_CASE("truth table round trip and empty truth") {
    testing::TempDir dir;
    const auto f = generate(small(6));
    const auto files = write_fixture(f, dir.path());
    const auto back = read_truth(files.truth);
    REQUIRE(back.size() == f.truth.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].item == f.truth[i].item);
      CHECK(back[i].kind == f.truth[i].kind);
      CHECK(back[i].detail == f.truth[i].detail);
    }

    FixtureSpec plain;
    plain.users_per_side = 10;
    plain.tweets_per_side = 200;
    plain.excluded_users = 0;
    const auto none = generate(plain);
    CHECK(none.truth.empty());
    testing::TempDir d2;
    CHECK(read_truth(write_fixture(none, d2.path()).truth).empty());
  }

  TEST_CASE("contradictory specs are refused") {
    auto bad = small(1);
    bad.topic_skew = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small(1);
    bad.homonyms[0].right_topic = bad.homonyms[0].left_topic;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small(1);
    bad.controls.push_back("kumo");
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small(1);
    bad.tweets_per_side = bad.users_per_side * 10 - 1;
    CHECK_THROWS_AS(generate(bad), Error);
    bad = small(1);
    bad.frequency_skews.push_back({"wexo", 200.0, 0.01});
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small(1);
    bad.sentiment_shift = -1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("user means carry the requested shift") {
    const auto means = user_means(4000, 0.1, 0.05, 0.2, 9);
    double left = 0, right = 0;
    std::size_t nl = 0, nr = 0;
    for (const auto& m : means) {
      if (m.side == Side::Left) left += m.mean, ++nl;
      else right += m.mean, ++nr;
    }
    REQUIRE(nl == 4000);
    REQUIRE(nr == 4000);
    CHECK(std::abs(left / nl - 0.1) < 0.02);
    CHECK(std::abs(right / nr - left / nl - 0.05) < 0.02);
  }
}
