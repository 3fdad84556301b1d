#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lexdiv/annotate.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/stats.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
using namespace lexdiv::annotate;

namespace {

const std::string kSeventy = "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo mu";

bool failed_rule(const ContextCheck& c, const std::string& rule) {
  return std::count(c.failed.begin(), c.failed.end(), rule) == 1;
}

TweetRecord rec(std::string id, std::string user, Side side, std::string text) {
  TweetRecord t;
  t.id = std::move(id);
  t.user = std::move(user);
  t.side = side;
  t.text = std::move(text);
  return t;
}

std::vector<std::string> rating_lines(const Schedule& s, const std::string& annotator, int (*value)(const Pair&)) {
  std::vector<std::string> out;
  for (const auto& p : s.pairs)
    out.push_back(R"({"type":"rating","ts":"2021-01-01T00:00:00Z","pair_id":")" + p.pair_id +
                  R"(","annotator":")" + annotator + R"(","value":)" + std::to_string(value(p)) + "}");
  return out;
}

}  // namespace

TEST_SUITE("annotate") {
  TEST_CASE("context rules") {
    REQUIRE(kSeventy.size() == 70);
    CHECK(check_context(kSeventy).ok);
    const auto short_one = check_context(kSeventy.substr(0, 69));
    CHECK_FALSE(short_one.ok);
    CHECK(short_one.failed == std::vector<std::string>{"min_chars"});

    std::string aaaa;
    for (int i = 0; i < 16; ++i) aaaa += "aaaa ";
    CHECK(failed_rule(check_context(aaaa), "letter_concentration"));

    const auto caps = check_context("Best Vet In Town Open Now Call Today Friends");
    CHECK(failed_rule(caps, "capitalization"));
    CHECK(failed_rule(caps, "min_words"));

    const std::string ten = "one two three four five six seven eight nine ten";
    CHECK(failed_rule(check_context(ten + " " + ten), "ttr"));
    // Numbers and emoji count for neither side of the capitalization ratio.
    CHECK(check_context("Hello there friends, 2021 was a long year and we all hope the next one brings rest 🙂").ok);
  }

  TEST_CASE("target matching") {
    CHECK(find_target("my Dog barks", "dog") == 3u);
    CHECK(find_target("two dogs bark", "dog") == 4u);
    CHECK(find_target("the boxes fell", "box") == 4u);
    CHECK_FALSE(find_target("hot-dog stand", "dog"));
    CHECK_FALSE(find_target("dog-friendly cafe", "dog"));
    CHECK_FALSE(find_target("dogma wins", "dog"));
    CHECK_FALSE(find_target("underdog story", "dog"));
    CHECK(find_target("hot-dog then dog", "dog") == 13u);
    CHECK(find_target("café crème", "crème") == 5u);
    CHECK(find_target("so 🔥 today", "🔥") == 3u);
    CHECK_FALSE(find_target("", "dog"));

    const std::string text = std::string(100, 'x') + " target " + std::string(100, 'y');
    const auto w = context_window(text, 101, 6);
    CHECK(w.size() == 126);
    CHECK(w.find("target") == 60u);
    CHECK(context_window("é target é", 2, 6, 2) == "é target é");
  }

  TEST_CASE("passage sampling") {
    const std::string tail = " is the word in this long enough sentence with varied vocabulary for testing";
    std::vector<TweetRecord> corpus = {
        rec("1", "ann", Side::Left, "kumo" + tail),
        rec("2", "ann", Side::Left, "kumo" + tail + " plus extra words"),
        rec("3", "bob", Side::Left, "kumo" + tail + " again"),
        rec("4", "cat", Side::Right, "kumo" + tail),
        rec("5", "dan", Side::Left, "short kumo"),
        rec("6", "eve", Side::Left, "hot-kumo" + tail),
    };
    const auto one = sample_passages(corpus, "kumo", Side::Left, 1, 7);
    REQUIRE(one.size() == 1);
    CHECK(one[0].tweet_id == "2");
    const auto two = sample_passages(corpus, "kumo", Side::Left, 2, 7);
    REQUIRE(two.size() == 2);
    CHECK(two[0].user_id != two[1].user_id);
    CHECK(two[1].tweet_id == "3");
    for (const auto& p : two) {
      CHECK(p.side == Side::Left);
      CHECK(p.target == "kumo");
      CHECK(find_target(p.text_window, "kumo").has_value());
    }
    try {
      sample_passages(corpus, "kumo", Side::Left, 5, 7);
      FAIL("expected a shortfall");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("short by 3") != std::string::npos);
    }
    auto reversed = corpus;
    std::reverse(reversed.begin(), reversed.end());
    const auto again = sample_passages(reversed, "kumo", Side::Left, 2, 7);
    CHECK(again[0].tweet_id == two[0].tweet_id);
    CHECK(again[1].tweet_id == two[1].tweet_id);
  }

  TEST_CASE("schedule composition") {
    const auto eight = build_session("s", testing::synthetic_targets(8), 11);
    CHECK(eight.pairs.size() == 320);
    std::map<PairKind, std::size_t> totals;
    for (const auto& p : eight.pairs) ++totals[p.kind];
    CHECK(totals[PairKind::LR] == 160);
    CHECK(totals[PairKind::LL] == 80);
    CHECK(totals[PairKind::RR] == 80);
    CHECK_NOTHROW(eight.check_composition());
    for (const auto& [target, kinds] : eight.composition()) {
      CHECK(kinds.at(PairKind::LR) == 20);
      CHECK(kinds.at(PairKind::LL) == 10);
      CHECK(kinds.at(PairKind::RR) == 10);
    }
    std::map<std::size_t, int> uses;
    std::set<std::string> ids;
    for (const auto& p : eight.pairs) {
      ++uses[p.passage_a];
      ++uses[p.passage_b];
      CHECK(p.passage_a != p.passage_b);
      CHECK(ids.insert(p.pair_id).second);
      const auto& a = eight.passages[p.passage_a];
      const auto& b = eight.passages[p.passage_b];
      CHECK(a.target == p.target);
      CHECK(b.target == p.target);
      if (p.kind == PairKind::LR) CHECK(a.side != b.side);
      if (p.kind == PairKind::LL) CHECK((a.side == Side::Left && b.side == Side::Left));
      if (p.kind == PairKind::RR) CHECK((a.side == Side::Right && b.side == Side::Right));
    }
    CHECK(uses.size() == 320);
    for (const auto& [idx, n] : uses) CHECK(n == 2);

    CHECK(build_session("s", testing::synthetic_targets(1), 3).pairs.size() == 40);
    CHECK(schedule_to_json(build_session("s", testing::synthetic_targets(3), 5)) ==
          schedule_to_json(build_session("s", testing::synthetic_targets(3), 5)));
    CHECK(schedule_to_json(build_session("s", testing::synthetic_targets(3), 5)) !=
          schedule_to_json(build_session("s", testing::synthetic_targets(3), 6)));

    auto short_target = testing::synthetic_targets(1);
    short_target[0].left.pop_back();
    CHECK_THROWS(build_session("s", short_target, 1));

    auto broken = eight;
    broken.pairs.pop_back();
    CHECK_THROWS_AS(broken.check_composition(), Error);
  }

  TEST_CASE("schedule JSON round trip") {
    const auto s = build_session("round", testing::synthetic_targets(2), 9);
    const auto back = schedule_from_json(schedule_to_json(s));
    CHECK(schedule_to_json(back) == schedule_to_json(s));
    CHECK(back.seed == 9);
    CHECK(back.targets == s.targets);
    CHECK(back.find_pair(s.pairs[5].pair_id) == 5u);
    CHECK_FALSE(back.find_pair("nope").has_value());
    CHECK_THROWS(schedule_from_json("{"));
  }

  TEST_CASE("rating capture") {
    testing::TempDir dir;
    const auto s = build_session("cap", testing::synthetic_targets(1), 2);
    Session::create(dir / "cap", s);
    auto session = Session::open(dir / "cap");
    const auto first = *session.next_pair("ann");
    CHECK(first == 0u);
    const auto id = s.pairs[first].pair_id;
    session.record_rating(id, "ann", 4);
    CHECK(session.progress("ann").done == 1);
    CHECK(session.progress("ann").total == 40);
    CHECK(*session.next_pair("ann") == 1u);
    CHECK(*session.next_pair("bob") == 0u);

    const auto before = testing::slurp(dir / "cap" / "events.jsonl");
    CHECK_THROWS_AS(session.record_rating(s.pairs[1].pair_id, "ann", 5), Error);
    CHECK_THROWS_AS(session.record_rating(s.pairs[1].pair_id, "ann", 0), Error);
    CHECK_THROWS_AS(session.record_rating("missing", "ann", 2), Error);
    try {
      session.record_rating(id, "ann", 3);
      FAIL("duplicate accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::State);
    }
    CHECK(testing::slurp(dir / "cap" / "events.jsonl") == before);
    CHECK(*session.rating(id, "ann") == 4);

    session.record_failure(s.pairs[1].pair_id, "model", "unparseable");
    session.record_exchange(s.pairs[1].pair_id, "model", "{}", "maybe");
    CHECK(session.failed("model").count(s.pairs[1].pair_id) == 1);
    CHECK(*session.next_pair("model") == 0u);
    CHECK(session.annotators() == std::set<std::string>{"ann"});
    CHECK_THROWS(Session::create(dir / "cap", s));
    CHECK_THROWS(Session::open(dir / "elsewhere"));
  }

  TEST_CASE("reopening replays the log") {
    testing::TempDir dir;
    const auto s = build_session("re", testing::synthetic_targets(1), 4);
    Session::create(dir / "re", s);
    std::string digest;
    {
      auto session = Session::open(dir / "re");
      Rng rng(1);
      for (std::size_t i = 0; i < 25; ++i)
        session.record_rating(s.pairs[i].pair_id, i % 2 ? "ann" : "bob", 1 + static_cast<int>(rng.below(4)));
      session.record_failure(s.pairs[30].pair_id, "model", "timeout");
      digest = session.state_digest();
    }
    CHECK(Session::open(dir / "re").state_digest() == digest);
    const auto lines = testing::lines_of(testing::slurp(dir / "re" / "events.jsonl"));
    CHECK(Session::replay(s, lines).state_digest() == digest);

    // A torn final write is ignored; the rest survives.
    {
      std::ofstream out(dir / "re" / "events.jsonl", std::ios::app);
      out << R"({"type":"rating","pair_id":")" << s.pairs[39].pair_id << R"(","annot)";
    }
    CHECK(Session::open(dir / "re").state_digest() == digest);

    std::vector<std::string> bad = lines;
    bad.push_back("not json");
    CHECK_THROWS(Session::replay(s, bad));
  }

  TEST_CASE("scores") {
    const auto s = build_session("sc", testing::synthetic_targets(1), 8);
    auto all4 = Session::replay(s, rating_lines(s, "ann", [](const Pair&) { return 4; }));
    auto r4 = session_scores(s, all4.ratings(), {"ann"});
    REQUIRE(r4.size() == 1);
    CHECK(r4[0].divergence == 0.0);
    CHECK(r4[0].polysemy_left == 0.0);
    CHECK(r4[0].divergence_se == 0.0);
    CHECK(r4[0].n_lr == 20);

    auto all1 = Session::replay(s, rating_lines(s, "ann", [](const Pair&) { return 1; }));
    CHECK(session_scores(s, all1.ratings(), {"ann"})[0].divergence == 3.0);

    // LR ratings alternate 4, 4, 2, 2 in presentation order.
    std::vector<Rating> mixed;
    std::size_t lr = 0;
    std::vector<double> lr_values;
    for (const auto& p : s.pairs) {
      int v = 3;
      if (p.kind == PairKind::LR) v = (lr++ % 4) < 2 ? 4 : 2, lr_values.push_back(v);
      mixed.push_back({p.pair_id, "ann", v, ""});
    }
    const auto m = session_scores(s, mixed, {"ann"});
    CHECK(m[0].divergence == 1.0);
    CHECK(m[0].polysemy_right == 1.0);
    CHECK(m[0].divergence_se == doctest::Approx(stats::sample_sd(lr_values) / std::sqrt(20.0)));

    try {
      session_scores(s, mixed, {"ann", "bob"});
      FAIL("incomplete session scored");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::State);
      CHECK(std::string(e.what()).find("40 missing") != std::string::npos);
    }

    std::ostringstream os;
    write_scores(os, m);
    CHECK(testing::lines_of(os.str()).size() == 3);
    CHECK(scores_to_json(m).find("\"divergence\":1.0") != std::string::npos);
  }

  TEST_CASE("scores ignore arrival order") {
    const auto s = build_session("order", testing::synthetic_targets(2), 12);
    Rng rng(5);
    std::vector<std::string> lines;
    for (const char* who : {"ann", "bob"})
      for (const auto& p : s.pairs)
        lines.push_back(R"({"type":"rating","pair_id":")" + p.pair_id + R"(","annotator":")" + who +
                        R"(","value":)" + std::to_string(1 + rng.below(4)) + "}");
    const auto base = scores_to_json(session_scores(s, Session::replay(s, lines).ratings(), {"ann", "bob"}));
    for (int k = 0; k < 10; ++k) {
      rng.shuffle(lines);
      const auto again = Session::replay(s, lines);
      CHECK(scores_to_json(session_scores(s, again.ratings(), {"ann", "bob"})) == base);
    }
  }

  TEST_CASE("agreement") {
    CHECK(*agreement({1, 2, 3, 4}, {1, 2, 3, 4}) == doctest::Approx(1.0));
    CHECK(*agreement({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(*agreement({1, 2, 3, 4}, {2, 1, 4, 3}) == doctest::Approx(0.6));
    CHECK_FALSE(agreement({2, 2, 2}, {1, 2, 3}).has_value());
    CHECK_THROWS(agreement({1, 2}, {1, 2}));
    CHECK_THROWS(agreement({1, 2, 3}, {1, 2}));
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> a(10), b(10);
      for (std::size_t i = 0; i < 10; ++i) {
        a[i] = static_cast<double>(i) + rng.uniform() * 0.1;
        b[i] = 1.0 + static_cast<double>(rng.below(4));
      }
      rng.shuffle(a);
      CHECK(*agreement(a, a) == doctest::Approx(1.0));
      const auto ab = agreement(a, b), ba = agreement(b, a);
      CHECK(ab.has_value() == ba.has_value());
      if (ab) CHECK(*ab == doctest::Approx(*ba).epsilon(1e-15));
    }

    const auto s = build_session("agree", testing::synthetic_targets(2), 1);
    std::vector<std::string> lines = rating_lines(s, "ann", [](const Pair& p) { return p.kind == PairKind::LR ? 1 : 4; });
    const auto bob = rating_lines(s, "bob", [](const Pair& p) { return p.kind == PairKind::LR ? 2 : 3; });
    lines.insert(lines.end(), bob.begin(), bob.end());
    const auto session = Session::replay(s, lines);
    const auto rows = session_agreement(session, {"ann", "bob"});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n == 80);
    CHECK(*rows[0].rho == doctest::Approx(1.0));
    const auto one = session_agreement(session, {"ann", "bob"}, {"t1"});
    CHECK(one[0].n == 40);
  }
}
