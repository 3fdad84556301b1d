#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "lexdiv/server.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
using namespace lexdiv::server;
using json = nlohmann::json;

namespace {

struct Root {
  testing::TempDir dir;
  annotate::Schedule schedule = annotate::build_session("s1", testing::synthetic_targets(1), 21);
  Root() { annotate::Session::create(dir / "s1", schedule); }
};

ApiRequest get(const std::string& path, std::map<std::string, std::string> query = {}) {
  return {"GET", path, std::move(query), ""};
}

ApiRequest post(const std::string& path, const json& body) { return {"POST", path, {}, body.dump()}; }

json rating_body(const std::string& pair, const std::string& who, int v) {
  return {{"pair_id", pair}, {"annotator", who}, {"value", v}};
}

std::size_t rating_lines(const testing::TempDir& dir) {
  std::size_t n = 0;
  for (const auto& line : testing::lines_of(testing::slurp(dir / "s1" / "events.jsonl")))
    if (json::parse(line)["type"] == "rating") ++n;
  return n;
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("next pair contract") {
    Root r;
    SessionStore store(r.dir.path());
    const auto res = handle(store, get("/api/session/s1/next", {{"annotator", "ann"}}));
    CHECK(res.status == 200);
    const auto j = json::parse(res.body);
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.insert(k);
    CHECK(keys == std::set<std::string>{"pair_id", "target", "passage_a", "passage_b", "progress"});
    CHECK(j["pair_id"] == r.schedule.pairs[0].pair_id);
    CHECK(j["progress"]["done"] == 0);
    CHECK(j["progress"]["total"] == 40);
    CHECK(res.body.find("\"side\"") == std::string::npos);
    CHECK(res.body.find("\"left\"") == std::string::npos);
    CHECK(res.body.find("\"right\"") == std::string::npos);

    CHECK(handle(store, get("/api/session/s1/next")).status == 400);
    CHECK(handle(store, get("/api/session/nope/next", {{"annotator", "a"}})).status == 404);
    CHECK(handle(store, get("/api/session/../next", {{"annotator", "a"}})).status == 404);
    CHECK(handle(store, get("/api/elsewhere")).status == 404);
    CHECK(handle(store, post("/api/session/s1/next", json::object())).status == 405);
  }

  TEST_CASE("rating contract") {
    Root r;
    SessionStore store(r.dir.path());
    const auto& pair = r.schedule.pairs[0].pair_id;
    const auto ok = handle(store, post("/api/session/s1/rating", rating_body(pair, "ann", 4)));
    CHECK(ok.status == 200);
    CHECK(json::parse(ok.body) == json{{"ok", true}});
    const auto dup = handle(store, post("/api/session/s1/rating", rating_body(pair, "ann", 2)));
    CHECK(dup.status == 400);
    CHECK(json::parse(dup.body).contains("error"));
    CHECK(handle(store, post("/api/session/s1/rating", rating_body(pair, "bob", 5))).status == 400);
    CHECK(handle(store, post("/api/session/s1/rating", rating_body("zz", "bob", 2))).status == 400);
    CHECK(handle(store, {"POST", "/api/session/s1/rating", {}, "{oops"}).status == 400);
    CHECK(handle(store, post("/api/session/s1/rating", json{{"pair_id", pair}, {"annotator", "bob"}, {"value", "3"}}))
              .status == 400);
    CHECK(rating_lines(r.dir) == 1);
  }

  TEST_CASE("scores only when complete") {
    Root r;
    SessionStore store(r.dir.path());
    CHECK(handle(store, get("/api/session/s1/scores")).status == 409);
    for (std::size_t i = 0; i + 1 < r.schedule.pairs.size(); ++i)
      handle(store, post("/api/session/s1/rating", rating_body(r.schedule.pairs[i].pair_id, "ann", 3)));
    const auto partial = handle(store, get("/api/session/s1/scores"));
    CHECK(partial.status == 409);
    CHECK(partial.body.find("missing") != std::string::npos);
    handle(store, post("/api/session/s1/rating", rating_body(r.schedule.pairs.back().pair_id, "ann", 3)));
    const auto done = handle(store, get("/api/session/s1/scores"));
    REQUIRE(done.status == 200);
    const auto j = json::parse(done.body);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["divergence"] == 1.0);
    CHECK(json::parse(handle(store, get("/api/session/s1/next", {{"annotator", "ann"}})).body)["done"] == true);
    CHECK(handle(store, get("/api/session/s1/scores", {{"annotators", "ann,bob"}})).status == 409);
  }

  TEST_CASE("live session over HTTP survives a restart") {
    Root r;
    std::size_t rated = 0;
    {
      ApiServer server(r.dir.path());
      const int port = server.bind("127.0.0.1", 0);
      server.start();
      httplib::Client cli("127.0.0.1", port);
      for (int i = 0; i < 15; ++i) {
        auto res = cli.Get("/api/session/s1/next?annotator=ann");
        REQUIRE(res);
        const auto j = json::parse(res->body);
        auto post_res = cli.Post("/api/session/s1/rating", rating_body(j["pair_id"], "ann", 1 + i % 4).dump(),
                                 "application/json");
        REQUIRE(post_res);
        CHECK(post_res->status == 200);
        ++rated;
      }
      server.stop();
    }
    CHECK(rating_lines(r.dir) == rated);

    ApiServer again(r.dir.path());
    const int port = again.bind("127.0.0.1", 0);
    again.start();
    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Get("/api/session/s1/next?annotator=ann");
    REQUIRE(res);
    CHECK(json::parse(res->body)["progress"]["done"] == 15);
    while (true) {
      auto n = cli.Get("/api/session/s1/next?annotator=ann");
      REQUIRE(n);
      const auto j = json::parse(n->body);
      if (j.contains("done") && j["done"] == true) break;
      REQUIRE(cli.Post("/api/session/s1/rating", rating_body(j["pair_id"], "ann", 2).dump(), "application/json"));
    }
    CHECK(rating_lines(r.dir) == 40);
    auto sc = cli.Get("/api/session/s1/scores");
    REQUIRE(sc);
    CHECK(sc->status == 200);
    again.stop();
  }

  TEST_CASE("static bundle and bind errors") {
    Root r;
    testing::spit(r.dir / "index.html", "<html>ui</html>");
    ApiServer server(r.dir.path(), r.dir.path());
    const int port = server.bind("127.0.0.1", 0);
    server.start();
    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Get("/index.html");
    REQUIRE(res);
    CHECK(res->body == "<html>ui</html>");
    server.stop();
    CHECK_THROWS(ApiServer(r.dir.path(), r.dir / "missing"));
    ApiServer unbound(r.dir.path());
    CHECK_THROWS(unbound.start());
    CHECK(SessionStore::valid_id("abc-1_2"));
    CHECK_FALSE(SessionStore::valid_id("a/b"));
    CHECK_FALSE(SessionStore::valid_id(".."));
  }
}
