#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "capi/scratch.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "lexdiv/lexdiv.h"

using json = nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ldv_string_free(s);
  return out;
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->emplace_back(line); }

ldv_config* small_config(const scratch::Dir& inputs, const scratch::Dir& work) {
  ldv_config* cfg = nullptr;
  REQUIRE(ldv_config_load(nullptr, &cfg) == LDV_OK);
  const std::pair<std::string, std::string> paths[] = {
      {"paths.workdir", work.path().string()},       {"paths.registry", inputs / "registry.tsv"},
      {"paths.followers", inputs / "followers.tsv"}, {"paths.profiles", inputs / "profiles.jsonl"},
      {"paths.tweets", inputs / "tweets.jsonl"}};
  for (const auto& [k, v] : paths) REQUIRE(ldv_config_set(cfg, k.c_str(), v.c_str()) == LDV_OK);
  for (const auto& [k, v] : scratch::kSmallRun) REQUIRE(ldv_config_set(cfg, k, v) == LDV_OK);
  return cfg;
}

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("version and stage list") {
    CHECK(std::strlen(ldv_version()) > 0);
    std::vector<std::string> names;
    for (const char* const* s = ldv_stages(); *s; ++s) names.emplace_back(*s);
    REQUIRE(names.size() == 12);
    CHECK(names.front() == "delineate");
    CHECK(names.back() == "report");
  }

  TEST_CASE("configuration handle") {
    ldv_config* cfg = nullptr;
    REQUIRE(ldv_config_load(nullptr, &cfg) == LDV_OK);
    char* v = nullptr;
    REQUIRE(ldv_config_get(cfg, "seeds.master", &v) == LDV_OK);
    CHECK(take(v) == "1");
    CHECK(ldv_config_set(cfg, "seeds.master", "77") == LDV_OK);
    REQUIRE(ldv_config_get(cfg, "seeds.master", &v) == LDV_OK);
    CHECK(take(v) == "77");

    CHECK(ldv_config_set(cfg, "topics.min_pts", "1") == LDV_E_INVALID);
    CHECK(std::string(ldv_last_error()).find("min_pts") != std::string::npos);
    REQUIRE(ldv_config_get(cfg, "topics.min_pts", &v) == LDV_OK);
    CHECK(take(v) == "10");
    CHECK(ldv_config_set(cfg, "llm.api_key", "sk-live-123") == LDV_E_INVALID);
    CHECK(std::string(ldv_last_error()).find("environment") != std::string::npos);
    CHECK(std::string(ldv_last_error()).find("sk-live-123") == std::string::npos);
    CHECK(ldv_config_get(cfg, "no.such", &v) == LDV_E_INVALID);

    char* text = nullptr;
    REQUIRE(ldv_config_emit(cfg, &text) == LDV_OK);
    const std::string emitted = take(text);
    CHECK(emitted.find("[seeds]\nmaster = 77\n") != std::string::npos);
    CHECK(emitted.find("api_key_env") != std::string::npos);
    ldv_config_free(cfg);

    scratch::Dir dir;
    scratch::write(dir / "bad.toml", "[llm]\napi_key = \"sk-1\"\n");
    ldv_config* bad = nullptr;
    CHECK(ldv_config_load((dir / "bad.toml").c_str(), &bad) == LDV_E_INVALID);
    CHECK(bad == nullptr);
    CHECK(ldv_config_load((dir / "missing.toml").c_str(), &bad) == LDV_E_MISSING);
    scratch::write(dir / "broken.toml", "[seeds\n");
    CHECK(ldv_config_load((dir / "broken.toml").c_str(), &bad) == LDV_E_PARSE);
    CHECK(ldv_config_load(nullptr, nullptr) == LDV_E_INVALID);
    CHECK(ldv_config_set(nullptr, "a.b", "c") == LDV_E_INVALID);
    ldv_config_free(nullptr);
  }

  TEST_CASE("run exit codes") {
    scratch::Dir work;
    ldv_config* cfg = nullptr;
    REQUIRE(ldv_config_load(nullptr, &cfg) == LDV_OK);
    REQUIRE(ldv_config_set(cfg, "paths.workdir", work.path().c_str()) == LDV_OK);
    std::vector<std::string> lines;
    ldv_set_log_callback(collect, &lines);
    CHECK(ldv_run(cfg, "freq") == LDV_EXIT_MISSING);
    CHECK(std::string(ldv_last_error()).find("cleaned corpus not found") != std::string::npos);
    CHECK(ldv_run(cfg, "bogus") == LDV_EXIT_USAGE);
    CHECK(ldv_run(nullptr, "freq") == LDV_EXIT_USAGE);
    CHECK(ldv_annotate_score(cfg, nullptr) != LDV_EXIT_OK);
    ldv_set_log_callback(nullptr, nullptr);
    CHECK_FALSE(lines.empty());
    ldv_config_free(cfg);
  }

  TEST_CASE("text helpers") {
    char* out = nullptr;
    REQUIRE(ldv_clean_text("Check https://t.co/x @someone &amp; more", &out) == LDV_OK);
    const std::string cleaned = take(out);
    CHECK(cleaned.find("https") == std::string::npos);
    CHECK(cleaned.find("@someone") == std::string::npos);
    CHECK(ldv_clean_text(nullptr, &out) == LDV_E_INVALID);

    ldv_sentiment* s = nullptr;
    REQUIRE(ldv_sentiment_new(nullptr, nullptr, &s) == LDV_OK);
    double c = 0;
    REQUIRE(ldv_sentiment_score(s, "VADER is smart, handsome, and funny.", &c) == LDV_OK);
    CHECK(std::abs(c - 0.8316) < 5e-5);
    REQUIRE(ldv_sentiment_score(s, "", &c) == LDV_OK);
    CHECK(c == 0.0);
    ldv_sentiment_free(s);
    CHECK(ldv_sentiment_new("/nonexistent/lexicon.txt", nullptr, &s) != LDV_OK);

    CHECK(ldv_log2_fold(1e-3, 2e-3) == 1.0);
    CHECK(ldv_log2_fold(2e-3, 1e-3) == -1.0);
  }

  TEST_CASE("fixture to annotated session through the C interface") {
    scratch::Dir inputs, work;
    REQUIRE(ldv_make_fixture(inputs.path().c_str(), 11, 40, 3000) == LDV_OK);
    CHECK(ldv_make_fixture(inputs.path().c_str(), 11, 40, 100) == LDV_E_INVALID);
    ldv_config* cfg = small_config(inputs, work);
    std::vector<std::string> lines;
    ldv_set_log_callback(collect, &lines);
    REQUIRE(ldv_run(cfg, "all") == LDV_EXIT_OK);
    ldv_set_log_callback(nullptr, nullptr);
    CHECK(lines.size() >= 12);

    const auto session_dir = work.path() / "annotation" / "main";
    ldv_session* s = nullptr;
    REQUIRE(ldv_session_open(session_dir.c_str(), &s) == LDV_OK);
    char* out = nullptr;
    CHECK(ldv_session_scores_json(s, nullptr, &out) == LDV_E_STATE);

    for (const char* who : {"ann", "bob"}) {
      for (int i = 0;; ++i) {
        REQUIRE(ldv_session_next(s, who, &out) == LDV_OK);
        const auto next = json::parse(take(out));
        if (next.contains("done")) break;
        CHECK(next["target"] == "kumo");
        CHECK_FALSE(next.contains("side_a"));
        const std::string pair = next["pair_id"];
        REQUIRE(ldv_session_rate(s, pair.c_str(), who, 1 + i % 4) == LDV_OK);
        if (i == 0) CHECK(ldv_session_rate(s, pair.c_str(), who, 2) == LDV_E_STATE);
      }
    }
    CHECK(ldv_session_rate(s, "no-such-pair", "ann", 2) != LDV_OK);
    CHECK(ldv_session_rate(s, nullptr, "ann", 2) == LDV_E_INVALID);
    REQUIRE(ldv_session_scores_json(s, "ann,bob", &out) == LDV_OK);
    const auto scores = json::parse(take(out));
    REQUIRE(scores.size() == 1);
    CHECK(scores[0]["target"] == "kumo");
    CHECK(scores[0].contains("divergence"));
    ldv_session_free(s);

    CHECK(ldv_session_open((work.path() / "annotation" / "nope").c_str(), &s) != LDV_OK);
    CHECK(ldv_annotate_score(cfg, "ann,bob") == LDV_EXIT_OK);
    CHECK(ldv_annotate_agreement(cfg, "ann,bob", nullptr) == LDV_EXIT_OK);

    ::unsetenv("LEXDIV_CAPI_UNSET_KEY");
    REQUIRE(ldv_config_set(cfg, "llm.api_key_env", "LEXDIV_CAPI_UNSET_KEY") == LDV_OK);
    CHECK(ldv_annotate_llm(cfg) == LDV_EXIT_USAGE);
    CHECK(std::string(ldv_last_error()).find("LEXDIV_CAPI_UNSET_KEY") != std::string::npos);

    ldv_server* server = nullptr;
    REQUIRE(ldv_server_new((work.path() / "annotation").c_str(), nullptr, "127.0.0.1", 0, &server) == LDV_OK);
    REQUIRE(ldv_server_start(server) == LDV_OK);
    const int port = ldv_server_port(server);
    CHECK(port > 0);
    httplib::Client http("127.0.0.1", port);
    auto res = http.Get("/api/session/main/scores");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = http.Get("/api/session/other/next?annotator=x");
    REQUIRE(res);
    CHECK(res->status == 404);
    ldv_server_stop(server);
    ldv_server_free(server);
    CHECK(ldv_server_new("/nonexistent/root", nullptr, "127.0.0.1", 0, &server) != LDV_OK);
    ldv_config_free(cfg);
  }
}
