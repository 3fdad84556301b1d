#include "doctest.h"
#include "lexdiv/config.hpp"
#include "lexdiv/error.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
using namespace lexdiv::config;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Runtime;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parsing sections, strings, lists and comments") {
    const auto kv = parse_toml(
        "# top comment\n"
        "[paths]\n"
        "workdir = \"/tmp/work dir\"  # trailing\n"
        "followers = [\"a.txt\", \"b.txt\"]\n"
        "\n"
        "[tune]\n"
        "dim = [50, 100]\n"
        "[seeds]\n"
        "master = 42\n");
    CHECK(kv.at("paths.workdir") == "/tmp/work dir");
    CHECK(kv.at("paths.followers") == "a.txt,b.txt");
    CHECK(kv.at("tune.dim") == "50,100");
    CHECK(kv.at("seeds.master") == "42");
    CHECK(kv.size() == 4);
  }

  TEST_CASE("malformed files report the line") {
    try {
      parse_toml("[paths]\nworkdir = \"x\"\nbroken line\n");
      FAIL("accepted a line without =");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(kind_of([] { parse_toml("[paths\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_toml("a = \"open\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_toml("a = 1\na = 2\n"); }) == ErrorKind::Parse);
  }

  TEST_CASE("emit and parse round trip") {
    auto cfg = PipelineConfig::defaults();
    cfg.workdir = "dir with \"quotes\" and # hash";
    cfg.followers = {"f1.txt", "f2.txt"};
    cfg.tune_dim = {50, 300};
    cfg.seed = 987654321987ull;
    cfg.llm.temperature = 0.25;
    const auto kv = cfg.to_kv();
    CHECK(parse_toml(emit_toml(kv)) == kv);
    const auto back = PipelineConfig::from_kv(parse_toml(emit_toml(kv)));
    CHECK(back.to_kv() == kv);
    CHECK(back.hash() == cfg.hash());
    CHECK(PipelineConfig::defaults().hash() != cfg.hash());
  }

  TEST_CASE("credentials are refused outside the environment") {
    CHECK(is_secret_key("llm.api_key"));
    CHECK(is_secret_key("llm.API_KEY"));
    CHECK(is_secret_key("auth.token"));
    CHECK(is_secret_key("db.password"));
    CHECK_FALSE(is_secret_key("llm.api_key_env"));
    CHECK_FALSE(is_secret_key("llm.model"));
    CHECK_FALSE(is_secret_key("freq.min_user_token_ratio"));
    CHECK(is_secret_key("llm.auth_token"));
    CHECK(is_secret_key("llm.client_secret"));

    CHECK(kind_of([] { parse_toml("[llm]\napi_key = \"sk-123\"\n"); }) == ErrorKind::InvalidArgument);
    try {
      parse_toml("[llm]\napi_key = \"sk-123\"\n");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("sk-123") == std::string::npos);
    }
    CHECK(parse_toml("[llm]\napi_key_env = \"MY_KEY\"\n").at("llm.api_key_env") == "MY_KEY");
    CHECK(kind_of([] { parse_assignment("llm.api_key=sk-1"); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { resolve(std::nullopt, {{"llm.token", "x"}}); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("precedence: overrides over file over defaults") {
    testing::TempDir dir;
    testing::spit(dir / "c.toml", "[seeds]\nmaster = 5\n[topics]\nmin_pts = 4\n");
    const auto defaults = resolve(std::nullopt, {});
    CHECK(defaults.seed == 1);
    CHECK(defaults.dbscan_min_pts == 10);
    const auto from_file = resolve((dir / "c.toml").string(), {});
    CHECK(from_file.seed == 5);
    CHECK(from_file.dbscan_min_pts == 4);
    CHECK(from_file.keywords == defaults.keywords);
    const auto overridden = resolve((dir / "c.toml").string(), {{"seeds.master", "9"}});
    CHECK(overridden.seed == 9);
    CHECK(overridden.dbscan_min_pts == 4);
    CHECK(parse_assignment(" topics.keywords = 12 ") == std::pair<std::string, std::string>{"topics.keywords", "12"});
    CHECK(kind_of([] { parse_assignment("no-equals"); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("unknown keys and bounds") {
    CHECK(kind_of([] { PipelineConfig::from_kv({{"topics.nope", "1"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"topics.min_pts", "1"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"topics.min_pts", "ten"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"window.start", "2021-02-30"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] {
            PipelineConfig::from_kv({{"window.start", "2021-09-08"}, {"window.end", "2021-09-07"}});
          }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"classify.train_fraction", "1"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"sentiment.granularity", "hourly"}}); }) ==
          ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"tune.dim", "1,50"}}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { PipelineConfig::from_kv({{"embed.center", "maybe"}}); }) == ErrorKind::InvalidArgument);
    CHECK(PipelineConfig::from_kv({{"sentiment.granularity", "daily"}}).granularity == "daily");
  }

  TEST_CASE("stage seeds derive from the master seed") {
    auto a = PipelineConfig::defaults();
    auto b = PipelineConfig::defaults();
    CHECK(a.seed_for("embed") == b.seed_for("embed"));
    CHECK(a.seed_for("embed") != a.seed_for("topics"));
    b.seed = 2;
    CHECK(a.seed_for("embed") != b.seed_for("embed"));
  }
}
