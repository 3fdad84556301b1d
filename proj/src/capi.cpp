#include "lexdiv/lexdiv.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "lexdiv/annotate.hpp"
#include "lexdiv/config.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/fixture.hpp"
#include "lexdiv/lexstats.hpp"
#include "lexdiv/pipeline.hpp"
#include "lexdiv/sentiment.hpp"
#include "lexdiv/server.hpp"
#include "lexdiv/textprep.hpp"

using namespace lexdiv;

struct ldv_config {
  std::optional<std::string> file;
  config::KeyValues overrides;
  config::PipelineConfig resolved;
};

struct ldv_server {
  std::unique_ptr<server::ApiServer> impl;
};

struct ldv_session {
  std::unique_ptr<server::SessionStore> store;
  std::string id;
};

struct ldv_sentiment {
  sentiment::SentimentConfig config;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
ldv_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void log_line(const std::string& line) {
  std::lock_guard lock(g_log_mutex);
  if (g_log_fn)
    g_log_fn(line.c_str(), g_log_user);
  else
    std::cerr << line << '\n';
}

ldv_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return LDV_E_INVALID;
    case ErrorKind::MissingInput: return LDV_E_MISSING;
    case ErrorKind::Parse: return LDV_E_PARSE;
    case ErrorKind::Io: return LDV_E_IO;
    case ErrorKind::State: return LDV_E_STATE;
    case ErrorKind::Runtime: return LDV_E_RUNTIME;
  }
  return LDV_E_RUNTIME;
}

ldv_status set_error(ldv_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

template <class Fn>
ldv_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return LDV_OK;
  } catch (const Error& e) {
    return set_error(status_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return set_error(LDV_E_RUNTIME, e.what());
  } catch (...) {
    return set_error(LDV_E_RUNTIME, "unknown error");
  }
}

template <class Fn>
int guard_exit(Fn&& fn) {
  try {
    g_last_error.clear();
    const int code = fn();
    if (code != LDV_EXIT_OK && g_last_error.empty()) g_last_error = "stage failed";
    return code;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return pipeline::exit_code_for(e);
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_csv(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::string item;
  for (const char* p = s;; ++p) {
    if (*p == ',' || *p == '\0') {
      if (!item.empty()) out.push_back(item);
      item.clear();
      if (*p == '\0') break;
    } else {
      item.push_back(*p);
    }
  }
  return out;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

// Capture the pipeline's own error text as the last error.
pipeline::LogFn logger() {
  return [](const std::string& line) {
    if (line.find(": error: ") != std::string::npos) g_last_error = line;
    log_line(line);
  };
}

ldv_status from_http(const server::ApiResponse& res, char** json_out) {
  if (res.status == 200) {
    *json_out = dup_string(res.body);
    return LDV_OK;
  }
  switch (res.status) {
    case 404: return set_error(LDV_E_NOT_FOUND, res.body);
    case 409: return set_error(LDV_E_STATE, res.body);
    case 400: return set_error(LDV_E_INVALID, res.body);
    default: return set_error(LDV_E_RUNTIME, res.body);
  }
}

}  // namespace

extern "C" {

const char* ldv_last_error(void) { return g_last_error.c_str(); }

const char* ldv_version(void) {
  static const std::string v = pipeline::version();
  return v.c_str();
}

void ldv_string_free(char* s) { std::free(s); }

void ldv_set_log_callback(ldv_log_fn fn, void* user) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

ldv_status ldv_config_load(const char* path, ldv_config** out) {
  return guard([&] {
    need(out, "out");
    auto cfg = std::make_unique<ldv_config>();
    if (path) cfg->file = path;
    cfg->resolved = config::resolve(cfg->file, cfg->overrides);
    *out = cfg.release();
  });
}

ldv_status ldv_config_set(ldv_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    auto overrides = cfg->overrides;
    overrides[key] = value;
    cfg->resolved = config::resolve(cfg->file, overrides);
    cfg->overrides = std::move(overrides);
  });
}

ldv_status ldv_config_get(const ldv_config* cfg, const char* key, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(out, "out");
    const auto kv = cfg->resolved.to_kv();
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::InvalidArgument, std::string("unknown config key '") + key + "'");
    *out = dup_string(it->second);
  });
}

ldv_status ldv_config_emit(const ldv_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup_string(config::emit_toml(cfg->resolved.to_kv()));
  });
}

void ldv_config_free(ldv_config* cfg) { delete cfg; }

const char* const* ldv_stages(void) {
  static const std::vector<const char*> names = [] {
    std::vector<const char*> v;
    for (const auto& s : pipeline::stages()) v.push_back(s.c_str());
    v.push_back(nullptr);
    return v;
  }();
  return names.data();
}

int ldv_run(const ldv_config* cfg, const char* stage) {
  return guard_exit([&] {
    if (!cfg || !stage) {
      g_last_error = "config and stage are required";
      return static_cast<int>(LDV_EXIT_USAGE);
    }
    if (std::string_view(stage) == "all") return pipeline::run_all(cfg->resolved, logger());
    if (!pipeline::is_stage(stage)) {
      g_last_error = std::string("unknown stage '") + stage + "'";
      return static_cast<int>(LDV_EXIT_USAGE);
    }
    return pipeline::run(stage, cfg->resolved, logger());
  });
}

int ldv_annotate_score(const ldv_config* cfg, const char* annotators) {
  return guard_exit([&] {
    if (!cfg) return static_cast<int>(LDV_EXIT_USAGE);
    return pipeline::annotate_score(cfg->resolved, split_csv(annotators), logger());
  });
}

int ldv_annotate_agreement(const ldv_config* cfg, const char* annotators, const char* targets) {
  return guard_exit([&] {
    if (!cfg) return static_cast<int>(LDV_EXIT_USAGE);
    return pipeline::annotate_agreement(cfg->resolved, split_csv(annotators), split_csv(targets), logger());
  });
}

int ldv_annotate_llm(const ldv_config* cfg) {
  return guard_exit([&] {
    if (!cfg) return static_cast<int>(LDV_EXIT_USAGE);
    return pipeline::annotate_llm(cfg->resolved, logger());
  });
}

ldv_status ldv_server_new(const char* root, const char* static_dir, const char* host, int port, ldv_server** out) {
  return guard([&] {
    need(root, "root");
    need(out, "out");
    auto s = std::make_unique<ldv_server>();
    s->impl = std::make_unique<server::ApiServer>(root, static_dir ? static_dir : "");
    s->impl->bind(host ? host : "127.0.0.1", port);
    *out = s.release();
  });
}

int ldv_server_port(const ldv_server* s) { return s ? s->impl->port() : -1; }

ldv_status ldv_server_run(ldv_server* s) {
  return guard([&] {
    need(s, "server");
    s->impl->run();
  });
}

ldv_status ldv_server_start(ldv_server* s) {
  return guard([&] {
    need(s, "server");
    s->impl->start();
  });
}

void ldv_server_stop(ldv_server* s) {
  if (s) s->impl->stop();
}

void ldv_server_free(ldv_server* s) { delete s; }

ldv_status ldv_session_open(const char* dir, ldv_session** out) {
  return guard([&] {
    need(dir, "dir");
    need(out, "out");
    std::filesystem::path p(dir);
    while (p.has_relative_path() && p.filename().empty()) p = p.parent_path();
    auto s = std::make_unique<ldv_session>();
    s->id = p.filename().string();
    s->store = std::make_unique<server::SessionStore>(p.parent_path());
    if (!server::SessionStore::valid_id(s->id)) fail(ErrorKind::InvalidArgument, "invalid session directory name");
    s->store->get(s->id);
    *out = s.release();
  });
}

ldv_status ldv_session_next(ldv_session* s, const char* annotator, char** json_out) {
  ldv_status code = LDV_OK;
  const ldv_status st = guard([&] {
    need(s, "session");
    need(annotator, "annotator");
    need(json_out, "json_out");
    server::ApiRequest req{"GET", "/api/session/" + s->id + "/next", {{"annotator", annotator}}, ""};
    code = from_http(server::handle(*s->store, req), json_out);
  });
  return st != LDV_OK ? st : code;
}

ldv_status ldv_session_rate(ldv_session* s, const char* pair_id, const char* annotator, int value) {
  return guard([&] {
    need(s, "session");
    need(pair_id, "pair_id");
    need(annotator, "annotator");
    s->store->get(s->id).record_rating(pair_id, annotator, value);
  });
}

ldv_status ldv_session_scores_json(ldv_session* s, const char* annotators, char** json_out) {
  ldv_status code = LDV_OK;
  const ldv_status st = guard([&] {
    need(s, "session");
    need(json_out, "json_out");
    server::ApiRequest req{"GET", "/api/session/" + s->id + "/scores", {}, ""};
    if (annotators && *annotators) req.query["annotators"] = annotators;
    code = from_http(server::handle(*s->store, req), json_out);
  });
  return st != LDV_OK ? st : code;
}

void ldv_session_free(ldv_session* s) { delete s; }

ldv_status ldv_make_fixture(const char* dir, uint64_t seed, size_t users_per_side, size_t tweets_per_side) {
  return guard([&] {
    need(dir, "dir");
    auto spec = fixture::FixtureSpec::standard(seed);
    if (users_per_side) spec.users_per_side = users_per_side;
    if (tweets_per_side) spec.tweets_per_side = tweets_per_side;
    fixture::make_fixture(spec, dir);
  });
}

ldv_status ldv_clean_text(const char* raw, char** out) {
  return guard([&] {
    need(raw, "raw");
    need(out, "out");
    *out = dup_string(textprep::clean_text(raw));
  });
}

ldv_status ldv_sentiment_new(const char* lexicon_path, const char* emoji_path, ldv_sentiment** out) {
  return guard([&] {
    need(out, "out");
    const std::string data = LEXDIV_DEFAULT_DATA_DIR;
    const std::string lex = lexicon_path ? lexicon_path : data + "/vader_lexicon.txt";
    const std::string emoji = emoji_path ? emoji_path : (lexicon_path ? "" : data + "/emoji_utf8_lexicon.txt");
    auto s = std::make_unique<ldv_sentiment>();
    s->config = sentiment::SentimentConfig::from_files(lex, emoji);
    *out = s.release();
  });
}

ldv_status ldv_sentiment_score(const ldv_sentiment* s, const char* text, double* compound) {
  return guard([&] {
    need(s, "sentiment");
    need(text, "text");
    need(compound, "compound");
    *compound = sentiment::score_compound(text, s->config);
  });
}

void ldv_sentiment_free(ldv_sentiment* s) { delete s; }

double ldv_log2_fold(double left_rate, double right_rate) { return lexstats::log2_fold(left_rate, right_rate); }

}  // extern "C"
