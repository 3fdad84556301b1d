#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "lexdiv/lexdiv.h"

namespace {

struct Global {
  std::string config_path;
  std::vector<std::string> sets;
  std::string workdir;
};

int report(int code) {
  if (code != LDV_EXIT_OK && *ldv_last_error()) std::cerr << "lexdiv: " << ldv_last_error() << '\n';
  return code;
}

int status_exit(ldv_status st) {
  if (st == LDV_OK) return LDV_EXIT_OK;
  std::cerr << "lexdiv: " << ldv_last_error() << '\n';
  if (st == LDV_E_MISSING || st == LDV_E_NOT_FOUND) return LDV_EXIT_MISSING;
  if (st == LDV_E_INVALID || st == LDV_E_PARSE) return LDV_EXIT_USAGE;
  return LDV_EXIT_RUNTIME;
}

struct ConfigHandle {
  ldv_config* cfg = nullptr;
  ~ConfigHandle() { ldv_config_free(cfg); }
};

// Defaults, file, then --workdir and --set overrides in order.
int load_config(const Global& g, ConfigHandle& h) {
  if (ldv_config_load(g.config_path.empty() ? nullptr : g.config_path.c_str(), &h.cfg) != LDV_OK) {
    std::cerr << "lexdiv: config: " << ldv_last_error() << '\n';
    return LDV_EXIT_USAGE;
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  if (!g.workdir.empty()) pairs.emplace_back("paths.workdir", g.workdir);
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "lexdiv: --set expects key=value, got '" << s << "'\n";
      return LDV_EXIT_USAGE;
    }
    pairs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : pairs) {
    if (ldv_config_set(h.cfg, k.c_str(), v.c_str()) != LDV_OK) {
      std::cerr << "lexdiv: config: " << ldv_last_error() << '\n';
      return LDV_EXIT_USAGE;
    }
  }
  return LDV_EXIT_OK;
}

std::string config_value(const ldv_config* cfg, const char* key) {
  char* out = nullptr;
  if (ldv_config_get(cfg, key, &out) != LDV_OK) return {};
  std::string s = out;
  ldv_string_free(out);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

int serve(const ldv_config* cfg, const std::string& host, int port) {
  const std::string workdir = config_value(cfg, "paths.workdir");
  const std::string ui = config_value(cfg, "paths.ui_dir");
  const std::string root = workdir + "/annotation";

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ldv_server* server = nullptr;
  if (const ldv_status st = ldv_server_new(root.c_str(), ui.empty() ? nullptr : ui.c_str(), host.c_str(), port, &server);
      st != LDV_OK)
    return status_exit(st);
  if (const ldv_status st = ldv_server_start(server); st != LDV_OK) {
    ldv_server_free(server);
    return status_exit(st);
  }
  std::cerr << "serving " << root << " on http://" << host << ':' << ldv_server_port(server) << '\n';
  int sig = 0;
  sigwait(&signals, &sig);
  ldv_server_stop(server);
  ldv_server_free(server);
  return LDV_EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical and semantic divergence between two partisan tweet corpora"};
  app.set_version_flag("--version", std::string(ldv_version()));
  app.require_subcommand(1);

  Global g;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", g.sets, "Override as section.key=value (repeatable)");
    sub->add_option("-w,--workdir", g.workdir, "Working directory (paths.workdir)");
  };

  int code = LDV_EXIT_OK;
  ConfigHandle h;
  auto with_config = [&](auto&& fn) {
    return [&, fn] {
      code = load_config(g, h);
      if (code == LDV_EXIT_OK) code = fn(h.cfg);
    };
  };

  std::vector<std::string> stage_names;
  for (const char* const* s = ldv_stages(); *s; ++s) stage_names.emplace_back(*s);

  std::string stage;
  auto* run = app.add_subcommand("run", "Run one stage, or all of them in order");
  run->add_option("stage", stage, "Stage name or 'all'")
      ->required()
      ->check(CLI::IsMember([&] {
        auto v = stage_names;
        v.emplace_back("all");
        return v;
      }()));
  add_common(run);
  run->callback(with_config([&](const ldv_config* cfg) { return report(ldv_run(cfg, stage.c_str())); }));

  for (const auto& name : stage_names) {
    if (name == "annotate") continue;  // "annotate build"
    auto* sub = app.add_subcommand(name, "Run the " + name + " stage");
    add_common(sub);
    sub->callback(with_config([&, name](const ldv_config* cfg) { return report(ldv_run(cfg, name.c_str())); }));
  }
  auto* all = app.add_subcommand("all", "Run every stage in order");
  add_common(all);
  all->callback(with_config([&](const ldv_config* cfg) { return report(ldv_run(cfg, "all")); }));

  std::string fixture_dir;
  std::uint64_t fixture_seed = 7;
  std::size_t fixture_users = 0, fixture_tweets = 0;
  auto* fixture = app.add_subcommand("fixture", "Write a synthetic corpus with planted effects");
  fixture->add_option("dir", fixture_dir, "Output directory")->required();
  fixture->add_option("--seed", fixture_seed, "Generator seed");
  fixture->add_option("--users", fixture_users, "Users per side (0: default)");
  fixture->add_option("--tweets", fixture_tweets, "Tweets per side (0: default)");
  fixture->callback([&] {
    code = status_exit(ldv_make_fixture(fixture_dir.c_str(), fixture_seed, fixture_users, fixture_tweets));
  });

  auto* annotate = app.add_subcommand("annotate", "Pairwise usage annotation");
  annotate->require_subcommand(1);
  auto* build = annotate->add_subcommand("build", "Sample passages and write the session schedule");
  add_common(build);
  build->callback(with_config([&](const ldv_config* cfg) { return report(ldv_run(cfg, "annotate")); }));

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = annotate->add_subcommand("serve", "Serve the annotation API and UI bundle");
  add_common(serve_cmd);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0: any free port)")->check(CLI::Range(0, 65535));
  serve_cmd->callback(with_config([&](const ldv_config* cfg) { return serve(cfg, host, port); }));

  std::vector<std::string> annotators, targets;
  auto* score = annotate->add_subcommand("score", "Divergence and polysemy per target");
  add_common(score);
  score->add_option("--annotators", annotators, "Annotators to average (default: all)")->delimiter(',');
  score->callback(with_config([&](const ldv_config* cfg) {
    return report(ldv_annotate_score(cfg, join(annotators).c_str()));
  }));

  auto* llm = annotate->add_subcommand("llm", "Rate every pair with a chat-completion model");
  add_common(llm);
  llm->callback(with_config([&](const ldv_config* cfg) { return report(ldv_annotate_llm(cfg)); }));

  auto* agreement = annotate->add_subcommand("agreement", "Pairwise Spearman agreement between annotators");
  add_common(agreement);
  agreement->add_option("--annotators", annotators, "Annotators to compare (default: all)")->delimiter(',');
  agreement->add_option("--targets", targets, "Restrict to these targets")->delimiter(',');
  agreement->callback(with_config([&](const ldv_config* cfg) {
    return report(ldv_annotate_agreement(cfg, join(annotators).c_str(), join(targets).c_str()));
  }));

  auto* config = app.add_subcommand("config", "Inspect the resolved configuration");
  config->require_subcommand(1);
  auto* show = config->add_subcommand("show", "Print the resolved configuration");
  add_common(show);
  show->callback(with_config([&](const ldv_config* cfg) {
    char* text = nullptr;
    if (const ldv_status st = ldv_config_emit(cfg, &text); st != LDV_OK) return status_exit(st);
    std::cout << text;
    ldv_string_free(text);
    return static_cast<int>(LDV_EXIT_OK);
  }));
  auto* check = config->add_subcommand("check", "Validate the configuration");
  add_common(check);
  check->callback(with_config([&](const ldv_config*) {
    std::cout << "ok\n";
    return static_cast<int>(LDV_EXIT_OK);
  }));

  std::string text;
  auto* clean_text = app.add_subcommand("clean-text", "Apply the cleaning rules to one string");
  clean_text->add_option("text", text)->required();
  clean_text->callback([&] {
    char* out = nullptr;
    code = status_exit(ldv_clean_text(text.c_str(), &out));
    if (code == LDV_EXIT_OK) std::cout << out << '\n';
    ldv_string_free(out);
  });

  std::string lexicon;
  auto* polarity = app.add_subcommand("sentiment-score", "Compound sentiment score of one string");
  polarity->add_option("text", text)->required();
  polarity->add_option("--lexicon", lexicon, "Lexicon file (default: bundled)")->check(CLI::ExistingFile);
  polarity->callback([&] {
    ldv_sentiment* s = nullptr;
    code = status_exit(ldv_sentiment_new(lexicon.empty() ? nullptr : lexicon.c_str(), nullptr, &s));
    if (code != LDV_EXIT_OK) return;
    double compound = 0.0;
    code = status_exit(ldv_sentiment_score(s, text.c_str(), &compound));
    if (code == LDV_EXIT_OK) std::printf("%.4f\n", compound);
    ldv_sentiment_free(s);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? LDV_EXIT_OK : LDV_EXIT_USAGE;
  }
  return code;
}
