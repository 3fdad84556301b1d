#pragma once

// Pipeline configuration: a TOML-style file of [section] headers and
// key = value lines, flattened to "section.key". Precedence is
// flag overrides > file > defaults.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexdiv/corpus.hpp"
#include "lexdiv/delineate.hpp"
#include "lexdiv/embed.hpp"
#include "lexdiv/lexstats.hpp"
#include "lexdiv/llm.hpp"

namespace lexdiv::config {

using KeyValues = std::map<std::string, std::string>;

// Throws Parse with the line number on malformed input.
KeyValues parse_toml(std::string_view text);
std::string emit_toml(const KeyValues& kv);
KeyValues load_file(const std::string& path);
// "section.key=value" -> entry; throws InvalidArgument otherwise.
std::pair<std::string, std::string> parse_assignment(std::string_view arg);
// Keys that look like secrets are refused anywhere in a config.
bool is_secret_key(std::string_view key);

struct PipelineConfig {
  // [paths]
  std::string workdir = ".";
  std::string registry;
  std::vector<std::string> followers;
  std::string profiles;
  std::string tweets;
  std::string lexicon;        // empty: bundled data
  std::string emoji_lexicon;  // empty: bundled data
  std::string lemma_exceptions;
  std::string ui_dir;

  // [window]
  DateRange window{{2021, 2, 1}, {2021, 9, 7}};

  // [admission]
  delineate::AdmissionRules admission;
  std::size_t tweet_cap = 700;
  std::size_t tally_memory_users = 1u << 22;

  // [freq], [embed]
  lexstats::EligibilityProfile freq = lexstats::EligibilityProfile::freq();
  lexstats::EligibilityProfile embed_profile = lexstats::EligibilityProfile::embed();
  embed::EmbeddingParams embedding;
  bool center = true;
  // [tune]: comma lists; any non-empty list turns on the sweep.
  std::vector<int> tune_dim;
  std::vector<int> tune_window;
  std::vector<int> tune_epochs;
  std::vector<int> tune_min_count;

  // [sentiment]
  std::string granularity = "weekly";
  std::size_t permutations = 10000;

  // [topics], [classify]
  double dbscan_eps = 0.0;  // 0: elbow heuristic
  std::size_t dbscan_min_pts = 10;
  std::size_t keywords = 10;
  std::size_t map_max_docs = 5000;
  std::size_t bootstrap = 100;
  double train_fraction = 0.8;
  double ridge_scale = 1e-4;

  // [annotate]
  std::string session = "main";
  std::vector<std::string> targets;  // empty: most divergent
  std::size_t n_targets = 8;

  llm::LlmConfig llm;

  // [seeds]
  std::uint64_t seed = 1;

  static PipelineConfig defaults();
  KeyValues to_kv() const;
  // Unknown keys and out-of-bounds values throw InvalidArgument.
  static PipelineConfig from_kv(const KeyValues& kv);
  void validate() const;
  // Named stream seed derived from the master seed.
  std::uint64_t seed_for(std::string_view stage) const;
  std::string hash() const;
};

PipelineConfig resolve(const std::optional<std::string>& file, const KeyValues& overrides);

}  // namespace lexdiv::config
