#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lexdiv/annotate.hpp"
#include "lexdiv/rng.hpp"

namespace testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

fs::path data_path(const std::string& name);
std::string slurp(const fs::path& p);
void spit(const fs::path& p, const std::string& content);
std::vector<std::string> lines_of(const std::string& text);

// Random UTF-8 mixing ASCII, punctuation, emoji with modifiers, URLs,
// mentions, times and letter runs.
std::string random_tweet_text(lexdiv::Rng& rng, std::size_t max_pieces = 24);

// Targets named t0, t1, ... with 20 left and 20 right placeholder passages.
std::vector<lexdiv::annotate::TargetPassages> synthetic_targets(std::size_t n);

}  // namespace testing
