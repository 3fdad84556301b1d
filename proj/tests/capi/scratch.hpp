#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace scratch {

namespace fs = std::filesystem;

class Dir {
 public:
  Dir() {
    std::string tmpl = (fs::temp_directory_path() / "lexdiv-capi-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~Dir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Dir(const Dir&) = delete;
  Dir& operator=(const Dir&) = delete;
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Small-run overrides shared by the C API and CLI end-to-end tests.
inline const std::pair<const char*, const char*> kSmallRun[] = {
    {"freq.min_total", "20"},        {"freq.min_either", "5"},     {"freq.min_users", "5"},
    {"embed.min_both", "5"},         {"embed.dim", "16"},          {"embed.epochs", "2"},
    {"embed.min_count", "5"},        {"embed.buckets", "20000"},   {"embed.negative_table", "100000"},
    {"embed.workers", "1"},          {"sentiment.permutations", "200"}, {"classify.bootstrap", "5"},
    {"topics.map_max_docs", "300"},  {"annotate.targets", "kumo"}, {"annotate.n_targets", "1"},
};

}  // namespace scratch
