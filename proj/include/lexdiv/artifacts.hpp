#pragma once

// Durable file output: atomic replace-on-write, run manifests and the
// per-workdir lock.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexdiv::artifacts {

namespace fs = std::filesystem;

// Writes to a sibling temp file, fsyncs and renames over the target, so
// readers see either the old file or the complete new one.
void write_file_atomic(const fs::path& path, std::string_view content);
// Same, streaming: fn writes the content. Nothing is left behind if fn throws.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& fn);
// For outputs produced by other writers (e.g. two-file embeddings): the
// writer gets a temp path and the result is renamed into place.
void publish_atomic(const fs::path& path, const std::function<void(const fs::path& tmp)>& fn);

std::string read_file(const fs::path& path);
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const fs::path& path);

// Removes temp files left by interrupted writes in dir.
std::size_t remove_stale_temps(const fs::path& dir);
bool is_temp_name(std::string_view filename);

struct Manifest {
  std::string command;
  std::string version;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> input_hashes;
  std::map<std::string, std::string> output_hashes;
  std::map<std::string, std::string> notes;
  double wall_seconds = 0.0;
  std::string started_at;

  std::string to_json() const;
  static Manifest from_json(std::string_view json);
};

fs::path manifest_path(const fs::path& workdir, std::string_view command);

// Exclusive advisory lock on <dir>/.lexdiv.lock, held for the object's
// lifetime. Throws State when another process holds it.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
  fs::path path_;
};

}  // namespace lexdiv::artifacts
