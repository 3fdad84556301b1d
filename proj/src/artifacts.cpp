#include "lexdiv/artifacts.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include "json.hpp"
#include "lexdiv/error.hpp"

namespace lexdiv::artifacts {

namespace {

constexpr std::string_view kTempMarker = ".tmp.";

fs::path temp_path_for(const fs::path& path) {
  static std::atomic<unsigned> counter{0};
  std::string name = "." + path.filename().string() + std::string(kTempMarker) + std::to_string(::getpid()) + "." +
                     std::to_string(counter.fetch_add(1));
  return path.parent_path() / name;
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + parent.string() + ": " + ec.message());
}

void fsync_path(const fs::path& path, bool directory) {
  const int fd = ::open(path.c_str(), (directory ? O_RDONLY | O_DIRECTORY : O_RDONLY) | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void commit(const fs::path& tmp, const fs::path& path) {
  fsync_path(tmp, false);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot rename into " + path.string());
  }
  const fs::path parent = path.parent_path();
  fsync_path(parent.empty() ? fs::path(".") : parent, true);
}

}  // namespace

bool is_temp_name(std::string_view filename) {
  return !filename.empty() && filename.front() == '.' && filename.find(kTempMarker) != std::string_view::npos;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  write_atomic(path, [&](std::ostream& os) { os.write(content.data(), static_cast<std::streamsize>(content.size())); });
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  publish_atomic(path, [&](const fs::path& tmp) {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot write " + tmp.string());
    fn(os);
    os.flush();
    if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
  });
}

void publish_atomic(const fs::path& path, const std::function<void(const fs::path& tmp)>& fn) {
  ensure_parent(path);
  const fs::path tmp = temp_path_for(path);
  try {
    fn(tmp);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  if (!fs::exists(tmp)) fail(ErrorKind::Io, "writer produced no file for " + path.string());
  commit(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Runtime, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingInput, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::size_t remove_stale_temps(const fs::path& dir) {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return 0;
  for (auto it = fs::recursive_directory_iterator(dir, ec); it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    if (!is_temp_name(it->path().filename().string())) continue;
    std::error_code rm;
    if (fs::remove(it->path(), rm)) ++removed;
  }
  return removed;
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["seeds"] = seeds;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["input_hashes"] = input_hashes;
  j["output_hashes"] = output_hashes;
  j["notes"] = notes;
  j["wall_seconds"] = wall_seconds;
  j["started_at"] = started_at;
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", "");
    m.config_hash = j.value("config_hash", "");
    m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
    m.inputs = j.value("inputs", std::vector<std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
    m.output_hashes = j.value("output_hashes", std::map<std::string, std::string>{});
    m.notes = j.value("notes", std::map<std::string, std::string>{});
    m.wall_seconds = j.value("wall_seconds", 0.0);
    m.started_at = j.value("started_at", "");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("manifest: ") + e.what());
  }
  return m;
}

fs::path manifest_path(const fs::path& workdir, std::string_view command) {
  return workdir / "manifests" / (std::string(command) + ".json");
}

DirLock::DirLock(const fs::path& dir) : path_(dir / ".lexdiv.lock") {
  std::error_code ec;
  fs::create_directories(dir, ec);
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(ErrorKind::Io, "cannot open lock file " + path_.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::State, "another run holds " + path_.string());
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  if (::ftruncate(fd_, 0) == 0) {
    [[maybe_unused]] auto w = ::write(fd_, pid.data(), pid.size());
  }
}

DirLock::~DirLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace lexdiv::artifacts
