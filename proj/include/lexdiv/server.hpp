#pragma once

// HTTP API for live annotation sessions stored under a root directory as
// <root>/<session id>/{schedule.json, events.jsonl}.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "lexdiv/annotate.hpp"

namespace lexdiv::server {

namespace fs = std::filesystem;

class SessionStore {
 public:
  explicit SessionStore(fs::path root);
  // Opens on first use. Throws MissingInput for unknown or malformed ids.
  annotate::Session& get(const std::string& id);
  const fs::path& root() const { return root_; }
  static bool valid_id(std::string_view id);

 private:
  fs::path root_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<annotate::Session>> open_;
};

struct ApiRequest {
  std::string method;  // GET / POST
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-free dispatcher for:
//   GET  /api/session/{id}/next?annotator=A
//   POST /api/session/{id}/rating   {pair_id, annotator, value}
//   GET  /api/session/{id}/scores[?annotators=a,b]
// Errors come back as {"error": reason} with 400, 404 or 409.
ApiResponse handle(SessionStore& store, const ApiRequest& req);

class ApiServer {
 public:
  // static_dir, when set, is served at "/" (the annotation UI bundle).
  ApiServer(fs::path root, fs::path static_dir = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Serves until stop(); blocking.
  void run();
  // Serves on a background thread.
  void start();
  void stop();
  int port() const { return port_; }
  SessionStore& store() { return store_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SessionStore store_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace lexdiv::server
