#include "lexdiv/server.hpp"

#include "httplib.h"
#include "json.hpp"
#include "lexdiv/error.hpp"

namespace lexdiv::server {

using json = nlohmann::ordered_json;

namespace {

ApiResponse error_response(int status, const std::string& reason) {
  json j;
  j["error"] = reason;
  return {status, j.dump(), "application/json"};
}

ApiResponse ok_json(const json& j) { return {200, j.dump(-1, ' ', false, json::error_handler_t::replace), "application/json"}; }

// "/api/session/{id}/{action}" -> (id, action)
bool split_route(const std::string& path, std::string& id, std::string& action) {
  static const std::string prefix = "/api/session/";
  if (path.rfind(prefix, 0) != 0) return false;
  const std::string rest = path.substr(prefix.size());
  const auto slash = rest.find('/');
  if (slash == std::string::npos) return false;
  id = rest.substr(0, slash);
  action = rest.substr(slash + 1);
  return !id.empty() && action.find('/') == std::string::npos;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ApiResponse next(annotate::Session& session, const ApiRequest& req) {
  const auto it = req.query.find("annotator");
  if (it == req.query.end() || it->second.empty()) return error_response(400, "annotator query parameter required");
  const std::string& who = it->second;
  const auto progress = session.progress(who);
  json p{{"done", progress.done}, {"total", progress.total}};
  const auto idx = session.next_pair(who);
  if (!idx) return ok_json(json{{"done", true}, {"progress", p}});
  const auto& s = session.schedule();
  const auto& pair = s.pairs[*idx];
  json j;
  j["pair_id"] = pair.pair_id;
  j["target"] = pair.target;
  j["passage_a"] = s.passages[pair.passage_a].text_window;
  j["passage_b"] = s.passages[pair.passage_b].text_window;
  j["progress"] = p;
  return ok_json(j);
}

ApiResponse rating(annotate::Session& session, const ApiRequest& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    return error_response(400, "body is not valid JSON");
  }
  if (!body.is_object()) return error_response(400, "body must be an object");
  if (!body.contains("pair_id") || !body["pair_id"].is_string()) return error_response(400, "pair_id missing");
  if (!body.contains("annotator") || !body["annotator"].is_string()) return error_response(400, "annotator missing");
  if (!body.contains("value") || !body["value"].is_number_integer()) return error_response(400, "value must be an integer");
  try {
    session.record_rating(body["pair_id"].get<std::string>(), body["annotator"].get<std::string>(),
                          body["value"].get<int>());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  return ok_json(json{{"ok", true}});
}

ApiResponse scores(annotate::Session& session, const ApiRequest& req) {
  std::vector<std::string> annotators;
  if (const auto it = req.query.find("annotators"); it != req.query.end()) {
    annotators = split_list(it->second);
  } else {
    for (const auto& a : session.annotators()) annotators.push_back(a);
  }
  if (annotators.empty()) return error_response(409, "no ratings yet");
  try {
    const auto result = annotate::session_scores(session.schedule(), session.ratings(), annotators);
    return {200, annotate::scores_to_json(result), "application/json"};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::State) return error_response(409, e.what());
    return error_response(400, e.what());
  }
}

}  // namespace

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {}

bool SessionStore::valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

annotate::Session& SessionStore::get(const std::string& id) {
  if (!valid_id(id)) fail(ErrorKind::MissingInput, "invalid session id");
  std::lock_guard lock(mutex_);
  auto it = open_.find(id);
  if (it != open_.end()) return *it->second;
  auto session = std::make_unique<annotate::Session>(annotate::Session::open(root_ / id));
  auto& ref = *session;
  open_.emplace(id, std::move(session));
  return ref;
}

ApiResponse handle(SessionStore& store, const ApiRequest& req) {
  std::string id, action;
  if (!split_route(req.path, id, action)) return error_response(404, "no such endpoint");
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  if (!((action == "next" && get) || (action == "scores" && get) || (action == "rating" && post))) {
    if (action == "next" || action == "scores" || action == "rating") return error_response(405, "method not allowed");
    return error_response(404, "no such endpoint");
  }
  annotate::Session* session = nullptr;
  try {
    session = &store.get(id);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MissingInput) return error_response(404, "unknown session " + id);
    return error_response(500, e.what());
  }
  try {
    if (action == "next") return next(*session, req);
    if (action == "rating") return rating(*session, req);
    return scores(*session, req);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

struct ApiServer::Impl {
  httplib::Server http;
};

ApiServer::ApiServer(fs::path root, fs::path static_dir) : impl_(std::make_unique<Impl>()), store_(root) {
  if (!fs::is_directory(root)) fail(ErrorKind::MissingInput, "session root not found: " + root.string());
  auto dispatch = [this](const httplib::Request& r, httplib::Response& w) {
    ApiRequest req;
    req.method = r.method;
    req.path = r.path;
    for (const auto& [k, v] : r.params) req.query.emplace(k, v);
    req.body = r.body;
    const ApiResponse res = handle(store_, req);
    w.status = res.status;
    w.set_content(res.body, res.content_type);
  };
  impl_->http.Get(R"(/api/.*)", dispatch);
  impl_->http.Post(R"(/api/.*)", dispatch);
  if (!static_dir.empty()) {
    if (!impl_->http.set_mount_point("/", static_dir.string()))
      fail(ErrorKind::MissingInput, "static directory not found: " + static_dir.string());
  }
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->http.bind_to_any_port(host);
  } else if (impl_->http.bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) fail(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port_;
}

void ApiServer::run() {
  if (port_ < 0) fail(ErrorKind::State, "server not bound");
  impl_->http.listen_after_bind();
}

void ApiServer::start() {
  if (port_ < 0) fail(ErrorKind::State, "server not bound");
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void ApiServer::stop() {
  if (impl_) impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace lexdiv::server
