#include "lexdiv/llm.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lexdiv/artifacts.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::llm {

using json = nlohmann::ordered_json;

void LlmConfig::validate() const {
  require(!base_url.empty(), "llm: base_url is empty");
  require(!model.empty(), "llm: model is empty");
  require(!api_key_env.empty(), "llm: api_key_env is empty");
  require(attempts >= 1 && attempts <= 20, "llm: attempts must be in 1..20");
  require(temperature >= 0.0 && temperature <= 2.0, "llm: temperature must be in [0, 2]");
  require(timeout_seconds >= 1, "llm: timeout must be positive");
  require(concurrency >= 1 && concurrency <= 64, "llm: concurrency must be in 1..64");
}

std::string default_prompt_path() { return std::string(LEXDIV_DEFAULT_DATA_DIR) + "/durel_prompt.txt"; }

std::string load_prompt_template(const std::string& path) {
  std::string text = artifacts::read_file(path.empty() ? default_prompt_path() : path);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.pop_back();
  if (text.empty()) fail(ErrorKind::Parse, "prompt template is empty");
  return text;
}

std::string mark_target(std::string_view passage, std::string_view target) {
  const auto pos = annotate::find_target(passage, target);
  if (!pos) return std::string(passage);
  const std::u32string cps = utf8::decode(passage);
  std::size_t len = utf8::decode(target).size();
  // Take in a plural ending so the tag covers the whole word.
  auto boundary = [&](std::size_t k) {
    return k >= cps.size() || !(utf8::is_letter(cps[k]) || (cps[k] >= U'0' && cps[k] <= U'9'));
  };
  const std::size_t e = *pos + len;
  auto lower_at = [&](std::size_t k, char32_t c) { return k < cps.size() && (cps[k] | 0x20) == c; };
  if (!boundary(e)) {
    if (lower_at(e, U's') && boundary(e + 1)) len += 1;
    else if (lower_at(e, U'e') && lower_at(e + 1, U's') && boundary(e + 2)) len += 2;
  }
  std::string out = utf8::encode(std::u32string_view(cps).substr(0, *pos));
  out += "<x>";
  out += utf8::encode(std::u32string_view(cps).substr(*pos, len));
  out += "</x>";
  out += utf8::encode(std::u32string_view(cps).substr(*pos + len));
  return out;
}

std::string build_prompt(std::string_view tmpl, std::string_view passage_a, std::string_view passage_b,
                         std::string_view target) {
  std::string out(tmpl);
  out += "\n\nA: ";
  out += mark_target(passage_a, target);
  out += "\nB: ";
  out += mark_target(passage_b, target);
  return out;
}

std::optional<int> parse_rating(std::string_view s) {
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < s.size() && s[k] >= '0' && s[k] <= '9'; };
  while (i < s.size()) {
    if (!digit(i)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (digit(i)) ++i;
    const std::size_t run = i - start;
    // "2.5" and "3,5" are numbers, not ratings.
    bool fractional = false;
    if (i + 1 < s.size() && (s[i] == '.' || s[i] == ',') && digit(i + 1)) {
      fractional = true;
      ++i;
      while (digit(i)) ++i;
    }
    const bool after_decimal = start >= 2 && (s[start - 1] == '.' || s[start - 1] == ',') && digit(start - 2);
    if (run == 1 && !fractional && !after_decimal) {
      const int v = s[start] - '0';
      if (v >= 1 && v <= 4) return v;
    }
  }
  return std::nullopt;
}

std::string request_json(const ChatRequest& req) {
  json j;
  j["model"] = req.model;
  j["temperature"] = req.temperature;
  j["messages"] = json::array({json{{"role", "user"}, {"content", req.prompt}}});
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<std::string> extract_content(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& msg = j.at("choices").at(0).at("message").at("content");
    if (!msg.is_string()) return std::nullopt;
    return msg.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

HttpChatClient::HttpChatClient(const LlmConfig& config) : timeout_seconds_(config.timeout_seconds) {
  config.validate();
  const char* key = std::getenv(config.api_key_env.c_str());
  if (!key || !*key) fail(ErrorKind::InvalidArgument, "environment variable " + config.api_key_env + " is not set");
  key_ = key;

  const std::string& url = config.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::InvalidArgument, "llm: base_url needs a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") fail(ErrorKind::InvalidArgument, "llm: unsupported scheme " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") fail(ErrorKind::InvalidArgument, "llm: built without TLS support");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
}

ChatResponse HttpChatClient::complete(const ChatRequest& req) {
  ChatResponse out;
  httplib::Client cli(origin_);
  cli.set_connection_timeout(timeout_seconds_);
  cli.set_read_timeout(timeout_seconds_);
  cli.set_write_timeout(timeout_seconds_);
  httplib::Headers headers{{"Authorization", "Bearer " + key_}};
  auto res = cli.Post(path_, headers, request_json(req), "application/json");
  if (!res) {
    out.error = "transport: " + httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  if (res->status != 200) {
    out.error = "http status " + std::to_string(res->status);
    return out;
  }
  const auto content = extract_content(res->body);
  if (!content) {
    out.error = "response has no message content";
    return out;
  }
  out.ok = true;
  out.content = *content;
  return out;
}

ScriptedClient::ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {
  require(!replies_.empty(), "ScriptedClient needs at least one reply");
}

ChatResponse ScriptedClient::complete(const ChatRequest& req) {
  std::lock_guard lock(mutex_);
  prompts_.push_back(req.prompt);
  const std::string& reply = replies_[std::min(next_, replies_.size() - 1)];
  ++next_;
  ChatResponse out;
  if (reply == "!fail") {
    out.error = "transport: scripted failure";
    return out;
  }
  out.ok = true;
  out.status = 200;
  json body;
  body["choices"] = json::array({json{{"message", {{"role", "assistant"}, {"content", reply}}}}});
  out.body = body.dump();
  out.content = reply;
  return out;
}

std::vector<std::string> ScriptedClient::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::size_t ScriptedClient::calls() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::optional<annotate::Rating> llm_rate(annotate::Session& session, std::size_t pair_index, ChatClient& client,
                                         const LlmConfig& config, std::string_view prompt_template) {
  const auto& schedule = session.schedule();
  require(pair_index < schedule.pairs.size(), "llm_rate: pair index out of range");
  const auto& pair = schedule.pairs[pair_index];
  ChatRequest req;
  req.model = config.model;
  req.temperature = config.temperature;
  req.prompt = build_prompt(prompt_template, schedule.passages[pair.passage_a].text_window,
                            schedule.passages[pair.passage_b].text_window, pair.target);
  const std::string request_body = request_json(req);

  std::string reason = "no attempts";
  for (int attempt = 1; attempt <= config.attempts; ++attempt) {
    const ChatResponse res = client.complete(req);
    session.record_exchange(pair.pair_id, config.model, request_body, res.ok ? res.body : res.error + "\n" + res.body);
    if (!res.ok) {
      reason = res.error;
      continue;
    }
    if (const auto v = parse_rating(res.content)) return session.record_rating(pair.pair_id, config.model, *v);
    reason = "unparseable reply";
  }
  session.record_failure(pair.pair_id, config.model,
                         reason + " after " + std::to_string(config.attempts) + " attempts");
  return std::nullopt;
}

RateSummary rate_all(annotate::Session& session, ChatClient& client, const LlmConfig& config,
                     std::string_view prompt_template) {
  config.validate();
  const auto& pairs = session.schedule().pairs;
  const auto failed_before = session.failed(config.model);
  RateSummary summary;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (session.rating(pairs[i].pair_id, config.model) || failed_before.count(pairs[i].pair_id))
      ++summary.skipped;
    else
      pending.push_back(i);
  }

  std::atomic<std::size_t> cursor{0}, rated{0}, failed{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= pending.size()) return;
      try {
        if (llm_rate(session, pending[k], client, config, prompt_template))
          ++rated;
        else
          ++failed;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        cursor = pending.size();
        return;
      }
    }
  };
  const std::size_t n_threads = std::min(config.concurrency, std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  summary.rated = rated;
  summary.failed = failed;
  return summary;
}

}  // namespace lexdiv::llm
