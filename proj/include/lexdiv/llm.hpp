#pragma once

// Machine annotation through an OpenAI-compatible chat completion endpoint.
// The API key is read from an environment variable at client construction
// and never stored in configuration or logs.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexdiv/annotate.hpp"

namespace lexdiv::llm {

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4-0613";
  std::string api_key_env = "LEXDIV_LLM_API_KEY";
  std::string prompt_path;  // empty: bundled template
  int attempts = 3;
  double temperature = 0.0;
  int timeout_seconds = 60;
  std::size_t concurrency = 4;

  void validate() const;
};

std::string default_prompt_path();
std::string load_prompt_template(const std::string& path = "");

// Wraps the first usable occurrence of target in <x></x>; unchanged when
// the target is not found.
std::string mark_target(std::string_view passage, std::string_view target);
std::string build_prompt(std::string_view tmpl, std::string_view passage_a, std::string_view passage_b,
                         std::string_view target);

// First standalone single digit in 1..4; digits inside longer numbers or
// decimals are skipped.
std::optional<int> parse_rating(std::string_view response);

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
};

// Body sent to the endpoint.
std::string request_json(const ChatRequest& req);
// Assistant message content of a chat completion body.
std::optional<std::string> extract_content(std::string_view body);

struct ChatResponse {
  bool ok = false;       // transport and HTTP status fine
  int status = 0;
  std::string body;      // raw response body, archived
  std::string content;   // assistant text when ok
  std::string error;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Must be safe to call from several threads.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

class HttpChatClient final : public ChatClient {
 public:
  // Throws InvalidArgument when the key variable is unset or the URL is malformed.
  explicit HttpChatClient(const LlmConfig& config);
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // .../chat/completions
  std::string key_;
  int timeout_seconds_;
};

// Replays canned replies in order (cycling the last one); "!fail" entries
// simulate transport failures. Records every prompt it receives.
class ScriptedClient final : public ChatClient {
 public:
  explicit ScriptedClient(std::vector<std::string> replies);
  ChatResponse complete(const ChatRequest& req) override;
  std::vector<std::string> prompts() const;
  std::size_t calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> replies_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
};

// Rates one pair as annotator config.model. Every attempt is archived as an
// llm_exchange event; after the last failed attempt the pair is recorded as
// machine_failed and nullopt returned.
std::optional<annotate::Rating> llm_rate(annotate::Session& session, std::size_t pair_index, ChatClient& client,
                                         const LlmConfig& config, std::string_view prompt_template);

struct RateSummary {
  std::size_t rated = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;  // already rated or failed before this run
};

// All pending pairs, up to config.concurrency at a time.
RateSummary rate_all(annotate::Session& session, ChatClient& client, const LlmConfig& config,
                     std::string_view prompt_template);

}  // namespace lexdiv::llm
