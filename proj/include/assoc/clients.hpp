#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace assoc {

std::string sha256_hex(std::string_view data);

// Content-addressed response store: key -> text. Keys are SHA-256 digests of
// the request. With a directory the store persists one file per key;
// without one it lives in memory. Writes are serialized.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& value);
  bool persistent() const { return dir_.has_value(); }

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> memory_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{10000};
};

// Calls `attempt` until it returns, retrying on TransportError with
// exponential backoff. Other exceptions propagate immediately.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& attempt) -> decltype(attempt());

struct WikiLookupResult {
  std::string query;
  std::optional<std::string> matched_title;
  bool via_search_redirect = false;

  bool operator==(const WikiLookupResult&) const = default;
};

class WikiClient {
 public:
  virtual ~WikiClient() = default;
  virtual WikiLookupResult lookup(const std::string& word) = 0;
};

struct WikiConfig {
  std::string base_url = "https://de.wikipedia.org";
  RetryPolicy retry;
  std::string user_agent = "assocnorms/1.0";
};

// REST page summary for exact titles, then the opensearch API with
// redirect resolution. 404 on the title endpoint is a miss, not an error.
class HttpWikiClient : public WikiClient {
 public:
  HttpWikiClient(WikiConfig config, ResponseCache* cache);
  WikiLookupResult lookup(const std::string& word) override;

  std::int64_t network_calls() const { return network_calls_.load(); }

 private:
  WikiLookupResult fetch(const std::string& word);

  WikiConfig config_;
  ResponseCache* cache_;
  std::atomic<std::int64_t> network_calls_{0};
};

struct LlmCorrectionRequest {
  std::string cue;
  std::array<std::string, 3> responses;  // exactly one equals kMask
  std::string incorrect;
  double temperature = 0.0;
  std::string model_id;
};

inline constexpr std::string_view kMask = "WORD";

struct Prompt {
  std::string system;
  std::string user;
};

extern const std::string_view kCorrectionSystemPrompt;

// Fills the correction template. Throws ConfigError unless exactly one
// response position holds the mask.
Prompt build_prompt(const LlmCorrectionRequest& request);

// Masks `position` of `responses` and records the original text as the
// misspelled response.
LlmCorrectionRequest make_correction_request(std::string cue, std::array<std::string, 3> responses,
                                             std::size_t position, std::string model_id);

// Removes surrounding whitespace and quotation marks from a model reply.
std::string strip_reply(std::string_view reply);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string correct(const LlmCorrectionRequest& request) = 0;
};

struct LlmConfig {
  // Chat-completion endpoint, e.g. http://localhost:11434/v1/chat/completions
  std::string url = "http://localhost:11434/v1/chat/completions";
  std::string model = "gpt-oss:120b";
  std::string api_key;  // sent as a bearer token when non-empty
  RetryPolicy retry;
};

class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(LlmConfig config, ResponseCache* cache);
  std::string correct(const LlmCorrectionRequest& request) override;

  std::int64_t network_calls() const { return network_calls_.load(); }
  const LlmConfig& config() const { return config_; }

 private:
  LlmConfig config_;
  ResponseCache* cache_;
  std::atomic<std::int64_t> network_calls_{0};
};

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/' or is empty
};

UrlParts split_url(std::string_view url);
std::string percent_encode(std::string_view s);

}  // namespace assoc

#include "assoc/detail/retry.hpp"
