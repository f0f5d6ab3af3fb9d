#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "gradekit/prompt.hpp"

namespace gradekit {

/// Connection settings for one chat-completion endpoint. Credentials are
/// looked up from the named environment variable at request time and are
/// never persisted.
struct BackendConfig {
  std::string endpoint_url;        // e.g. "https://api.example.com/v1" or "replay://dir"
  std::string model_name;
  double temperature = 0.0;        // zero keeps grading as repeatable as the model allows
  int max_output_tokens = 1024;
  std::string credential_source;   // environment variable name, may be empty
  double timeout_seconds = 60.0;
  int max_retries = 3;
};

/// One completion, as cached on disk (one JSON file per cache_key).
struct CompletionRecord {
  std::string cache_key;
  std::string model_name;
  double temperature = 0.0;
  std::string system_text;
  std::string user_text;
  std::string completion_text;
  std::int64_t latency_ms = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string timestamp;

  std::string to_json_text() const;
  static CompletionRecord from_json_text(const std::string& text);
};

/// Pure content hash over everything that can change a completion.
std::string completion_cache_key(const std::string& model_name, const std::string& system_text,
                                 const std::string& user_text, double temperature);

enum class GatewayErrorKind { Transient, Permanent, Timeout, ReplayMiss };

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, std::string message, int status = 0,
               std::string cache_key = {});
  GatewayErrorKind kind() const { return kind_; }
  int status() const { return status_; }
  const std::string& cache_key() const { return cache_key_; }
  bool retryable() const {
    return kind_ == GatewayErrorKind::Transient || kind_ == GatewayErrorKind::Timeout;
  }

 private:
  GatewayErrorKind kind_;
  int status_;
  std::string cache_key_;
};

struct CompletionRequest {
  std::string model;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string system_text;
  std::string user_text;
  double timeout_seconds = 60.0;
  std::string bearer_token;  // filled by the gateway, never logged
};

struct BackendReply {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply complete(const CompletionRequest& request) = 0;
};

/// Speaks the common chat-completions wire protocol:
/// POST {endpoint}/chat/completions with a system+user messages array.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string endpoint_url);
  BackendReply complete(const CompletionRequest& request) override;

 private:
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. "/v1"
};

/// Serves completions purely from a directory of CompletionRecord fixtures.
/// Unknown requests raise ReplayMiss naming the cache key.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::filesystem::path fixture_dir);
  BackendReply complete(const CompletionRequest& request) override;

 private:
  std::filesystem::path fixture_dir_;
};

/// Builds the backend for an endpoint URL ("replay://dir" or http(s)).
std::unique_ptr<Backend> make_backend(const std::string& endpoint_url);

/// Uniform completion interface: content-addressed response cache, retry with
/// exponential backoff for transient failures, and a bound on concurrent
/// in-flight requests. Cache writes are atomic, so the cache directory doubles
/// as a replay fixture directory. Safe to share across worker threads.
class Gateway {
 public:
  struct Options {
    std::filesystem::path cache_dir;  // empty disables caching
    int max_in_flight = 4;
    std::chrono::milliseconds backoff_base{250};
  };

  explicit Gateway(Options options);

  /// Returns the completion text for the bundle, consulting the cache first.
  /// On a miss the request goes to the backend for config.endpoint_url and the
  /// resulting CompletionRecord is persisted (when caching is enabled).
  std::string complete(const PromptBundle& bundle, const BackendConfig& config);

  // Test/audit hooks.
  std::int64_t network_calls() const { return network_calls_.load(); }
  std::int64_t cache_hits() const { return cache_hits_.load(); }
  void set_backend_for_testing(const std::string& endpoint_url, std::shared_ptr<Backend> backend);

 private:
  std::shared_ptr<Backend> backend_for(const std::string& endpoint_url);
  std::optional<CompletionRecord> cache_lookup(const std::string& key) const;
  void cache_store(const CompletionRecord& record) const;

  Options options_;
  std::mutex backends_mutex_;
  std::map<std::string, std::shared_ptr<Backend>> backends_;

  // in-flight bound
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int slots_in_use_ = 0;

  std::atomic<std::int64_t> network_calls_{0};
  std::atomic<std::int64_t> cache_hits_{0};
};

}  // namespace gradekit
