#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "gradekit/gateway.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

#include "gradekit/util.hpp"

namespace gradekit {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string completion_cache_key(const std::string& model_name, const std::string& system_text,
                                 const std::string& user_text, double temperature) {
  // Length-prefixed fields so no two inputs can collide by concatenation.
  std::string material;
  auto feed = [&material](std::string_view field) {
    material += std::to_string(field.size());
    material.push_back(':');
    material += field;
    material.push_back('\n');
  };
  feed(model_name);
  feed(system_text);
  feed(user_text);
  feed(shortest_double(temperature));
  return sha256_hex(material);
}

std::string CompletionRecord::to_json_text() const {
  json doc;
  doc["cache_key"] = cache_key;
  doc["model_name"] = model_name;
  doc["temperature"] = temperature;
  doc["system_text"] = system_text;
  doc["user_text"] = user_text;
  doc["completion_text"] = completion_text;
  doc["latency_ms"] = latency_ms;
  doc["prompt_tokens"] = prompt_tokens;
  doc["completion_tokens"] = completion_tokens;
  doc["timestamp"] = timestamp;
  return doc.dump(2) + "\n";
}

CompletionRecord CompletionRecord::from_json_text(const std::string& text) {
  json doc = json::parse(text);
  CompletionRecord record;
  record.cache_key = doc.at("cache_key").get<std::string>();
  record.model_name = doc.at("model_name").get<std::string>();
  record.temperature = doc.at("temperature").get<double>();
  record.system_text = doc.at("system_text").get<std::string>();
  record.user_text = doc.at("user_text").get<std::string>();
  record.completion_text = doc.at("completion_text").get<std::string>();
  record.latency_ms = doc.value("latency_ms", std::int64_t{0});
  record.prompt_tokens = doc.value("prompt_tokens", std::int64_t{0});
  record.completion_tokens = doc.value("completion_tokens", std::int64_t{0});
  record.timestamp = doc.value("timestamp", std::string());
  return record;
}

GatewayError::GatewayError(GatewayErrorKind kind, std::string message, int status,
                           std::string cache_key)
    : std::runtime_error(std::move(message)), kind_(kind), status_(status),
      cache_key_(std::move(cache_key)) {}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(std::string endpoint_url) {
  // Split scheme://host[:port]/prefix into origin and path prefix.
  size_t scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw GatewayError(GatewayErrorKind::Permanent,
                       "endpoint url lacks a scheme: " + endpoint_url);
  }
  size_t path_start = endpoint_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = endpoint_url;
    path_prefix_.clear();
  } else {
    origin_ = endpoint_url.substr(0, path_start);
    path_prefix_ = endpoint_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

BackendReply HttpBackend::complete(const CompletionRequest& request) {
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", request.system_text}},
      json{{"role", "user"}, {"content", request.user_text}},
  });

  httplib::Client client(origin_);
  auto timeout_s = static_cast<time_t>(request.timeout_seconds);
  auto timeout_us = static_cast<time_t>((request.timeout_seconds - double(timeout_s)) * 1e6);
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);
  client.set_write_timeout(timeout_s, timeout_us);

  httplib::Headers headers;
  if (!request.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + request.bearer_token);
  }

  auto result = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                            "application/json");
  if (!result) {
    auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw GatewayError(GatewayErrorKind::Timeout,
                         "request to " + origin_ + " timed out (" + httplib::to_string(err) + ")");
    }
    throw GatewayError(GatewayErrorKind::Transient,
                       "request to " + origin_ + " failed: " + httplib::to_string(err));
  }
  int status = result->status;
  if (status == 408 || status == 429 || status >= 500) {
    throw GatewayError(GatewayErrorKind::Transient,
                       "endpoint returned HTTP " + std::to_string(status), status);
  }
  if (status >= 400) {
    throw GatewayError(GatewayErrorKind::Permanent,
                       "endpoint returned HTTP " + std::to_string(status), status);
  }

  json payload = json::parse(result->body, nullptr, false);
  if (payload.is_discarded() || !payload.contains("choices") || payload["choices"].empty()) {
    throw GatewayError(GatewayErrorKind::Permanent, "malformed completion payload", status);
  }
  BackendReply reply;
  const json& message = payload["choices"][0].value("message", json::object());
  reply.text = message.value("content", std::string());
  if (payload.contains("usage") && payload["usage"].is_object()) {
    reply.prompt_tokens = payload["usage"].value("prompt_tokens", std::int64_t{0});
    reply.completion_tokens = payload["usage"].value("completion_tokens", std::int64_t{0});
  }
  return reply;
}

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(fs::path fixture_dir) : fixture_dir_(std::move(fixture_dir)) {}

BackendReply ReplayBackend::complete(const CompletionRequest& request) {
  std::string key = completion_cache_key(request.model, request.system_text, request.user_text,
                                         request.temperature);
  fs::path file = fixture_dir_ / (key + ".json");
  if (!fs::exists(file)) {
    throw GatewayError(GatewayErrorKind::ReplayMiss,
                       "no replay fixture for cache_key " + key + " under " +
                           fixture_dir_.string(),
                       0, key);
  }
  CompletionRecord record = CompletionRecord::from_json_text(read_file(file));
  BackendReply reply;
  reply.text = record.completion_text;
  reply.prompt_tokens = record.prompt_tokens;
  reply.completion_tokens = record.completion_tokens;
  return reply;
}

std::unique_ptr<Backend> make_backend(const std::string& endpoint_url) {
  constexpr std::string_view kReplayScheme = "replay://";
  if (endpoint_url.rfind(kReplayScheme, 0) == 0) {
    return std::make_unique<ReplayBackend>(endpoint_url.substr(kReplayScheme.size()));
  }
  return std::make_unique<HttpBackend>(endpoint_url);
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(Options options) : options_(std::move(options)) {
  if (options_.max_in_flight < 1) {
    throw std::invalid_argument("max_in_flight must be at least 1");
  }
  if (!options_.cache_dir.empty()) {
    fs::create_directories(options_.cache_dir);
  }
}

std::shared_ptr<Backend> Gateway::backend_for(const std::string& endpoint_url) {
  std::lock_guard lock(backends_mutex_);
  auto it = backends_.find(endpoint_url);
  if (it != backends_.end()) return it->second;
  std::shared_ptr<Backend> backend = make_backend(endpoint_url);
  backends_.emplace(endpoint_url, backend);
  return backend;
}

void Gateway::set_backend_for_testing(const std::string& endpoint_url,
                                      std::shared_ptr<Backend> backend) {
  std::lock_guard lock(backends_mutex_);
  backends_[endpoint_url] = std::move(backend);
}

std::optional<CompletionRecord> Gateway::cache_lookup(const std::string& key) const {
  if (options_.cache_dir.empty()) return std::nullopt;
  fs::path file = options_.cache_dir / (key + ".json");
  if (!fs::exists(file)) return std::nullopt;
  return CompletionRecord::from_json_text(read_file(file));
}

void Gateway::cache_store(const CompletionRecord& record) const {
  if (options_.cache_dir.empty()) return;
  fs::path file = options_.cache_dir / (record.cache_key + ".json");
  write_file_atomic(file, record.to_json_text());
}

std::string Gateway::complete(const PromptBundle& bundle, const BackendConfig& config) {
  const std::string key = completion_cache_key(config.model_name, bundle.system_text,
                                               bundle.user_text, config.temperature);
  if (auto cached = cache_lookup(key)) {
    cache_hits_.fetch_add(1);
    return cached->completion_text;
  }

  CompletionRequest request;
  request.model = config.model_name;
  request.temperature = config.temperature;
  request.max_output_tokens = config.max_output_tokens;
  request.system_text = bundle.system_text;
  request.user_text = bundle.user_text;
  request.timeout_seconds = config.timeout_seconds;
  if (!config.credential_source.empty()) {
    if (const char* token = std::getenv(config.credential_source.c_str())) {
      request.bearer_token = token;
    }
  }

  std::shared_ptr<Backend> backend = backend_for(config.endpoint_url);

  // in-flight slot
  {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [this] { return slots_in_use_ < options_.max_in_flight; });
    ++slots_in_use_;
  }
  struct SlotRelease {
    Gateway* gw;
    ~SlotRelease() {
      std::lock_guard lock(gw->slots_mutex_);
      --gw->slots_in_use_;
      gw->slots_cv_.notify_one();
    }
  } release{this};

  BackendReply reply;
  auto started = std::chrono::steady_clock::now();
  int attempt = 0;
  while (true) {
    try {
      network_calls_.fetch_add(1);
      reply = backend->complete(request);
      break;
    } catch (const GatewayError& e) {
      if (!e.retryable() || attempt >= config.max_retries) {
        throw;
      }
      auto delay = options_.backoff_base * (1LL << attempt);
      std::this_thread::sleep_for(delay);
      ++attempt;
    }
  }
  auto elapsed = std::chrono::steady_clock::now() - started;

  CompletionRecord record;
  record.cache_key = key;
  record.model_name = config.model_name;
  record.temperature = config.temperature;
  record.system_text = bundle.system_text;
  record.user_text = bundle.user_text;
  record.completion_text = reply.text;
  record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  record.prompt_tokens = reply.prompt_tokens;
  record.completion_tokens = reply.completion_tokens;
  record.timestamp = iso8601_now();
  cache_store(record);
  return reply.text;
}

}  // namespace gradekit
