#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "tracknlu/http.hpp"

namespace tracknlu {

inline constexpr std::string_view kDefaultStopSequence = "\n###";

struct CompletionRequest {
  std::string prompt;
  std::string stop_sequence{kDefaultStopSequence};
  int max_tokens = 256;
  double temperature = 0.0;
  std::string model_name;
  /// Propagated caller deadline; the backend gives up once it passes.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct CompletionResult {
  std::string text;  // never contains the stop sequence
  std::int64_t latency_ms = 0;
  std::string backend_id;
  bool truncated = false;
};

/// Implementations must be safe for concurrent complete() calls.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Throws BackendError(precondition) for an empty prompt, negative
/// temperature or max_tokens < 1.
void check_request(const CompletionRequest& request);

/// Cuts `text` at the first occurrence of `stop` (no-op for an empty stop).
std::string cut_at_stop(std::string text, std::string_view stop);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

struct HttpBackendConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model = "text-davinci-002";
  RetryPolicy retry;
  std::chrono::milliseconds request_timeout{20000};
};

/// OpenAI-compatible POST <base_url>/completions client.
class HttpCompletionBackend final : public CompletionBackend {
 public:
  HttpCompletionBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport,
                        Sleeper sleep = real_sleeper());
  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpBackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleep_;
};

/// Replays canned completions keyed by the SHA-256 of the full prompt. A
/// prompt without a fixture is an error naming its hash.
class MockBackend final : public CompletionBackend {
 public:
  /// Fixtures are files named `<sha256>.txt` inside `dir`.
  explicit MockBackend(std::filesystem::path dir);
  /// In-memory fixtures keyed by prompt hash.
  explicit MockBackend(std::map<std::string, std::string> by_hash);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return id_; }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir,
                                            std::string_view prompt);

 private:
  std::optional<std::filesystem::path> dir_;
  std::string id_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> by_hash_;
};

/// Forwards to another backend and stores each completion as a mock fixture.
class RecordingBackend final : public CompletionBackend {
 public:
  RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::filesystem::path dir);
  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return inner_->id(); }
  std::size_t recorded() const;

 private:
  std::shared_ptr<CompletionBackend> inner_;
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::size_t recorded_ = 0;
};

/// Adapts a callable; handy for tests and offline responders.
class FunctionBackend final : public CompletionBackend {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  FunctionBackend(Fn fn, std::string id) : fn_(std::move(fn)), id_(std::move(id)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return id_; }

 private:
  Fn fn_;
  std::string id_;
};

/// "mock:DIR" -> MockBackend(DIR); "live" -> HttpCompletionBackend configured
/// from LLM_BASE_URL, LLM_API_KEY and LLM_MODEL.
std::shared_ptr<CompletionBackend> make_backend(std::string_view spec);

}  // namespace tracknlu
