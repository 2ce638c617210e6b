#include "tracknlu/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/sha.h>

namespace tracknlu {

namespace fs = std::filesystem;

void check_request(const CompletionRequest& request) {
  if (request.prompt.empty()) throw BackendError(ErrorKind::precondition, "prompt is empty");
  if (!(request.temperature >= 0)) {
    throw BackendError(ErrorKind::precondition, "temperature must be >= 0");
  }
  if (request.max_tokens < 1) throw BackendError(ErrorKind::precondition, "max_tokens must be >= 1");
}

std::string cut_at_stop(std::string text, std::string_view stop) {
  if (stop.empty()) return text;
  if (const auto pos = text.find(stop); pos != std::string::npos) text.resize(pos);
  return text;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) out += fmt::format("{:02x}", b);
  return out;
}

// ---------------------------------------------------------------------------

HttpCompletionBackend::HttpCompletionBackend(HttpBackendConfig config,
                                             std::shared_ptr<HttpTransport> transport,
                                             Sleeper sleep)
    : config_(std::move(config)), transport_(std::move(transport)), sleep_(std::move(sleep)) {}

CompletionResult HttpCompletionBackend::complete(const CompletionRequest& request) {
  check_request(request);
  const auto started = std::chrono::steady_clock::now();

  nlohmann::json body = {{"model", request.model_name.empty() ? config_.model : request.model_name},
                         {"prompt", request.prompt},
                         {"max_tokens", request.max_tokens},
                         {"temperature", request.temperature}};
  if (!request.stop_sequence.empty()) body["stop"] = {request.stop_sequence};

  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  HttpRequest http;
  http.url = base + "/completions";
  http.body = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  http.headers.emplace_back("Content-Type", "application/json");
  if (!config_.api_key.empty()) http.headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  http.timeout = config_.request_timeout;

  const auto res = post_with_retry(*transport_, std::move(http), config_.retry, sleep_, request.deadline);

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorKind::protocol, fmt::format("completion response is not JSON: {}", e.what()));
  }
  if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("text") || !parsed["choices"][0]["text"].is_string()) {
    throw BackendError(ErrorKind::protocol, "completion response has no choices[0].text");
  }
  const auto& choice = parsed["choices"][0];

  CompletionResult out;
  out.text = cut_at_stop(choice["text"].get<std::string>(), request.stop_sequence);
  out.truncated = choice.contains("finish_reason") && choice["finish_reason"] == "length";
  out.backend_id = id();
  out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return out;
}

// ---------------------------------------------------------------------------

MockBackend::MockBackend(fs::path dir) : dir_(std::move(dir)), id_("mock:" + dir_->string()) {}

MockBackend::MockBackend(std::map<std::string, std::string> by_hash)
    : id_("mock:memory"), by_hash_(std::move(by_hash)) {}

fs::path MockBackend::fixture_path(const fs::path& dir, std::string_view prompt) {
  return dir / (sha256_hex(prompt) + ".txt");
}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  check_request(request);
  const auto hash = sha256_hex(request.prompt);

  std::optional<std::string> text;
  {
    std::lock_guard lock(mutex_);
    if (auto it = by_hash_.find(hash); it != by_hash_.end()) text = it->second;
  }
  if (!text && dir_) {
    std::ifstream in(*dir_ / (hash + ".txt"), std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      std::string contents = ss.str();
      if (!contents.empty() && contents.back() == '\n') contents.pop_back();
      std::lock_guard lock(mutex_);
      text = by_hash_.emplace(hash, std::move(contents)).first->second;
    }
  }
  if (!text) {
    throw BackendError(ErrorKind::mock_miss, fmt::format("no mock fixture for prompt {}", hash));
  }
  return CompletionResult{cut_at_stop(*text, request.stop_sequence), 0, id_, false};
}

// ---------------------------------------------------------------------------

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner, fs::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request) {
  auto result = inner_->complete(request);
  const auto path = MockBackend::fixture_path(dir_, request.prompt);
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << result.text << '\n';
  if (!out) throw std::runtime_error(fmt::format("cannot write fixture {}", path.string()));
  ++recorded_;
  return result;
}

std::size_t RecordingBackend::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

CompletionResult FunctionBackend::complete(const CompletionRequest& request) {
  check_request(request);
  return CompletionResult{cut_at_stop(fn_(request), request.stop_sequence), 0, id_, false};
}

// ---------------------------------------------------------------------------

std::shared_ptr<CompletionBackend> make_backend(std::string_view spec) {
  constexpr std::string_view mock_prefix = "mock:";
  if (spec.substr(0, mock_prefix.size()) == mock_prefix) {
    fs::path dir(std::string(spec.substr(mock_prefix.size())));
    if (!fs::is_directory(dir)) {
      throw std::invalid_argument(fmt::format("mock fixture directory '{}' does not exist", dir.string()));
    }
    return std::make_shared<MockBackend>(dir);
  }
  if (spec == "live") {
    auto env = [](const char* name, const char* fallback = "") {
      const char* v = std::getenv(name);
      return std::string(v ? v : fallback);
    };
    HttpBackendConfig cfg;
    cfg.base_url = env("LLM_BASE_URL", "https://api.openai.com/v1");
    cfg.api_key = env("LLM_API_KEY");
    cfg.model = env("LLM_MODEL", "text-davinci-002");
    return std::make_shared<HttpCompletionBackend>(std::move(cfg), make_http_transport());
  }
  throw std::invalid_argument(fmt::format("backend '{}' is not mock:DIR or live", spec));
}

}  // namespace tracknlu
