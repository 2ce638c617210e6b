#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tracknlu {

enum class ErrorKind {
  precondition,
  auth,
  rate_limited,
  transport,
  deadline,
  protocol,
  mock_miss,
};

std::string_view error_kind_name(ErrorKind kind);

/// Failure talking to a completion or embedding backend.
class BackendError : public std::runtime_error {
 public:
  BackendError(ErrorKind kind, const std::string& message, bool retryable = false,
               std::optional<std::chrono::milliseconds> retry_after = std::nullopt,
               int attempts = 1)
      : std::runtime_error(message),
        kind_(kind),
        retryable_(retryable),
        retry_after_(retry_after),
        attempts_(attempts) {}

  ErrorKind kind() const { return kind_; }
  bool retryable() const { return retryable_; }
  std::optional<std::chrono::milliseconds> retry_after() const { return retry_after_; }
  int attempts() const { return attempts_; }

 private:
  ErrorKind kind_;
  bool retryable_;
  std::optional<std::chrono::milliseconds> retry_after_;
  int attempts_;
};

struct HttpRequest {
  std::string url;  // absolute, e.g. http://127.0.0.1:8080/v1/completions
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Thrown by transports when no HTTP response was obtained.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (https when built with OpenSSL).
std::shared_ptr<HttpTransport> make_http_transport();

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds overall_deadline{30000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// POSTs with retries on transport errors, 429 and 5xx. 401/403 and other 4xx
/// are never retried. Throws BackendError; returns only 2xx responses.
HttpResponse post_with_retry(HttpTransport& transport, HttpRequest request,
                             const RetryPolicy& policy, const Sleeper& sleep,
                             std::optional<std::chrono::steady_clock::time_point> deadline =
                                 std::nullopt);

}  // namespace tracknlu
