#include "tracknlu/http.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace tracknlu {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::auth: return "auth";
    case ErrorKind::rate_limited: return "rate_limited";
    case ErrorKind::transport: return "transport";
    case ErrorKind::deadline: return "deadline";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::mock_miss: return "mock_miss";
  }
  return "unknown";
}

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    // Split "scheme://host[:port]" from the path.
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      throw TransportError(fmt::format("malformed URL '{}'", request.url));
    }
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? std::string("/") : request.url.substr(path_start);

    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = client.Post(path, headers, request.body, "application/json");
    if (!res) throw TransportError(httplib::to_string(res.error()));

    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers) out.headers[k] = v;
    return out;
  }
};

std::optional<std::chrono::milliseconds> parse_retry_after(const HttpResponse& res) {
  for (const auto& [k, v] : res.headers) {
    if (k.size() != 11) continue;
    std::string lower = k;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower != "retry-after") continue;
    long seconds = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), seconds);
    if (r.ec == std::errc{} && seconds >= 0) return std::chrono::seconds(seconds);
  }
  return std::nullopt;
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
  return std::make_shared<HttplibTransport>();
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpResponse post_with_retry(HttpTransport& transport, HttpRequest request,
                             const RetryPolicy& policy, const Sleeper& sleep,
                             std::optional<std::chrono::steady_clock::time_point> deadline) {
  using namespace std::chrono;
  const auto start = steady_clock::now();
  auto limit = start + policy.overall_deadline;
  if (deadline) limit = std::min(limit, *deadline);
  const auto per_request = request.timeout;

  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    const auto now = steady_clock::now();
    if (now >= limit) {
      throw BackendError(ErrorKind::deadline, "deadline exceeded before request could be sent",
                         false, std::nullopt, attempt - 1);
    }
    request.timeout = std::min(per_request, duration_cast<milliseconds>(limit - now));

    std::optional<BackendError> failure;
    try {
      auto res = transport.post(request);
      if (res.status >= 200 && res.status < 300) return res;
      if (res.status == 401 || res.status == 403) {
        throw BackendError(ErrorKind::auth, fmt::format("authentication failed (HTTP {})", res.status),
                           false, std::nullopt, attempt);
      }
      if (res.status == 429) {
        failure.emplace(ErrorKind::rate_limited, "rate limited (HTTP 429)", true,
                        parse_retry_after(res), attempt);
      } else if (res.status >= 500) {
        failure.emplace(ErrorKind::transport, fmt::format("server error (HTTP {})", res.status),
                        true, parse_retry_after(res), attempt);
      } else {
        throw BackendError(ErrorKind::protocol,
                           fmt::format("request rejected (HTTP {}): {}", res.status,
                                       res.body.substr(0, 200)),
                           false, std::nullopt, attempt);
      }
    } catch (const TransportError& e) {
      failure.emplace(ErrorKind::transport, fmt::format("transport error: {}", e.what()), true,
                      std::nullopt, attempt);
    }

    if (attempt > policy.max_retries) throw *failure;
    auto wait = backoff;
    if (failure->retry_after()) wait = std::max(wait, *failure->retry_after());
    if (steady_clock::now() + wait >= limit) {
      throw BackendError(ErrorKind::deadline,
                         fmt::format("deadline exceeded after {} attempt(s); last error: {}",
                                     attempt, failure->what()),
                         false, failure->retry_after(), attempt);
    }
    sleep(wait);
    backoff *= 2;
  }
}

}  // namespace tracknlu
