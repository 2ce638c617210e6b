#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "tracknlu/llm.hpp"

using namespace tracknlu;
using namespace std::chrono_literals;

namespace {

struct Scripted {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
  bool transport_error = false;
};

class FakeTransport : public HttpTransport {
 public:
  std::vector<Scripted> script;
  std::vector<HttpRequest> seen;
  HttpResponse post(const HttpRequest& request) override {
    seen.push_back(request);
    REQUIRE(seen.size() <= script.size());
    const auto& s = script[seen.size() - 1];
    if (s.transport_error) throw TransportError("connection reset");
    return {s.status, s.body, s.headers};
  }
};

struct SleepLog {
  std::vector<std::chrono::milliseconds> waits;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { waits.push_back(d); };
  }
};

const std::string kOk = R"({"choices":[{"text":" Exercise = push-ups | Repetitions = 3\n###\nTracker: x","finish_reason":"stop"}]})";

HttpCompletionBackend backend(std::shared_ptr<FakeTransport> t, SleepLog& log) {
  HttpBackendConfig cfg;
  cfg.base_url = "https://llm.example/v1/";
  cfg.api_key = "secret";
  cfg.model = "text-davinci-002";
  return HttpCompletionBackend(cfg, std::move(t), log.sleeper());
}

CompletionRequest request(std::string prompt = "Tracker: Exercise\nValues:") {
  CompletionRequest r;
  r.prompt = std::move(prompt);
  return r;
}

}  // namespace

TEST_CASE("request preconditions") {
  CHECK_THROWS_AS(check_request(request("")), BackendError);
  auto r = request();
  r.temperature = -0.1;
  CHECK_THROWS_AS(check_request(r), BackendError);
  r = request();
  r.max_tokens = 0;
  CHECK_THROWS_AS(check_request(r), BackendError);
  CHECK_NOTHROW(check_request(request()));
  try {
    check_request(request(""));
  } catch (const BackendError& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
  const CompletionRequest defaults;
  CHECK(defaults.temperature == 0.0);
  CHECK(defaults.max_tokens == 256);
  CHECK(defaults.stop_sequence == "\n###");
}

TEST_CASE("helpers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(cut_at_stop("a = 1\n###\nmore", "\n###") == "a = 1");
  CHECK(cut_at_stop("a = 1", "\n###") == "a = 1");
  CHECK(cut_at_stop("a\n###", "") == "a\n###");
}

TEST_CASE("http backend request and response") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{200, kOk}};
  SleepLog log;
  auto b = backend(t, log);
  const auto res = b.complete(request());
  CHECK(res.text == " Exercise = push-ups | Repetitions = 3");
  CHECK_FALSE(res.truncated);
  CHECK(res.backend_id == "http:text-davinci-002");
  REQUIRE(t->seen.size() == 1);
  CHECK(t->seen[0].url == "https://llm.example/v1/completions");
  const auto body = nlohmann::json::parse(t->seen[0].body);
  CHECK(body["model"] == "text-davinci-002");
  CHECK(body["prompt"] == "Tracker: Exercise\nValues:");
  CHECK(body["max_tokens"] == 256);
  CHECK(body["temperature"] == 0.0);
  CHECK(body["stop"] == nlohmann::json::array({"\n###"}));
  bool auth = false;
  for (const auto& [k, v] : t->seen[0].headers) auth = auth || (k == "Authorization" && v == "Bearer secret");
  CHECK(auth);
  CHECK(log.waits.empty());

  t->script.push_back({200, R"({"choices":[{"text":"A = 1","finish_reason":"length"}]})"});
  CHECK(b.complete(request()).truncated);

  t->script.push_back({200, R"({"choices":[]})"});
  CHECK_THROWS_AS(b.complete(request()), BackendError);
}

TEST_CASE("retries transient failures with doubling backoff") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{503, "busy"}, {0, "", {}, true}, {500, "oops"}, {200, kOk}};
  SleepLog log;
  auto b = backend(t, log);
  CHECK_NOTHROW(b.complete(request()));
  CHECK(t->seen.size() == 4);
  REQUIRE(log.waits.size() == 3);
  CHECK(log.waits[0] == 250ms);
  CHECK(log.waits[1] == 500ms);
  CHECK(log.waits[2] == 1000ms);
  for (std::size_t i = 1; i < t->seen.size(); ++i) CHECK(t->seen[i].body == t->seen[0].body);
}

TEST_CASE("gives up after three retries") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{502, ""}, {502, ""}, {502, ""}, {502, ""}, {200, kOk}};
  SleepLog log;
  auto b = backend(t, log);
  try {
    b.complete(request());
    FAIL("expected failure");
  } catch (const BackendError& e) {
    CHECK(e.kind() == ErrorKind::transport);
    CHECK(e.attempts() == 4);
  }
  CHECK(t->seen.size() == 4);
}

TEST_CASE("never re-sends after a non-retryable error") {
  for (int status : {401, 403, 400, 404, 422}) {
    auto t = std::make_shared<FakeTransport>();
    t->script = {{status, "no"}, {200, kOk}};
    SleepLog log;
    auto b = backend(t, log);
    CAPTURE(status);
    try {
      b.complete(request());
      FAIL("expected failure");
    } catch (const BackendError& e) {
      CHECK_FALSE(e.retryable());
      CHECK(e.kind() == (status == 401 || status == 403 ? ErrorKind::auth : ErrorKind::protocol));
    }
    CHECK(t->seen.size() == 1);
    CHECK(log.waits.empty());
  }
}

TEST_CASE("rate limit honours Retry-After") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{429, "", {{"Retry-After", "2"}}}, {200, kOk}};
  SleepLog log;
  auto b = backend(t, log);
  CHECK_NOTHROW(b.complete(request()));
  REQUIRE(log.waits.size() == 1);
  CHECK(log.waits[0] == 2000ms);
}

TEST_CASE("deadline stops retrying") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{429, "", {{"Retry-After", "60"}}}, {200, kOk}};
  SleepLog log;
  auto b = backend(t, log);
  try {
    b.complete(request());
    FAIL("expected failure");
  } catch (const BackendError& e) {
    CHECK(e.kind() == ErrorKind::deadline);
    CHECK(e.retry_after() == std::chrono::milliseconds(60000));
  }
  CHECK(t->seen.size() == 1);

  auto t2 = std::make_shared<FakeTransport>();
  t2->script = {{200, kOk}};
  auto b2 = backend(t2, log);
  auto r = request();
  r.deadline = std::chrono::steady_clock::now() - 1ms;
  CHECK_THROWS_AS(b2.complete(r), BackendError);
  CHECK(t2->seen.empty());
}

TEST_CASE("mock backend replays by prompt hash") {
  fixture::TempDir dir("mock");
  const std::string prompt = "golden prompt\nValues:";
  {
    std::ofstream f(MockBackend::fixture_path(dir.path, prompt));
    f << "Exercise = push-ups | Repetitions = 3 | Intensity = light\n";
  }
  CHECK(MockBackend::fixture_path(dir.path, prompt).filename() == sha256_hex(prompt) + ".txt");
  MockBackend mock(dir.path);
  const auto a = mock.complete(request(prompt));
  const auto b = mock.complete(request(prompt));
  CHECK(a.text == "Exercise = push-ups | Repetitions = 3 | Intensity = light");
  CHECK(a.text == b.text);

  const std::string unseen = "never recorded";
  try {
    mock.complete(request(unseen));
    FAIL("expected a mock miss");
  } catch (const BackendError& e) {
    CHECK(e.kind() == ErrorKind::mock_miss);
    CHECK(std::string(e.what()).find(sha256_hex(unseen)) != std::string::npos);
  }
  CHECK_THROWS_AS(mock.complete(request("")), BackendError);

  MockBackend in_memory(std::map<std::string, std::string>{{sha256_hex("p"), "A = 1\n###\nB = 2"}});
  CHECK(in_memory.complete(request("p")).text == "A = 1");
}

TEST_CASE("recording backend writes replayable fixtures") {
  fixture::TempDir dir("record");
  auto inner = std::make_shared<FunctionBackend>(
      [](const CompletionRequest& r) { return "Len = " + std::to_string(r.prompt.size()); }, "fn");
  RecordingBackend rec(inner, dir.path);
  CHECK(rec.complete(request("abc")).text == "Len = 3");
  CHECK(rec.complete(request("hello")).text == "Len = 5");
  CHECK(rec.recorded() == 2);
  MockBackend replay(dir.path);
  CHECK(replay.complete(request("hello")).text == "Len = 5");
}

TEST_CASE("make_backend specs") {
  CHECK_THROWS(make_backend("carrier-pigeon"));
  fixture::TempDir dir("spec");
  auto b = make_backend("mock:" + dir.path.string());
  REQUIRE(b);
  CHECK(b->id().rfind("mock", 0) == 0);
}
