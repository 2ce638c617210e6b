#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "support/fixtures.hpp"
#include "tracknlu/http_api.hpp"
#include "tracknlu/service.hpp"

#include <httplib.h>  // after Eigen: <resolv.h> defines `res`

using namespace tracknlu;

namespace {

const std::string kPhrase = "I did push-ups for three repetitions at light intensity";
const std::string kCanned = " Exercise = push-ups | Repetitions = 3 | Intensity = light";
constexpr Timestamp kT0 = 1647937800;  // 2022-03-22T08:30:00Z

struct Harness {
  std::shared_ptr<std::vector<std::string>> prompts = std::make_shared<std::vector<std::string>>();
  std::shared_ptr<std::string> reply = std::make_shared<std::string>(kCanned);
  std::shared_ptr<std::atomic<Timestamp>> now = std::make_shared<std::atomic<Timestamp>>(kT0);

  ServiceConfig config(std::filesystem::path dir = {}) const {
    ServiceConfig cfg;
    cfg.store_dir = std::move(dir);
    cfg.seeds = fixture::corpus();
    auto prompts_ = prompts;
    auto reply_ = reply;
    cfg.backend = std::make_shared<FunctionBackend>(
        [prompts_, reply_](const CompletionRequest& r) {
          prompts_->push_back(r.prompt);
          return *reply_;
        },
        "canned");
    cfg.embedder = std::make_shared<LocalEmbedder>();
    auto now_ = now;
    cfg.clock = [now_] { return now_->fetch_add(60); };
    return cfg;
  }
};

std::map<std::string, FieldValue> exercise_values(double reps) {
  return {{"Exercise", std::string("push-ups")}, {"Repetitions", reps}, {"Intensity", std::string("light")}};
}

std::string dir_digest(const std::filesystem::path& dir) {
  std::string out;
  if (!std::filesystem::exists(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out += f.filename().string() + "\n" + ss.str();
  }
  return out;
}

ServiceError::Code code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.code();
  }
  FAIL("expected a ServiceError");
  return ServiceError::Code::internal;
}

}  // namespace

TEST_CASE("capture loop: extract, commit, extract again") {
  Harness h;
  CaptureService svc(h.config());
  auto schema = fixture::exercise(true);
  schema.tracker_id = "";
  const auto created = svc.create_tracker(schema);
  CHECK(created.tracker_id == "exercise-2");  // the seed corpus already has "exercise"
  CHECK_FALSE(svc.is_seed_tracker("exercise-2"));
  CHECK(svc.is_seed_tracker("exercise"));

  const auto first = svc.extract("exercise-2", kPhrase);
  CHECK(first.shot_audit.size() == 10);
  CHECK(first.result.dropped.empty());
  CHECK(std::get<std::string>(first.result.values.at("Exercise")) == "push-ups");
  CHECK(std::get<double>(first.result.values.at("Repetitions")) == 3.0);
  CHECK(std::get<std::string>(first.result.values.at("Intensity")) == "light");
  REQUIRE(first.reference_time);
  CHECK(format_time_point(*first.reference_time) == "2022-03-22T08:30");
  CHECK(h.prompts->back().find("Current time: 2022-03-22T08:30\n") != std::string::npos);
  CHECK(first.prompt_sha256 == sha256_hex(h.prompts->back()));

  const auto item = svc.commit_item("exercise-2", first.result.values, kPhrase);
  CHECK(item.item_id == "item-1");
  CHECK(item.source_phrase == kPhrase);
  REQUIRE(svc.list_user_samples().size() == 1);

  const auto second = svc.extract("exercise-2", "did 12 push-ups");
  REQUIRE(second.shot_audit.size() == 10);
  CHECK(second.shot_audit.back().role == ShotRole::user);
  CHECK(second.shot_audit.back().sample_id == svc.list_user_samples()[0].sample_id);
  CHECK(h.prompts->back().find("Sentence: " + kPhrase + "\nValues: Exercise = push-ups | Repetitions = 3 | "
                                                         "Intensity = light\n###\n") != std::string::npos);
}

TEST_CASE("the two-prior-items scenario") {
  Harness h;
  CaptureService svc(h.config());
  svc.commit_item("exercise", exercise_values(10), std::string("did ten push-ups this morning"));
  svc.commit_item("exercise", exercise_values(20), std::string("twenty push-ups after lunch"));
  const auto listed = svc.list_trackers();
  CHECK(std::count_if(listed.begin(), listed.end(), [](const TrackerSchema& t) { return t.tracker_id == "exercise"; }) == 1);
  CHECK(listed.size() == 24);

  const auto session = svc.extract("exercise", kPhrase, TimePoint{{2022, 3, 22}, 8, 30});
  std::map<ShotRole, int> roles;
  for (const auto& s : session.shot_audit) roles[s.role]++;
  CHECK(roles[ShotRole::farthest] == 5);
  CHECK(roles[ShotRole::nearest] == 3);
  CHECK(roles[ShotRole::user] == 2);
  CHECK(session.shot_audit[8].sample_id == "user-item-1");
  CHECK(session.shot_audit[9].sample_id == "user-item-2");

  const auto j = session_to_json(svc.get_tracker("exercise"), session);
  CHECK(j["values"] == nlohmann::json({{"Exercise", "push-ups"}, {"Repetitions", 3}, {"Intensity", "light"}}));
  CHECK(j["shots"].size() == 10);
  CHECK(j["shots"][9]["role"] == "user");
  CHECK(j["reference_time"] == "2022-03-22T08:30");
}

TEST_CASE("commits are validated") {
  Harness h;
  CaptureService svc(h.config());
  TrackerSchema mood;
  mood.tracker_id = "my-mood";
  mood.name = "My Mood";
  mood.fields = {{"Mood", LikertKind{1, 5}, "how I feel"}};
  svc.create_tracker(mood);
  try {
    svc.commit_item("my-mood", {{"Mood", LikertValue{9}}});
    FAIL("expected rejection");
  } catch (const ServiceError& e) {
    CHECK(e.code() == ServiceError::Code::invalid);
    CHECK(e.http_status() == 400);
    REQUIRE_FALSE(e.details().empty());
    CHECK(e.details()[0].rfind("values.Mood", 0) == 0);
  }
  CHECK(svc.list_items("my-mood").empty());

  const auto plain = svc.commit_item("my-mood", {{"Mood", LikertValue{4}}});
  CHECK(svc.list_items("my-mood").size() == 1);
  CHECK(svc.list_user_samples().empty());
  CHECK_FALSE(plain.source_phrase);

  CHECK(code_of([&] { svc.commit_item("my-mood", {}); }) == ServiceError::Code::invalid);
  CHECK(code_of([&] { svc.commit_item("nope", {{"Mood", LikertValue{4}}}); }) == ServiceError::Code::not_found);
  CHECK(code_of([&] { svc.create_tracker(mood); }) == ServiceError::Code::conflict);
  TrackerSchema broken = mood;
  broken.tracker_id = "broken";
  broken.fields.clear();
  CHECK(code_of([&] { svc.create_tracker(broken); }) == ServiceError::Code::invalid);
}

TEST_CASE("corrections rewrite the item and its sample") {
  Harness h;
  CaptureService svc(h.config());
  const auto item = svc.commit_item("exercise", exercise_values(3), kPhrase);
  const auto fixed = svc.correct_item(item.item_id, exercise_values(5));
  CHECK(std::get<double>(fixed.values.at("Repetitions")) == 5.0);
  CHECK(std::get<double>(svc.get_item(item.item_id).values.at("Repetitions")) == 5.0);
  CHECK(svc.get_item(item.item_id).created_at == item.created_at);
  const auto samples = svc.list_user_samples();
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].phrase == kPhrase);
  CHECK(std::get<double>(samples[0].item.values.at("Repetitions")) == 5.0);

  svc.extract("exercise", "more push-ups");
  CHECK(h.prompts->back().find("Repetitions = 5 | Intensity = light\n###\n") != std::string::npos);

  CHECK(code_of([&] { svc.correct_item("item-99", exercise_values(1)); }) == ServiceError::Code::not_found);
  CHECK(code_of([&] { svc.correct_item(item.item_id, {{"Intensity", std::string("extreme")}}); }) ==
        ServiceError::Code::invalid);
  CHECK(code_of([&] { svc.get_item("item-99"); }) == ServiceError::Code::not_found);
}

TEST_CASE("restart restores trackers, items and samples") {
  fixture::TempDir dir("persist");
  Harness h;
  std::string trackers, items, samples;
  {
    CaptureService svc(h.config(dir.path));
    auto mood = fixture::exercise();
    mood.tracker_id = "reps";
    mood.name = "Reps";
    svc.create_tracker(mood);
    svc.commit_item("reps", exercise_values(1), std::string("one push-up"));
    svc.commit_item("reps", exercise_values(2));
    const auto third = svc.commit_item("exercise", exercise_values(3), kPhrase);
    svc.correct_item(third.item_id, exercise_values(4));
    for (const auto& t : svc.list_trackers()) trackers += tracker_to_json(t).dump() + "\n";
    for (const auto& id : {"reps", "exercise"}) {
      for (const auto& i : svc.list_items(id)) items += item_to_json(svc.get_tracker(id), i).dump() + "\n";
    }
    for (const auto& s : svc.list_user_samples()) samples += sample_to_json(svc.get_tracker(s.tracker_id()), s).dump() + "\n";
  }
  CaptureService again(h.config(dir.path));
  std::string trackers2, items2, samples2;
  for (const auto& t : again.list_trackers()) trackers2 += tracker_to_json(t).dump() + "\n";
  for (const auto& id : {"reps", "exercise"}) {
    for (const auto& i : again.list_items(id)) items2 += item_to_json(again.get_tracker(id), i).dump() + "\n";
  }
  for (const auto& s : again.list_user_samples()) samples2 += sample_to_json(again.get_tracker(s.tracker_id()), s).dump() + "\n";
  CHECK(trackers == trackers2);
  CHECK(items == items2);
  CHECK(samples == samples2);
  CHECK(std::count(samples.begin(), samples.end(), '\n') == 2);
  CHECK(again.commit_item("reps", exercise_values(9)).item_id == "item-4");
}

TEST_CASE("extract has no side effects") {
  fixture::TempDir dir("pure");
  Harness h;
  CaptureService svc(h.config(dir.path));
  svc.commit_item("exercise", exercise_values(3), std::string("three push-ups"));
  const auto before = dir_digest(dir.path);
  const auto ref = TimePoint{{2022, 3, 22}, 9, 0};
  const auto a = svc.extract("exercise", kPhrase, ref);
  const auto b = svc.extract("exercise", kPhrase, ref);
  const auto schema = svc.get_tracker("exercise");
  CHECK(session_to_json(schema, a).dump() == session_to_json(schema, b).dump());
  CHECK(dir_digest(dir.path) == before);
  CHECK(svc.list_user_samples().size() == 1);
}

TEST_CASE("commit-then-extract monotonicity") {
  Harness h;
  CaptureService svc(h.config());
  for (int j = 1; j <= 11; ++j) {
    svc.commit_item("exercise", exercise_values(j), "set number " + std::to_string(j) + " of push-ups");
    const auto s = svc.extract("exercise", kPhrase);
    const auto users = std::count_if(s.shot_audit.begin(), s.shot_audit.end(),
                                     [](const ShotAuditEntry& e) { return e.role == ShotRole::user; });
    CAPTURE(j);
    CHECK(users == std::min(j, 8));
    CHECK(s.shot_audit.size() == 10);
  }
}

TEST_CASE("backend and lookup errors") {
  Harness h;
  auto cfg = h.config();
  cfg.backend = std::make_shared<FunctionBackend>(
      [](const CompletionRequest&) -> std::string {
        throw BackendError(ErrorKind::deadline, "deadline exceeded", true, std::chrono::milliseconds(1500), 2);
      },
      "slow");
  CaptureService svc(cfg);
  try {
    svc.extract("exercise", kPhrase);
    FAIL("expected 503");
  } catch (const ServiceError& e) {
    CHECK(e.code() == ServiceError::Code::backend_unavailable);
    CHECK(e.http_status() == 503);
    CHECK(e.retry_after() == std::chrono::milliseconds(1500));
    const auto j = error_to_json(e);
    CHECK(j["code"] == "backend_unavailable");
    CHECK(j["details"].is_array());
  }
  cfg.backend = std::make_shared<FunctionBackend>(
      [](const CompletionRequest&) -> std::string { throw BackendError(ErrorKind::auth, "bad key"); }, "auth");
  CaptureService auth(cfg);
  CHECK(code_of([&] { auth.extract("exercise", kPhrase); }) == ServiceError::Code::backend_error);

  CHECK(code_of([&] { svc.extract("ghost", kPhrase); }) == ServiceError::Code::not_found);
  CHECK(code_of([&] { svc.extract("exercise", ""); }) == ServiceError::Code::invalid);
  CHECK(code_of([&] { svc.get_tracker("ghost"); }) == ServiceError::Code::not_found);

  *h.reply = "complete garbage | Repetitions = lots";
  CaptureService messy(h.config());
  const auto s = messy.extract("exercise", kPhrase);
  CHECK(s.result.values.empty());
  CHECK(s.result.dropped.size() == 2);
}

TEST_CASE("fresh tracker with an empty seed store") {
  Harness h;
  auto cfg = h.config();
  cfg.seeds = std::make_shared<SampleStore>();
  CaptureService svc(cfg);
  svc.create_tracker(fixture::exercise());
  const auto s = svc.extract("exercise", kPhrase);
  CHECK(s.shot_audit.empty());
  CHECK(s.result.values.size() == 3);
  CHECK(svc.list_trackers().size() == 1);
}

TEST_CASE("concurrent extracts and commits") {
  Harness h;
  auto cfg = h.config();
  cfg.backend = std::make_shared<FunctionBackend>([](const CompletionRequest&) { return kCanned; }, "canned");
  CaptureService svc(cfg);
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        try {
          if (t == 0) {
            svc.commit_item("exercise", exercise_values(i + 1), "batch " + std::to_string(i));
          } else {
            const auto s = svc.extract("exercise", kPhrase);
            if (s.shot_audit.size() != 10) ++failures;
          }
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(failures == 0);
  CHECK(svc.list_items("exercise").size() == 10);
}

// ---------------------------------------------------------------------------

TEST_CASE("HTTP API") {
  CHECK(parse_bind_addr("0.0.0.0:9000") == std::make_pair(std::string("0.0.0.0"), 9000));
  CHECK(parse_bind_addr(":81") == std::make_pair(std::string("127.0.0.1"), 81));
  CHECK(parse_bind_addr("8080") == std::make_pair(std::string("127.0.0.1"), 8080));
  CHECK_THROWS(parse_bind_addr("host:notaport"));

  Harness h;
  auto cfg = h.config();
  auto fail_next = std::make_shared<std::atomic<bool>>(false);
  auto inner = cfg.backend;
  cfg.backend = std::make_shared<FunctionBackend>(
      [inner, fail_next](const CompletionRequest& r) {
        if (fail_next->exchange(false)) {
          throw BackendError(ErrorKind::rate_limited, "slow down", true, std::chrono::milliseconds(2000));
        }
        return inner->complete(r).text;
      },
      "switchable");
  CaptureService svc(cfg);
  ApiServer server(svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  const auto body = [](const httplib::Result& r) { return nlohmann::json::parse(r->body); };

  SUBCASE("tracker routes") {
    auto schema_json = schema_to_json(fixture::exercise(true));
    schema_json["tracker_id"] = "workout";
    auto r = cli.Post("/api/trackers", schema_json.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 201);
    CHECK(body(r)["tracker_id"] == "workout");
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");

    r = cli.Post("/api/trackers", schema_json.dump(), "application/json");
    CHECK(r->status == 409);
    CHECK(body(r)["code"] == "conflict");

    schema_json.erase("tracker_id");
    schema_json["name"] = "Evening Workout";
    r = cli.Post("/api/trackers", schema_json.dump(), "application/json");
    CHECK(r->status == 201);
    CHECK(body(r)["tracker_id"] == "evening-workout");

    r = cli.Post("/api/trackers", R"({"tracker_id":"x","name":"X","fields":[]})", "application/json");
    CHECK(r->status == 400);
    CHECK_FALSE(body(r)["details"].empty());
    r = cli.Post("/api/trackers", "{oops", "application/json");
    CHECK(r->status == 400);
    CHECK(body(r)["code"] == "invalid");

    r = cli.Get("/api/trackers");
    REQUIRE(r);
    CHECK(r->status == 200);
    const auto list = body(r);
    CHECK(list.size() == 26);
    CHECK(list[0]["tracker_id"] == "evening-workout");

    r = cli.Get("/api/trackers/workout");
    CHECK(r->status == 200);
    CHECK(body(r)["fields"].size() == 3);
    r = cli.Get("/api/trackers/ghost");
    CHECK(r->status == 404);
    CHECK(body(r)["code"] == "not_found");
    CHECK(body(r).contains("message"));
    CHECK(body(r)["details"].is_array());

    r = cli.Options("/api/trackers");
    CHECK(r->status == 204);
  }

  SUBCASE("capture routes") {
    nlohmann::json req{{"phrase", kPhrase}, {"reference_time", "2022-03-22T08:30"}};
    auto r = cli.Post("/api/trackers/exercise/extract", req.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    auto session = body(r);
    CHECK(session["values"] == nlohmann::json({{"Exercise", "push-ups"}, {"Repetitions", 3}, {"Intensity", "light"}}));
    CHECK(session["shots"].size() == 10);
    CHECK(session["reference_time"] == "2022-03-22T08:30");
    CHECK(session["request_id"].get<std::string>().size() == 16);

    r = cli.Post("/api/trackers/exercise/extract", R"({"phrase":"x","reference_time":"yesterday"})",
                 "application/json");
    CHECK(r->status == 400);
    r = cli.Post("/api/trackers/exercise/extract", R"({"reference_time":"2022-03-22T08:30"})", "application/json");
    CHECK(r->status == 400);
    r = cli.Post("/api/trackers/ghost/extract", req.dump(), "application/json");
    CHECK(r->status == 404);

    fail_next->store(true);
    r = cli.Post("/api/trackers/exercise/extract", req.dump(), "application/json");
    CHECK(r->status == 503);
    CHECK(r->get_header_value("Retry-After") == "2");
    CHECK(body(r)["code"] == "backend_unavailable");

    nlohmann::json commit{{"values", session["values"]}, {"source_phrase", kPhrase}};
    r = cli.Post("/api/trackers/exercise/items", commit.dump(), "application/json");
    CHECK(r->status == 201);
    const auto item_id = body(r)["item_id"].get<std::string>();
    CHECK(body(r)["source_phrase"] == kPhrase);

    r = cli.Post("/api/trackers/exercise/items", R"({"values":{"Intensity":"extreme"}})", "application/json");
    CHECK(r->status == 400);
    CHECK(body(r)["details"][0].get<std::string>().find("Intensity") != std::string::npos);
    r = cli.Post("/api/trackers/exercise/items", R"({"values":[]})", "application/json");
    CHECK(r->status == 400);

    r = cli.Get("/api/trackers/exercise/items");
    CHECK(r->status == 200);
    REQUIRE(body(r).size() == 1);
    CHECK(body(r)[0]["values"]["Repetitions"] == 3);

    r = cli.Patch("/api/items/" + item_id, R"({"values":{"Exercise":"push-ups","Repetitions":5}})",
                  "application/json");
    CHECK(r->status == 200);
    CHECK(body(r)["values"]["Repetitions"] == 5);
    CHECK_FALSE(body(r)["values"].contains("Intensity"));
    r = cli.Patch("/api/items/item-404", R"({"values":{"Repetitions":5}})", "application/json");
    CHECK(r->status == 404);

    r = cli.Post("/api/trackers/exercise/extract", req.dump(), "application/json");
    const auto shots = body(r)["shots"];
    CHECK(shots.back()["role"] == "user");
    CHECK(shots.back()["sample_id"] == "user-" + item_id);
    CHECK(svc.list_user_samples()[0].item.values.size() == 2);

    r = cli.Get("/api/trackers/ghost/items");
    CHECK(r->status == 404);
  }

  server.stop();
  loop.join();
}
