#include "tracknlu/service.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace tracknlu {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTrackersFile = "trackers.jsonl";
constexpr const char* kItemsFile = "items.jsonl";
constexpr const char* kSamplesFile = "samples.jsonl";

Timestamp system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::vector<std::string> describe(const Violations& violations) {
  std::vector<std::string> out;
  for (const auto& v : violations) out.push_back(v.path.empty() ? v.message : v.path + ": " + v.message);
  return out;
}

std::string slugify(std::string_view name) {
  std::string out;
  for (const char c : case_fold(name)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += c;
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "tracker" : out;
}

json item_record(const TrackerSchema& schema, const Item& item) {
  json j = {{"item_id", item.item_id},
            {"tracker_id", item.tracker_id},
            {"values", values_to_json(schema, item.values)},
            {"created_at", format_timestamp(item.created_at)}};
  if (item.source_phrase) j["source_phrase"] = *item.source_phrase;
  return j;
}

template <typename F>
void for_each_line(const fs::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      f(json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
}

}  // namespace

int ServiceError::http_status() const {
  switch (code_) {
    case Code::not_found: return 404;
    case Code::invalid: return 400;
    case Code::conflict: return 409;
    case Code::backend_unavailable: return 503;
    case Code::backend_error: return 502;
    case Code::internal: return 500;
  }
  return 500;
}

std::string_view ServiceError::code_name() const {
  switch (code_) {
    case Code::not_found: return "not_found";
    case Code::invalid: return "invalid";
    case Code::conflict: return "conflict";
    case Code::backend_unavailable: return "backend_unavailable";
    case Code::backend_error: return "backend_error";
    case Code::internal: return "internal";
  }
  return "internal";
}

CaptureService::CaptureService(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.seeds) config_.seeds = std::make_shared<const SampleStore>();
  if (!config_.embedder) config_.embedder = std::make_shared<CachingEmbedder>(std::make_shared<LocalEmbedder>());
  if (!config_.clock) config_.clock = system_now;
  if (!config_.backend) throw std::invalid_argument("capture service needs a completion backend");

  std::vector<const Sample*> seeds;
  for (const auto& s : config_.seeds->samples()) seeds.push_back(&s);
  seed_index_ = SeedIndex::build(seeds, *config_.embedder);

  state_ = std::make_shared<const State>();
  if (!config_.store_dir.empty()) {
    fs::create_directories(config_.store_dir);
    replay();
  }
}

std::shared_ptr<const CaptureService::State> CaptureService::snapshot() const {
  std::shared_lock lock(state_mutex_);
  return state_;
}

const TrackerSchema* CaptureService::resolve(const State& state, std::string_view tracker_id) const {
  if (const auto* s = state.store.find_tracker(tracker_id)) return s;
  return config_.seeds->find_tracker(tracker_id);
}

void CaptureService::replay() {
  auto next = std::make_shared<State>();
  for_each_line(config_.store_dir / kTrackersFile,
                [&](const json& j) { next->store.add_tracker(schema_from_json(j)); });
  for_each_line(config_.store_dir / kItemsFile, [&](const json& j) {
    const auto tracker_id = j.at("tracker_id").get<std::string>();
    const auto* schema = resolve(*next, tracker_id);
    if (!schema) throw std::runtime_error(fmt::format("item for unknown tracker '{}'", tracker_id));
    Item item;
    item.item_id = j.at("item_id").get<std::string>();
    item.tracker_id = tracker_id;
    item.values = values_from_json(*schema, j.at("values"));
    const auto ts = parse_timestamp(j.at("created_at").get<std::string>());
    if (!ts) throw std::runtime_error("bad created_at");
    item.created_at = *ts;
    if (j.contains("source_phrase")) item.source_phrase = j["source_phrase"].get<std::string>();
    if (!next->items.count(item.item_id)) next->item_order.push_back(item.item_id);
    next->items[item.item_id] = std::move(item);  // later records are corrections
  });
  for_each_line(config_.store_dir / kSamplesFile, [&](const json& j) {
    const auto tracker_id = j.at("tracker_id").get<std::string>();
    const auto* schema = resolve(*next, tracker_id);
    if (!schema) throw std::runtime_error(fmt::format("sample for unknown tracker '{}'", tracker_id));
    auto sample = sample_from_json(*schema, j);
    if (next->store.find_sample(sample.sample_id)) {
      next->store.replace_sample(std::move(sample));
    } else {
      next->store.add_sample(std::move(sample));
    }
  });
  state_ = std::move(next);
}

void CaptureService::append(const std::string& file, const json& record) {
  if (config_.store_dir.empty()) return;
  std::ofstream out(config_.store_dir / file, std::ios::app);
  out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  out.flush();
  if (!out) throw ServiceError(ServiceError::Code::internal, fmt::format("cannot append to {}", file));
}

void CaptureService::adopt_tracker(State& next, std::string_view tracker_id) {
  if (next.store.find_tracker(tracker_id)) return;
  const auto* seed = config_.seeds->find_tracker(tracker_id);
  if (!seed) throw ServiceError(ServiceError::Code::not_found, fmt::format("no tracker '{}'", tracker_id));
  next.store.add_tracker(*seed);
  append(kTrackersFile, schema_to_json(*seed));
}

TrackerSchema CaptureService::create_tracker(TrackerSchema schema) {
  std::lock_guard write(write_mutex_);
  auto current = snapshot();
  if (schema.tracker_id.empty()) {
    const auto base = slugify(schema.name);
    schema.tracker_id = base;
    for (int n = 2; resolve(*current, schema.tracker_id); ++n) schema.tracker_id = fmt::format("{}-{}", base, n);
  } else if (resolve(*current, schema.tracker_id)) {
    throw ServiceError(ServiceError::Code::conflict,
                       fmt::format("tracker '{}' already exists", schema.tracker_id));
  }
  const auto violations = validate_tracker(schema);
  if (!violations.empty()) {
    throw ServiceError(ServiceError::Code::invalid, "invalid tracker schema", describe(violations));
  }
  auto next = std::make_shared<State>(*current);
  next->store.add_tracker(schema);
  append(kTrackersFile, schema_to_json(schema));
  std::unique_lock lock(state_mutex_);
  state_ = std::move(next);
  return schema;
}

std::vector<TrackerSchema> CaptureService::list_trackers() const {
  const auto state = snapshot();
  std::vector<TrackerSchema> out;
  for (const auto& [id, schema] : state->store.trackers()) out.push_back(schema);
  for (const auto& [id, schema] : config_.seeds->trackers()) {
    if (!state->store.find_tracker(id)) out.push_back(schema);
  }
  return out;
}

TrackerSchema CaptureService::get_tracker(std::string_view tracker_id) const {
  const auto state = snapshot();
  const auto* schema = resolve(*state, tracker_id);
  if (!schema) throw ServiceError(ServiceError::Code::not_found, fmt::format("no tracker '{}'", tracker_id));
  return *schema;
}

bool CaptureService::is_seed_tracker(std::string_view tracker_id) const {
  return config_.seeds->find_tracker(tracker_id) != nullptr;
}

CaptureSession CaptureService::extract(std::string_view tracker_id, std::string_view phrase,
                                       std::optional<TimePoint> reference_time) const {
  const auto state = snapshot();
  const auto* schema = resolve(*state, tracker_id);
  if (!schema) throw ServiceError(ServiceError::Code::not_found, fmt::format("no tracker '{}'", tracker_id));
  if (trim(phrase).empty()) throw ServiceError(ServiceError::Code::invalid, "phrase is empty");
  if (!is_valid_utf8(phrase)) throw ServiceError(ServiceError::Code::invalid, "phrase is not valid UTF-8");

  std::vector<const Sample*> users;
  if (state->store.find_tracker(tracker_id)) {
    users = state->store.samples_for_tracker(tracker_id, OriginFilter::user);
  }
  const auto plan = select_shots(phrase, tracker_id, users, seed_index_, *config_.embedder);
  if (!reference_time) reference_time = local_time_point(config_.clock(), schema->utc_offset_minutes);

  const auto bundle = render_prompt(*schema, plan, phrase, reference_time,
                                    [&](std::string_view id) { return resolve(*state, id); });

  CompletionRequest request;
  request.prompt = bundle.text;
  request.stop_sequence = bundle.stop_sequence;
  request.deadline = std::chrono::steady_clock::now() + config_.request_deadline;

  CompletionResult completion;
  try {
    completion = config_.backend->complete(request);
  } catch (const BackendError& e) {
    switch (e.kind()) {
      case ErrorKind::rate_limited:
      case ErrorKind::transport:
      case ErrorKind::deadline:
        throw ServiceError(ServiceError::Code::backend_unavailable, e.what(), {}, e.retry_after());
      default:
        throw ServiceError(ServiceError::Code::backend_error, e.what());
    }
  }

  CaptureSession session;
  session.tracker_id = schema->tracker_id;
  session.phrase = std::string(phrase);
  session.reference_time = reference_time;
  session.result = extract_from_completion(*schema, completion.text, *config_.embedder);
  session.prompt_sha256 = sha256_hex(bundle.text);
  session.request_id = sha256_hex(session.prompt_sha256 + "\n" + completion.text).substr(0, 16);
  for (const auto& shot : bundle.shot_plan.shots) {
    session.shot_audit.push_back({shot.sample.sample_id, shot.sample.tracker_id(), shot.role, shot.score});
  }
  return session;
}

Item CaptureService::commit_item(std::string_view tracker_id, std::map<std::string, FieldValue> values,
                                 std::optional<std::string> source_phrase) {
  std::lock_guard write(write_mutex_);
  auto current = snapshot();
  const auto* schema = resolve(*current, tracker_id);
  if (!schema) throw ServiceError(ServiceError::Code::not_found, fmt::format("no tracker '{}'", tracker_id));
  if (source_phrase && trim(*source_phrase).empty()) source_phrase.reset();

  Item item;
  item.tracker_id = schema->tracker_id;
  item.values = std::move(values);
  item.created_at = config_.clock();
  auto check = validate_item(*schema, item, ItemMode::committed);
  if (!check.ok()) throw ServiceError(ServiceError::Code::invalid, "item rejected", describe(check.violations));
  item = std::move(*check.item);
  item.item_id = fmt::format("item-{}", current->items.size() + 1);
  item.source_phrase = source_phrase;

  auto next = std::make_shared<State>(*current);
  adopt_tracker(*next, item.tracker_id);
  const auto& owned = *next->store.find_tracker(item.tracker_id);
  append(kItemsFile, item_record(owned, item));
  if (source_phrase) {
    Sample sample;
    sample.sample_id = "user-" + item.item_id;
    sample.phrase = *source_phrase;
    sample.item = item;
    sample.origin = Origin::user;
    next->store.add_sample(sample);
    append(kSamplesFile, sample_to_json(owned, *next->store.find_sample(sample.sample_id)));
  }
  next->items[item.item_id] = item;
  next->item_order.push_back(item.item_id);

  std::unique_lock lock(state_mutex_);
  state_ = std::move(next);
  return item;
}

std::vector<Item> CaptureService::list_items(std::string_view tracker_id) const {
  const auto state = snapshot();
  if (!resolve(*state, tracker_id)) {
    throw ServiceError(ServiceError::Code::not_found, fmt::format("no tracker '{}'", tracker_id));
  }
  std::vector<Item> out;
  for (const auto& id : state->item_order) {
    const auto& item = state->items.at(id);
    if (item.tracker_id == tracker_id) out.push_back(item);
  }
  return out;
}

Item CaptureService::get_item(std::string_view item_id) const {
  const auto state = snapshot();
  const auto it = state->items.find(std::string(item_id));
  if (it == state->items.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no item '{}'", item_id));
  return it->second;
}

Item CaptureService::correct_item(std::string_view item_id, std::map<std::string, FieldValue> values) {
  std::lock_guard write(write_mutex_);
  auto current = snapshot();
  const auto it = current->items.find(std::string(item_id));
  if (it == current->items.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no item '{}'", item_id));
  const auto& schema = *current->store.find_tracker(it->second.tracker_id);

  Item item = it->second;
  item.values = std::move(values);
  auto check = validate_item(schema, item, ItemMode::committed);
  if (!check.ok()) throw ServiceError(ServiceError::Code::invalid, "item rejected", describe(check.violations));
  item = std::move(*check.item);

  auto next = std::make_shared<State>(*current);
  append(kItemsFile, item_record(schema, item));
  const auto sample_id = "user-" + item.item_id;
  if (const auto* linked = next->store.find_sample(sample_id)) {
    Sample sample = *linked;
    sample.item.values = item.values;
    next->store.replace_sample(std::move(sample));
    append(kSamplesFile, sample_to_json(schema, *next->store.find_sample(sample_id)));
  }
  next->items[item.item_id] = item;

  std::unique_lock lock(state_mutex_);
  state_ = std::move(next);
  return item;
}

std::vector<Sample> CaptureService::list_user_samples() const {
  const auto state = snapshot();
  return state->store.samples();
}

// ---------------------------------------------------------------------------

json tracker_to_json(const TrackerSchema& schema) { return schema_to_json(schema); }

json item_to_json(const TrackerSchema& schema, const Item& item) { return item_record(schema, item); }

json session_to_json(const TrackerSchema& schema, const CaptureSession& session) {
  json snaps = json::array();
  for (const auto& [field, prov] : session.result.provenance) {
    for (const auto& s : prov.snaps) {
      snaps.push_back({{"field", field}, {"raw_label", s.raw_label}, {"label", s.label}, {"similarity", s.similarity}});
    }
  }
  json dropped = json::array();
  for (const auto& d : session.result.dropped) {
    dropped.push_back({{"name", d.raw_name}, {"value", d.raw_value}, {"reason", d.reason}});
  }
  json shots = json::array();
  for (const auto& s : session.shot_audit) {
    shots.push_back({{"sample_id", s.sample_id},
                     {"tracker_id", s.tracker_id},
                     {"role", role_name(s.role)},
                     {"score", s.score}});
  }
  json j = {{"request_id", session.request_id},
            {"tracker_id", session.tracker_id},
            {"phrase", session.phrase},
            {"values", values_to_json(schema, session.result.values)},
            {"snaps", std::move(snaps)},
            {"dropped", std::move(dropped)},
            {"raw_completion", session.result.raw_completion},
            {"shots", std::move(shots)},
            {"prompt_sha256", session.prompt_sha256}};
  if (session.reference_time) j["reference_time"] = format_time_point(*session.reference_time);
  return j;
}

json error_to_json(const ServiceError& error) {
  return {{"code", error.code_name()}, {"message", error.what()}, {"details", error.details()}};
}

}  // namespace tracknlu
