#include "tracknlu/seed_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "random.hpp"

namespace tracknlu {

namespace fs = std::filesystem;

std::string_view origin_name(Origin origin) {
  return origin == Origin::synthetic ? "synthetic" : "user";
}

namespace {

std::string describe(const Violations& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.path + ": " + v.message;
  }
  return out;
}

template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw StoreError(StoreError::Kind::parse, fmt::format("cannot open '{}'", path.string()));
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StoreError(StoreError::Kind::parse,
                       fmt::format("{}:{}: invalid JSON: {}", path.string(), line_no, e.what()));
    }
    fn(j, line_no);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void SampleStore::add_tracker(TrackerSchema schema) {
  if (auto violations = validate_tracker(schema); !violations.empty()) {
    throw StoreError(StoreError::Kind::validation,
                     fmt::format("tracker '{}' is invalid: {}", schema.tracker_id, describe(violations)));
  }
  if (trackers_.count(schema.tracker_id)) {
    throw StoreError(StoreError::Kind::duplicate,
                     fmt::format("duplicate tracker id '{}'", schema.tracker_id));
  }
  index_[schema.tracker_id];
  auto id = schema.tracker_id;
  trackers_.emplace(std::move(id), std::move(schema));
}

Sample SampleStore::validated(Sample sample) const {
  const auto* schema = find_tracker(sample.tracker_id());
  if (!schema) {
    throw StoreError(StoreError::Kind::cross_reference,
                     fmt::format("sample '{}' references unknown tracker '{}'", sample.sample_id,
                                 sample.tracker_id()));
  }
  if (trim(sample.phrase).empty()) {
    throw StoreError(StoreError::Kind::validation,
                     fmt::format("sample '{}' has an empty phrase", sample.sample_id));
  }
  auto check = validate_item(*schema, sample.item, ItemMode::committed);
  if (!check.ok()) {
    throw StoreError(StoreError::Kind::validation,
                     fmt::format("sample '{}' is invalid: {}", sample.sample_id, describe(check.violations)));
  }
  sample.item = std::move(*check.item);
  sample.item.source_phrase = sample.phrase;
  if (sample.item.item_id.empty()) sample.item.item_id = sample.sample_id;
  return sample;
}

void SampleStore::add_sample(Sample sample) {
  if (by_id_.count(sample.sample_id)) {
    throw StoreError(StoreError::Kind::duplicate,
                     fmt::format("duplicate sample id '{}'", sample.sample_id));
  }
  sample = validated(std::move(sample));
  const auto pos = samples_.size();
  by_id_.emplace(sample.sample_id, pos);
  auto& bucket = index_[sample.tracker_id()];
  samples_.push_back(std::move(sample));
  // Keep each bucket chronological; insertion order breaks ties.
  const auto created = samples_.back().item.created_at;
  auto it = std::upper_bound(bucket.begin(), bucket.end(), created,
                             [&](std::int64_t t, std::size_t idx) { return t < samples_[idx].item.created_at; });
  bucket.insert(it, pos);
}

void SampleStore::replace_sample(Sample sample) {
  const auto it = by_id_.find(sample.sample_id);
  if (it == by_id_.end()) {
    throw StoreError(StoreError::Kind::cross_reference,
                     fmt::format("no sample '{}' to replace", sample.sample_id));
  }
  auto& current = samples_[it->second];
  if (current.tracker_id() != sample.tracker_id() ||
      current.item.created_at != sample.item.created_at) {
    throw StoreError(StoreError::Kind::validation,
                     fmt::format("sample '{}' cannot change tracker or creation time", sample.sample_id));
  }
  current = validated(std::move(sample));
}

const TrackerSchema* SampleStore::find_tracker(std::string_view tracker_id) const {
  const auto it = trackers_.find(std::string(tracker_id));
  return it == trackers_.end() ? nullptr : &it->second;
}

const Sample* SampleStore::find_sample(std::string_view sample_id) const {
  const auto it = by_id_.find(std::string(sample_id));
  return it == by_id_.end() ? nullptr : &samples_[it->second];
}

std::vector<const Sample*> SampleStore::samples_for_tracker(std::string_view tracker_id,
                                                            OriginFilter filter) const {
  const auto it = index_.find(tracker_id);
  if (it == index_.end()) {
    throw StoreError(StoreError::Kind::unknown_tracker,
                     fmt::format("unknown tracker '{}'", tracker_id));
  }
  std::vector<const Sample*> out;
  for (auto idx : it->second) {
    const auto& s = samples_[idx];
    if (filter == OriginFilter::both || (filter == OriginFilter::synthetic) == (s.origin == Origin::synthetic)) {
      out.push_back(&s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

StoreView::StoreView(std::shared_ptr<const SampleStore> store, std::optional<std::string> excluded)
    : store_(std::move(store)), excluded_(std::move(excluded)) {
  visible_.reserve(store_->samples().size());
  for (const auto& s : store_->samples()) {
    if (!excluded_ || s.tracker_id() != *excluded_) visible_.push_back(&s);
  }
}

std::vector<const Sample*> StoreView::samples_for_tracker(std::string_view tracker_id,
                                                          OriginFilter filter) const {
  auto out = store_->samples_for_tracker(tracker_id, filter);
  if (excluded_ && tracker_id == *excluded_) out.clear();
  return out;
}

StoreView exclude_tracker(std::shared_ptr<const SampleStore> store, std::string_view tracker_id) {
  if (!store->find_tracker(tracker_id)) {
    throw StoreError(StoreError::Kind::unknown_tracker,
                     fmt::format("unknown tracker '{}'", tracker_id));
  }
  return StoreView(std::move(store), std::string(tracker_id));
}

// ---------------------------------------------------------------------------

nlohmann::json sample_to_json(const TrackerSchema& schema, const Sample& sample) {
  nlohmann::json j;
  j["sample_id"] = sample.sample_id;
  j["tracker_id"] = sample.tracker_id();
  j["phrase"] = sample.phrase;
  j["values"] = values_to_json(schema, sample.item.values);
  j["origin"] = std::string(origin_name(sample.origin));
  if (sample.item.created_at != 0) j["created_at"] = format_timestamp(sample.item.created_at);
  if (!sample.item.item_id.empty() && sample.item.item_id != sample.sample_id) {
    j["item_id"] = sample.item.item_id;
  }
  if (sample.uncurated) j["uncurated"] = true;
  return j;
}

Sample sample_from_json(const TrackerSchema& schema, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("sample record must be an object");
  for (const char* key : {"sample_id", "tracker_id", "phrase"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw std::invalid_argument(fmt::format("missing string '{}'", key));
    }
  }
  if (!j.contains("values")) throw std::invalid_argument("missing 'values'");

  Sample s;
  s.sample_id = j["sample_id"].get<std::string>();
  s.phrase = j["phrase"].get<std::string>();
  s.item.tracker_id = j["tracker_id"].get<std::string>();
  s.item.item_id = j.value("item_id", s.sample_id);
  s.item.values = values_from_json(schema, j["values"]);
  s.item.source_phrase = s.phrase;

  const auto origin = j.value("origin", std::string("synthetic"));
  if (origin == "synthetic") {
    s.origin = Origin::synthetic;
  } else if (origin == "user") {
    s.origin = Origin::user;
  } else {
    throw std::invalid_argument(fmt::format("origin '{}' is not synthetic|user", origin));
  }
  if (j.contains("created_at")) {
    if (!j["created_at"].is_string()) throw std::invalid_argument("'created_at' must be a string");
    auto ts = parse_timestamp(j["created_at"].get<std::string>());
    if (!ts) throw std::invalid_argument("'created_at' is not YYYY-MM-DDTHH:MM:SSZ");
    s.item.created_at = *ts;
  }
  s.uncurated = j.value("uncurated", false);
  return s;
}

SampleStore load_store(const fs::path& schema_path, const fs::path& sample_path) {
  SampleStore store;
  for_each_record(schema_path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      store.add_tracker(schema_from_json(j));
    } catch (const std::invalid_argument& e) {
      throw StoreError(StoreError::Kind::parse,
                       fmt::format("{}:{}: {}", schema_path.string(), line, e.what()));
    } catch (const StoreError& e) {
      throw StoreError(e.kind(), fmt::format("{}:{}: {}", schema_path.string(), line, e.what()));
    }
  });

  for_each_record(sample_path, [&](const nlohmann::json& j, std::size_t line) {
    const std::string tracker_id =
        j.is_object() && j.contains("tracker_id") && j["tracker_id"].is_string()
            ? j["tracker_id"].get<std::string>()
            : std::string();
    const auto* schema = store.find_tracker(tracker_id);
    try {
      if (!schema) {
        const std::string sample_id = j.is_object() ? j.value("sample_id", std::string("?")) : "?";
        throw StoreError(StoreError::Kind::cross_reference,
                         fmt::format("sample '{}' references unknown tracker '{}'", sample_id, tracker_id));
      }
      store.add_sample(sample_from_json(*schema, j));
    } catch (const std::invalid_argument& e) {
      throw StoreError(StoreError::Kind::parse,
                       fmt::format("{}:{}: {}", sample_path.string(), line, e.what()));
    } catch (const StoreError& e) {
      throw StoreError(e.kind(), fmt::format("{}:{}: {}", sample_path.string(), line, e.what()));
    }
  });
  return store;
}

void save_store(const SampleStore& store, const fs::path& schema_path, const fs::path& sample_path) {
  const auto dump = [](const nlohmann::json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
  };
  {
    std::ofstream out(schema_path, std::ios::binary | std::ios::trunc);
    for (const auto& [id, schema] : store.trackers()) out << dump(schema_to_json(schema)) << '\n';
    if (!out) throw StoreError(StoreError::Kind::parse, "cannot write " + schema_path.string());
  }
  std::ofstream out(sample_path, std::ios::binary | std::ios::trunc);
  for (const auto& s : store.samples()) {
    out << dump(sample_to_json(*store.find_tracker(s.tracker_id()), s)) << '\n';
  }
  if (!out) throw StoreError(StoreError::Kind::parse, "cannot write " + sample_path.string());
}

// ---------------------------------------------------------------------------

Item random_item(const TrackerSchema& schema, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return detail::uniform_below(rng, n); };
  const auto columns = schema.columns();

  std::vector<const FieldSpec*> chosen;
  for (const auto* f : columns) {
    if (below(2)) chosen.push_back(f);
  }
  if (chosen.empty()) chosen.push_back(columns[below(columns.size())]);

  auto random_time_point = [&] {
    const auto base = to_epoch_minutes(TimePoint{Date{2023, 1, 1}, 0, 0});
    return from_epoch_minutes(base + static_cast<std::int64_t>(below(365 * 1440)));
  };

  Item item;
  item.tracker_id = schema.tracker_id;
  for (const auto* f : chosen) {
    FieldValue v;
    if (std::holds_alternative<NumberKind>(f->kind)) {
      v = below(2) ? static_cast<double>(1 + below(100)) : static_cast<double>(below(1000)) / 10.0;
    } else if (const auto* lk = std::get_if<LikertKind>(&f->kind)) {
      v = LikertValue{lk->min + static_cast<int>(below(static_cast<std::uint64_t>(lk->max - lk->min) + 1))};
    } else if (const auto* sc = std::get_if<SingleChoiceKind>(&f->kind)) {
      v = sc->options[below(sc->options.size())];
    } else if (const auto* mc = std::get_if<MultiChoiceKind>(&f->kind)) {
      ChoiceSet set;
      while (set.labels.empty()) {
        for (const auto& o : mc->options) {
          if (below(2)) set.labels.push_back(o);
        }
      }
      v = std::move(set);
    } else if (std::holds_alternative<DateKind>(f->kind)) {
      v = random_time_point().date;
    } else if (std::holds_alternative<TimePointKind>(f->kind)) {
      v = random_time_point();
    } else if (std::holds_alternative<TimeRangeKind>(f->kind)) {
      const auto start = random_time_point();
      v = TimeRange{start, from_epoch_minutes(to_epoch_minutes(start) + 1 +
                                              static_cast<std::int64_t>(below(240)))};
    } else {
      v = std::string("(text)");
    }
    item.values.emplace(f->name, std::move(v));
  }
  return item;
}

DraftBatch generate_seed_drafts(const TrackerSchema& schema, int count, CompletionBackend& backend,
                                std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_seed_drafts: count must be >= 1");
  if (auto violations = validate_tracker(schema); !violations.empty()) {
    throw std::invalid_argument("generate_seed_drafts: invalid tracker: " + describe(violations));
  }

  auto ask = [&](std::string prompt) {
    CompletionRequest req;
    req.prompt = std::move(prompt);
    req.stop_sequence = "\n";
    req.temperature = 0.7;
    req.max_tokens = 128;
    return trim(backend.complete(req).text);
  };

  DraftBatch batch;
  for (int i = 0; i < count; ++i) {
    const auto draft_id = fmt::format("draft-{}-{}", schema.tracker_id, i + 1);
    Item item = random_item(schema, detail::mix_seed(seed, draft_id));
    item.item_id = draft_id;

    bool ok = true;
    for (auto& [name, value] : item.values) {
      const auto* field = schema.find_field(name);
      const bool is_long = std::holds_alternative<LongTextKind>(field->kind);
      if (!is_long && !std::holds_alternative<ShortTextKind>(field->kind)) continue;
      auto text = ask(fmt::format("Write a {} value for the field \"{}\" of the self-tracking tracker \"{}\"{}.\nValue:",
                                  is_long ? "two-sentence" : "short", field->name, schema.name,
                                  field->description ? " (" + *field->description + ")" : ""));
      if (text.empty()) {
        batch.warnings.push_back(fmt::format("{}: backend returned no text for '{}'; draft dropped", draft_id, name));
        ok = false;
        break;
      }
      value = std::move(text);
    }
    if (!ok) continue;

    std::string values_line;
    for (const auto* col : schema.columns()) {
      if (auto it = item.values.find(col->name); it != item.values.end()) {
        if (!values_line.empty()) values_line += " | ";
        values_line += col->name + " = " + render_value(it->second);
      }
    }
    auto phrase = ask(fmt::format(
        "Write one first-person sentence a person would say to log this entry in their \"{}\" "
        "tracker. Mention every value.\nValues: {}\nSentence:",
        schema.name, values_line));
    if (phrase.empty()) {
      batch.warnings.push_back(fmt::format("{}: backend returned an empty phrase; draft dropped", draft_id));
      continue;
    }

    auto check = validate_item(schema, item, ItemMode::committed);
    if (!check.ok()) {
      batch.warnings.push_back(fmt::format("{}: draft item failed validation: {}; dropped", draft_id,
                                           describe(check.violations)));
      continue;
    }
    Sample s;
    s.sample_id = draft_id;
    s.phrase = std::move(phrase);
    s.item = std::move(*check.item);
    s.item.source_phrase = s.phrase;
    s.origin = Origin::synthetic;
    s.uncurated = true;
    batch.drafts.push_back(std::move(s));
  }
  return batch;
}

}  // namespace tracknlu
