#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tracknlu/llm.hpp"
#include "tracknlu/schema.hpp"

namespace tracknlu {

enum class Origin { synthetic, user };
enum class OriginFilter { synthetic, user, both };

std::string_view origin_name(Origin origin);

/// An (item, phrase) pair usable as an in-context example.
struct Sample {
  std::string sample_id;
  std::string phrase;
  Item item;
  Origin origin = Origin::synthetic;
  bool uncurated = false;

  const std::string& tracker_id() const { return item.tracker_id; }
  bool operator==(const Sample&) const = default;
};

class StoreError : public std::runtime_error {
 public:
  enum class Kind { parse, cross_reference, validation, unknown_tracker, duplicate };
  StoreError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Trackers plus their samples, indexed by tracker. Mutation is single-writer;
/// share it as std::shared_ptr<const SampleStore> for concurrent readers.
class SampleStore {
 public:
  /// Throws StoreError(validation | duplicate).
  void add_tracker(TrackerSchema schema);
  /// Validates the sample against its tracker. Throws StoreError.
  void add_sample(Sample sample);
  /// Replaces the sample with the same id. Throws StoreError.
  void replace_sample(Sample sample);

  const std::map<std::string, TrackerSchema>& trackers() const { return trackers_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const TrackerSchema* find_tracker(std::string_view tracker_id) const;
  const Sample* find_sample(std::string_view sample_id) const;

  /// Chronological (created_at, then insertion order). Throws on unknown tracker.
  std::vector<const Sample*> samples_for_tracker(std::string_view tracker_id,
                                                 OriginFilter filter = OriginFilter::both) const;

  bool operator==(const SampleStore& other) const {
    return trackers_ == other.trackers_ && samples_ == other.samples_;
  }

 private:
  Sample validated(Sample sample) const;

  std::map<std::string, TrackerSchema> trackers_;
  std::vector<Sample> samples_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> index_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Read-only snapshot of a store, optionally hiding one tracker's samples.
class StoreView {
 public:
  explicit StoreView(std::shared_ptr<const SampleStore> store,
                     std::optional<std::string> excluded_tracker = std::nullopt);

  const std::vector<const Sample*>& samples() const { return visible_; }
  std::size_t size() const { return visible_.size(); }
  const std::optional<std::string>& excluded_tracker() const { return excluded_; }
  const SampleStore& store() const { return *store_; }
  std::vector<const Sample*> samples_for_tracker(std::string_view tracker_id,
                                                 OriginFilter filter = OriginFilter::both) const;

 private:
  std::shared_ptr<const SampleStore> store_;
  std::optional<std::string> excluded_;
  std::vector<const Sample*> visible_;
};

/// Leave-one-tracker-out view. Throws StoreError(unknown_tracker).
StoreView exclude_tracker(std::shared_ptr<const SampleStore> store, std::string_view tracker_id);

nlohmann::json sample_to_json(const TrackerSchema& schema, const Sample& sample);
/// Throws std::invalid_argument on structural problems; values are not validated.
Sample sample_from_json(const TrackerSchema& schema, const nlohmann::json& j);

/// Reads the two line-delimited files; any bad line aborts the whole load.
SampleStore load_store(const std::filesystem::path& schema_path,
                       const std::filesystem::path& sample_path);
/// Writes canonical records so that load_store(save_store(s)) == s byte-for-byte.
void save_store(const SampleStore& store, const std::filesystem::path& schema_path,
                const std::filesystem::path& sample_path);

struct DraftBatch {
  std::vector<Sample> drafts;  // all flagged uncurated, none added to any store
  std::vector<std::string> warnings;
};

/// Randomly instantiates `count` items of the tracker and asks the backend for
/// text values and a describing phrase. Drafts must be curated before use.
DraftBatch generate_seed_drafts(const TrackerSchema& schema, int count,
                                CompletionBackend& backend, std::uint64_t seed);

/// Random item over the kinds' domains; text fields get placeholder text that
/// callers overwrite. Always passes validate_item.
Item random_item(const TrackerSchema& schema, std::uint64_t seed);

}  // namespace tracknlu
