#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracknlu/embedding.hpp"
#include "tracknlu/llm.hpp"
#include "tracknlu/postprocess.hpp"
#include "tracknlu/prompting.hpp"
#include "tracknlu/seed_store.hpp"

namespace tracknlu {

class ServiceError : public std::runtime_error {
 public:
  enum class Code { not_found, invalid, conflict, backend_unavailable, backend_error, internal };

  ServiceError(Code code, const std::string& message, std::vector<std::string> details = {},
               std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
      : std::runtime_error(message),
        code_(code),
        details_(std::move(details)),
        retry_after_(retry_after) {}

  Code code() const { return code_; }
  const std::vector<std::string>& details() const { return details_; }
  std::optional<std::chrono::milliseconds> retry_after() const { return retry_after_; }
  int http_status() const;
  std::string_view code_name() const;

 private:
  Code code_;
  std::vector<std::string> details_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

struct ShotAuditEntry {
  std::string sample_id;
  std::string tracker_id;
  ShotRole role;
  double score = 0;
};

struct CaptureSession {
  std::string request_id;
  std::string tracker_id;
  std::string phrase;
  std::optional<TimePoint> reference_time;
  ExtractionResult result;
  std::vector<ShotAuditEntry> shot_audit;  // exactly the shots in the prompt, in order
  std::string prompt_sha256;
};

struct ServiceConfig {
  /// Append-only persistence directory; empty keeps everything in memory.
  std::filesystem::path store_dir;
  std::shared_ptr<const SampleStore> seeds;
  std::shared_ptr<CompletionBackend> backend;
  std::shared_ptr<const Embedder> embedder;
  std::function<Timestamp()> clock;
  std::chrono::milliseconds request_deadline{30000};
};

/// Define tracker -> extract -> confirm/correct -> commit. Extraction is
/// side-effect free; commits with a phrase become user shots for later
/// extractions. Safe for concurrent use (single writer, many readers).
class CaptureService {
 public:
  explicit CaptureService(ServiceConfig config);

  TrackerSchema create_tracker(TrackerSchema schema);
  /// User trackers, then seed trackers not shadowed by a user tracker.
  std::vector<TrackerSchema> list_trackers() const;
  TrackerSchema get_tracker(std::string_view tracker_id) const;
  bool is_seed_tracker(std::string_view tracker_id) const;

  CaptureSession extract(std::string_view tracker_id, std::string_view phrase,
                         std::optional<TimePoint> reference_time = std::nullopt) const;

  Item commit_item(std::string_view tracker_id, std::map<std::string, FieldValue> values,
                   std::optional<std::string> source_phrase = std::nullopt);
  std::vector<Item> list_items(std::string_view tracker_id) const;
  /// Rewrites a committed item's values and its linked sample (phrase kept).
  Item correct_item(std::string_view item_id, std::map<std::string, FieldValue> values);
  Item get_item(std::string_view item_id) const;

  /// Samples committed with a phrase, all trackers, in commit order.
  std::vector<Sample> list_user_samples() const;

 private:
  struct State {
    SampleStore store;  // user trackers and user-origin samples
    std::map<std::string, Item> items;
    std::vector<std::string> item_order;
  };

  std::shared_ptr<const State> snapshot() const;
  const TrackerSchema* resolve(const State& state, std::string_view tracker_id) const;
  void replay();
  void append(const std::string& file, const nlohmann::json& record);
  /// Copies an adopted seed tracker into the user store on first commit.
  void adopt_tracker(State& next, std::string_view tracker_id);

  ServiceConfig config_;
  SeedIndex seed_index_;
  mutable std::shared_mutex state_mutex_;
  std::shared_ptr<const State> state_;
  std::mutex write_mutex_;
};

nlohmann::json tracker_to_json(const TrackerSchema& schema);
nlohmann::json item_to_json(const TrackerSchema& schema, const Item& item);
nlohmann::json session_to_json(const TrackerSchema& schema, const CaptureSession& session);
nlohmann::json error_to_json(const ServiceError& error);

}  // namespace tracknlu
