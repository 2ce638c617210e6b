#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracknlu/embedding.hpp"
#include "tracknlu/seed_store.hpp"

namespace tracknlu {

inline constexpr std::size_t kShotBudget = 10;
inline constexpr std::size_t kMaxUserShots = 8;
inline constexpr std::size_t kMaxFarthestShots = 5;

inline constexpr std::string_view kInstruction =
    "Extract the field values for the tracker from the sentence. Only include fields the "
    "sentence specifies.";

enum class ShotRole { farthest, nearest, user };
std::string_view role_name(ShotRole role);

struct Shot {
  Sample sample;
  ShotRole role = ShotRole::nearest;
  /// Cosine to the query phrase (also computed for user shots).
  double score = 0;
};

/// Shots in prompt order: farthest, then nearest (both by ascending
/// similarity), then the user's own samples oldest to newest.
struct ShotPlan {
  std::vector<Shot> shots;
  std::string query_tracker_id;
  std::string query_phrase;
  std::optional<TimePoint> reference_time;

  std::size_t count(ShotRole role) const;
};

enum class PromptStyle { augmented, zero_shot, qa };
std::string_view style_name(PromptStyle style);
std::optional<PromptStyle> parse_style(std::string_view name);

struct PromptBundle {
  std::string text;
  std::string stop_sequence;
  ShotPlan shot_plan;
  PromptStyle style = PromptStyle::augmented;
};

/// Seed samples with their phrase embeddings computed once.
struct SeedIndex {
  std::vector<const Sample*> samples;
  std::vector<EmbeddingVector> vectors;

  static SeedIndex build(const std::vector<const Sample*>& samples, const Embedder& embedder);
};

/// Picks up to 10 shots: the k = min(|user|, 8) most recent user samples plus
/// m = 10 - k synthetic ones, of which min(5, m) are the least similar to the
/// phrase and the rest the most similar. A short seed view yields a short plan.
ShotPlan select_shots(std::string_view phrase, std::string_view query_tracker_id,
                      const std::vector<const Sample*>& user_samples, const SeedIndex& seeds,
                      const Embedder& embedder);

inline ShotPlan select_shots(std::string_view phrase, std::string_view query_tracker_id,
                             const std::vector<const Sample*>& user_samples,
                             const std::vector<const Sample*>& seed_samples,
                             const Embedder& embedder) {
  return select_shots(phrase, query_tracker_id, user_samples,
                      SeedIndex::build(seed_samples, embedder), embedder);
}

inline ShotPlan select_shots(std::string_view phrase, std::string_view query_tracker_id,
                             const std::vector<const Sample*>& user_samples,
                             const StoreView& seed_view, const Embedder& embedder) {
  return select_shots(phrase, query_tracker_id, user_samples, seed_view.samples(), embedder);
}

/// Resolves the tracker of each shot; shots span heterogeneous trackers.
using SchemaResolver = std::function<const TrackerSchema*(std::string_view tracker_id)>;

/// `number`, `scale 1 to 5`, `one of: a / b`, `any of: a / b`, `short text`, ...
std::string field_descriptor(const FieldKind& kind);
/// `Fields:` line body, schema order including the time field.
std::string render_fields_line(const TrackerSchema& schema);
/// `Values:` line body: present fields in schema order, `A = x | B = y`.
std::string render_values_line(const TrackerSchema& schema,
                               const std::map<std::string, FieldValue>& values);

/// Augmented few-shot prompt. Throws std::invalid_argument when a shot's
/// tracker cannot be resolved.
PromptBundle render_prompt(const TrackerSchema& schema, const ShotPlan& plan,
                           std::string_view phrase, std::optional<TimePoint> reference_time,
                           const SchemaResolver& resolve);

/// Instruction plus the query block only.
PromptBundle render_zero_shot_prompt(const TrackerSchema& schema, std::string_view phrase,
                                     std::optional<TimePoint> reference_time = std::nullopt);

/// One extractive-QA input per content field, in schema order. Throws
/// std::invalid_argument if a field has no description.
std::vector<std::pair<std::string, std::string>> render_qa_inputs(const TrackerSchema& schema,
                                                                  std::string_view phrase);

}  // namespace tracknlu
