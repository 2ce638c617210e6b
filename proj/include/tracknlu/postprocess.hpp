#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tracknlu/embedding.hpp"
#include "tracknlu/schema.hpp"

namespace tracknlu {

struct RawPair {
  std::string name;
  std::string value;
  bool operator==(const RawPair&) const = default;
};

struct ParsedCompletion {
  std::vector<RawPair> pairs;
  std::vector<std::string> malformed;  // segments without " = "
};

/// First line only, split on " | ", each segment on its first " = ".
ParsedCompletion parse_completion(std::string_view text);

struct ChoiceSnap {
  std::string raw_label;
  std::string label;
  double similarity = 0;
};

/// How a value was obtained: verbatim when every label matched exactly,
/// otherwise one snap per replaced label.
struct Provenance {
  std::vector<ChoiceSnap> snaps;
  bool snapped() const { return !snaps.empty(); }
};

struct DroppedEntry {
  std::string raw_name;
  std::string raw_value;
  std::string reason;
};

struct ExtractionResult {
  std::string tracker_id;
  std::map<std::string, FieldValue> values;
  std::map<std::string, Provenance> provenance;
  std::vector<DroppedEntry> dropped;
  std::string raw_completion;
};

struct SnapResult {
  std::size_t index = 0;  // into the options
  double similarity = 0;
};

/// Option with the highest cosine to `raw`; ties go to the earliest option.
SnapResult snap_to_option(std::string_view raw, const std::vector<std::string>& options,
                          const Embedder& embedder);

/// Maps raw pairs onto the schema. Never throws for bad model output: every
/// failure lands in `dropped`, and `values` always passes validate_item.
ExtractionResult coerce(const TrackerSchema& schema, const std::vector<RawPair>& pairs,
                        const Embedder& embedder);

/// parse_completion + coerce, with malformed segments recorded as dropped.
ExtractionResult extract_from_completion(const TrackerSchema& schema, std::string_view completion,
                                         const Embedder& embedder);

}  // namespace tracknlu
