#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tracknlu {

// ---------------------------------------------------------------------------
// Field kinds
// ---------------------------------------------------------------------------

struct NumberKind {
  bool operator==(const NumberKind&) const = default;
};
struct LikertKind {
  int min = 1;
  int max = 5;
  bool operator==(const LikertKind&) const = default;
};
struct SingleChoiceKind {
  std::vector<std::string> options;
  bool operator==(const SingleChoiceKind&) const = default;
};
struct MultiChoiceKind {
  std::vector<std::string> options;
  bool operator==(const MultiChoiceKind&) const = default;
};
struct ShortTextKind {
  bool operator==(const ShortTextKind&) const = default;
};
struct LongTextKind {
  bool operator==(const LongTextKind&) const = default;
};
struct DateKind {
  bool operator==(const DateKind&) const = default;
};
struct TimePointKind {
  bool operator==(const TimePointKind&) const = default;
};
struct TimeRangeKind {
  bool operator==(const TimeRangeKind&) const = default;
};

/// The six content kinds followed by the three time kinds. Content fields of
/// a tracker use the first six; the optional time field uses the last three.
using FieldKind = std::variant<NumberKind, LikertKind, SingleChoiceKind, MultiChoiceKind,
                               ShortTextKind, LongTextKind, DateKind, TimePointKind,
                               TimeRangeKind>;

bool is_time_kind(const FieldKind& kind);
bool is_choice_kind(const FieldKind& kind);
/// Wire name used in schema records: "number", "likert", "single_choice", ...
std::string_view kind_name(const FieldKind& kind);
/// Options of a choice kind, empty span for every other kind.
const std::vector<std::string>& choice_options(const FieldKind& kind);

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;
  auto operator<=>(const Date&) const = default;
};

struct TimePoint {
  Date date;
  int hour = 0;
  int minute = 0;
  auto operator<=>(const TimePoint&) const = default;
};

struct TimeRange {
  TimePoint start;
  TimePoint end;
  auto operator<=>(const TimeRange&) const = default;
};

struct LikertValue {
  int value = 0;
  auto operator<=>(const LikertValue&) const = default;
};

/// Multi-choice labels; kept sorted and unique once validated.
struct ChoiceSet {
  std::vector<std::string> labels;
  auto operator<=>(const ChoiceSet&) const = default;
};

/// A field value tagged by representation. Single choices and both text kinds
/// share std::string; the schema field kind disambiguates.
using FieldValue =
    std::variant<double, LikertValue, std::string, ChoiceSet, Date, TimePoint, TimeRange>;

bool is_valid_date(const Date& d);
bool is_valid_time_point(const TimePoint& t);

/// Minutes since 1970-01-01T00:00 (proleptic Gregorian, no time zone).
std::int64_t to_epoch_minutes(const TimePoint& t);
TimePoint from_epoch_minutes(std::int64_t minutes);

std::string format_date(const Date& d);
std::string format_time_point(const TimePoint& t);
std::optional<Date> parse_date(std::string_view s);
std::optional<TimePoint> parse_time_point(std::string_view s);
std::optional<TimeRange> parse_time_range(std::string_view s);

/// Shortest decimal that round-trips; never has trailing zeros ("3", "72.5").
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Text normalization
// ---------------------------------------------------------------------------

bool is_valid_utf8(std::string_view s);
/// Simple Unicode case fold (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic).
std::string case_fold(std::string_view s);
std::string trim(std::string_view s);
/// Canonical comparison key for labels and field names: case_fold(trim(s)).
std::string normalize_label(std::string_view s);

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

struct FieldSpec {
  std::string name;
  FieldKind kind;
  std::optional<std::string> description;
  bool operator==(const FieldSpec&) const = default;
};

struct TrackerSchema {
  std::string tracker_id;
  std::string name;
  std::vector<FieldSpec> fields;
  /// At most one; its kind must be a time kind.
  std::optional<FieldSpec> time_field;
  int utc_offset_minutes = 0;

  /// Content fields in declared order followed by the time field, if any.
  std::vector<const FieldSpec*> columns() const;
  /// Lookup by normalized name across content and time fields.
  const FieldSpec* find_field(std::string_view name) const;

  bool operator==(const TrackerSchema&) const = default;
};

struct Violation {
  std::string path;
  std::string message;
  bool operator==(const Violation&) const = default;
};

using Violations = std::vector<Violation>;

/// Empty result means the schema is well formed.
Violations validate_tracker(const TrackerSchema& schema);

// ---------------------------------------------------------------------------
// Items
// ---------------------------------------------------------------------------

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

std::string format_timestamp(Timestamp ts);
std::optional<Timestamp> parse_timestamp(std::string_view s);
/// Wall-clock minute of `ts` at the given UTC offset.
TimePoint local_time_point(Timestamp ts, int utc_offset_minutes);

struct Item {
  std::string item_id;
  std::string tracker_id;
  std::map<std::string, FieldValue> values;
  Timestamp created_at = 0;
  std::optional<std::string> source_phrase;
  bool operator==(const Item&) const = default;
};

struct ItemValidation {
  std::optional<Item> item;  // set iff accepted
  Violations violations;
  bool ok() const { return item.has_value(); }
};

enum class ItemMode { draft, committed };

/// Accepts iff every key names a schema field and every value matches its
/// kind. The accepted item has keys and choice labels respelled canonically.
ItemValidation validate_item(const TrackerSchema& schema, const Item& item,
                             ItemMode mode = ItemMode::draft);

// ---------------------------------------------------------------------------
// Wire forms
// ---------------------------------------------------------------------------

struct Coerced {
  std::optional<FieldValue> value;
  std::string error;
  explicit operator bool() const { return value.has_value(); }
};

/// Parses a wire string into a value of the given kind. Choice labels match
/// case-insensitively but exactly; no fuzzy matching happens here.
Coerced normalize_value(const FieldKind& kind, std::string_view raw);

/// Inverse of normalize_value for a value of the given kind.
std::string render_value(const FieldValue& value);

// ---------------------------------------------------------------------------
// Record formats (line-delimited JSON)
// ---------------------------------------------------------------------------

nlohmann::json schema_to_json(const TrackerSchema& schema);
/// Throws std::invalid_argument on structural problems (missing keys, unknown kind).
TrackerSchema schema_from_json(const nlohmann::json& j);

/// Values are encoded by kind: numbers and likert as JSON numbers, everything
/// else as its wire string.
nlohmann::json values_to_json(const TrackerSchema& schema,
                              const std::map<std::string, FieldValue>& values);
/// Schema-directed decode. A JSON type that does not fit the field kind is kept
/// in its natural representation so validate_item reports the mismatch.
std::map<std::string, FieldValue> values_from_json(const TrackerSchema& schema,
                                                   const nlohmann::json& j);

}  // namespace tracknlu
