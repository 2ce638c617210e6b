#include "tracknlu/schema.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "utf8.hpp"

namespace tracknlu {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kMaxLikertSteps = 20;

char32_t fold_code_point(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  // Latin-1
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c == 0xB5) return 0x3BC;
  // Latin Extended-A
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c | 1;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c & 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c == 0x17F) return U's';
  // Greek
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c == 0x3C2) return 0x3C3;
  // Cyrillic
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::optional<TimePoint> parse_time_point_prefix(std::string_view s) {
  // YYYY-MM-DDTHH:MM
  if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  TimePoint t{*date, 0, 0};
  if (!parse_fixed_int(s, 11, 2, t.hour) || !parse_fixed_int(s, 14, 2, t.minute)) {
    return std::nullopt;
  }
  if (!is_valid_time_point(t)) return std::nullopt;
  return t;
}

std::vector<std::string> split_multi(std::string_view raw) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = raw.find(", ", start);
    parts.emplace_back(raw.substr(start, pos == std::string_view::npos ? raw.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 2;
  }
  return parts;
}

// Index of the option matching `label` under normalization, or npos.
std::size_t find_option(const std::vector<std::string>& options, std::string_view label) {
  const auto key = normalize_label(label);
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (normalize_label(options[i]) == key) return i;
  }
  return std::string::npos;
}

std::string_view value_repr_name(const FieldValue& v) {
  return std::visit(overloaded{[](double) { return std::string_view{"number"}; },
                               [](const LikertValue&) { return std::string_view{"likert"}; },
                               [](const std::string&) { return std::string_view{"string"}; },
                               [](const ChoiceSet&) { return std::string_view{"label set"}; },
                               [](const Date&) { return std::string_view{"date"}; },
                               [](const TimePoint&) { return std::string_view{"time point"}; },
                               [](const TimeRange&) { return std::string_view{"time range"}; }},
                    v);
}

}  // namespace

// ---------------------------------------------------------------------------

bool is_time_kind(const FieldKind& kind) {
  return std::holds_alternative<DateKind>(kind) || std::holds_alternative<TimePointKind>(kind) ||
         std::holds_alternative<TimeRangeKind>(kind);
}

bool is_choice_kind(const FieldKind& kind) {
  return std::holds_alternative<SingleChoiceKind>(kind) ||
         std::holds_alternative<MultiChoiceKind>(kind);
}

std::string_view kind_name(const FieldKind& kind) {
  static constexpr std::string_view names[] = {"number",     "likert",    "single_choice",
                                               "multi_choice", "short_text", "long_text",
                                               "date",       "time_point", "time_range"};
  return names[kind.index()];
}

const std::vector<std::string>& choice_options(const FieldKind& kind) {
  static const std::vector<std::string> none;
  if (const auto* s = std::get_if<SingleChoiceKind>(&kind)) return s->options;
  if (const auto* m = std::get_if<MultiChoiceKind>(&kind)) return m->options;
  return none;
}

// ---------------------------------------------------------------------------

bool is_valid_date(const Date& d) {
  using namespace std::chrono;
  if (d.year < 1 || d.year > 9999) return false;
  return year_month_day{year{d.year}, month{static_cast<unsigned>(d.month)},
                        day{static_cast<unsigned>(d.day)}}
      .ok();
}

bool is_valid_time_point(const TimePoint& t) {
  return is_valid_date(t.date) && t.hour >= 0 && t.hour < 24 && t.minute >= 0 && t.minute < 60;
}

std::int64_t to_epoch_minutes(const TimePoint& t) {
  using namespace std::chrono;
  const sys_days days = year_month_day{year{t.date.year}, month{static_cast<unsigned>(t.date.month)},
                                       day{static_cast<unsigned>(t.date.day)}};
  return static_cast<std::int64_t>(days.time_since_epoch().count()) * 1440 + t.hour * 60 +
         t.minute;
}

TimePoint from_epoch_minutes(std::int64_t minutes) {
  using namespace std::chrono;
  auto day_count = minutes / 1440;
  auto rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    --day_count;
  }
  const year_month_day ymd{sys_days{days{day_count}}};
  return TimePoint{Date{static_cast<int>(ymd.year()), static_cast<int>(unsigned(ymd.month())),
                        static_cast<int>(unsigned(ymd.day()))},
                   static_cast<int>(rem / 60), static_cast<int>(rem % 60)};
}

std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", d.year, d.month, d.day);
}

std::string format_time_point(const TimePoint& t) {
  return fmt::format("{}T{:02d}:{:02d}", format_date(t.date), t.hour, t.minute);
}

std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  Date d;
  if (!parse_fixed_int(s, 0, 4, d.year) || !parse_fixed_int(s, 5, 2, d.month) ||
      !parse_fixed_int(s, 8, 2, d.day)) {
    return std::nullopt;
  }
  if (!is_valid_date(d)) return std::nullopt;
  return d;
}

std::optional<TimePoint> parse_time_point(std::string_view s) {
  return parse_time_point_prefix(s);
}

std::optional<TimeRange> parse_time_range(std::string_view s) {
  constexpr std::string_view sep = " to ";
  const auto pos = s.find(sep);
  if (pos == std::string_view::npos) return std::nullopt;
  auto start = parse_time_point(s.substr(0, pos));
  auto end = parse_time_point(s.substr(pos + sep.size()));
  if (!start || !end || *end < *start) return std::nullopt;
  return TimeRange{*start, *end};
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

bool is_valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const auto cp = detail::decode_utf8(s, i);
    if (!cp.valid) return false;
    i += cp.length;
  }
  return true;
}

std::string case_fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto cp = detail::decode_utf8(s, i);
    if (cp.valid) {
      detail::append_utf8(out, fold_code_point(cp.value));
    } else {
      out.push_back(s[i]);
    }
    i += cp.length;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_label(std::string_view s) { return case_fold(trim(s)); }

// ---------------------------------------------------------------------------

std::vector<const FieldSpec*> TrackerSchema::columns() const {
  std::vector<const FieldSpec*> out;
  out.reserve(fields.size() + 1);
  for (const auto& f : fields) out.push_back(&f);
  if (time_field) out.push_back(&*time_field);
  return out;
}

const FieldSpec* TrackerSchema::find_field(std::string_view name) const {
  const auto key = normalize_label(name);
  for (const auto* f : columns()) {
    if (normalize_label(f->name) == key) return f;
  }
  return nullptr;
}

Violations validate_tracker(const TrackerSchema& schema) {
  Violations out;
  if (trim(schema.tracker_id).empty()) out.push_back({"tracker_id", "tracker_id empty"});
  if (trim(schema.name).empty()) out.push_back({"name", "name empty"});
  if (schema.fields.empty()) out.push_back({"fields", "fields empty"});

  std::set<std::string> seen;
  auto check_name = [&](const FieldSpec& f, const std::string& path) {
    if (trim(f.name).empty()) {
      out.push_back({path + ".name", "field name empty"});
      return;
    }
    if (!is_valid_utf8(f.name)) out.push_back({path + ".name", "field name is not valid UTF-8"});
    if (f.name.find(" = ") != std::string::npos || f.name.find(" | ") != std::string::npos ||
        f.name.find('\n') != std::string::npos) {
      out.push_back({path + ".name", "field name contains a reserved separator"});
    }
    if (!seen.insert(normalize_label(f.name)).second) {
      out.push_back({path + ".name", fmt::format("duplicate field name '{}'", f.name)});
    }
  };

  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const auto& f = schema.fields[i];
    const auto path = fmt::format("fields[{}]", i);
    check_name(f, path);
    if (is_time_kind(f.kind)) {
      out.push_back({path + ".kind", "time kinds are only allowed on the time field"});
      continue;
    }
    if (const auto* lk = std::get_if<LikertKind>(&f.kind)) {
      if (!(lk->min < lk->max)) {
        out.push_back({path + ".kind", "likert requires min < max"});
      } else if (static_cast<long long>(lk->max) - lk->min > kMaxLikertSteps) {
        out.push_back({path + ".kind",
                       fmt::format("likert range exceeds {} steps", kMaxLikertSteps)});
      }
    }
    if (is_choice_kind(f.kind)) {
      const auto& opts = choice_options(f.kind);
      const bool multi = std::holds_alternative<MultiChoiceKind>(f.kind);
      if (opts.size() < 2) out.push_back({path + ".options", "choice needs at least 2 options"});
      std::set<std::string> labels;
      for (std::size_t k = 0; k < opts.size(); ++k) {
        const auto opath = fmt::format("{}.options[{}]", path, k);
        if (trim(opts[k]).empty()) {
          out.push_back({opath, "option label empty"});
          continue;
        }
        if (!is_valid_utf8(opts[k])) out.push_back({opath, "option label is not valid UTF-8"});
        if (opts[k].find(" | ") != std::string::npos || opts[k].find('\n') != std::string::npos ||
            (multi && opts[k].find(", ") != std::string::npos)) {
          out.push_back({opath, "option label contains a reserved separator"});
        }
        if (!labels.insert(normalize_label(opts[k])).second) {
          out.push_back({opath, fmt::format("duplicate option '{}'", opts[k])});
        }
      }
    }
  }

  if (schema.time_field) {
    check_name(*schema.time_field, "time_field");
    if (!is_time_kind(schema.time_field->kind)) {
      out.push_back({"time_field.kind", "time field must be date, time_point or time_range"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_timestamp(Timestamp ts) {
  auto minutes = ts / 60;
  auto seconds = ts % 60;
  if (seconds < 0) {
    seconds += 60;
    --minutes;
  }
  return fmt::format("{}:{:02d}Z", format_time_point(from_epoch_minutes(minutes)), seconds);
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  int seconds = 0;
  if (s.size() == 19) {
    if (s[16] != ':' || !parse_fixed_int(s, 17, 2, seconds) || seconds > 59) return std::nullopt;
    s = s.substr(0, 16);
  }
  auto tp = parse_time_point(s);
  if (!tp) return std::nullopt;
  return to_epoch_minutes(*tp) * 60 + seconds;
}

TimePoint local_time_point(Timestamp ts, int utc_offset_minutes) {
  auto minutes = ts / 60;
  if (ts % 60 < 0) --minutes;
  return from_epoch_minutes(minutes + utc_offset_minutes);
}

ItemValidation validate_item(const TrackerSchema& schema, const Item& item, ItemMode mode) {
  ItemValidation result;
  auto& out = result.violations;
  Item accepted = item;
  accepted.values.clear();

  if (item.tracker_id != schema.tracker_id) {
    out.push_back({"tracker_id", fmt::format("item belongs to tracker '{}', not '{}'",
                                             item.tracker_id, schema.tracker_id)});
  }
  if (mode == ItemMode::committed && item.values.empty()) {
    out.push_back({"values", "committed item has no values"});
  }

  for (const auto& [key, value] : item.values) {
    const auto path = fmt::format("values.{}", key);
    const FieldSpec* field = schema.find_field(key);
    if (!field) {
      out.push_back({path, fmt::format("unknown field '{}'", key)});
      continue;
    }
    if (accepted.values.count(field->name)) {
      out.push_back({path, fmt::format("duplicate field '{}'", field->name)});
      continue;
    }
    auto mismatch = [&] {
      out.push_back({path, fmt::format("kind mismatch: {} field holds a {}", kind_name(field->kind),
                                       value_repr_name(value))});
    };

    std::optional<FieldValue> canonical;
    std::visit(
        overloaded{
            [&](const NumberKind&) {
              const auto* d = std::get_if<double>(&value);
              if (!d) return mismatch();
              if (!std::isfinite(*d)) return out.push_back({path, "number is not finite"});
              canonical = *d;
            },
            [&](const LikertKind& k) {
              const auto* v = std::get_if<LikertValue>(&value);
              if (!v) return mismatch();
              if (v->value < k.min || v->value > k.max) {
                return out.push_back({path, fmt::format("likert value {} outside [{}, {}]",
                                                        v->value, k.min, k.max)});
              }
              canonical = *v;
            },
            [&](const SingleChoiceKind& k) {
              const auto* s = std::get_if<std::string>(&value);
              if (!s) return mismatch();
              const auto idx = find_option(k.options, *s);
              if (idx == std::string::npos) {
                return out.push_back({path, fmt::format("'{}' is not an option", *s)});
              }
              canonical = k.options[idx];
            },
            [&](const MultiChoiceKind& k) {
              const auto* set = std::get_if<ChoiceSet>(&value);
              if (!set) return mismatch();
              if (set->labels.empty()) return out.push_back({path, "multi-choice set is empty"});
              std::vector<std::size_t> picked;
              for (const auto& label : set->labels) {
                const auto idx = find_option(k.options, label);
                if (idx == std::string::npos) {
                  return out.push_back({path, fmt::format("'{}' is not an option", label)});
                }
                picked.push_back(idx);
              }
              std::sort(picked.begin(), picked.end());
              picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
              ChoiceSet c;
              for (auto idx : picked) c.labels.push_back(k.options[idx]);
              canonical = std::move(c);
            },
            [&](const auto& text_kind) {
              using K = std::decay_t<decltype(text_kind)>;
              if constexpr (std::is_same_v<K, ShortTextKind> || std::is_same_v<K, LongTextKind>) {
                const auto* s = std::get_if<std::string>(&value);
                if (!s) return mismatch();
                if (!is_valid_utf8(*s)) return out.push_back({path, "text is not valid UTF-8"});
                if (trim(*s).empty()) return out.push_back({path, "text is empty"});
                canonical = *s;
              } else if constexpr (std::is_same_v<K, DateKind>) {
                const auto* d = std::get_if<Date>(&value);
                if (!d) return mismatch();
                if (!is_valid_date(*d)) return out.push_back({path, "invalid calendar date"});
                canonical = *d;
              } else if constexpr (std::is_same_v<K, TimePointKind>) {
                const auto* t = std::get_if<TimePoint>(&value);
                if (!t) return mismatch();
                if (!is_valid_time_point(*t)) return out.push_back({path, "invalid time point"});
                canonical = *t;
              } else {
                const auto* r = std::get_if<TimeRange>(&value);
                if (!r) return mismatch();
                if (!is_valid_time_point(r->start) || !is_valid_time_point(r->end)) {
                  return out.push_back({path, "invalid time point in range"});
                }
                if (r->end < r->start) return out.push_back({path, "time range start after end"});
                canonical = *r;
              }
            }},
        field->kind);

    if (canonical) accepted.values.emplace(field->name, std::move(*canonical));
  }

  if (out.empty()) result.item = std::move(accepted);
  return result;
}

// ---------------------------------------------------------------------------

Coerced normalize_value(const FieldKind& kind, std::string_view raw_in) {
  const std::string raw = trim(raw_in);
  if (raw.empty()) return {std::nullopt, "empty value"};

  return std::visit(
      overloaded{
          [&](const NumberKind&) -> Coerced {
            double v = 0;
            const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size() || !std::isfinite(v)) {
              return {std::nullopt, fmt::format("number coercion failed for '{}'", raw)};
            }
            return {FieldValue{v}, {}};
          },
          [&](const LikertKind& k) -> Coerced {
            int v = 0;
            const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size()) {
              return {std::nullopt, fmt::format("likert coercion failed for '{}'", raw)};
            }
            if (v < k.min || v > k.max) {
              return {std::nullopt,
                      fmt::format("likert value {} out of range [{}, {}]", v, k.min, k.max)};
            }
            return {FieldValue{LikertValue{v}}, {}};
          },
          [&](const SingleChoiceKind& k) -> Coerced {
            const auto idx = find_option(k.options, raw);
            if (idx == std::string::npos) {
              return {std::nullopt, fmt::format("'{}' is not an option", raw)};
            }
            return {FieldValue{k.options[idx]}, {}};
          },
          [&](const MultiChoiceKind& k) -> Coerced {
            std::vector<std::size_t> picked;
            for (const auto& part : split_multi(raw)) {
              const auto idx = find_option(k.options, part);
              if (idx == std::string::npos) {
                return {std::nullopt, fmt::format("'{}' is not an option", trim(part))};
              }
              picked.push_back(idx);
            }
            std::sort(picked.begin(), picked.end());
            picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
            ChoiceSet set;
            for (auto idx : picked) set.labels.push_back(k.options[idx]);
            return {FieldValue{std::move(set)}, {}};
          },
          [&](const ShortTextKind&) -> Coerced {
            if (!is_valid_utf8(raw)) return {std::nullopt, "text is not valid UTF-8"};
            return {FieldValue{raw}, {}};
          },
          [&](const LongTextKind&) -> Coerced {
            if (!is_valid_utf8(raw)) return {std::nullopt, "text is not valid UTF-8"};
            return {FieldValue{raw}, {}};
          },
          [&](const DateKind&) -> Coerced {
            if (auto d = parse_date(raw)) return {FieldValue{*d}, {}};
            return {std::nullopt, fmt::format("'{}' is not a YYYY-MM-DD date", raw)};
          },
          [&](const TimePointKind&) -> Coerced {
            if (auto t = parse_time_point(raw)) return {FieldValue{*t}, {}};
            return {std::nullopt, fmt::format("'{}' is not a YYYY-MM-DDTHH:MM time", raw)};
          },
          [&](const TimeRangeKind&) -> Coerced {
            if (auto r = parse_time_range(raw)) return {FieldValue{*r}, {}};
            return {std::nullopt, fmt::format("'{}' is not a '<time> to <time>' range", raw)};
          }},
      kind);
}

std::string render_value(const FieldValue& value) {
  return std::visit(
      overloaded{[](double d) { return format_number(d); },
                 [](const LikertValue& l) { return std::to_string(l.value); },
                 [](const std::string& s) { return s; },
                 [](const ChoiceSet& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.labels.size(); ++i) {
                     if (i) out += ", ";
                     out += c.labels[i];
                   }
                   return out;
                 },
                 [](const Date& d) { return format_date(d); },
                 [](const TimePoint& t) { return format_time_point(t); },
                 [](const TimeRange& r) {
                   return format_time_point(r.start) + " to " + format_time_point(r.end);
                 }},
      value);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json field_to_json(const FieldSpec& f) {
  nlohmann::json j;
  j["name"] = f.name;
  j["kind"] = std::string(kind_name(f.kind));
  if (const auto* lk = std::get_if<LikertKind>(&f.kind)) {
    j["min"] = lk->min;
    j["max"] = lk->max;
  }
  if (is_choice_kind(f.kind)) j["options"] = choice_options(f.kind);
  if (f.description) j["description"] = *f.description;
  return j;
}

FieldSpec field_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  if (!j.contains("name") || !j["name"].is_string()) {
    throw std::invalid_argument(path + ": missing string 'name'");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw std::invalid_argument(path + ": missing string 'kind'");
  }
  FieldSpec f;
  f.name = j["name"].get<std::string>();
  const auto kind = j["kind"].get<std::string>();
  auto options = [&] {
    if (!j.contains("options") || !j["options"].is_array()) {
      throw std::invalid_argument(path + ": choice kind needs an 'options' array");
    }
    return j["options"].get<std::vector<std::string>>();
  };
  if (kind == "number") {
    f.kind = NumberKind{};
  } else if (kind == "likert") {
    if (!j.contains("min") || !j.contains("max") || !j["min"].is_number_integer() ||
        !j["max"].is_number_integer()) {
      throw std::invalid_argument(path + ": likert needs integer 'min' and 'max'");
    }
    f.kind = LikertKind{j["min"].get<int>(), j["max"].get<int>()};
  } else if (kind == "single_choice") {
    f.kind = SingleChoiceKind{options()};
  } else if (kind == "multi_choice") {
    f.kind = MultiChoiceKind{options()};
  } else if (kind == "short_text") {
    f.kind = ShortTextKind{};
  } else if (kind == "long_text") {
    f.kind = LongTextKind{};
  } else if (kind == "date") {
    f.kind = DateKind{};
  } else if (kind == "time_point") {
    f.kind = TimePointKind{};
  } else if (kind == "time_range") {
    f.kind = TimeRangeKind{};
  } else {
    throw std::invalid_argument(fmt::format("{}: unknown kind '{}'", path, kind));
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) {
      throw std::invalid_argument(path + ": 'description' must be a string");
    }
    f.description = j["description"].get<std::string>();
  }
  return f;
}

}  // namespace

nlohmann::json schema_to_json(const TrackerSchema& schema) {
  nlohmann::json j;
  j["tracker_id"] = schema.tracker_id;
  j["name"] = schema.name;
  j["fields"] = nlohmann::json::array();
  for (const auto& f : schema.fields) j["fields"].push_back(field_to_json(f));
  if (schema.time_field) {
    j["time_field"] = {{"name", schema.time_field->name},
                       {"kind", std::string(kind_name(schema.time_field->kind))}};
    if (schema.time_field->description) {
      j["time_field"]["description"] = *schema.time_field->description;
    }
  }
  if (schema.utc_offset_minutes != 0) j["utc_offset_minutes"] = schema.utc_offset_minutes;
  return j;
}

TrackerSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("tracker record must be an object");
  for (const char* key : {"tracker_id", "name"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw std::invalid_argument(fmt::format("missing string '{}'", key));
    }
  }
  if (!j.contains("fields") || !j["fields"].is_array()) {
    throw std::invalid_argument("missing 'fields' array");
  }
  TrackerSchema s;
  s.tracker_id = j["tracker_id"].get<std::string>();
  s.name = j["name"].get<std::string>();
  for (std::size_t i = 0; i < j["fields"].size(); ++i) {
    s.fields.push_back(field_from_json(j["fields"][i], fmt::format("fields[{}]", i)));
  }
  if (j.contains("time_field") && !j["time_field"].is_null()) {
    s.time_field = field_from_json(j["time_field"], "time_field");
  }
  if (j.contains("utc_offset_minutes")) {
    if (!j["utc_offset_minutes"].is_number_integer()) {
      throw std::invalid_argument("'utc_offset_minutes' must be an integer");
    }
    s.utc_offset_minutes = j["utc_offset_minutes"].get<int>();
  }
  return s;
}

nlohmann::json values_to_json(const TrackerSchema& schema,
                              const std::map<std::string, FieldValue>& values) {
  (void)schema;
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : values) {
    if (const auto* d = std::get_if<double>(&value)) {
      if (std::trunc(*d) == *d && std::abs(*d) < 9e15) {
        j[key] = static_cast<std::int64_t>(*d);
      } else {
        j[key] = *d;
      }
    } else if (const auto* l = std::get_if<LikertValue>(&value)) {
      j[key] = l->value;
    } else {
      j[key] = render_value(value);
    }
  }
  return j;
}

std::map<std::string, FieldValue> values_from_json(const TrackerSchema& schema,
                                                   const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("'values' must be an object");
  std::map<std::string, FieldValue> out;

  auto natural = [](const nlohmann::json& v) -> FieldValue {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.get<double>();
    if (v.is_array()) {
      ChoiceSet set;
      for (const auto& e : v) set.labels.push_back(e.is_string() ? e.get<std::string>() : e.dump());
      return set;
    }
    return v.dump();
  };

  for (const auto& [key, v] : j.items()) {
    const FieldSpec* field = schema.find_field(key);
    FieldValue value = natural(v);
    if (field) {
      std::visit(overloaded{[&](const NumberKind&) {},
                            [&](const LikertKind&) {
                              if (v.is_number_integer()) {
                                value = LikertValue{v.get<int>()};
                              } else if (v.is_number_float()) {
                                const double d = v.get<double>();
                                if (d == std::floor(d) && std::abs(d) < 1e9) {
                                  value = LikertValue{static_cast<int>(d)};
                                }
                              }
                            },
                            [&](const MultiChoiceKind&) {
                              if (v.is_string()) {
                                ChoiceSet set;
                                for (auto& part : split_multi(v.get<std::string>())) {
                                  set.labels.push_back(trim(part));
                                }
                                value = std::move(set);
                              }
                            },
                            [&](const DateKind&) {
                              if (v.is_string()) {
                                if (auto d = parse_date(v.get<std::string>())) value = *d;
                              }
                            },
                            [&](const TimePointKind&) {
                              if (v.is_string()) {
                                if (auto t = parse_time_point(v.get<std::string>())) value = *t;
                              }
                            },
                            [&](const TimeRangeKind&) {
                              if (v.is_string()) {
                                if (auto r = parse_time_range(v.get<std::string>())) value = *r;
                              }
                            },
                            [&](const auto&) {}},
                 field->kind);
    }
    out.emplace(key, std::move(value));
  }
  return out;
}

}  // namespace tracknlu
