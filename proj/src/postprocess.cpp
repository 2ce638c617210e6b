#include "tracknlu/postprocess.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace tracknlu {

ParsedCompletion parse_completion(std::string_view text) {
  ParsedCompletion out;
  const auto line = trim(text.substr(0, text.find('\n')));
  if (line.empty()) return out;

  std::string_view rest(line);
  while (true) {
    const auto bar = rest.find(" | ");
    const auto segment = trim(rest.substr(0, bar));
    if (!segment.empty()) {
      const auto eq = segment.find(" = ");
      if (eq == std::string::npos) {
        out.malformed.push_back(segment);
      } else {
        out.pairs.push_back({trim(segment.substr(0, eq)), trim(segment.substr(eq + 3))});
      }
    }
    if (bar == std::string_view::npos) break;
    rest.remove_prefix(bar + 3);
  }
  return out;
}

SnapResult snap_to_option(std::string_view raw, const std::vector<std::string>& options,
                          const Embedder& embedder) {
  const auto query = embedder.embed(raw);
  SnapResult best{0, -2.0};
  for (std::size_t i = 0; i < options.size(); ++i) {
    const double s = cosine(query, embedder.embed(options[i]));
    if (i == 0 || rank_key(s) > rank_key(best.similarity)) best = {i, s};
  }
  return best;
}

ExtractionResult coerce(const TrackerSchema& schema, const std::vector<RawPair>& pairs,
                        const Embedder& embedder) {
  ExtractionResult result;
  result.tracker_id = schema.tracker_id;

  // Index of the last occurrence of each field; earlier ones are dropped.
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (const auto* f = schema.find_field(pairs[i].name)) last[f->name] = i;
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [raw_name, raw_value] = pairs[i];
    const FieldSpec* field = schema.find_field(raw_name);
    if (!field) {
      result.dropped.push_back({raw_name, raw_value, "unknown field"});
      continue;
    }
    if (last.at(field->name) != i) {
      result.dropped.push_back({raw_name, raw_value, "duplicate field; a later value wins"});
      continue;
    }
    if (trim(raw_value).empty()) {
      result.dropped.push_back({raw_name, raw_value, "empty value"});
      continue;
    }

    Provenance prov;
    std::optional<FieldValue> value;
    if (auto c = normalize_value(field->kind, raw_value)) {
      value = std::move(c.value);
    } else if (const auto* single = std::get_if<SingleChoiceKind>(&field->kind)) {
      const auto snap = snap_to_option(trim(raw_value), single->options, embedder);
      value = single->options[snap.index];
      prov.snaps.push_back({trim(raw_value), single->options[snap.index], snap.similarity});
    } else if (const auto* multi = std::get_if<MultiChoiceKind>(&field->kind)) {
      std::vector<std::size_t> picked;
      std::string_view rest(raw_value);
      while (true) {
        const auto pos = rest.find(", ");
        const auto part = trim(rest.substr(0, pos));
        if (!part.empty()) {
          const auto exact = normalize_value(SingleChoiceKind{multi->options}, part);
          if (exact) {
            const auto& label = std::get<std::string>(*exact.value);
            picked.push_back(static_cast<std::size_t>(
                std::find(multi->options.begin(), multi->options.end(), label) - multi->options.begin()));
          } else {
            const auto snap = snap_to_option(part, multi->options, embedder);
            picked.push_back(snap.index);
            prov.snaps.push_back({part, multi->options[snap.index], snap.similarity});
          }
        }
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 2);
      }
      if (!picked.empty()) {
        std::sort(picked.begin(), picked.end());
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        ChoiceSet set;
        for (auto idx : picked) set.labels.push_back(multi->options[idx]);
        value = std::move(set);
      }
    }

    if (!value) {
      result.dropped.push_back(
          {raw_name, raw_value,
           fmt::format("{} coercion failed", kind_name(field->kind))});
      continue;
    }
    result.values[field->name] = std::move(*value);
    result.provenance[field->name] = std::move(prov);
  }

  // Guard the output invariant; anything the validator rejects is dropped.
  Item probe;
  probe.tracker_id = schema.tracker_id;
  probe.values = result.values;
  auto check = validate_item(schema, probe);
  if (!check.ok()) {
    for (const auto& v : check.violations) {
      const auto name = v.path.substr(v.path.find('.') + 1);
      if (auto it = result.values.find(name); it != result.values.end()) {
        result.dropped.push_back({name, render_value(it->second), v.message});
        result.values.erase(it);
        result.provenance.erase(name);
      }
    }
  }
  return result;
}

ExtractionResult extract_from_completion(const TrackerSchema& schema, std::string_view completion,
                                         const Embedder& embedder) {
  const auto parsed = parse_completion(completion);
  auto result = coerce(schema, parsed.pairs, embedder);
  for (const auto& segment : parsed.malformed) {
    result.dropped.push_back({segment, "", "malformed segment (no ' = ')"});
  }
  result.raw_completion = std::string(completion);
  return result;
}

}  // namespace tracknlu
