#include "tracknlu/prompting.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace tracknlu {

std::string_view role_name(ShotRole role) {
  switch (role) {
    case ShotRole::farthest: return "farthest";
    case ShotRole::nearest: return "nearest";
    case ShotRole::user: return "user";
  }
  return "?";
}

std::size_t ShotPlan::count(ShotRole role) const {
  return static_cast<std::size_t>(
      std::count_if(shots.begin(), shots.end(), [&](const Shot& s) { return s.role == role; }));
}

std::string_view style_name(PromptStyle style) {
  switch (style) {
    case PromptStyle::augmented: return "augmented";
    case PromptStyle::zero_shot: return "zeroshot";
    case PromptStyle::qa: return "qa";
  }
  return "?";
}

std::optional<PromptStyle> parse_style(std::string_view name) {
  if (name == "augmented") return PromptStyle::augmented;
  if (name == "zeroshot" || name == "zero_shot") return PromptStyle::zero_shot;
  if (name == "qa") return PromptStyle::qa;
  return std::nullopt;
}

SeedIndex SeedIndex::build(const std::vector<const Sample*>& samples, const Embedder& embedder) {
  SeedIndex index;
  index.samples = samples;
  std::vector<std::string> texts;
  texts.reserve(samples.size());
  for (const auto* s : samples) texts.push_back(s->phrase);
  index.vectors = embedder.embed_batch(texts);
  return index;
}

ShotPlan select_shots(std::string_view phrase, std::string_view query_tracker_id,
                      const std::vector<const Sample*>& user_samples, const SeedIndex& seeds,
                      const Embedder& embedder) {
  ShotPlan plan;
  plan.query_tracker_id = std::string(query_tracker_id);
  plan.query_phrase = std::string(phrase);

  std::vector<const Sample*> users = user_samples;
  std::stable_sort(users.begin(), users.end(), [](const Sample* a, const Sample* b) {
    return a->item.created_at < b->item.created_at;
  });
  const std::size_t k = std::min(users.size(), kMaxUserShots);
  users.erase(users.begin(), users.end() - static_cast<std::ptrdiff_t>(k));

  std::set<std::string_view> user_ids;
  for (const auto* u : users) user_ids.insert(u->sample_id);

  const auto query = embedder.embed(phrase);
  struct Ranked {
    std::size_t index;
    double score;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(seeds.samples.size());
  for (std::size_t i = 0; i < seeds.samples.size(); ++i) {
    if (user_ids.count(seeds.samples[i]->sample_id)) continue;
    ranked.push_back({i, cosine(query, seeds.vectors[i])});
  }
  // Same order as rank_by_similarity: score descending, id ascending.
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (rank_key(a.score) != rank_key(b.score)) return rank_key(a.score) > rank_key(b.score);
    return seeds.samples[a.index]->sample_id < seeds.samples[b.index]->sample_id;
  });

  const std::size_t budget = kShotBudget - k;
  const std::size_t used = std::min(budget, ranked.size());
  const std::size_t farthest = std::min({kMaxFarthestShots, budget, used});
  const std::size_t nearest = used - farthest;

  // Lowest-ranked first, so similarity increases towards the query.
  for (std::size_t i = 0; i < farthest; ++i) {
    const auto& r = ranked[ranked.size() - 1 - i];
    plan.shots.push_back({*seeds.samples[r.index], ShotRole::farthest, r.score});
  }
  for (std::size_t i = nearest; i-- > 0;) {
    const auto& r = ranked[i];
    plan.shots.push_back({*seeds.samples[r.index], ShotRole::nearest, r.score});
  }
  for (const auto* u : users) {
    plan.shots.push_back({*u, ShotRole::user, cosine(query, embedder.embed(u->phrase))});
  }
  return plan;
}

// ---------------------------------------------------------------------------

namespace {

std::string join_options(const std::vector<std::string>& options, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += sep;
    out += options[i];
  }
  return out;
}

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

void append_block(std::string& out, const TrackerSchema& schema, std::string_view phrase,
                  const std::optional<TimePoint>& current_time, const std::string* values) {
  out += "Tracker: " + schema.name + "\n";
  out += "Fields: " + render_fields_line(schema) + "\n";
  if (current_time) out += "Current time: " + format_time_point(*current_time) + "\n";
  out += "Sentence: " + one_line(phrase) + "\n";
  out += "Values:";
  if (values) {
    if (!values->empty()) out += " " + *values;
    out += "\n";
  }
}

PromptBundle render(const TrackerSchema& schema, const ShotPlan& plan, std::string_view phrase,
                    std::optional<TimePoint> reference_time, const SchemaResolver& resolve,
                    PromptStyle style) {
  PromptBundle bundle;
  bundle.style = style;
  bundle.stop_sequence = std::string(kDefaultStopSequence);
  bundle.shot_plan = plan;
  bundle.shot_plan.query_tracker_id = schema.tracker_id;
  bundle.shot_plan.query_phrase = std::string(phrase);
  bundle.shot_plan.reference_time = reference_time;

  std::string& out = bundle.text;
  out += kInstruction;
  out += "\n\n";
  for (const auto& shot : plan.shots) {
    const TrackerSchema* shot_schema =
        shot.sample.tracker_id() == schema.tracker_id ? &schema : resolve(shot.sample.tracker_id());
    if (!shot_schema) {
      throw std::invalid_argument(
          fmt::format("shot '{}' has unknown tracker '{}'", shot.sample.sample_id, shot.sample.tracker_id()));
    }
    const auto values = render_values_line(*shot_schema, shot.sample.item.values);
    out += "###\n";
    append_block(out, *shot_schema, shot.sample.phrase, std::nullopt, &values);
  }
  out += "###\n";
  const bool show_time = schema.time_field.has_value() && reference_time.has_value();
  append_block(out, schema, phrase, show_time ? reference_time : std::nullopt, nullptr);
  return bundle;
}

}  // namespace

std::string field_descriptor(const FieldKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NumberKind>) return "number";
        else if constexpr (std::is_same_v<K, LikertKind>) return fmt::format("scale {} to {}", k.min, k.max);
        else if constexpr (std::is_same_v<K, SingleChoiceKind>) return "one of: " + join_options(k.options, " / ");
        else if constexpr (std::is_same_v<K, MultiChoiceKind>) return "any of: " + join_options(k.options, " / ");
        else if constexpr (std::is_same_v<K, ShortTextKind>) return "short text";
        else if constexpr (std::is_same_v<K, LongTextKind>) return "long text";
        else if constexpr (std::is_same_v<K, DateKind>) return "date";
        else if constexpr (std::is_same_v<K, TimePointKind>) return "time";
        else return "time range";
      },
      kind);
}

std::string render_fields_line(const TrackerSchema& schema) {
  std::string out;
  for (const auto* f : schema.columns()) {
    if (!out.empty()) out += "; ";
    out += f->name + " (" + field_descriptor(f->kind) + ")";
  }
  return out;
}

std::string render_values_line(const TrackerSchema& schema,
                               const std::map<std::string, FieldValue>& values) {
  std::string out;
  for (const auto* f : schema.columns()) {
    const auto it = values.find(f->name);
    if (it == values.end()) continue;
    if (!out.empty()) out += " | ";
    out += f->name + " = " + one_line(render_value(it->second));
  }
  return out;
}

PromptBundle render_prompt(const TrackerSchema& schema, const ShotPlan& plan, std::string_view phrase,
                           std::optional<TimePoint> reference_time, const SchemaResolver& resolve) {
  return render(schema, plan, phrase, reference_time, resolve, PromptStyle::augmented);
}

PromptBundle render_zero_shot_prompt(const TrackerSchema& schema, std::string_view phrase,
                                     std::optional<TimePoint> reference_time) {
  return render(schema, ShotPlan{}, phrase, reference_time,
                [](std::string_view) -> const TrackerSchema* { return nullptr; },
                PromptStyle::zero_shot);
}

std::vector<std::pair<std::string, std::string>> render_qa_inputs(const TrackerSchema& schema,
                                                                  std::string_view phrase) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto context = one_line(case_fold(trim(phrase)));
  for (const auto& f : schema.fields) {
    if (!f.description || trim(*f.description).empty()) {
      throw std::invalid_argument(fmt::format("field '{}' has no description", f.name));
    }
    auto question = trim(*f.description);
    if (question.back() != '?') question += '?';
    auto prompt = fmt::format("extractive question: {} context: user: {}", question, context);
    if (is_choice_kind(f.kind)) {
      prompt += " choices: " + join_options(choice_options(f.kind), " or ");
    } else if (const auto* lk = std::get_if<LikertKind>(&f.kind)) {
      std::vector<std::string> steps;
      for (int v = lk->min; v <= lk->max; ++v) steps.push_back(std::to_string(v));
      prompt += " choices: " + join_options(steps, " or ");
    }
    out.emplace_back(f.name, std::move(prompt));
  }
  return out;
}

}  // namespace tracknlu
