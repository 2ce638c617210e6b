#include "tracknlu/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "random.hpp"

namespace tracknlu {

void ScoreAccumulator::add(const SlotSet& gold, const SlotSet& pred,
                           const std::vector<LongTextScore>& long_text) {
  ++examples;
  jga_hits += tracknlu::jga(gold, pred);
  gold_slots += static_cast<long long>(gold.size());
  counts += slot_counts(gold, pred);
  for (const auto& s : long_text) {
    ++long_text_fields;
    bleu_sum += s.bleu4;
    rouge_sum += s.rouge_l;
  }
}

double ScoreAccumulator::jga() const {
  return examples == 0 ? 0.0 : 100.0 * static_cast<double>(jga_hits) / static_cast<double>(examples);
}

std::optional<double> ScoreAccumulator::bleu4() const {
  if (long_text_fields == 0) return std::nullopt;
  return 100.0 * bleu_sum / static_cast<double>(long_text_fields);
}

std::optional<double> ScoreAccumulator::rouge_l() const {
  if (long_text_fields == 0) return std::nullopt;
  return 100.0 * rouge_sum / static_cast<double>(long_text_fields);
}

std::vector<std::size_t> draw_priors(std::uint64_t seed, std::string_view tracker_id,
                                     std::string_view sample_id, int n, std::size_t pool_size) {
  const auto key = detail::mix_seed(detail::mix_seed(detail::mix_seed(seed, tracker_id), sample_id),
                                    std::to_string(n));
  std::mt19937_64 rng(key);
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), 0);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(n, 0)), pool_size);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + detail::uniform_below(rng, pool_size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

EvalReport run_simulation(std::shared_ptr<const SampleStore> store, const SimulationConfig& config) {
  if (!config.backend) throw std::invalid_argument("run_simulation: no completion backend");
  const std::shared_ptr<const Embedder> embedder =
      config.embedder ? config.embedder
                      : std::make_shared<CachingEmbedder>(std::make_shared<LocalEmbedder>());
  const SchemaResolver resolve = [&](std::string_view id) { return store->find_tracker(id); };
  auto log = [&](const std::string& msg) {
    if (config.log) config.log(msg);
  };

  const bool any_augmented =
      std::find(config.styles.begin(), config.styles.end(), PromptStyle::augmented) != config.styles.end();
  std::map<std::string, SeedIndex> seed_indices;
  if (any_augmented) {
    for (const auto& [tid, schema] : store->trackers()) {
      seed_indices.emplace(tid, SeedIndex::build(exclude_tracker(store, tid).samples(), *embedder));
    }
  }

  EvalReport report;
  for (const auto style : config.styles) {
    if (style == PromptStyle::qa) {
      throw std::invalid_argument("run_simulation: the qa style is exported, not simulated");
    }
    const std::vector<int> shots = style == PromptStyle::zero_shot ? std::vector<int>{0} : config.n_shots;
    for (const int n : shots) {
      ConditionReport cond;
      cond.style = style;
      cond.n_shot = n;
      try {
        for (const auto& [tid, schema] : store->trackers()) {
          const auto samples = store->samples_for_tracker(tid);
          for (const Sample* query : samples) {
            ++cond.runs;
            ++report.runs;

            std::vector<const Sample*> pool;
            pool.reserve(samples.size());
            for (const auto* s : samples) {
              if (s != query) pool.push_back(s);
            }
            std::vector<const Sample*> priors;
            if (style == PromptStyle::augmented) {
              for (auto i : draw_priors(config.seed, tid, query->sample_id, n, pool.size())) {
                priors.push_back(pool[i]);
              }
              if (static_cast<int>(priors.size()) < n) {
                ++cond.prior_shortfalls;
                log(fmt::format("{} / {}: wanted {} prior items, only {} available", tid,
                                query->sample_id, n, priors.size()));
              }
            }

            std::optional<TimePoint> reference_time;
            if (schema.time_field) {
              reference_time = local_time_point(query->item.created_at, schema.utc_offset_minutes);
            }

            PromptBundle prompt;
            if (style == PromptStyle::augmented) {
              auto plan = select_shots(query->phrase, tid, priors, seed_indices.at(tid), *embedder);
              for (const auto& shot : plan.shots) {
                if (shot.role != ShotRole::user && shot.sample.tracker_id() == tid) {
                  ++report.leave_one_out_violations;
                }
              }
              prompt = render_prompt(schema, plan, query->phrase, reference_time, resolve);
            } else {
              prompt = render_zero_shot_prompt(schema, query->phrase, reference_time);
            }

            CompletionRequest request;
            request.prompt = prompt.text;
            request.stop_sequence = prompt.stop_sequence;
            const auto completion = config.backend->complete(request);
            const auto result = extract_from_completion(schema, completion.text, *embedder);

            const auto gold = to_slot_set(schema, query->item.values);
            const auto pred = to_slot_set(schema, result.values);
            const auto long_text = score_long_text(schema, query->item.values, result.values);
            cond.overall.add(gold, pred, long_text);
            cond.per_tracker[tid].add(gold, pred, long_text);

            if (config.observer) {
              config.observer(RunRecord{style, n, *query, prompt.shot_plan, prompt, result});
            }
          }
        }
      } catch (const BackendError& e) {
        cond.partial = true;
        cond.error = e.what();
        log(fmt::format("{} N={}: aborted: {}", style_name(style), n, e.what()));
      }
      report.conditions.push_back(std::move(cond));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json scores_json(const ScoreAccumulator& acc) {
  const auto prf = acc.prf();
  nlohmann::json j;
  j["examples"] = acc.examples;
  j["slots"] = acc.gold_slots;
  j["jga"] = acc.jga();
  j["precision"] = prf.precision;
  j["recall"] = prf.recall;
  j["f1"] = prf.f1;
  j["long_text_fields"] = acc.long_text_fields;
  j["bleu4"] = acc.bleu4() ? nlohmann::json(*acc.bleu4()) : nlohmann::json(nullptr);
  j["rouge_l"] = acc.rouge_l() ? nlohmann::json(*acc.rouge_l()) : nlohmann::json(nullptr);
  return j;
}

std::string cell(std::optional<double> v) { return v ? fmt::format("{:.1f}", *v) : "-"; }

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::structured) {
    nlohmann::json j;
    j["runs"] = report.runs;
    j["leave_one_out_violations"] = report.leave_one_out_violations;
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : report.conditions) {
      auto cj = scores_json(c.overall);
      cj["style"] = std::string(style_name(c.style));
      cj["n_shot"] = c.n_shot;
      cj["runs"] = c.runs;
      cj["prior_shortfalls"] = c.prior_shortfalls;
      cj["partial"] = c.partial;
      if (!c.error.empty()) cj["error"] = c.error;
      cj["per_tracker"] = nlohmann::json::object();
      for (const auto& [tid, acc] : c.per_tracker) cj["per_tracker"][tid] = scores_json(acc);
      j["conditions"].push_back(std::move(cj));
    }
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
  }

  std::string out = fmt::format("{:<10} {:>6} {:>6} {:>6} {:>6} {:>6}\n", "Style", "N-shot", "JGA",
                                "F1", "B-4", "R-L");
  out += fmt::format("{:-<10} {:->6} {:->6} {:->6} {:->6} {:->6}\n", "", "", "", "", "", "");
  for (const auto& c : report.conditions) {
    out += fmt::format("{:<10} {:>6} {:>6} {:>6} {:>6} {:>6}{}\n", style_name(c.style), c.n_shot,
                       cell(c.overall.jga()), cell(c.overall.prf().f1), cell(c.overall.bleu4()),
                       cell(c.overall.rouge_l()), c.partial ? "  (partial)" : "");
  }
  return out;
}

void export_qa_inputs(const SampleStore& store, const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());
  for (const auto& s : store.samples()) {
    const auto& schema = *store.find_tracker(s.tracker_id());
    for (const auto& [field, prompt] : render_qa_inputs(schema, s.phrase)) {
      nlohmann::json j{{"sample_id", s.sample_id},
                       {"tracker_id", s.tracker_id()},
                       {"field", field},
                       {"prompt", prompt}};
      out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

ReferenceResponder::ReferenceResponder(std::shared_ptr<const SampleStore> store, double noise)
    : store_(std::move(store)), noise_(noise) {
  for (const auto& s : store_->samples()) {
    const auto& name = store_->find_tracker(s.tracker_id())->name;
    by_name_and_phrase_.emplace(std::make_pair(name, s.phrase), &s);
  }
}

CompletionResult ReferenceResponder::complete(const CompletionRequest& request) {
  check_request(request);
  const auto& prompt = request.prompt;
  const auto block_start = prompt.rfind("###\n");
  if (block_start == std::string::npos) {
    throw BackendError(ErrorKind::protocol, "reference responder: prompt has no query block");
  }
  const std::string_view block(prompt.data() + block_start + 4, prompt.size() - block_start - 4);
  auto line_value = [&](std::string_view prefix) -> std::string {
    std::size_t pos = 0;
    while (pos < block.size()) {
      auto end = block.find('\n', pos);
      if (end == std::string_view::npos) end = block.size();
      const auto line = block.substr(pos, end - pos);
      if (line.substr(0, prefix.size()) == prefix) return std::string(line.substr(prefix.size()));
      pos = end + 1;
    }
    return {};
  };
  const auto tracker_name = line_value("Tracker: ");
  const auto phrase = line_value("Sentence: ");
  const auto it = by_name_and_phrase_.find({tracker_name, phrase});
  if (it == by_name_and_phrase_.end()) {
    throw BackendError(ErrorKind::protocol,
                       fmt::format("reference responder: no sample for '{}' / '{}'", tracker_name, phrase));
  }
  const Sample& gold = *it->second;
  const auto& schema = *store_->find_tracker(gold.tracker_id());

  // Same-tracker shots in the prompt (excluding the query block itself).
  std::size_t same_tracker = 0;
  const auto marker = "###\nTracker: " + tracker_name + "\n";
  for (auto pos = prompt.find(marker); pos != std::string::npos && pos < block_start;
       pos = prompt.find(marker, pos + 1)) {
    ++same_tracker;
  }
  const double p = noise_ / (1.0 + static_cast<double>(same_tracker));

  std::mt19937_64 rng(std::stoull(sha256_hex(prompt).substr(0, 16), nullptr, 16));
  auto chance = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; };

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto* col : schema.columns()) {
    if (auto v = gold.item.values.find(col->name); v != gold.item.values.end()) {
      pairs.emplace_back(col->name, render_value(v->second));
    }
  }
  if (pairs.size() > 1 && chance()) {
    pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(detail::uniform_below(rng, pairs.size())));
  }
  if (chance()) {
    for (auto& [name, value] : pairs) {
      if (!is_choice_kind(schema.find_field(name)->kind)) continue;
      auto label = value.substr(0, value.find(", "));
      if (label.size() >= 4) {
        label.erase(1 + detail::uniform_below(rng, label.size() - 2), 1);
      } else {
        std::transform(label.begin(), label.end(), label.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      }
      value = label + value.substr(std::min(value.size(), value.find(", ")));
      break;
    }
  }
  if (chance()) {
    for (auto& [name, value] : pairs) {
      if (!std::holds_alternative<LongTextKind>(schema.find_field(name)->kind)) continue;
      auto cut = value.rfind(' ');
      if (cut != std::string::npos && cut > 0) cut = value.rfind(' ', cut - 1);
      if (cut != std::string::npos && cut > 0) value.resize(cut);
    }
  }
  if (chance() && chance()) pairs.emplace_back("Notes", "none");

  std::string text = " ";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) text += " | ";
    text += pairs[i].first + " = " + pairs[i].second;
  }
  return CompletionResult{cut_at_stop(text, request.stop_sequence), 0, id(), false};
}

}  // namespace tracknlu
