#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tracknlu/embedding.hpp"
#include "tracknlu/llm.hpp"
#include "tracknlu/metrics.hpp"
#include "tracknlu/postprocess.hpp"
#include "tracknlu/prompting.hpp"
#include "tracknlu/seed_store.hpp"

namespace tracknlu {

/// Running sums for one group of pipeline runs.
struct ScoreAccumulator {
  long long examples = 0;
  long long jga_hits = 0;
  long long gold_slots = 0;
  SlotCounts counts;
  long long long_text_fields = 0;
  double bleu_sum = 0;
  double rouge_sum = 0;

  void add(const SlotSet& gold, const SlotSet& pred, const std::vector<LongTextScore>& long_text);

  double jga() const;  // percent
  PrfScore prf() const { return prf_from_counts(counts); }
  std::optional<double> bleu4() const;  // percent; empty without long-text fields
  std::optional<double> rouge_l() const;
};

struct ConditionReport {
  PromptStyle style = PromptStyle::augmented;
  int n_shot = 0;
  ScoreAccumulator overall;
  std::map<std::string, ScoreAccumulator> per_tracker;
  long long runs = 0;
  long long prior_shortfalls = 0;
  bool partial = false;
  std::string error;
};

struct EvalReport {
  std::vector<ConditionReport> conditions;
  long long runs = 0;
  /// Synthetic shots whose tracker equals the query tracker; must stay 0.
  long long leave_one_out_violations = 0;
};

/// What one pipeline run saw and produced; handed to the observer.
struct RunRecord {
  PromptStyle style;
  int n_shot;
  const Sample& query;
  const ShotPlan& plan;
  const PromptBundle& prompt;
  const ExtractionResult& result;
};

struct SimulationConfig {
  std::vector<PromptStyle> styles{PromptStyle::augmented};
  std::vector<int> n_shots{0, 1, 2, 3, 4};
  std::uint64_t seed = 0;
  std::shared_ptr<CompletionBackend> backend;
  std::shared_ptr<const Embedder> embedder;
  std::function<void(const RunRecord&)> observer;
  std::function<void(const std::string&)> log;
};

/// Leave-one-tracker-out N-shot simulation. For every tracker t, sample s and
/// N, N other samples of t (seeded draw keyed by seed, t, s, N) act as the
/// user's prior items and t's synthetic samples are hidden from the seed view.
/// Zero-shot style ignores priors and runs at N = 0 only.
EvalReport run_simulation(std::shared_ptr<const SampleStore> store, const SimulationConfig& config);

/// Indices of the prior items drawn for (seed, tracker, sample, n) out of
/// `pool_size` candidates; sorted ascending, at most n.
std::vector<std::size_t> draw_priors(std::uint64_t seed, std::string_view tracker_id,
                                     std::string_view sample_id, int n, std::size_t pool_size);

enum class ReportFormat { table, structured };

/// `table` mirrors the N-shot/JGA/F1/B-4/R-L layout with one decimal;
/// `structured` is JSON with unrounded scores and per-tracker breakdowns.
std::string emit_report(const EvalReport& report, ReportFormat format);

/// One JSON line per (sample, content field): {sample_id, tracker_id, field, prompt}.
void export_qa_inputs(const SampleStore& store, const std::filesystem::path& out);

/// Offline stand-in for a model: answers an augmented or zero-shot prompt with
/// the gold values of the sample whose tracker name and phrase match the query
/// block, perturbed deterministically from the prompt hash (dropped fields,
/// misspelled choice labels, clipped long texts). Perturbation odds shrink as
/// more same-tracker shots appear in the prompt.
class ReferenceResponder final : public CompletionBackend {
 public:
  explicit ReferenceResponder(std::shared_ptr<const SampleStore> store, double noise = 0.35);
  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "reference"; }

 private:
  std::shared_ptr<const SampleStore> store_;
  double noise_;
  std::map<std::pair<std::string, std::string>, const Sample*> by_name_and_phrase_;
};

}  // namespace tracknlu
