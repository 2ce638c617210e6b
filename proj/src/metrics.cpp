#include "tracknlu/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace tracknlu {

SlotSet to_slot_set(const TrackerSchema& schema, const std::map<std::string, FieldValue>& values) {
  SlotSet out;
  for (const auto& [name, value] : values) {
    const auto* field = schema.find_field(name);
    if (field && std::holds_alternative<LongTextKind>(field->kind)) continue;
    std::string canonical;
    if (const auto* set = std::get_if<ChoiceSet>(&value)) {
      std::vector<std::string> labels;
      for (const auto& l : set->labels) labels.push_back(normalize_label(l));
      std::sort(labels.begin(), labels.end());
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) canonical += ", ";
        canonical += labels[i];
      }
    } else {
      canonical = normalize_label(render_value(value));
    }
    out.emplace(normalize_label(field ? field->name : name), std::move(canonical));
  }
  return out;
}

int jga(const SlotSet& gold, const SlotSet& pred) { return gold == pred ? 1 : 0; }

SlotCounts slot_counts(const SlotSet& gold, const SlotSet& pred) {
  SlotCounts c;
  for (const auto& p : pred) (gold.count(p) ? c.tp : c.fp) += 1;
  for (const auto& g : gold) {
    if (!pred.count(g)) c.fn += 1;
  }
  return c;
}

PrfScore prf_from_counts(const SlotCounts& c) {
  PrfScore s;
  if (c.tp + c.fp > 0) s.precision = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const auto denom = 2 * c.tp + c.fp + c.fn;
  if (denom > 0) s.f1 = 100.0 * static_cast<double>(2 * c.tp) / static_cast<double>(denom);
  return s;
}

PrfScore slot_f1(const std::vector<std::pair<SlotSet, SlotSet>>& examples) {
  SlotCounts total;
  for (const auto& [gold, pred] : examples) total += slot_counts(gold, pred);
  return prf_from_counts(total);
}

std::vector<std::string> metric_tokens(std::string_view text) {
  std::string cleaned = case_fold(text);
  for (auto& c : cleaned) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) c = ' ';
  }
  std::vector<std::string> tokens;
  std::string current;
  for (char c : cleaned) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, int> out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

}  // namespace

double bleu4(std::string_view reference, std::string_view hypothesis) {
  const auto ref = metric_tokens(reference);
  const auto hyp = metric_tokens(hypothesis);
  if (hyp.empty()) return 0.0;

  double log_sum = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto hyp_counts = ngram_counts(hyp, n);
    const auto ref_counts = ngram_counts(ref, n);
    long long matched = 0;
    long long total = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      if (auto it = ref_counts.find(gram); it != ref_counts.end()) matched += std::min(count, it->second);
    }
    const double denom = static_cast<double>(std::max<long long>(total, 1));
    double p = static_cast<double>(matched) / denom;
    if (matched == 0) {
      if (n == 1) return 0.0;
      p = kBleuEpsilon / denom;
    }
    log_sum += std::log(p);
  }
  const double r = static_cast<double>(ref.size());
  const double h = static_cast<double>(hyp.size());
  const double bp = h < r ? std::exp(1.0 - r / h) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double rouge_l(std::string_view reference, std::string_view hypothesis) {
  const auto ref = metric_tokens(reference);
  const auto hyp = metric_tokens(hypothesis);
  if (ref.empty() || hyp.empty()) return 0.0;

  // Rolling single-row LCS table.
  std::vector<std::size_t> row(hyp.size() + 1, 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = ref[i - 1] == hyp[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  const double lcs = static_cast<double>(row[hyp.size()]);
  if (lcs == 0) return 0.0;
  const double recall = lcs / static_cast<double>(ref.size());
  const double precision = lcs / static_cast<double>(hyp.size());
  return 2 * precision * recall / (precision + recall);
}

std::vector<LongTextScore> score_long_text(const TrackerSchema& schema,
                                           const std::map<std::string, FieldValue>& gold,
                                           const std::map<std::string, FieldValue>& pred) {
  std::vector<LongTextScore> out;
  for (const auto& f : schema.fields) {
    if (!std::holds_alternative<LongTextKind>(f.kind)) continue;
    const auto g = gold.find(f.name);
    if (g == gold.end()) continue;
    const auto* gold_text = std::get_if<std::string>(&g->second);
    if (!gold_text) continue;
    LongTextScore s{f.name, 0, 0};
    if (const auto p = pred.find(f.name); p != pred.end()) {
      if (const auto* pred_text = std::get_if<std::string>(&p->second)) {
        s.bleu4 = bleu4(*gold_text, *pred_text);
        s.rouge_l = rouge_l(*gold_text, *pred_text);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tracknlu
