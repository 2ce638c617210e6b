#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracknlu/schema.hpp"

namespace tracknlu {

/// Close-ended (field, canonical value) pairs of an item; long_text excluded.
using SlotSet = std::set<std::pair<std::string, std::string>>;

SlotSet to_slot_set(const TrackerSchema& schema, const std::map<std::string, FieldValue>& values);

/// 1 iff the sets are equal.
int jga(const SlotSet& gold, const SlotSet& pred);

struct SlotCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  SlotCounts& operator+=(const SlotCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

SlotCounts slot_counts(const SlotSet& gold, const SlotSet& pred);

struct PrfScore {
  double precision = 0;  // percent
  double recall = 0;
  double f1 = 0;
};

/// Micro-averaged precision/recall/F1 in percent; 0 where a denominator is 0.
PrfScore prf_from_counts(const SlotCounts& counts);
PrfScore slot_f1(const std::vector<std::pair<SlotSet, SlotSet>>& examples);

/// Lowercase, ASCII punctuation to spaces, split on whitespace.
std::vector<std::string> metric_tokens(std::string_view text);

inline constexpr double kBleuEpsilon = 0.1;

/// Sentence BLEU-4 in [0, 1]. Zero matches for n >= 2 are floored at 0.1
/// before dividing; brevity penalty exp(1 - r/h) when h < r.
double bleu4(std::string_view reference, std::string_view hypothesis);

/// ROUGE-L F-measure in [0, 1] from the token LCS.
double rouge_l(std::string_view reference, std::string_view hypothesis);

struct LongTextScore {
  std::string field;
  double bleu4 = 0;
  double rouge_l = 0;
};

/// One score per long_text field present in gold; a missing prediction scores 0.
std::vector<LongTextScore> score_long_text(const TrackerSchema& schema,
                                           const std::map<std::string, FieldValue>& gold,
                                           const std::map<std::string, FieldValue>& pred);

}  // namespace tracknlu
