#pragma once
// Independent reference implementations used to check the library. Nothing
// here calls into the code under test except for plain data types.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Trigram feature hashing over ASCII text: pad with one space each side,
/// FNV-1a 64 per trigram, 512 buckets, L2-normalised.
inline std::vector<double> embed(const std::string& text) {
  std::vector<double> v(512, 0.0);
  if (text.empty()) return v;
  const std::string padded = " " + ascii_lower(text) + " ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t j = i; j < i + 3; ++j) {
      h ^= static_cast<unsigned char>(padded[j]);
      h *= 1099511628211ull;
    }
    v[h % 512] += 1.0;
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// All (id, score) pairs, score descending then id ascending, by exhaustive scan.
inline std::vector<std::pair<std::string, double>> rank(
    const std::string& query, const std::vector<std::pair<std::string, std::string>>& candidates) {
  const auto q = embed(query);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [id, text] : candidates) out.emplace_back(id, cosine(q, embed(text)));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const auto ka = std::llround(a.second * 1e12), kb = std::llround(b.second * 1e12);
    if (ka != kb) return ka > kb;
    return a.first < b.first;
  });
  return out;
}

/// Index of the option with the highest cosine; first wins on ties.
inline std::size_t argmax_option(const std::string& raw, const std::vector<std::string>& options) {
  const auto r = embed(raw);
  std::size_t best = 0;
  double best_score = -2;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const double s = cosine(r, embed(options[i]));
    if (i == 0 || std::llround(s * 1e12) > std::llround(best_score * 1e12)) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// text metrics

inline std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : ascii_lower(text)) {
    if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80) {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::map<std::vector<std::string>, int> ngrams(const std::vector<std::string>& t, std::size_t n) {
  std::map<std::vector<std::string>, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    out[std::vector<std::string>(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))]++;
  }
  return out;
}

inline double bleu4(const std::string& reference, const std::string& hypothesis) {
  const auto r = tokens(reference);
  const auto h = tokens(hypothesis);
  if (h.empty()) return 0;
  double log_sum = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto hn = ngrams(h, n);
    const auto rn = ngrams(r, n);
    int matched = 0, total = 0;
    for (const auto& [g, c] : hn) {
      total += c;
      const auto it = rn.find(g);
      matched += std::min(c, it == rn.end() ? 0 : it->second);
    }
    double num = matched;
    if (matched == 0) {
      if (n == 1) return 0;
      num = 0.1;
    }
    log_sum += std::log(num / std::max(total, 1));
  }
  const double bp = h.size() < r.size() ? std::exp(1.0 - double(r.size()) / double(h.size())) : 1.0;
  return bp * std::exp(log_sum / 4);
}

/// Top-down memoised LCS (the library uses a bottom-up table).
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

inline double rouge_l(const std::string& reference, const std::string& hypothesis) {
  const auto r = tokens(reference);
  const auto h = tokens(hypothesis);
  if (r.empty() || h.empty()) return 0;
  const double l = double(lcs(r, h));
  if (l == 0) return 0;
  const double p = l / double(h.size()), rc = l / double(r.size());
  return 2 * p * rc / (p + rc);
}

// ---------------------------------------------------------------------------
// slot metrics

using Slots = std::set<std::pair<std::string, std::string>>;

inline bool joint(const Slots& gold, const Slots& pred) {
  if (gold.size() != pred.size()) return false;
  for (const auto& g : gold) {
    if (!pred.count(g)) return false;
  }
  return true;
}

struct Prf {
  double p = 0, r = 0, f = 0;
};

inline Prf micro_prf(const std::vector<std::pair<Slots, Slots>>& examples) {
  double tp = 0, np = 0, ng = 0;
  for (const auto& [g, p] : examples) {
    np += double(p.size());
    ng += double(g.size());
    for (const auto& x : p) tp += g.count(x) ? 1 : 0;
  }
  Prf out;
  if (np > 0) out.p = 100 * tp / np;
  if (ng > 0) out.r = 100 * tp / ng;
  if (np + ng > 0) out.f = 100 * 2 * tp / (np + ng);
  return out;
}

// ---------------------------------------------------------------------------
// shot plans and prompts, straight from the raw JSON records

struct PlannedShot {
  std::string id;
  std::string role;
};

/// `users` are (id, created_at) of the tracker's own samples; `view` is
/// (id, phrase) of the candidate seeds.
inline std::vector<PlannedShot> plan(const std::string& phrase,
                                     std::vector<std::pair<std::string, std::string>> users,
                                     const std::vector<std::pair<std::string, std::string>>& view) {
  std::stable_sort(users.begin(), users.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  const std::size_t k = std::min<std::size_t>(users.size(), 8);
  users.erase(users.begin(), users.end() - static_cast<long>(k));
  std::set<std::string> taken;
  for (const auto& u : users) taken.insert(u.first);
  std::vector<std::pair<std::string, std::string>> pool;
  for (const auto& c : view) {
    if (!taken.count(c.first)) pool.push_back(c);
  }
  const auto ranked = rank(phrase, pool);
  const std::size_t used = std::min(10 - k, ranked.size());
  const std::size_t far = std::min<std::size_t>(5, used);
  std::vector<PlannedShot> out;
  for (std::size_t i = 0; i < far; ++i) out.push_back({ranked[ranked.size() - 1 - i].first, "farthest"});
  for (std::size_t i = used - far; i > 0; --i) out.push_back({ranked[i - 1].first, "nearest"});
  for (const auto& u : users) out.push_back({u.first, "user"});
  return out;
}

inline std::string descriptor(const nlohmann::json& field) {
  const std::string kind = field.at("kind");
  auto options = [&](const char* lead) {
    std::string s = lead;
    bool first = true;
    for (const auto& o : field.at("options")) {
      s += first ? "" : " / ";
      s += o.get<std::string>();
      first = false;
    }
    return s;
  };
  if (kind == "likert") {
    return "scale " + std::to_string(field.value("min", 1)) + " to " + std::to_string(field.value("max", 5));
  }
  if (kind == "single_choice") return options("one of: ");
  if (kind == "multi_choice") return options("any of: ");
  if (kind == "short_text") return "short text";
  if (kind == "long_text") return "long text";
  if (kind == "time_point") return "time";
  if (kind == "time_range") return "time range";
  return kind;  // number, date
}

inline std::vector<nlohmann::json> columns(const nlohmann::json& schema) {
  std::vector<nlohmann::json> cols(schema.at("fields").begin(), schema.at("fields").end());
  if (schema.contains("time_field") && !schema.at("time_field").is_null()) cols.push_back(schema.at("time_field"));
  return cols;
}

inline std::string tracker_block(const nlohmann::json& schema) {
  std::string s = "Tracker: " + schema.at("name").get<std::string>() + "\nFields: ";
  bool first = true;
  for (const auto& f : columns(schema)) {
    s += first ? "" : "; ";
    s += f.at("name").get<std::string>() + " (" + descriptor(f) + ")";
    first = false;
  }
  return s + "\n";
}

inline std::string wire(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// `schemas` by tracker id; `shots` are raw sample records in prompt order.
inline std::string prompt(const std::map<std::string, nlohmann::json>& schemas, const nlohmann::json& query_schema,
                          const std::vector<nlohmann::json>& shots, const std::string& phrase,
                          const std::string& current_time) {
  std::string s =
      "Extract the field values for the tracker from the sentence. Only include fields the sentence specifies.\n\n";
  for (const auto& shot : shots) {
    const auto& schema = schemas.at(shot.at("tracker_id").get<std::string>());
    s += "###\n" + tracker_block(schema) + "Sentence: " + shot.at("phrase").get<std::string>() + "\nValues:";
    bool first = true;
    for (const auto& f : columns(schema)) {
      const std::string name = f.at("name");
      if (!shot.at("values").contains(name)) continue;
      s += first ? " " : " | ";
      s += name + " = " + wire(shot.at("values").at(name));
      first = false;
    }
    s += "\n";
  }
  s += "###\n" + tracker_block(query_schema);
  const bool timed = query_schema.contains("time_field") && !query_schema.at("time_field").is_null();
  if (timed && !current_time.empty()) s += "Current time: " + current_time + "\n";
  return s + "Sentence: " + phrase + "\nValues:";
}

}  // namespace oracle
