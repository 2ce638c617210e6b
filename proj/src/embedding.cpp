#include "tracknlu/embedding.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tracknlu/schema.hpp"
#include "utf8.hpp"

namespace tracknlu {

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector LocalEmbedder::embed(std::string_view text) const {
  EmbeddingVector v = EmbeddingVector::Zero(kLocalEmbeddingDim);
  if (text.empty()) return v;

  const std::string padded = " " + case_fold(text) + " ";
  // Byte offsets of each code point start, plus the end.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < padded.size();) {
    starts.push_back(i);
    i += detail::decode_utf8(padded, i).length;
  }
  starts.push_back(padded.size());

  const std::string_view view(padded);
  for (std::size_t k = 0; k + 3 < starts.size(); ++k) {
    const auto gram = view.substr(starts[k], starts[k + 3] - starts[k]);
    v[static_cast<Eigen::Index>(fnv1a64(gram) % kLocalEmbeddingDim)] += 1.0;
  }
  normalize_in_place(v);
  return v;
}

EmbeddingVector CachingEmbedder::embed(std::string_view text) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(std::string(text)); it != cache_.end()) return it->second;
  }
  auto v = inner_->embed(text);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::string(text), std::move(v)).first->second;
}

std::vector<EmbeddingVector> CachingEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    for (const auto& t : texts) {
      if (!cache_.count(t)) missing.push_back(t);
    }
  }
  if (!missing.empty()) {
    auto vectors = inner_->embed_batch(missing);
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(vectors[i]));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(mutex_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config, std::shared_ptr<HttpTransport> transport,
                               Sleeper sleep)
    : config_(std::move(config)), transport_(std::move(transport)), sleep_(std::move(sleep)) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  HttpRequest req;
  req.url = config_.base_url;
  req.body = nlohmann::json{{"texts", texts}}.dump(-1, ' ', false,
                                                    nlohmann::json::error_handler_t::replace);
  req.headers.emplace_back("Content-Type", "application/json");
  if (!config_.api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  req.timeout = config_.request_timeout;

  const auto res = post_with_retry(*transport_, std::move(req), config_.retry, sleep_);

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorKind::protocol, fmt::format("encoder returned invalid JSON: {}", e.what()));
  }
  if (!body.contains("vectors") || !body["vectors"].is_array() ||
      body["vectors"].size() != texts.size()) {
    throw BackendError(ErrorKind::protocol, "encoder response lacks one vector per text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& arr = body["vectors"][i];
    if (!arr.is_array() || static_cast<int>(arr.size()) != config_.dim) {
      throw BackendError(ErrorKind::protocol,
                         fmt::format("encoder vector {} has wrong dimension (want {})", i, config_.dim));
    }
    EmbeddingVector v(config_.dim);
    for (int k = 0; k < config_.dim; ++k) {
      if (!arr[k].is_number()) throw BackendError(ErrorKind::protocol, "encoder vector holds a non-number");
      v[k] = arr[k].get<double>();
    }
    if (texts[i].empty()) {
      v.setZero();
    } else {
      normalize_in_place(v);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::shared_ptr<const Embedder> make_embedder_from_env() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  const auto mode = env("EMBED_MODE");
  if (mode.empty() || mode == "local") {
    return std::make_shared<CachingEmbedder>(std::make_shared<LocalEmbedder>());
  }
  if (mode != "remote") throw std::invalid_argument(fmt::format("EMBED_MODE '{}' is not local|remote", mode));
  RemoteEmbedderConfig cfg;
  cfg.base_url = env("EMBED_BASE_URL");
  cfg.api_key = env("EMBED_API_KEY");
  if (cfg.base_url.empty()) throw std::invalid_argument("EMBED_MODE=remote needs EMBED_BASE_URL");
  if (const auto dim = env("EMBED_DIM"); !dim.empty()) cfg.dim = std::stoi(dim);
  return std::make_shared<CachingEmbedder>(
      std::make_shared<RemoteEmbedder>(std::move(cfg), make_http_transport()));
}

std::vector<ScoredId> rank_by_similarity(const EmbeddingVector& query,
                                         const std::vector<EmbeddedCandidate>& candidates) {
  std::vector<ScoredId> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back({c.id, cosine(query, c.vector)});
  std::sort(out.begin(), out.end(), [](const ScoredId& a, const ScoredId& b) {
    if (rank_key(a.score) != rank_key(b.score)) return rank_key(a.score) > rank_key(b.score);
    return a.id < b.id;
  });
  return out;
}

std::vector<ScoredId> rank_by_similarity(std::string_view query,
                                         const std::vector<Candidate>& candidates,
                                         const Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(candidates.size());
  for (const auto& c : candidates) texts.push_back(c.text);
  auto vectors = embedder.embed_batch(texts);
  std::vector<EmbeddedCandidate> embedded;
  embedded.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    embedded.push_back({candidates[i].id, std::move(vectors[i])});
  }
  return rank_by_similarity(embedder.embed(query), embedded);
}

}  // namespace tracknlu
