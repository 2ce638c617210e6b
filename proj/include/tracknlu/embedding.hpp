#pragma once

#include <cmath>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "tracknlu/http.hpp"

namespace tracknlu {

template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Unit-norm sentence embedding, or the zero vector for empty text.
using EmbeddingVector = Embedding<double>;

inline constexpr int kLocalEmbeddingDim = 512;

/// Cosine similarity; zero vectors give 0. Throws std::invalid_argument when
/// the dimensions differ.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch");
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Scales v to unit L2 norm in place; the zero vector stays zero.
template <typename Derived>
void normalize_in_place(Eigen::MatrixBase<Derived>& v) {
  const auto n = v.norm();
  if (n > 0) v /= n;
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
  virtual int dim() const = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hashed character-trigram embedder: case-folds, pads with one space on each
/// side, hashes every code-point trigram into one of 512 buckets and
/// normalizes the counts.
class LocalEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(std::string_view text) const override;
  int dim() const override { return kLocalEmbeddingDim; }
};

/// Memoizes another embedder. Thread-safe.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<const Embedder> inner) : inner_(std::move(inner)) {}
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;
  int dim() const override { return inner_->dim(); }

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

struct RemoteEmbedderConfig {
  std::string base_url;  // POST target is base_url as given
  std::string api_key;
  int dim = 384;
  RetryPolicy retry;
  std::chrono::milliseconds request_timeout{10000};
};

/// Client for a sentence-encoder service speaking
///   POST {texts:[...]} -> {vectors:[[...]]}
/// Returned vectors are re-normalized to unit length.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(RemoteEmbedderConfig config, std::shared_ptr<HttpTransport> transport,
                 Sleeper sleep = real_sleeper());
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;
  int dim() const override { return config_.dim; }

 private:
  RemoteEmbedderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleep_;
};

/// Builds an embedder from EMBED_MODE (local|remote), EMBED_BASE_URL and
/// EMBED_API_KEY. Local is the default.
std::shared_ptr<const Embedder> make_embedder_from_env();

struct Candidate {
  std::string id;
  std::string text;
};

struct ScoredId {
  std::string id;
  double score = 0;
  bool operator==(const ScoredId&) const = default;
};

struct EmbeddedCandidate {
  std::string id;
  EmbeddingVector vector;
};

/// Ordering key for similarity scores: values within 1e-12 of each other
/// count as ties, so rankings do not depend on summation order.
inline long long rank_key(double score) { return std::llround(score * 1e12); }

/// Sorts candidates by descending cosine to the query, ties by ascending id.
std::vector<ScoredId> rank_by_similarity(std::string_view query,
                                         const std::vector<Candidate>& candidates,
                                         const Embedder& embedder);
std::vector<ScoredId> rank_by_similarity(const EmbeddingVector& query,
                                         const std::vector<EmbeddedCandidate>& candidates);

}  // namespace tracknlu
