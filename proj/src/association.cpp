#include "objreloc/association.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "objreloc/error.hpp"

namespace objreloc {

EmbeddingStore::EmbeddingStore(int dim, std::vector<float> raw) : dim_(dim), raw_(std::move(raw)) {
  if (dim_ <= 0) fail(ErrorCode::InvalidArgument, "embedding dimension must be positive");
  if (raw_.size() % static_cast<std::size_t>(dim_) != 0)
    fail(ErrorCode::DimensionMismatch, "embedding payload is not a multiple of the dimension");
  const int n = size();
  unit_.resize(dim_, n);
  for (int i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const float x = raw_[static_cast<std::size_t>(i) * dim_ + d];
      if (!std::isfinite(x)) fail(ErrorCode::NonFiniteValue, "embedding row " + std::to_string(i) + " is not finite");
      unit_(d, i) = x;
      sq += static_cast<double>(x) * x;
    }
    if (!(sq > 0.0)) fail(ErrorCode::ZeroVector, "embedding row " + std::to_string(i) + " has zero norm");
    unit_.col(i) /= std::sqrt(sq);
  }
}

EmbeddingStore EmbeddingStore::subset(std::span<const int> indices) const {
  std::vector<float> raw;
  raw.reserve(indices.size() * dim_);
  for (const int i : indices) {
    if (i < 0 || i >= size()) fail(ErrorCode::EmbeddingRefOutOfRange, "embedding index " + std::to_string(i));
    const auto r = raw_row(i);
    raw.insert(raw.end(), r.begin(), r.end());
  }
  return EmbeddingStore(dim_, std::move(raw));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "vectors differ in dimension");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) fail(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<Neighbor> knn_landmarks(const EmbeddingStore& store, std::span<const double> query, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  if (static_cast<int>(query.size()) != store.dim() && !store.empty())
    fail(ErrorCode::DimensionMismatch, "query dimension differs from the store");
  const Eigen::Map<const Eigen::VectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
  const double qn = q.norm();
  if (!(qn > 0.0)) fail(ErrorCode::ZeroVector, "query embedding has zero norm");

  std::vector<Neighbor> all(store.size());
  for (int i = 0; i < store.size(); ++i) all[i] = {i, std::clamp(store.row(i).dot(q) / qn, -1.0, 1.0)};
  const auto better = [](const Neighbor& x, const Neighbor& y) {
    return x.score > y.score || (x.score == y.score && x.index < y.index);
  };
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

void CandidateSet::validate(int n_observations, int n_landmarks) const {
  if (static_cast<int>(verification.size()) != n_observations)
    fail(ErrorCode::InvariantViolation, "verification list count differs from observation count");
  std::set<std::pair<int, int>> seen;
  for (const auto& c : sampling) {
    if (c.obs_index < 0 || c.obs_index >= n_observations || c.landmark_index < 0 || c.landmark_index >= n_landmarks)
      fail(ErrorCode::InvariantViolation, "candidate index out of range");
    if (!seen.emplace(c.obs_index, c.landmark_index).second)
      fail(ErrorCode::InvariantViolation, "duplicate sampling candidate");
    const auto& v = verification[c.obs_index];
    if (std::find(v.begin(), v.end(), c.landmark_index) == v.end())
      fail(ErrorCode::InvariantViolation, "sampling candidate missing from verification list");
  }
  for (const auto& v : verification)
    for (const int l : v)
      if (l < 0 || l >= n_landmarks) fail(ErrorCode::InvariantViolation, "verification landmark out of range");
}

std::string_view to_string(MatchingType m) {
  switch (m) {
    case MatchingType::Class: return "class";
    case MatchingType::Clip: return "clip";
    case MatchingType::Hybrid: return "hybrid";
  }
  return "unknown";
}

MatchingType parse_matching(std::string_view s) {
  if (s == "class") return MatchingType::Class;
  if (s == "clip") return MatchingType::Clip;
  if (s == "hybrid") return MatchingType::Hybrid;
  fail(ErrorCode::InvalidArgument, "unknown matching type '" + std::string(s) + "'");
}

CandidateSet generate_clip_candidates(const EmbeddingStore& map_store, const EmbeddingStore& query_store, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  if (!map_store.empty() && !query_store.empty() && map_store.dim() != query_store.dim())
    fail(ErrorCode::DimensionMismatch, "map and query embeddings differ in dimension");
  CandidateSet set;
  set.verification.resize(query_store.size());
  for (int j = 0; j < query_store.size(); ++j) {
    const Eigen::VectorXd q = query_store.row(j);
    const auto neighbors = knn_landmarks(map_store, {q.data(), static_cast<std::size_t>(q.size())}, k);
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
      set.sampling.push_back({j, neighbors[r].index, neighbors[r].score, static_cast<int>(r) + 1});
      set.verification[j].push_back(neighbors[r].index);
    }
  }
  return set;
}

CandidateSet generate_class_candidates(std::span<const int> landmark_classes, std::span<const int> observation_classes) {
  CandidateSet set;
  set.verification.resize(observation_classes.size());
  for (std::size_t j = 0; j < observation_classes.size(); ++j) {
    for (std::size_t i = 0; i < landmark_classes.size(); ++i) {
      if (landmark_classes[i] != observation_classes[j]) continue;
      set.sampling.push_back({static_cast<int>(j), static_cast<int>(i), kUnscored, 0});
      set.verification[j].push_back(static_cast<int>(i));
    }
  }
  return set;
}

CandidateSet generate_hybrid_candidates(const EmbeddingStore& map_store, const EmbeddingStore& query_store, int k,
                                        std::span<const int> landmark_classes,
                                        std::span<const int> observation_classes) {
  CandidateSet set = generate_clip_candidates(map_store, query_store, k);
  if (landmark_classes.empty() || observation_classes.empty()) return set;
  if (static_cast<int>(observation_classes.size()) != query_store.size())
    fail(ErrorCode::DimensionMismatch, "observation class count differs from query embedding count");
  const CandidateSet by_class = generate_class_candidates(landmark_classes, observation_classes);
  for (std::size_t j = 0; j < set.verification.size(); ++j) {
    auto& v = set.verification[j];
    v.insert(v.end(), by_class.verification[j].begin(), by_class.verification[j].end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return set;
}

void drop_small_observations(CandidateSet& set, std::span<const double> observation_areas, double min_area) {
  if (min_area <= 0.0) return;
  std::erase_if(set.sampling, [&](const CorrespondenceCandidate& c) {
    return static_cast<std::size_t>(c.obs_index) < observation_areas.size() && observation_areas[c.obs_index] < min_area;
  });
}

namespace {

void require_scored(const CandidateSet& set) {
  for (const auto& c : set.sampling)
    if (!c.scored()) fail(ErrorCode::UnscoredCandidate, "score-based ordering needs embedding candidates");
}

}  // namespace

CandidateSet sort_by_score(CandidateSet set) {
  require_scored(set);
  std::stable_sort(set.sampling.begin(), set.sampling.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  return set;
}

CandidateSet sort_balanced(CandidateSet set) {
  require_scored(set);
  std::stable_sort(set.sampling.begin(), set.sampling.end(), [](const auto& a, const auto& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.score > b.score;
  });
  return set;
}

}  // namespace objreloc
