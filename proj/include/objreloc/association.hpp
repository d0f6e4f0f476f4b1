#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace objreloc {

/// Row-major set of embeddings. The raw float32 rows are kept verbatim (so a
/// store can be written back bit-exactly); a unit-normalized double copy is
/// used for all similarity computations.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  /// `raw` holds count x dim floats. Throws NonFiniteValue / ZeroVector.
  EmbeddingStore(int dim, std::vector<float> raw);

  int dim() const { return dim_; }
  int size() const { return dim_ == 0 ? 0 : static_cast<int>(raw_.size() / dim_); }
  bool empty() const { return size() == 0; }

  std::span<const float> raw() const { return raw_; }
  std::span<const float> raw_row(int i) const { return {raw_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)}; }
  /// Unit-norm row i.
  Eigen::Ref<const Eigen::VectorXd> row(int i) const { return unit_.col(i); }

  /// Rows `indices` in the given order.
  EmbeddingStore subset(std::span<const int> indices) const;

 private:
  int dim_ = 0;
  std::vector<float> raw_;
  Eigen::MatrixXd unit_;  // dim x count, column per embedding
};

/// a.b / (|a||b|) clamped to [-1, 1]. Throws DimensionMismatch / ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  int index = 0;
  double score = 0.0;
};

/// Exact top-k by cosine similarity; ties go to the lower index.
/// Returns min(k, store.size()) entries in descending score.
std::vector<Neighbor> knn_landmarks(const EmbeddingStore& store, std::span<const double> query, int k);

/// Score carried by class-based candidates, which have no similarity.
inline constexpr double kUnscored = -2.0;

struct CorrespondenceCandidate {
  int obs_index = 0;
  int landmark_index = 0;
  double score = kUnscored;
  int rank = 0;  // 1 = nearest landmark for this observation; 0 = class-based

  bool scored() const { return rank >= 1; }
  bool operator==(const CorrespondenceCandidate&) const = default;
};

/// Candidates to sample hypotheses from, plus the landmarks each observation
/// may be matched to during pose verification.
struct CandidateSet {
  std::vector<CorrespondenceCandidate> sampling;
  std::vector<std::vector<int>> verification;  // indexed by observation

  /// Throws InvariantViolation on duplicate sampling pairs, out-of-range
  /// indices, or a sampling pair missing from its verification list.
  void validate(int n_observations, int n_landmarks) const;
};

enum class MatchingType { Class, Clip, Hybrid };

std::string_view to_string(MatchingType m);
MatchingType parse_matching(std::string_view s);

/// Observation j paired with each of its k nearest landmark embeddings.
CandidateSet generate_clip_candidates(const EmbeddingStore& map_store, const EmbeddingStore& query_store, int k);

/// Every (observation, landmark) pair sharing a class id; unscored.
CandidateSet generate_class_candidates(std::span<const int> landmark_classes, std::span<const int> observation_classes);

/// Samples from the embedding candidates, verifies against the union of the
/// embedding and class candidates. Empty class lists reduce to clip matching.
CandidateSet generate_hybrid_candidates(const EmbeddingStore& map_store, const EmbeddingStore& query_store, int k,
                                        std::span<const int> landmark_classes,
                                        std::span<const int> observation_classes);

/// Removes sampling candidates of observations whose box area is below
/// `min_area`. Verification lists are untouched. `min_area <= 0` is a no-op.
void drop_small_observations(CandidateSet& set, std::span<const double> observation_areas, double min_area);

/// Descending score, stable. Throws UnscoredCandidate on class-based entries.
CandidateSet sort_by_score(CandidateSet set);

/// Grouped by neighbor rank (all rank-1 first, then rank-2, ...), each group
/// in descending score, stable. Throws UnscoredCandidate on class-based entries.
CandidateSet sort_balanced(CandidateSet set);

}  // namespace objreloc
