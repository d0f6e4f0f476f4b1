#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "objreloc/association.hpp"
#include "objreloc/geometry.hpp"
#include "objreloc/scene.hpp"

namespace objreloc {

enum class SamplerKind { BruteForce, Ransac, Prosac, BProsac };

std::string_view to_string(SamplerKind k);
SamplerKind parse_sampler(std::string_view s);
bool requires_scores(SamplerKind k);

/// Random source for sampling. mt19937_64 output is fixed by the standard;
/// integer draws go through uniform_index rather than std distributions so a
/// seed reproduces the same stream on every standard library.
using Rng = std::mt19937_64;

/// Unbiased integer in [0, n) by rejection on the top of the 64-bit range.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Stream seed for a key path: mix(mix(mix(master) ^ k0) ^ k1) ...
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

struct ConsensusConfig {
  int iterations = 500;
  double iou_threshold = 0.2;
  std::int64_t prosac_T_N = 200000;
  std::uint64_t seed = 0;
  double min_z = 1e-6;
  /// Samplers visit every valid triple once (in their own order) instead of drawing.
  bool full_enumeration = false;

  void validate() const;
};

struct MatchedPair {
  int obs_index = 0;
  int landmark_index = 0;
  double iou = 0.0;

  bool operator==(const MatchedPair&) const = default;
};

struct LocalizationResult {
  PoseWC pose;
  double score = 0.0;
  std::vector<MatchedPair> correspondences;
  std::int64_t iterations_run = 0;
  std::int64_t best_found_at = 0;  // 1-based iteration of the returned hypothesis
};

/// T'_n = ceil(T_N * C(n, m) / C(N, m)) for n = m..N, computed exactly.
/// Satisfies T_{n+1} = T_n (n+1) / (n+1-m) and T'_N = T_N.
std::vector<std::int64_t> prosac_growth(int m, std::int64_t T_N, int n_candidates);

/// Progressive pool of the PROSAC sampler.
class ProsacSchedule {
 public:
  ProsacSchedule(int m, std::int64_t T_N, int n_candidates);

  /// g(t) = min{n : T'_n >= t}, saturating at N (t is 1-based).
  int pool_size(std::int64_t t) const;
  /// True while the newest pool member must be part of the sample.
  bool forces_newest(std::int64_t t) const;
  const std::vector<std::int64_t>& growth() const { return growth_; }

 private:
  int m_;
  int n_;
  std::vector<std::int64_t> growth_;
};

using Triple = std::array<int, 3>;

/// Pairwise-distinct observations and pairwise-distinct landmarks.
bool is_valid_triple(std::span<const CorrespondenceCandidate> c, int i, int j, int k);

/// Every valid triple i < j < k in lexicographic order.
std::vector<Triple> enumerate_valid_triples(std::span<const CorrespondenceCandidate> candidates);

/// Draws index triples into a candidate list according to the sampler kind.
/// Prosac/BProsac expect the list already sorted by the matching order.
class Sampler {
 public:
  Sampler(SamplerKind kind, std::span<const CorrespondenceCandidate> candidates, const ConsensusConfig& cfg);

  /// Indices of the sample at 1-based iteration t.
  Triple draw(std::int64_t t, Rng& rng);
  /// Pool prefix length used at iteration t (whole list for Ransac).
  int pool_size(std::int64_t t) const;
  /// Smallest prefix that contains a valid triple.
  int min_pool() const { return min_pool_; }

 private:
  Triple draw_from_pool(int n, bool force_newest, Rng& rng);

  SamplerKind kind_;
  std::span<const CorrespondenceCandidate> candidates_;
  std::optional<ProsacSchedule> schedule_;
  int min_pool_ = 0;
  std::vector<int> infeasible_forced_;  // pool sizes whose newest member has no valid completion
};

/// Three candidates with distinct observations and landmarks.
/// Throws InsufficientCandidates or SamplingStalled.
std::array<CorrespondenceCandidate, 3> draw_sample(SamplerKind kind, std::span<const CorrespondenceCandidate> candidates,
                                                   std::int64_t t, Rng& rng, const ConsensusConfig& cfg = {});

struct VerificationResult {
  double score = 0.0;
  std::vector<MatchedPair> correspondences;
};

/// Matches each observation to the verification landmark whose projection
/// overlaps its box ellipse most (ties to the lower landmark index), keeping
/// it when the IoU exceeds the threshold. Landmarks with camera depth <= min_z
/// are skipped. One landmark may serve several observations.
VerificationResult verify_pose(const PoseWC& pose, const ObjectMap& map, const Query& query,
                               const std::vector<std::vector<int>>& verification, const Camera& cam,
                               const ConsensusConfig& cfg);

/// Called after every iteration with the best score so far.
using IterationMonitor = std::function<void(std::int64_t iteration, double best_score)>;

/// Hypothesize-and-verify loop. Runs cfg.iterations draws (BruteForce walks
/// all valid triples lexicographically instead) and keeps strict improvements.
/// Throws InsufficientCandidates or NoSolution.
LocalizationResult localize(const ObjectMap& map, const Query& query, const CandidateSet& candidates, SamplerKind kind,
                            const ConsensusConfig& cfg, const Camera& cam, const IterationMonitor& monitor = {});

}  // namespace objreloc
