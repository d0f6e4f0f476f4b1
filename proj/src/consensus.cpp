#include "objreloc/consensus.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "objreloc/error.hpp"
#include "objreloc/pnp.hpp"

namespace objreloc {

namespace {

constexpr int kSampleSize = 3;
constexpr int kMaxRejections = 1000;

}  // namespace

std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::BruteForce: return "bf";
    case SamplerKind::Ransac: return "ransac";
    case SamplerKind::Prosac: return "prosac";
    case SamplerKind::BProsac: return "b-prosac";
  }
  return "unknown";
}

SamplerKind parse_sampler(std::string_view s) {
  if (s == "bf") return SamplerKind::BruteForce;
  if (s == "ransac") return SamplerKind::Ransac;
  if (s == "prosac") return SamplerKind::Prosac;
  if (s == "b-prosac") return SamplerKind::BProsac;
  fail(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(s) + "'");
}

bool requires_scores(SamplerKind k) { return k == SamplerKind::Prosac || k == SamplerKind::BProsac; }

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "uniform_index over an empty range");
  // Largest multiple of n representable; values at or above it are redrawn.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix_seed(master);
  for (const std::uint64_t k : keys) s = mix_seed(s ^ k);
  return s;
}

void ConsensusConfig::validate() const {
  if (iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be at least 1");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) fail(ErrorCode::InvalidArgument, "iou_threshold must be in (0, 1)");
  if (prosac_T_N < iterations) fail(ErrorCode::InvalidArgument, "prosac_T_N must be at least the iteration count");
}

// ---------------------------------------------------------------------------
// PROSAC schedule

std::vector<std::int64_t> prosac_growth(int m, std::int64_t T_N, int n_candidates) {
  if (m < 1 || n_candidates < m) fail(ErrorCode::InvalidArgument, "prosac_growth needs N >= m >= 1");
  if (T_N < 1) fail(ErrorCode::InvalidArgument, "prosac_growth needs T_N >= 1");
  using u128 = unsigned __int128;
  auto binom = [m](int n) {
    u128 c = 1;
    for (int i = 0; i < m; ++i) c = c * static_cast<u128>(n - i) / static_cast<u128>(i + 1);
    return c;
  };
  const u128 denom = binom(n_candidates);
  std::vector<std::int64_t> growth;
  growth.reserve(n_candidates - m + 1);
  for (int n = m; n <= n_candidates; ++n) {
    const u128 num = static_cast<u128>(T_N) * binom(n);
    growth.push_back(static_cast<std::int64_t>((num + denom - 1) / denom));
  }
  return growth;
}

ProsacSchedule::ProsacSchedule(int m, std::int64_t T_N, int n_candidates)
    : m_(m), n_(n_candidates), growth_(prosac_growth(m, T_N, n_candidates)) {}

int ProsacSchedule::pool_size(std::int64_t t) const {
  const auto it = std::lower_bound(growth_.begin(), growth_.end(), t);
  if (it == growth_.end()) return n_;
  return m_ + static_cast<int>(it - growth_.begin());
}

bool ProsacSchedule::forces_newest(std::int64_t t) const { return t <= growth_.back(); }

// ---------------------------------------------------------------------------
// Sampling

bool is_valid_triple(std::span<const CorrespondenceCandidate> c, int i, int j, int k) {
  const auto& a = c[i];
  const auto& b = c[j];
  const auto& d = c[k];
  return a.obs_index != b.obs_index && a.obs_index != d.obs_index && b.obs_index != d.obs_index &&
         a.landmark_index != b.landmark_index && a.landmark_index != d.landmark_index &&
         b.landmark_index != d.landmark_index;
}

std::vector<Triple> enumerate_valid_triples(std::span<const CorrespondenceCandidate> candidates) {
  std::vector<Triple> out;
  const int n = static_cast<int>(candidates.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (candidates[i].obs_index == candidates[j].obs_index ||
          candidates[i].landmark_index == candidates[j].landmark_index)
        continue;
      for (int k = j + 1; k < n; ++k)
        if (is_valid_triple(candidates, i, j, k)) out.push_back({i, j, k});
    }
  return out;
}

namespace {

int smallest_valid_prefix(std::span<const CorrespondenceCandidate> c) {
  const int n = static_cast<int>(c.size());
  for (int k = 2; k < n; ++k)
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (is_valid_triple(c, i, j, k)) return k + 1;
  return 0;
}

bool has_completion(std::span<const CorrespondenceCandidate> c, int newest) {
  for (int i = 0; i < newest; ++i)
    for (int j = i + 1; j < newest; ++j)
      if (is_valid_triple(c, i, j, newest)) return true;
  return false;
}

}  // namespace

Sampler::Sampler(SamplerKind kind, std::span<const CorrespondenceCandidate> candidates, const ConsensusConfig& cfg)
    : kind_(kind), candidates_(candidates) {
  if (candidates.size() < kSampleSize) fail(ErrorCode::InsufficientCandidates, "fewer than 3 candidates");
  if (requires_scores(kind))
    for (const auto& c : candidates)
      if (!c.scored()) fail(ErrorCode::UnscoredCandidate, "PROSAC sampling needs scored candidates");
  min_pool_ = smallest_valid_prefix(candidates);
  if (min_pool_ == 0)
    fail(ErrorCode::InsufficientCandidates, "no three candidates with distinct observations and landmarks");
  if (requires_scores(kind))
    schedule_.emplace(kSampleSize, cfg.prosac_T_N, static_cast<int>(candidates.size()));
}

int Sampler::pool_size(std::int64_t t) const {
  if (!schedule_) return static_cast<int>(candidates_.size());
  return std::max(schedule_->pool_size(t), min_pool_);
}

Triple Sampler::draw(std::int64_t t, Rng& rng) {
  if (!schedule_) return draw_from_pool(static_cast<int>(candidates_.size()), false, rng);
  return draw_from_pool(pool_size(t), schedule_->forces_newest(t), rng);
}

Triple Sampler::draw_from_pool(int n, bool force_newest, Rng& rng) {
  if (force_newest && std::find(infeasible_forced_.begin(), infeasible_forced_.end(), n) == infeasible_forced_.end()) {
    const int newest = n - 1;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      const int i = static_cast<int>(uniform_index(rng, newest));
      int j = static_cast<int>(uniform_index(rng, newest - 1));
      if (j >= i) ++j;
      if (is_valid_triple(candidates_, i, j, newest)) return {std::min(i, j), std::max(i, j), newest};
    }
    if (has_completion(candidates_, newest))
      fail(ErrorCode::SamplingStalled, "rejection cap reached while completing the newest pool member");
    // The newest member conflicts with every pair below it; sample the pool uniformly.
    infeasible_forced_.push_back(n);
  }
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    Triple s;
    s[0] = static_cast<int>(uniform_index(rng, n));
    s[1] = static_cast<int>(uniform_index(rng, n - 1));
    if (s[1] >= s[0]) ++s[1];
    s[2] = static_cast<int>(uniform_index(rng, n - 2));
    const int lo = std::min(s[0], s[1]);
    const int hi = std::max(s[0], s[1]);
    if (s[2] >= lo) ++s[2];
    if (s[2] >= hi) ++s[2];
    std::sort(s.begin(), s.end());
    if (is_valid_triple(candidates_, s[0], s[1], s[2])) return s;
  }
  fail(ErrorCode::SamplingStalled, "rejection cap reached while drawing a sample");
}

std::array<CorrespondenceCandidate, 3> draw_sample(SamplerKind kind, std::span<const CorrespondenceCandidate> candidates,
                                                   std::int64_t t, Rng& rng, const ConsensusConfig& cfg) {
  Sampler sampler(kind == SamplerKind::BruteForce ? SamplerKind::Ransac : kind, candidates, cfg);
  const Triple s = sampler.draw(t, rng);
  return {candidates[s[0]], candidates[s[1]], candidates[s[2]]};
}

// ---------------------------------------------------------------------------
// Verification

VerificationResult verify_pose(const PoseWC& pose, const ObjectMap& map, const Query& query,
                               const std::vector<std::vector<int>>& verification, const Camera& cam,
                               const ConsensusConfig& cfg) {
  enum class State : unsigned char { Unknown, Culled, Ready };
  std::vector<State> state(map.landmarks.size(), State::Unknown);
  std::vector<Ellipse> projected(map.landmarks.size());

  auto projection = [&](int l) -> const Ellipse* {
    if (state[l] == State::Unknown) {
      state[l] = State::Culled;
      const Landmark& lm = map.landmarks[l];
      if (pose.apply(lm.ellipsoid.center).z() > cfg.min_z) {
        try {
          projected[l] = dual_conic_to_ellipse(project_dual_quadric(lm.quadric, pose, cam));
          state[l] = State::Ready;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NotAnEllipse && e.code() != ErrorCode::DegenerateProjection) throw;
        }
      }
    }
    return state[l] == State::Ready ? &projected[l] : nullptr;
  };

  VerificationResult result;
  const std::size_t n_obs = std::min(query.observations.size(), verification.size());
  for (std::size_t j = 0; j < n_obs; ++j) {
    const Ellipse box = bbox_to_ellipse(query.observations[j].bbox);
    int best_landmark = -1;
    double best_iou = -1.0;
    for (const int l : verification[j]) {
      const Ellipse* e = projection(l);
      if (e == nullptr) continue;
      const double iou = ellipse_iou(box, *e);
      if (iou > best_iou || (iou == best_iou && l < best_landmark)) {
        best_iou = iou;
        best_landmark = l;
      }
    }
    if (best_landmark >= 0 && best_iou > cfg.iou_threshold) {
      result.correspondences.push_back({static_cast<int>(j), best_landmark, best_iou});
      result.score += best_iou;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Main loop

namespace {

struct Hypothesis {
  PoseWC pose;
  VerificationResult verification;
};

std::optional<Hypothesis> evaluate_triple(const ObjectMap& map, const Query& query, const CandidateSet& candidates,
                                          const Triple& triple, const ConsensusConfig& cfg, const Camera& cam) {
  // Canonical (observation, landmark) order makes the hypothesis independent
  // of where the three candidates sit in the sampling list.
  std::array<CorrespondenceCandidate, 3> picked{candidates.sampling[triple[0]], candidates.sampling[triple[1]],
                                                candidates.sampling[triple[2]]};
  std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    return a.obs_index != b.obs_index ? a.obs_index < b.obs_index : a.landmark_index < b.landmark_index;
  });

  std::array<Correspondence3D2D, 3> corr;
  std::array<SampledPair, 3> pairs;
  for (int i = 0; i < 3; ++i) {
    const Landmark& lm = map.landmarks[picked[i].landmark_index];
    const BBox& box = query.observations[picked[i].obs_index].bbox;
    corr[i] = {lm.ellipsoid.center, box.center()};
    pairs[i] = {&lm.quadric, box};
  }

  std::vector<PoseWC> poses;
  try {
    poses = solve_p3p(corr, cam);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSample && e.code() != ErrorCode::NoRealSolution) throw;
    return std::nullopt;
  }
  if (poses.empty()) return std::nullopt;

  Hypothesis h;
  h.pose = select_pose(poses, pairs, cam);
  h.verification = verify_pose(h.pose, map, query, candidates.verification, cam, cfg);
  return h;
}

std::vector<Triple> enumeration_order(SamplerKind kind, std::span<const CorrespondenceCandidate> candidates, Rng& rng) {
  std::vector<Triple> triples = enumerate_valid_triples(candidates);
  if (kind == SamplerKind::Ransac) {
    for (std::size_t i = triples.size(); i > 1; --i) std::swap(triples[i - 1], triples[uniform_index(rng, i)]);
  } else if (requires_scores(kind)) {
    // Progressive order: triples enter once their last member joins the pool.
    std::stable_sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) { return a[2] < b[2]; });
  }
  return triples;
}

}  // namespace

LocalizationResult localize(const ObjectMap& map, const Query& query, const CandidateSet& candidates, SamplerKind kind,
                            const ConsensusConfig& cfg, const Camera& cam, const IterationMonitor& monitor) {
  cfg.validate();
  cam.validate();
  candidates.validate(static_cast<int>(query.observations.size()), static_cast<int>(map.landmarks.size()));
  if (requires_scores(kind))
    for (const auto& c : candidates.sampling)
      if (!c.scored()) fail(ErrorCode::UnscoredCandidate, std::string(to_string(kind)) + " needs scored candidates");

  Rng rng(cfg.seed);
  LocalizationResult best;
  double best_score = -1.0;
  bool found = false;

  auto consider = [&](std::int64_t t, const Triple& triple) {
    if (auto h = evaluate_triple(map, query, candidates, triple, cfg, cam)) {
      if (h->verification.score > best_score) {
        best_score = h->verification.score;
        best.pose = h->pose;
        best.score = h->verification.score;
        best.correspondences = std::move(h->verification.correspondences);
        best.best_found_at = t;
        found = true;
      }
    }
    best.iterations_run = t;
    if (monitor) monitor(t, best_score);
  };

  if (kind == SamplerKind::BruteForce || cfg.full_enumeration) {
    const std::vector<Triple> triples = enumeration_order(kind, candidates.sampling, rng);
    if (triples.empty())
      fail(ErrorCode::InsufficientCandidates, "no three candidates with distinct observations and landmarks");
    std::int64_t budget = static_cast<std::int64_t>(triples.size());
    if (kind != SamplerKind::BruteForce) budget = std::min<std::int64_t>(budget, cfg.iterations);
    for (std::int64_t t = 1; t <= budget; ++t) consider(t, triples[t - 1]);
  } else {
    Sampler sampler(kind, candidates.sampling, cfg);
    for (std::int64_t t = 1; t <= cfg.iterations; ++t) consider(t, sampler.draw(t, rng));
  }

  if (!found) fail(ErrorCode::NoSolution, "no sample produced a pose hypothesis");
  return best;
}

}  // namespace objreloc
