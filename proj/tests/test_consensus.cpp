#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "gtest/gtest.h"
#include "objreloc/consensus.hpp"
#include "objreloc/error.hpp"
#include "test_util.hpp"

namespace objreloc {
namespace {

using testing::Random;
using u128 = unsigned __int128;

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;  // sentinel: nothing thrown
}

// ---------------------------------------------------------------------------
// Schedule

struct Rational {
  u128 num;
  u128 den;
};

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

Rational reduce(Rational r) {
  const u128 g = gcd128(r.num, r.den);
  return {r.num / g, r.den / g};
}

// T_m = T_N prod (m-i)/(N-i), then T_{n+1} = T_n (n+1)/(n+1-m), ceiled.
std::vector<std::int64_t> rational_growth(int m, std::int64_t T_N, int N) {
  Rational t{static_cast<u128>(T_N), 1};
  for (int i = 0; i < m; ++i) t = reduce({t.num * static_cast<u128>(m - i), t.den * static_cast<u128>(N - i)});
  std::vector<std::int64_t> out;
  for (int n = m; n <= N; ++n) {
    out.push_back(static_cast<std::int64_t>((t.num + t.den - 1) / t.den));
    t = reduce({t.num * static_cast<u128>(n + 1), t.den * static_cast<u128>(n + 1 - m)});
  }
  return out;
}

TEST(ProsacGrowth, MatchesRationalOracle) {
  const auto g = prosac_growth(3, 200000, 20);
  ASSERT_EQ(g.size(), 18u);
  EXPECT_EQ(g, rational_growth(3, 200000, 20));
  EXPECT_EQ(g.back(), 200000);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(ProsacGrowth, OracleOnOtherShapes) {
  for (int m : {1, 2, 3, 4})
    for (int n : {m, m + 1, 7, 25, 60})
      for (std::int64_t tn : {1LL, 500LL, 200000LL, 123456789LL}) {
        if (n < m) continue;
        EXPECT_EQ(prosac_growth(m, tn, n), rational_growth(m, tn, n)) << m << " " << n << " " << tn;
      }
}

TEST(ProsacGrowth, DegeneratePool) { EXPECT_EQ(prosac_growth(3, 200000, 3), (std::vector<std::int64_t>{200000})); }

TEST(ProsacGrowth, LinearForSingleSample) {
  const auto g = prosac_growth(1, 10000, 10);
  ASSERT_EQ(g.size(), 10u);
  for (int n = 1; n < 10; ++n) {
    EXPECT_EQ(g[n - 1], 1000 * n);
    EXPECT_DOUBLE_EQ(static_cast<double>(g[n]) / static_cast<double>(g[n - 1]), (n + 1.0) / n);
  }
}

TEST(ProsacGrowth, RejectsBadShape) {
  EXPECT_EQ(code_of([] { prosac_growth(3, 100, 2); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { prosac_growth(0, 100, 5); }), ErrorCode::InvalidArgument);
}

TEST(ProsacSchedule, PoolGrowsToAllCandidates) {
  const ProsacSchedule s(3, 200000, 20);
  const auto& g = s.growth();
  int prev = 0;
  for (std::int64_t t = 1; t <= 210000; t += 7) {
    const int n = s.pool_size(t);
    EXPECT_GE(n, prev);
    EXPECT_GE(n, 3);
    EXPECT_LE(n, 20);
    prev = n;
  }
  EXPECT_EQ(s.pool_size(1), 3);
  EXPECT_EQ(s.pool_size(g.back()), 20);
  EXPECT_EQ(s.pool_size(g.back() + 1), 20);
  EXPECT_EQ(s.pool_size(10'000'000), 20);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(s.pool_size(g[i]), 3 + static_cast<int>(i));
    if (g[i] > 1 && (i == 0 || g[i - 1] < g[i] - 1)) {
      EXPECT_EQ(s.pool_size(g[i] - 1), 3 + static_cast<int>(i));
    }
  }
  EXPECT_TRUE(s.forces_newest(g.back()));
  EXPECT_FALSE(s.forces_newest(g.back() + 1));
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<CorrespondenceCandidate> grid_candidates(int n_obs, const std::vector<int>& landmarks) {
  std::vector<CorrespondenceCandidate> c;
  double score = 1.0;
  for (int j = 0; j < n_obs; ++j) {
    int rank = 1;
    for (int l : landmarks) {
      c.push_back({j, l, score, rank++});
      score -= 0.01;
    }
  }
  return c;
}

TEST(DrawSample, ThreeCandidatesAreForced) {
  const std::vector<CorrespondenceCandidate> c{{0, 4, 0.9, 1}, {1, 5, 0.8, 1}, {2, 6, 0.7, 1}};
  for (auto kind : {SamplerKind::BruteForce, SamplerKind::Ransac, SamplerKind::Prosac, SamplerKind::BProsac}) {
    Rng rng(1);
    for (std::int64_t t = 1; t <= 20; ++t) {
      const auto s = draw_sample(kind, c, t, rng);
      std::vector<int> obs{s[0].obs_index, s[1].obs_index, s[2].obs_index};
      std::sort(obs.begin(), obs.end());
      EXPECT_EQ(obs, (std::vector<int>{0, 1, 2}));
    }
  }
}

TEST(DrawSample, InsufficientCandidates) {
  Rng rng(1);
  const std::vector<CorrespondenceCandidate> two{{0, 0, 0.9, 1}, {1, 1, 0.8, 1}};
  EXPECT_EQ(code_of([&] { draw_sample(SamplerKind::Ransac, two, 1, rng); }), ErrorCode::InsufficientCandidates);
  // Four candidates but only two observations.
  const auto narrow = grid_candidates(2, {0, 1});
  EXPECT_EQ(code_of([&] { draw_sample(SamplerKind::Ransac, narrow, 1, rng); }), ErrorCode::InsufficientCandidates);
}

TEST(DrawSample, AlwaysDistinct) {
  Random rnd(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CorrespondenceCandidate> c;
    const int n = rnd.integer(6, 30);
    for (int i = 0; i < n; ++i) c.push_back({rnd.integer(0, 5), rnd.integer(0, 8), 1.0 - 0.01 * i, 1});
    std::sort(c.begin(), c.end(), [](auto& a, auto& b) {
      return std::pair(a.obs_index, a.landmark_index) < std::pair(b.obs_index, b.landmark_index);
    });
    c.erase(std::unique(c.begin(), c.end(),
                        [](auto& a, auto& b) { return a.obs_index == b.obs_index && a.landmark_index == b.landmark_index; }),
            c.end());
    if (enumerate_valid_triples(c).empty()) continue;
    for (auto kind : {SamplerKind::Ransac, SamplerKind::Prosac}) {
      ConsensusConfig cfg;
      cfg.prosac_T_N = 2000;
      Sampler sampler(kind, c, cfg);
      Rng rng(static_cast<std::uint64_t>(trial));
      for (std::int64_t t = 1; t <= 300; ++t) {
        const Triple s = sampler.draw(t, rng);
        EXPECT_TRUE(is_valid_triple(c, s[0], s[1], s[2]));
        EXPECT_LT(s[2], sampler.pool_size(t));
      }
    }
  }
}

TEST(DrawSample, ProsacStartsInTopPrefix) {
  const auto c = grid_candidates(6, {10, 11, 12});  // 18 candidates sorted by score
  ConsensusConfig cfg;
  Sampler sampler(SamplerKind::Prosac, c, cfg);
  // Positions 0..2 share observation 0; the first valid triple is {1, 5, 6}.
  const int pool = sampler.pool_size(1);
  EXPECT_EQ(pool, sampler.min_pool());
  EXPECT_EQ(pool, 7);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Triple s = sampler.draw(1, rng);
    EXPECT_LT(s[2], pool);
    EXPECT_EQ(s[2], pool - 1);  // newest member forced in
  }
}

TEST(DrawSample, ProsacPoolIsTopOfSortedList) {
  std::vector<CorrespondenceCandidate> c;
  for (int i = 0; i < 20; ++i) c.push_back({i, i, 1.0 - 0.01 * i, 1});
  ConsensusConfig cfg;
  Sampler sampler(SamplerKind::Prosac, c, cfg);
  Rng rng(9);
  EXPECT_EQ(sampler.pool_size(1), 3);
  const Triple first = sampler.draw(1, rng);
  EXPECT_EQ(first, (Triple{0, 1, 2}));
}

TEST(DrawSample, RansacIsUniformOverValidTriples) {
  // 4 observations x the same 3 landmarks: 12 candidates, 24 valid triples.
  const auto c = grid_candidates(4, {0, 1, 2});
  const auto valid = enumerate_valid_triples(c);
  ASSERT_EQ(valid.size(), 24u);
  std::map<Triple, int> counts;
  for (const auto& t : valid) counts[t] = 0;
  ConsensusConfig cfg;
  Sampler sampler(SamplerKind::Ransac, c, cfg);
  Rng rng(2468);
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const Triple s = sampler.draw(i + 1, rng);
    ASSERT_TRUE(counts.count(s));
    ++counts[s];
  }
  const double p = 1.0 / static_cast<double>(valid.size());
  const double mean = kDraws * p;
  const double sigma = std::sqrt(kDraws * p * (1.0 - p));
  for (const auto& [t, n] : counts) EXPECT_LT(std::abs(n - mean), 3.0 * sigma) << t[0] << t[1] << t[2];
}

TEST(EnumerateTriples, CountMatchesCombinatorialOracle) {
  Random rnd(4);
  for (int trial = 0; trial < 20; ++trial) {
    // N_o = 4, k = 3 over a small map so landmarks collide.
    std::vector<CorrespondenceCandidate> c;
    for (int j = 0; j < 4; ++j) {
      std::vector<int> lms(6);
      std::iota(lms.begin(), lms.end(), 0);
      std::shuffle(lms.begin(), lms.end(), rnd.engine());
      for (int r = 0; r < 3; ++r) c.push_back({j, lms[r], 0.0, r + 1});
    }
    std::size_t oracle = 0;
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        for (std::size_t d = b + 1; d < c.size(); ++d) {
          const std::set<int> o{c[a].obs_index, c[b].obs_index, c[d].obs_index};
          const std::set<int> l{c[a].landmark_index, c[b].landmark_index, c[d].landmark_index};
          oracle += (o.size() == 3 && l.size() == 3) ? 1 : 0;
        }
    EXPECT_EQ(enumerate_valid_triples(c).size(), oracle);
    EXPECT_LE(oracle, 220u);
  }
}

TEST(Seeds, DeriveSeedIsKeyed) {
  EXPECT_EQ(derive_seed(42, {1, 2}), derive_seed(42, {1, 2}));
  EXPECT_NE(derive_seed(42, {1, 2}), derive_seed(42, {2, 1}));
  EXPECT_NE(derive_seed(42, {1}), derive_seed(43, {1}));
  Rng rng(0);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(rng, 7), 7u);
}

// ---------------------------------------------------------------------------
// Scenes

struct Scene {
  ObjectMap map;
  Query query;
  Camera cam{500.0, 500.0, 320.0, 240.0, 640, 480};
  PoseWC gt;
  std::vector<int> truth;  // observation -> landmark
};

// Spheres inside a narrow cone around the optical axis of `gt`, one exact box
// per landmark (optionally perturbed), observations shuffled.
Scene make_scene(Random& rnd, int n_landmarks, double r_lo, double r_hi, double box_noise_px) {
  Scene s;
  s.gt = PoseWC(rnd.rotation(), rnd.vec3(-1.0, 1.0));
  std::vector<Observation> obs;
  for (int i = 0; i < n_landmarks; ++i) {
    Landmark lm;
    Ellipse img;
    while (true) {
      const double z = rnd.uniform(3.0, 8.0);
      const double half = std::tan(0.25);
      const Eigen::Vector3d cam_pt(rnd.uniform(-half, half) * z, rnd.uniform(-half, half) * z, z);
      const double r = rnd.uniform(r_lo, r_hi);
      lm.ellipsoid = Ellipsoid(s.gt.rotation.conjugate() * (cam_pt - s.gt.translation), {r, r, r});
      lm.quadric = ellipsoid_to_dual_quadric(lm.ellipsoid);
      img = dual_conic_to_ellipse(project_dual_quadric(lm.quadric, s.gt, s.cam));
      bool clear = true;
      for (const auto& o : obs) clear = clear && (bbox_to_ellipse(o.bbox).center - img.center).norm() > 20.0;
      if (clear) break;
    }
    lm.id = i;
    lm.embedding_ref = i;
    s.map.landmarks.push_back(lm);
    BBox b = ellipse_bbox(img);
    b.xmin += rnd.normal(box_noise_px);
    b.ymin += rnd.normal(box_noise_px);
    b.xmax += rnd.normal(box_noise_px);
    b.ymax += rnd.normal(box_noise_px);
    Observation o;
    o.bbox = b;
    obs.push_back(o);
  }
  std::vector<int> order(static_cast<std::size_t>(n_landmarks));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rnd.engine());
  for (int l : order) {
    s.query.observations.push_back(obs[static_cast<std::size_t>(l)]);
    s.truth.push_back(l);
  }
  s.query.query_id = "q";
  return s;
}

// k candidates per observation: the true landmark at a random rank among k,
// other ranks drawn from the rest of the map. Scores descend with rank.
CandidateSet make_candidates(Random& rnd, const Scene& s, int k, bool true_first) {
  CandidateSet set;
  const int n_lm = static_cast<int>(s.map.landmarks.size());
  for (std::size_t j = 0; j < s.truth.size(); ++j) {
    std::vector<int> others;
    for (int l = 0; l < n_lm; ++l)
      if (l != s.truth[j]) others.push_back(l);
    std::shuffle(others.begin(), others.end(), rnd.engine());
    std::vector<int> picks(others.begin(), others.begin() + (k - 1));
    const int slot = true_first ? 0 : rnd.integer(0, k - 1);
    picks.insert(picks.begin() + slot, s.truth[j]);
    double score = rnd.uniform(0.6, 0.95);
    for (int r = 0; r < k; ++r) {
      set.sampling.push_back({static_cast<int>(j), picks[static_cast<std::size_t>(r)], score, r + 1});
      score -= rnd.uniform(0.01, 0.1);
    }
    set.verification.push_back(picks);
  }
  return sort_by_score(std::move(set));
}

TEST(VerifyPose, GroundTruthAcceptsTrueLandmarks) {
  Random rnd(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Scene s = make_scene(rnd, 6, 0.1, 0.4, 0.0);
    std::vector<std::vector<int>> verification;
    for (std::size_t j = 0; j < s.truth.size(); ++j) verification.push_back({s.truth[j]});
    const auto v = verify_pose(s.gt, s.map, s.query, verification, s.cam, ConsensusConfig{});
    ASSERT_EQ(v.correspondences.size(), s.truth.size());
    double sum = 0.0;
    for (const auto& c : v.correspondences) {
      EXPECT_EQ(c.landmark_index, s.truth[static_cast<std::size_t>(c.obs_index)]);
      EXPECT_GE(c.iou, 0.95);
      sum += c.iou;
    }
    EXPECT_NEAR(v.score, sum, 1e-9);
    EXPECT_GT(v.score, 0.95 * static_cast<double>(s.truth.size()));
  }
}

TEST(VerifyPose, PicksBestAmongCandidates) {
  Random rnd(22);
  const Scene s = make_scene(rnd, 6, 0.1, 0.4, 0.0);
  std::vector<std::vector<int>> all(s.truth.size(), std::vector<int>{0, 1, 2, 3, 4, 5});
  const auto v = verify_pose(s.gt, s.map, s.query, all, s.cam, ConsensusConfig{});
  ASSERT_EQ(v.correspondences.size(), s.truth.size());
  for (const auto& c : v.correspondences) EXPECT_EQ(c.landmark_index, s.truth[static_cast<std::size_t>(c.obs_index)]);
}

TEST(VerifyPose, LookingAwayScoresZero) {
  Random rnd(23);
  const Scene s = make_scene(rnd, 6, 0.1, 0.4, 0.0);
  const Eigen::Quaterniond flip(Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitY()));
  const PoseWC away = PoseWC::from_camera_to_world(s.gt.rotation.conjugate() * flip, s.gt.camera_center());
  std::vector<std::vector<int>> all(s.truth.size(), std::vector<int>{0, 1, 2, 3, 4, 5});
  const auto v = verify_pose(away, s.map, s.query, all, s.cam, ConsensusConfig{});
  EXPECT_EQ(v.score, 0.0);
  EXPECT_TRUE(v.correspondences.empty());
}

TEST(VerifyPose, ThresholdNearOneRejectsImperfectBoxes) {
  Random rnd(24);
  const Scene s = make_scene(rnd, 6, 0.1, 0.4, 2.0);
  std::vector<std::vector<int>> verification;
  for (std::size_t j = 0; j < s.truth.size(); ++j) verification.push_back({s.truth[j]});
  ConsensusConfig cfg;
  cfg.iou_threshold = 1.0 - 1e-9;
  const auto v = verify_pose(s.gt, s.map, s.query, verification, s.cam, cfg);
  EXPECT_EQ(v.score, 0.0);
  EXPECT_TRUE(v.correspondences.empty());
}

TEST(VerifyPose, EmptyVerificationScoresZero) {
  Random rnd(25);
  const Scene s = make_scene(rnd, 4, 0.1, 0.4, 0.0);
  const auto v = verify_pose(s.gt, s.map, s.query, std::vector<std::vector<int>>(4), s.cam, ConsensusConfig{});
  EXPECT_EQ(v.score, 0.0);
}

TEST(Localize, BruteForceNoiseFreeTinySpheres) {
  // Tiny radii make the box center coincide with the projected center, so the
  // P3P input is exact.
  Random rnd(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Scene s = make_scene(rnd, 5, 0.005, 0.01, 0.0);
    Random crnd(100 + static_cast<std::uint64_t>(trial));
    const CandidateSet set = make_candidates(crnd, s, 3, false);
    const auto r = localize(s.map, s.query, set, SamplerKind::BruteForce, ConsensusConfig{}, s.cam);
    EXPECT_LT((r.pose.camera_center() - s.gt.camera_center()).norm(), 1e-4);
    EXPECT_EQ(r.iterations_run, static_cast<std::int64_t>(enumerate_valid_triples(set.sampling).size()));
    EXPECT_LE(r.best_found_at, r.iterations_run);
  }
}

TEST(Localize, ResultInvariants) {
  Random rnd(32);
  const Scene s = make_scene(rnd, 8, 0.1, 0.4, 1.0);
  // True landmarks ranked first: the score order is informative, as PROSAC assumes.
  const CandidateSet set = make_candidates(rnd, s, 3, true);
  for (auto kind : {SamplerKind::Ransac, SamplerKind::Prosac}) {
    ConsensusConfig cfg;
    cfg.iterations = 200;
    const auto r = localize(s.map, s.query, set, kind, cfg, s.cam);
    EXPECT_EQ(r.iterations_run, 200);
    EXPECT_GE(r.best_found_at, 1);
    EXPECT_LE(r.best_found_at, r.iterations_run);
    double sum = 0.0;
    for (const auto& c : r.correspondences) sum += c.iou;
    EXPECT_NEAR(r.score, sum, 1e-9);
    EXPECT_LT((r.pose.camera_center() - s.gt.camera_center()).norm(), 0.2);
  }
}

TEST(Localize, DeterministicForEverySampler) {
  Random rnd(33);
  const Scene s = make_scene(rnd, 8, 0.1, 0.4, 2.0);
  const CandidateSet set = make_candidates(rnd, s, 3, false);
  CandidateSet balanced = sort_balanced(set);
  for (auto kind : {SamplerKind::BruteForce, SamplerKind::Ransac, SamplerKind::Prosac, SamplerKind::BProsac}) {
    ConsensusConfig cfg;
    cfg.seed = 77;
    cfg.iterations = 150;
    const CandidateSet& c = kind == SamplerKind::BProsac ? balanced : set;
    const auto a = localize(s.map, s.query, c, kind, cfg, s.cam);
    const auto b = localize(s.map, s.query, c, kind, cfg, s.cam);
    EXPECT_EQ(a.pose.rotation.coeffs(), b.pose.rotation.coeffs());
    EXPECT_EQ(a.pose.translation, b.pose.translation);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.correspondences, b.correspondences);
    EXPECT_EQ(a.iterations_run, b.iterations_run);
    EXPECT_EQ(a.best_found_at, b.best_found_at);
  }
}

TEST(Localize, MonitorSeesNonDecreasingBest) {
  Random rnd(34);
  const Scene s = make_scene(rnd, 8, 0.1, 0.4, 2.0);
  const CandidateSet set = make_candidates(rnd, s, 3, false);
  for (auto kind : {SamplerKind::BruteForce, SamplerKind::Ransac, SamplerKind::Prosac}) {
    std::int64_t last_t = 0;
    double last = -std::numeric_limits<double>::infinity();
    ConsensusConfig cfg;
    cfg.iterations = 300;
    const auto r = localize(s.map, s.query, set, kind, cfg, s.cam, [&](std::int64_t t, double best) {
      EXPECT_EQ(t, last_t + 1);
      EXPECT_GE(best, last);
      last_t = t;
      last = best;
    });
    EXPECT_EQ(last_t, r.iterations_run);
    EXPECT_EQ(last, r.score);
  }
}

TEST(Localize, BruteForceDominatesAndFullEnumerationMatches) {
  Random rnd(35);
  int instances = 0;
  while (instances < 8) {
    const Scene s = make_scene(rnd, 6, 0.1, 0.4, 3.0);
    const CandidateSet set = make_candidates(rnd, s, 3, false);
    const auto triples = enumerate_valid_triples(set.sampling);
    if (triples.size() > 300) continue;
    ++instances;
    ConsensusConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(instances);
    const auto bf = localize(s.map, s.query, set, SamplerKind::BruteForce, cfg, s.cam);
    const CandidateSet balanced = sort_balanced(set);
    for (auto kind : {SamplerKind::Ransac, SamplerKind::Prosac, SamplerKind::BProsac}) {
      const CandidateSet& c = kind == SamplerKind::BProsac ? balanced : set;
      ConsensusConfig sampled = cfg;
      sampled.iterations = 100;
      const auto r = localize(s.map, s.query, c, kind, sampled, s.cam);
      EXPECT_GE(bf.score, r.score);

      ConsensusConfig full = cfg;
      full.full_enumeration = true;
      full.iterations = static_cast<int>(triples.size());
      const auto e = localize(s.map, s.query, c, kind, full, s.cam);
      EXPECT_EQ(e.iterations_run, static_cast<std::int64_t>(triples.size()));
      EXPECT_EQ(e.score, bf.score) << to_string(kind);
    }
  }
}

TEST(Localize, CollinearLandmarksGiveNoSolution) {
  Scene s;
  const Eigen::Vector3d pts[3] = {{0, 0, 5}, {1, 0, 5}, {2, 0, 5}};
  for (int i = 0; i < 3; ++i) {
    Landmark lm;
    lm.id = i;
    lm.ellipsoid = Ellipsoid(pts[i], {0.1, 0.1, 0.1});
    lm.quadric = ellipsoid_to_dual_quadric(lm.ellipsoid);
    s.map.landmarks.push_back(lm);
    Observation o;
    const Ellipse img = dual_conic_to_ellipse(project_dual_quadric(lm.quadric, PoseWC(), s.cam));
    o.bbox = ellipse_bbox(img);
    s.query.observations.push_back(o);
  }
  CandidateSet set;
  for (int i = 0; i < 3; ++i) {
    set.sampling.push_back({i, i, 0.9 - 0.1 * i, 1});
    set.verification.push_back({i});
  }
  for (auto kind : {SamplerKind::BruteForce, SamplerKind::Ransac, SamplerKind::Prosac}) {
    EXPECT_EQ(code_of([&] { localize(s.map, s.query, set, kind, ConsensusConfig{}, s.cam); }), ErrorCode::NoSolution);
  }
}

TEST(Localize, RejectsUnscoredForProsac) {
  Random rnd(36);
  const Scene s = make_scene(rnd, 4, 0.1, 0.4, 0.0);
  std::vector<int> classes(4, 0);
  const CandidateSet set = generate_class_candidates(classes, classes);
  EXPECT_EQ(code_of([&] { localize(s.map, s.query, set, SamplerKind::Prosac, ConsensusConfig{}, s.cam); }),
            ErrorCode::UnscoredCandidate);
  // The same class candidates are fine for RANSAC.
  ConsensusConfig cfg;
  cfg.iterations = 50;
  EXPECT_NO_THROW(localize(s.map, s.query, set, SamplerKind::Ransac, cfg, s.cam));
}

TEST(ConsensusConfig, Validation) {
  ConsensusConfig cfg;
  cfg.iterations = 0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidArgument);
  cfg = {};
  cfg.iou_threshold = 1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidArgument);
  cfg = {};
  cfg.prosac_T_N = 10;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidArgument);
}

TEST(SamplerKind, ParseRoundTrip) {
  for (auto k : {SamplerKind::BruteForce, SamplerKind::Ransac, SamplerKind::Prosac, SamplerKind::BProsac}) {
    EXPECT_EQ(parse_sampler(to_string(k)), k);
  }
  EXPECT_EQ(code_of([] { parse_sampler("lo-ransac"); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace objreloc
