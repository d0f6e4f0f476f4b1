#include "objreloc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <thread>

#include "objreloc/error.hpp"

namespace objreloc {

namespace {

constexpr int kMaxSceneAttempts = 100;
constexpr int kMinVisible = 4;
constexpr double kNearPlane = 0.1;

// Floating-point draws built on Rng so scenes do not depend on the standard
// library's distribution implementations.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double gaussian(Rng& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = uniform01(rng);
  while (p > limit) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

std::vector<float> random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = gaussian(rng);
  } while (v.norm() == 0.0);
  v.normalize();
  std::vector<float> out(dim);
  for (int i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

std::vector<float> noisy_unit(Rng& rng, std::span<const float> base, double sigma) {
  Eigen::VectorXd v(base.size());
  do {
    for (std::size_t i = 0; i < base.size(); ++i) v[i] = base[i] + sigma * gaussian(rng);
  } while (v.norm() == 0.0);
  v.normalize();
  std::vector<float> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

std::string stamp_string(double t) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), t, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

/// World-to-camera pose of a camera at `eye` looking at `target`, z up.
PoseWC look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d R_wc;
  R_wc << right, down, forward;
  return PoseWC::from_camera_to_world(Eigen::Quaterniond(R_wc), eye);
}

std::optional<SyntheticScene> try_generate(const SynthConfig& cfg, Rng& rng) {
  SyntheticScene scene;
  scene.config = cfg;
  const double half = 0.5 * cfg.room_extent;
  const Camera& cam = cfg.camera;

  // Landmarks and their text embeddings (row i belongs to landmark i).
  std::vector<float> text;
  for (int i = 0; i < cfg.n_landmarks; ++i) {
    Landmark l;
    l.id = i;
    const Eigen::Vector3d center(uniform(rng, -half, half), uniform(rng, -half, half), uniform(rng, 0.2, 2.0));
    const Eigen::Vector3d radii(uniform(rng, 0.05, 0.5), uniform(rng, 0.05, 0.5), uniform(rng, 0.05, 0.5));
    const Eigen::Quaterniond yaw(Eigen::AngleAxisd(uniform(rng, -std::numbers::pi, std::numbers::pi),
                                                   Eigen::Vector3d::UnitZ()));
    l.ellipsoid = Ellipsoid(center, radii, yaw);
    l.quadric = ellipsoid_to_dual_quadric(l.ellipsoid);
    l.class_id = static_cast<int>(uniform_index(rng, cfg.n_classes));
    l.class_name = "class_" + std::to_string(l.class_id);
    l.label = l.class_name + " #" + std::to_string(i);
    l.embedding_ref = i;
    const auto e = random_unit(rng, cfg.embed_dim);
    text.insert(text.end(), e.begin(), e.end());
    scene.map.landmarks.push_back(std::move(l));
  }
  scene.map.metadata = {"synthetic-" + std::to_string(cfg.seed), cfg.room_extent};
  scene.map.text_embeddings = EmbeddingStore(cfg.embed_dim, text);

  const double ring = 0.45 * cfg.room_extent;
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double ref_area = 0.05 * cam.width * cam.height;
  std::vector<float> image;
  int n_image = 0;

  for (int q = 0; q < cfg.n_queries; ++q) {
    const double a = phase + 2.0 * std::numbers::pi * q / cfg.n_queries;
    const Eigen::Vector3d eye(ring * std::cos(a), ring * std::sin(a), uniform(rng, 1.1, 1.5));
    const Eigen::Vector3d target(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, 0.6, 1.0));
    const PoseWC pose = look_at(eye, target);

    struct Det {
      Observation obs;
      std::vector<float> embedding;
      int truth;
    };
    std::vector<Det> dets;
    for (const int i : unoccluded_landmarks(scene.map, pose, cam)) {
      if (uniform01(rng) < cfg.dropout_rate) continue;
      BBox box = ellipse_bbox(*visible_projection(scene.map.landmarks[i].ellipsoid, pose, cam));
      box.xmin += cfg.detector_noise_px * gaussian(rng);
      box.ymin += cfg.detector_noise_px * gaussian(rng);
      box.xmax += cfg.detector_noise_px * gaussian(rng);
      box.ymax += cfg.detector_noise_px * gaussian(rng);
      box.xmin = std::clamp(box.xmin, 0.0, cam.width - 2.0);
      box.ymin = std::clamp(box.ymin, 0.0, cam.height - 2.0);
      box.xmax = std::clamp(box.xmax, box.xmin + 1.0, static_cast<double>(cam.width));
      box.ymax = std::clamp(box.ymax, box.ymin + 1.0, static_cast<double>(cam.height));
      double sigma = cfg.embed_noise_sigma;
      if (cfg.scale_sigma_by_area) sigma *= std::clamp(std::sqrt(ref_area / box.area()), 1.0, 4.0);
      Det d;
      d.obs = {box, scene.map.landmarks[i].class_id, uniform(rng, 0.5, 1.0), 0};
      d.embedding = noisy_unit(rng, scene.map.text_embeddings.raw_row(i), sigma);
      d.truth = i;
      dets.push_back(std::move(d));
    }
    if (static_cast<int>(dets.size()) < kMinVisible) return std::nullopt;

    const int n_clutter = poisson(rng, cfg.clutter_rate);
    for (int c = 0; c < n_clutter; ++c) {
      const double w = uniform(rng, 20.0, 160.0);
      const double h = uniform(rng, 20.0, 160.0);
      const double x = uniform(rng, 0.0, cam.width - w);
      const double y = uniform(rng, 0.0, cam.height - h);
      Det d;
      d.obs = {{x, y, x + w, y + h}, static_cast<int>(uniform_index(rng, cfg.n_classes)), uniform(rng, 0.3, 1.0), 0};
      d.embedding = random_unit(rng, cfg.embed_dim);
      d.truth = -1;
      dets.push_back(std::move(d));
    }
    for (std::size_t i = dets.size(); i > 1; --i) std::swap(dets[i - 1], dets[uniform_index(rng, i)]);

    Query query;
    const double t = 1.0 + q;
    query.query_id = stamp_string(t);
    query.timestamp = t;
    query.image_width = cam.width;
    query.image_height = cam.height;
    std::vector<int> truth;
    for (Det& d : dets) {
      d.obs.embedding_ref = n_image++;
      image.insert(image.end(), d.embedding.begin(), d.embedding.end());
      query.observations.push_back(d.obs);
      truth.push_back(d.truth);
    }
    scene.detections.queries.push_back(std::move(query));
    scene.truth.push_back(std::move(truth));

    TrajectoryEntry gt;
    gt.stamp = stamp_string(t);
    gt.time = t;
    gt.position = eye;
    gt.orientation = pose.rotation.conjugate();
    scene.groundtruth.entries.push_back(gt);
  }
  scene.detections.image_embeddings = EmbeddingStore(cfg.embed_dim, image);
  return scene;
}

double finite_mean(std::span<const double> v) {
  double sum = 0.0;
  int n = 0;
  for (const double x : v)
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_landmarks < 4) fail(ErrorCode::InvalidArgument, "n_landmarks must be at least 4");
  if (n_classes < 1) fail(ErrorCode::InvalidArgument, "n_classes must be positive");
  if (n_queries < 1) fail(ErrorCode::InvalidArgument, "n_queries must be positive");
  if (!(room_extent > 0.0)) fail(ErrorCode::InvalidArgument, "room_extent must be positive");
  if (embed_dim < 1) fail(ErrorCode::InvalidArgument, "embed_dim must be positive");
  if (!(embed_noise_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "embed_noise_sigma must be non-negative");
  if (!(detector_noise_px >= 0.0)) fail(ErrorCode::InvalidArgument, "detector_noise_px must be non-negative");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail(ErrorCode::InvalidArgument, "dropout_rate must be in [0, 1)");
  if (!(clutter_rate >= 0.0)) fail(ErrorCode::InvalidArgument, "clutter_rate must be non-negative");
  camera.validate();
}

std::optional<Ellipse> visible_projection(const Ellipsoid& e, const PoseWC& pose, const Camera& cam) {
  if (pose.apply(e.center).z() - e.radii.maxCoeff() < kNearPlane) return std::nullopt;
  Ellipse img;
  try {
    img = dual_conic_to_ellipse(project_dual_quadric(ellipsoid_to_dual_quadric(e), pose, cam));
  } catch (const Error&) {
    return std::nullopt;
  }
  const BBox box = ellipse_bbox(img);
  if (box.xmin < 0.0 || box.ymin < 0.0 || box.xmax > cam.width || box.ymax > cam.height) return std::nullopt;
  return img;
}

std::vector<int> unoccluded_landmarks(const ObjectMap& map, const PoseWC& pose, const Camera& cam) {
  struct Seen {
    int index;
    double depth;
    Ellipse outline;
  };
  std::vector<Seen> seen;
  for (int i = 0; i < static_cast<int>(map.landmarks.size()); ++i) {
    const Ellipsoid& e = map.landmarks[i].ellipsoid;
    if (const auto img = visible_projection(e, pose, cam)) seen.push_back({i, pose.apply(e.center).z(), *img});
  }
  auto covers = [](const Ellipse& el, const Eigen::Vector2d& p) {
    const Eigen::Vector2d d = p - el.center;
    const double c = std::cos(el.angle);
    const double s = std::sin(el.angle);
    const double u = (c * d.x() + s * d.y()) / el.semi_axes.x();
    const double v = (-s * d.x() + c * d.y()) / el.semi_axes.y();
    return u * u + v * v <= 1.0;
  };
  std::vector<int> out;
  for (const Seen& a : seen) {
    bool hidden = false;
    for (const Seen& b : seen)
      if (b.depth < a.depth && covers(b.outline, a.outline.center)) {
        hidden = true;
        break;
      }
    if (!hidden) out.push_back(a.index);
  }
  return out;
}

SyntheticScene generate_scene(const SynthConfig& cfg) {
  cfg.validate();
  for (int attempt = 0; attempt < kMaxSceneAttempts; ++attempt) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(attempt)}));
    if (auto scene = try_generate(cfg, rng)) {
      scene->attempts = attempt + 1;
      return std::move(*scene);
    }
  }
  fail(ErrorCode::InfeasibleScene, "every query needs " + std::to_string(kMinVisible) +
                                       " detected landmarks; " + std::to_string(kMaxSceneAttempts) +
                                       " attempts failed");
}

void write_scene(const SyntheticScene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  save_map(scene.map, dir / SceneFiles::map, dir / SceneFiles::text_embeddings);
  save_detections(scene.detections, dir / SceneFiles::detections, dir / SceneFiles::image_embeddings);
  save_trajectory(scene.groundtruth, dir / SceneFiles::groundtruth);
  save_camera(scene.config.camera, dir / SceneFiles::camera);
}

BenchScene load_scene(const fs::path& dir, double confidence_floor) {
  BenchScene s;
  s.map = load_map(dir / SceneFiles::map);
  s.detections = load_detections(dir / SceneFiles::detections, confidence_floor);
  s.camera = load_camera(dir / SceneFiles::camera);
  s.groundtruth = load_trajectory(dir / SceneFiles::groundtruth);
  return s;
}

BenchScene to_bench_scene(const SyntheticScene& scene) {
  return {scene.map, scene.detections, scene.config.camera, scene.groundtruth};
}

// ---------------------------------------------------------------------------
// Grid cells and candidates

std::string GridCell::name() const {
  return std::string(to_string(matching)) + "_" + std::string(to_string(algorithm));
}

void validate_cell(const GridCell& cell) {
  if (cell.matching == MatchingType::Class && requires_scores(cell.algorithm))
    fail(ErrorCode::UnscoredCandidate,
         cell.name() + ": " + std::string(to_string(cell.algorithm)) + " needs scored candidates; class matching has none");
}

GridCell parse_cell(std::string_view name) {
  const auto sep = name.find('_');
  if (sep == std::string_view::npos)
    fail(ErrorCode::InvalidArgument, "method '" + std::string(name) + "' is not {matching}_{algorithm}");
  return {parse_matching(name.substr(0, sep)), parse_sampler(name.substr(sep + 1))};
}

std::vector<GridCell> parse_grid(std::string_view names) {
  std::vector<GridCell> grid;
  while (!names.empty()) {
    const auto comma = names.find(',');
    const std::string_view item = names.substr(0, comma);
    if (!item.empty()) grid.push_back(parse_cell(item));
    if (comma == std::string_view::npos) break;
    names.remove_prefix(comma + 1);
  }
  return grid;
}

std::vector<GridCell> default_grid() {
  std::vector<GridCell> grid;
  for (const MatchingType m : {MatchingType::Class, MatchingType::Clip, MatchingType::Hybrid})
    for (const SamplerKind a : {SamplerKind::Ransac, SamplerKind::Prosac, SamplerKind::BProsac}) {
      const GridCell cell{m, a};
      if (m == MatchingType::Class && requires_scores(a)) continue;
      grid.push_back(cell);
    }
  return grid;
}

CandidateSet build_candidates(const ObjectMap& map, const Query& query, const EmbeddingStore& image_embeddings,
                              const GridCell& cell, const LocalizeOptions& opts) {
  validate_cell(cell);
  if (query.observations.size() < 3)
    fail(ErrorCode::InsufficientCandidates,
         "query '" + query.query_id + "' has " + std::to_string(query.observations.size()) + " observations");

  CandidateSet set;
  switch (cell.matching) {
    case MatchingType::Class:
      set = generate_class_candidates(map.class_ids(), query.class_ids());
      break;
    case MatchingType::Clip:
      set = generate_clip_candidates(map.landmark_embeddings(), query.embeddings(image_embeddings), opts.k);
      break;
    case MatchingType::Hybrid:
      set = generate_hybrid_candidates(map.landmark_embeddings(), query.embeddings(image_embeddings), opts.k,
                                       map.class_ids(), query.class_ids());
      break;
  }
  drop_small_observations(set, query.box_areas(), opts.min_bbox_area);
  if (cell.algorithm == SamplerKind::Prosac) return sort_by_score(std::move(set));
  if (cell.algorithm == SamplerKind::BProsac) return sort_balanced(std::move(set));
  return set;
}

LocalizationResult localize_query(const BenchScene& scene, const Query& query, const GridCell& cell,
                                  const LocalizeOptions& opts) {
  const CandidateSet set = build_candidates(scene.map, query, scene.detections.image_embeddings, cell, opts);
  return localize(scene.map, query, set, cell.algorithm, opts.consensus, scene.camera);
}

std::uint64_t trial_seed(std::uint64_t master, const GridCell& cell, int trial, int query_index) {
  return derive_seed(master, {static_cast<std::uint64_t>(cell.matching), static_cast<std::uint64_t>(cell.algorithm),
                              static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(query_index)});
}

// ---------------------------------------------------------------------------
// Metrics

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double success_rate(std::span<const double> errors, double threshold) {
  if (errors.empty()) fail(ErrorCode::EmptyInput, "success rate of an empty error list");
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidArgument, "success threshold must be positive");
  const auto hits = std::count_if(errors.begin(), errors.end(), [&](double e) { return e < threshold; });
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

CellSummary aggregate(const GridCell& cell, std::span<const RawRow> rows, double success_threshold,
                      std::span<const double> thresholds) {
  CellSummary s;
  s.cell = cell;
  const std::string method = cell.name();
  std::map<int, std::vector<const RawRow*>> by_trial;
  for (const RawRow& r : rows)
    if (r.method == method) by_trial[r.trial].push_back(&r);

  s.trials = static_cast<int>(by_trial.size());
  s.queries = by_trial.empty() ? 0 : static_cast<int>(by_trial.begin()->second.size());

  std::vector<double> rates;
  std::vector<double> error_means;
  std::vector<double> wall_means;
  std::vector<double> best_at;
  std::vector<std::vector<double>> curve(thresholds.size());
  for (const auto& [trial, trial_rows] : by_trial) {
    std::vector<double> errors;
    std::vector<double> walls;
    for (const RawRow* r : trial_rows) {
      errors.push_back(r->translation_error);
      walls.push_back(r->wall_time_s);
      if (r->ok) best_at.push_back(static_cast<double>(r->best_found_at));
    }
    rates.push_back(success_rate(errors, success_threshold));
    if (const double m = finite_mean(errors); !std::isnan(m)) error_means.push_back(m);
    wall_means.push_back(mean_std(walls).mean);
    for (std::size_t i = 0; i < thresholds.size(); ++i) curve[i].push_back(success_rate(errors, thresholds[i]));
  }
  s.success_rate = mean_std(rates);
  s.translation_error = mean_std(error_means);
  s.wall_time_s = mean_std(wall_means);
  s.best_found_at = mean_std(best_at);
  for (const auto& c : curve) s.success_curve.push_back(mean_std(c));
  return s;
}

ExperimentReport run_grid(const BenchScene& scene, std::span<const GridCell> grid, const BenchConfig& cfg) {
  for (const GridCell& cell : grid) validate_cell(cell);
  if (cfg.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be positive");
  cfg.localize.consensus.validate();
  scene.map.validate();
  scene.detections.validate();
  scene.camera.validate();

  const auto& queries = scene.detections.queries;
  std::vector<const TrajectoryEntry*> gt;
  for (const Query& q : queries) gt.push_back(&scene.groundtruth.lookup(q));

  ExperimentReport report;
  const double scale = scene.map.metadata.scene_scale_hint;
  report.success_threshold = cfg.success_threshold > 0.0 ? cfg.success_threshold : 0.1 * scale;
  report.thresholds = cfg.thresholds;
  if (report.thresholds.empty())
    for (int i = 1; i <= 30; ++i) report.thresholds.push_back(0.3 * scale * i / 30.0);

  const std::size_t n_q = queries.size();
  const std::size_t n_jobs = grid.size() * static_cast<std::size_t>(cfg.trials);
  report.rows.resize(n_jobs * n_q);
  std::vector<std::exception_ptr> errors(n_jobs);

  auto run_job = [&](std::size_t job) {
    const GridCell& cell = grid[job / cfg.trials];
    const int trial = static_cast<int>(job % cfg.trials);
    try {
      for (std::size_t q = 0; q < n_q; ++q) {
        RawRow& row = report.rows[job * n_q + q];
        row.method = cell.name();
        row.trial = trial;
        row.query_id = queries[q].query_id;
        LocalizeOptions opts = cfg.localize;
        opts.consensus.seed = trial_seed(cfg.localize.consensus.seed, cell, trial, static_cast<int>(q));
        const auto start = std::chrono::steady_clock::now();
        try {
          const LocalizationResult r = localize_query(scene, queries[q], cell, opts);
          row.ok = true;
          row.translation_error = translation_error(r.pose, *gt[q]);
          row.score = r.score;
          row.iterations_run = r.iterations_run;
          row.best_found_at = r.best_found_at;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoSolution && e.code() != ErrorCode::InsufficientCandidates) throw;
          row.ok = false;
          row.translation_error = std::numeric_limits<double>::infinity();
        }
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    } catch (...) {
      errors[job] = std::current_exception();
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(n_jobs, 1)));
  if (threads == 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < n_jobs; j = next++) run_job(j);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const GridCell& cell : grid)
    report.cells.push_back(aggregate(cell, report.rows, report.success_threshold, report.thresholds));
  return report;
}

// ---------------------------------------------------------------------------
// Report files

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void emit_report(const ExperimentReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  auto n = [](double v) { return format_number(v); };

  std::string table =
      "method,matching,algorithm,trials,queries,success_threshold,success_rate_mean,success_rate_std,"
      "translation_error_mean,translation_error_std,best_found_at_mean,best_found_at_std,wall_time_s_mean,"
      "wall_time_s_std\n";
  std::string curve = "method,threshold,success_rate_mean,success_rate_std\n";
  std::string iters = "method,solved,attempts,best_found_at_mean,best_found_at_std\n";
  for (const CellSummary& c : report.cells) {
    const std::string m = c.cell.name();
    table += m + "," + std::string(to_string(c.cell.matching)) + "," + std::string(to_string(c.cell.algorithm)) + "," +
             std::to_string(c.trials) + "," + std::to_string(c.queries) + "," + n(report.success_threshold) + "," +
             n(c.success_rate.mean) + "," + n(c.success_rate.std) + "," + n(c.translation_error.mean) + "," +
             n(c.translation_error.std) + "," + n(c.best_found_at.mean) + "," + n(c.best_found_at.std) + "," +
             n(c.wall_time_s.mean) + "," + n(c.wall_time_s.std) + "\n";
    for (std::size_t i = 0; i < report.thresholds.size() && i < c.success_curve.size(); ++i)
      curve += m + "," + n(report.thresholds[i]) + "," + n(c.success_curve[i].mean) + "," +
               n(c.success_curve[i].std) + "\n";
    int solved = 0;
    int attempts = 0;
    for (const RawRow& r : report.rows)
      if (r.method == m) {
        ++attempts;
        solved += r.ok ? 1 : 0;
      }
    iters += m + "," + std::to_string(solved) + "," + std::to_string(attempts) + "," + n(c.best_found_at.mean) + "," +
             n(c.best_found_at.std) + "\n";
  }

  std::string raw = "method,trial,query_id,status,translation_error,score,iterations_run,best_found_at,wall_time_s\n";
  for (const RawRow& r : report.rows)
    raw += r.method + "," + std::to_string(r.trial) + "," + r.query_id + "," + (r.ok ? "ok" : "failed") + "," +
           n(r.translation_error) + "," + n(r.score) + "," + std::to_string(r.iterations_run) + "," +
           std::to_string(r.best_found_at) + "," + n(r.wall_time_s) + "\n";

  write_text_file(dir / "table.csv", table);
  write_text_file(dir / "success_vs_threshold.csv", curve);
  write_text_file(dir / "iters_to_best.csv", iters);
  write_text_file(dir / "raw_rows.csv", raw);
}

}  // namespace objreloc
