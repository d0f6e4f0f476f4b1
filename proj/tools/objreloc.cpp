// objreloc command-line interface: localize, bench, synth, validate.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "objreloc/bench.hpp"
#include "objreloc/error.hpp"
#include "objreloc/model_io.hpp"

using namespace objreloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoSolution = 2;

struct CommonFlags {
  std::uint64_t seed = 0;
  int k = 3;
  int iterations = 500;
  double iou_threshold = 0.2;
  double confidence_floor = kDefaultConfidenceFloor;
  double min_bbox_area = 0.0;
  std::int64_t prosac_T_N = 200000;

  LocalizeOptions options() const {
    LocalizeOptions o;
    o.k = k;
    o.min_bbox_area = min_bbox_area;
    o.consensus.iterations = iterations;
    o.consensus.iou_threshold = iou_threshold;
    o.consensus.prosac_T_N = prosac_T_N;
    o.consensus.seed = seed;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
  cmd->add_option("--k", f.k, "Nearest landmarks per observation")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--iterations", f.iterations, "Consensus iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--iou-threshold", f.iou_threshold, "IoU needed to accept a verified match")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--confidence-floor", f.confidence_floor, "Drop detections below this confidence")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-bbox-area", f.min_bbox_area, "Do not sample observations with smaller boxes (px^2)")
      ->capture_default_str();
  cmd->add_option("--prosac-tn", f.prosac_T_N, "PROSAC draws before the pool covers every candidate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

struct InputPaths {
  std::string map;
  std::string detections;
  std::string camera;
  std::string groundtruth;
  std::string text_embeddings;
  std::string image_embeddings;
};

void add_inputs(CLI::App* cmd, InputPaths& p, bool required) {
  auto* map = cmd->add_option("--map", p.map, "Map JSON");
  auto* det = cmd->add_option("--detections", p.detections, "Detections JSON");
  auto* cam = cmd->add_option("--intrinsics", p.camera, "Camera intrinsics JSON");
  if (required) {
    map->required();
    det->required();
    cam->required();
  }
  cmd->add_option("--groundtruth", p.groundtruth, "TUM trajectory with groundtruth poses");
  cmd->add_option("--text-embeddings", p.text_embeddings, "Override the map's embedding file");
  cmd->add_option("--image-embeddings", p.image_embeddings, "Override the detections' embedding file");
}

BenchScene load_inputs(const InputPaths& p, double confidence_floor) {
  BenchScene s;
  s.map = load_map(p.map);
  if (!p.text_embeddings.empty()) {
    s.map.text_embeddings = read_embeddings(p.text_embeddings);
    s.map.validate();
  }
  s.detections = load_detections(p.detections, confidence_floor);
  if (!p.image_embeddings.empty()) {
    s.detections.image_embeddings = read_embeddings(p.image_embeddings);
    s.detections.validate();
  }
  s.camera = load_camera(p.camera);
  if (!p.groundtruth.empty()) s.groundtruth = load_trajectory(p.groundtruth);
  return s;
}

std::string fmt(double v) { return format_number(v); }

int cmd_localize(const CommonFlags& flags, const InputPaths& paths, const std::string& matching,
                 const std::string& algorithm, const std::string& output) {
  const GridCell cell{parse_matching(matching), parse_sampler(algorithm)};
  validate_cell(cell);
  const BenchScene scene = load_inputs(paths, flags.confidence_floor);

  std::vector<QueryResult> results;
  bool any_failed = false;
  const auto& queries = scene.detections.queries;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    QueryResult r;
    r.query_id = queries[q].query_id;
    r.method = cell.name();
    LocalizeOptions opts = flags.options();
    opts.consensus.seed = trial_seed(flags.seed, cell, 0, static_cast<int>(q));
    const auto start = std::chrono::steady_clock::now();
    try {
      r.result = localize_query(scene, queries[q], cell, opts);
      r.ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSolution && e.code() != ErrorCode::InsufficientCandidates) throw;
      r.error = e.what();
      any_failed = true;
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.ok && !paths.groundtruth.empty())
      r.translation_error = translation_error(r.result.pose, scene.groundtruth.lookup(queries[q]));

    std::cout << r.method << " " << r.query_id << ": ";
    if (r.ok) {
      const Eigen::Vector3d c = r.result.pose.camera_center();
      std::cout << "position " << fmt(c.x()) << " " << fmt(c.y()) << " " << fmt(c.z()) << ", score "
                << fmt(r.result.score) << ", matches " << r.result.correspondences.size() << ", best at "
                << r.result.best_found_at;
      if (r.translation_error) std::cout << ", error " << fmt(*r.translation_error) << " m";
    } else {
      std::cout << "failed (" << r.error << ")";
    }
    std::cout << "\n";
    results.push_back(std::move(r));
  }
  save_results(results, output);
  return any_failed ? kExitNoSolution : kExitOk;
}

struct BenchFlags {
  std::string scene_dir;
  std::string grid;
  int trials = 5;
  double success_threshold = 0.0;
  double max_threshold = 0.0;
  int threshold_steps = 30;
  int threads = 0;
};

int cmd_bench(const CommonFlags& flags, const InputPaths& paths, const BenchFlags& b, const std::string& output) {
  const std::vector<GridCell> grid = b.grid.empty() ? default_grid() : parse_grid(b.grid);
  for (const GridCell& cell : grid) validate_cell(cell);

  BenchScene scene;
  if (!b.scene_dir.empty()) {
    scene = load_scene(b.scene_dir, flags.confidence_floor);
  } else {
    if (paths.map.empty() || paths.detections.empty() || paths.camera.empty() || paths.groundtruth.empty())
      fail(ErrorCode::InvalidArgument, "bench needs --scene or all of --map, --detections, --intrinsics, --groundtruth");
    scene = load_inputs(paths, flags.confidence_floor);
  }

  BenchConfig cfg;
  cfg.localize = flags.options();
  cfg.trials = b.trials;
  cfg.success_threshold = b.success_threshold;
  cfg.threads = b.threads;
  if (b.max_threshold > 0.0)
    for (int i = 1; i <= b.threshold_steps; ++i) cfg.thresholds.push_back(b.max_threshold * i / b.threshold_steps);

  const ExperimentReport report = run_grid(scene, grid, cfg);
  emit_report(report, output);
  for (const CellSummary& c : report.cells)
    std::cout << c.cell.name() << ": success " << fmt(c.success_rate.mean) << " +- " << fmt(c.success_rate.std)
              << ", error " << fmt(c.translation_error.mean) << " +- " << fmt(c.translation_error.std)
              << " m, best at " << fmt(c.best_found_at.mean) << "\n";
  return kExitOk;
}

int cmd_synth(const SynthConfig& cfg, const std::string& output) {
  const SyntheticScene scene = generate_scene(cfg);
  write_scene(scene, output);
  std::size_t n_obs = 0;
  for (const Query& q : scene.detections.queries) n_obs += q.observations.size();
  std::cout << "wrote " << scene.map.landmarks.size() << " landmarks, " << scene.detections.queries.size()
            << " queries, " << n_obs << " detections to " << output << "\n";
  return kExitOk;
}

struct ValidatePaths {
  InputPaths inputs;
  std::vector<std::string> embeddings;
  std::string results;
  std::string scene_dir;
};

int cmd_validate(const ValidatePaths& v, double confidence_floor) {
  int problems = 0;
  int checked = 0;
  auto check = [&](const std::string& what, const std::string& path, auto&& load) {
    if (path.empty()) return;
    ++checked;
    try {
      load(path);
      std::cout << "ok      " << what << " " << path << "\n";
    } catch (const Error& e) {
      ++problems;
      std::cout << "invalid " << what << " " << path << ": " << e.what() << "\n";
    }
  };
  check("map", v.inputs.map, [](const std::string& p) { load_map(p); });
  check("detections", v.inputs.detections, [&](const std::string& p) { load_detections(p, confidence_floor); });
  check("intrinsics", v.inputs.camera, [](const std::string& p) { load_camera(p); });
  check("groundtruth", v.inputs.groundtruth, [](const std::string& p) { load_trajectory(p); });
  check("results", v.results, [](const std::string& p) { load_results(p); });
  for (const std::string& e : v.embeddings) check("embeddings", e, [](const std::string& p) { read_embeddings(p); });
  check("scene", v.scene_dir, [&](const std::string& p) {
    const BenchScene s = load_scene(p, confidence_floor);
    for (const Query& q : s.detections.queries) s.groundtruth.lookup(q);
  });
  if (checked == 0) fail(ErrorCode::InvalidArgument, "validate: no files given");
  return problems == 0 ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-based camera relocalization against a map of text-labeled ellipsoids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "objreloc 0.1.0");

  CommonFlags common;
  InputPaths paths;
  std::string matching = "hybrid";
  std::string algorithm = "b-prosac";
  std::string output;

  auto* localize_cmd = app.add_subcommand("localize", "Localize every query of a detections file");
  add_common(localize_cmd, common);
  add_inputs(localize_cmd, paths, true);
  localize_cmd->add_option("--matching", matching, "Candidate generation")
      ->capture_default_str()
      ->check(CLI::IsMember({"class", "clip", "hybrid"}));
  localize_cmd->add_option("--algorithm", algorithm, "Hypothesis sampler")
      ->capture_default_str()
      ->check(CLI::IsMember({"bf", "ransac", "prosac", "b-prosac"}));
  localize_cmd->add_option("--output", output, "Result JSON")->required();

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a (matching x algorithm) grid and write CSV reports");
  add_common(bench_cmd, common);
  add_inputs(bench_cmd, paths, false);
  bench_cmd->add_option("--scene", bench.scene_dir, "Scene directory written by synth");
  bench_cmd->add_option("--grid", bench.grid, "Comma-separated methods, e.g. hybrid_b-prosac,clip_ransac");
  bench_cmd->add_option("--trials", bench.trials, "Trials per method")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--success-threshold", bench.success_threshold,
                        "Translation error counted as success (m); default 0.1 x scene scale");
  bench_cmd->add_option("--max-threshold", bench.max_threshold,
                        "Upper end of the success curve (m); default 0.3 x scene scale");
  bench_cmd->add_option("--threshold-steps", bench.threshold_steps, "Points on the success curve")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--threads", bench.threads, "Worker threads; 0 uses every core")->capture_default_str();
  bench_cmd->add_option("--output", output, "Report directory")->required();

  SynthConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene directory");
  synth_cmd->add_option("--seed", synth.seed, "Scene seed")->capture_default_str();
  synth_cmd->add_option("--landmarks", synth.n_landmarks, "Number of landmarks")->capture_default_str();
  synth_cmd->add_option("--classes", synth.n_classes, "Number of object classes")->capture_default_str();
  synth_cmd->add_option("--queries", synth.n_queries, "Number of query images")->capture_default_str();
  synth_cmd->add_option("--room-extent", synth.room_extent, "Room side length (m)")->capture_default_str();
  synth_cmd->add_option("--embed-dim", synth.embed_dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--sigma", synth.embed_noise_sigma, "Image embedding noise")->capture_default_str();
  synth_cmd->add_option("--detector-noise", synth.detector_noise_px, "Box corner noise (px)")->capture_default_str();
  synth_cmd->add_option("--dropout", synth.dropout_rate, "Fraction of visible landmarks not detected")
      ->capture_default_str();
  synth_cmd->add_option("--clutter", synth.clutter_rate, "Mean spurious detections per image")->capture_default_str();
  synth_cmd->add_flag("--scale-sigma-by-area", synth.scale_sigma_by_area, "Noisier embeddings for small boxes");
  synth_cmd->add_option("--output", output, "Scene directory")->required();

  ValidatePaths vpaths;
  auto* validate_cmd = app.add_subcommand("validate", "Load files and report format or invariant violations");
  add_inputs(validate_cmd, vpaths.inputs, false);
  validate_cmd->add_option("--embeddings", vpaths.embeddings, "Embedding files");
  validate_cmd->add_option("--results", vpaths.results, "Result JSON written by localize");
  validate_cmd->add_option("--scene", vpaths.scene_dir, "Scene directory");
  validate_cmd->add_option("--confidence-floor", common.confidence_floor, "Confidence floor for detections")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*localize_cmd) return cmd_localize(common, paths, matching, algorithm, output);
    if (*bench_cmd) return cmd_bench(common, paths, bench, output);
    if (*synth_cmd) return cmd_synth(synth, output);
    if (*validate_cmd) return cmd_validate(vpaths, common.confidence_floor);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
