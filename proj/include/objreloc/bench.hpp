#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "objreloc/association.hpp"
#include "objreloc/consensus.hpp"
#include "objreloc/model_io.hpp"
#include "objreloc/scene.hpp"

namespace objreloc {

// ---------------------------------------------------------------------------
// Synthetic scenes

struct SynthConfig {
  int n_landmarks = 50;
  int n_classes = 10;
  int n_queries = 8;
  double room_extent = 6.0;  // side of the square floor plan, meters
  int embed_dim = 32;
  double embed_noise_sigma = 0.1;
  double detector_noise_px = 2.0;
  double dropout_rate = 0.1;  // fraction of visible landmarks left undetected
  double clutter_rate = 1.0;  // mean spurious detections per query
  /// Scale the embedding noise by sqrt(reference area / box area), clamped to
  /// [1, 4]; the reference is 5% of the image.
  bool scale_sigma_by_area = false;
  std::uint64_t seed = 42;
  Camera camera{525.0, 525.0, 319.5, 239.5, 640, 480};

  void validate() const;
};

struct SyntheticScene {
  SynthConfig config;
  ObjectMap map;
  DetectionSet detections;
  Trajectory groundtruth;
  /// Per query, per observation: index of the generating landmark, -1 for clutter.
  std::vector<std::vector<int>> truth;
  int attempts = 1;
};

/// Landmarks uniform in the room, cameras on a ring looking inward, one text
/// embedding per landmark and noisy image embeddings per detection.
/// Throws InfeasibleScene when 100 attempts all leave a query with fewer than
/// four detected landmarks.
SyntheticScene generate_scene(const SynthConfig& cfg);

/// Projected outline of `e` when it lies fully in front of the camera and
/// inside the image. Occlusion is not considered.
std::optional<Ellipse> visible_projection(const Ellipsoid& e, const PoseWC& pose, const Camera& cam);

/// Indices of landmarks with a visible projection whose projected center is
/// not covered by the outline of a landmark closer to the camera.
std::vector<int> unoccluded_landmarks(const ObjectMap& map, const PoseWC& pose, const Camera& cam);

/// File names used inside a scene directory.
struct SceneFiles {
  static constexpr const char* map = "map.json";
  static constexpr const char* text_embeddings = "text.emb";
  static constexpr const char* detections = "detections.json";
  static constexpr const char* image_embeddings = "det.emb";
  static constexpr const char* groundtruth = "groundtruth.txt";
  static constexpr const char* camera = "camera.json";
};

void write_scene(const SyntheticScene& scene, const fs::path& dir);

/// Everything a benchmark run reads.
struct BenchScene {
  ObjectMap map;
  DetectionSet detections;
  Camera camera;
  Trajectory groundtruth;
};

BenchScene load_scene(const fs::path& dir, double confidence_floor = kDefaultConfidenceFloor);
BenchScene to_bench_scene(const SyntheticScene& scene);

// ---------------------------------------------------------------------------
// Experiments

struct GridCell {
  MatchingType matching = MatchingType::Hybrid;
  SamplerKind algorithm = SamplerKind::BProsac;

  /// "{matching}_{algorithm}", e.g. "hybrid_b-prosac".
  std::string name() const;
  bool operator==(const GridCell&) const = default;
};

/// Throws UnscoredCandidate for class matching with a score-ordered sampler.
void validate_cell(const GridCell& cell);
GridCell parse_cell(std::string_view name);
/// Comma-separated method names.
std::vector<GridCell> parse_grid(std::string_view names);
/// Every valid (matching, algorithm) pair except brute force.
std::vector<GridCell> default_grid();

struct LocalizeOptions {
  int k = 3;
  double min_bbox_area = 0.0;
  ConsensusConfig consensus;
};

/// Candidates for one query, ordered for the cell's sampler.
CandidateSet build_candidates(const ObjectMap& map, const Query& query, const EmbeddingStore& image_embeddings,
                              const GridCell& cell, const LocalizeOptions& opts);

/// build_candidates + localize. Throws like localize.
LocalizationResult localize_query(const BenchScene& scene, const Query& query, const GridCell& cell,
                                  const LocalizeOptions& opts);

/// Seed of the consensus stream for one (cell, trial, query).
std::uint64_t trial_seed(std::uint64_t master, const GridCell& cell, int trial, int query_index);

struct BenchConfig {
  LocalizeOptions localize;  // consensus.seed is the master seed
  int trials = 5;
  /// Success threshold in meters; <= 0 selects 0.1 x map scene_scale_hint.
  double success_threshold = 0.0;
  /// Threshold sweep for the success curve; empty selects 30 steps up to
  /// 0.3 x scene_scale_hint.
  std::vector<double> thresholds;
  /// Worker threads; <= 0 uses the hardware concurrency.
  int threads = 0;
};

/// One localization attempt.
struct RawRow {
  std::string method;
  int trial = 0;
  std::string query_id;
  bool ok = false;
  double translation_error = 0.0;  // +inf on failure
  double score = 0.0;
  std::int64_t iterations_run = 0;
  std::int64_t best_found_at = 0;  // 0 on failure
  double wall_time_s = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Population mean and standard deviation; NaN for an empty input.
MeanStd mean_std(std::span<const double> values);

struct CellSummary {
  GridCell cell;
  int trials = 0;
  int queries = 0;
  MeanStd success_rate;       // over per-trial rates
  MeanStd translation_error;  // over per-trial means of finite errors
  MeanStd wall_time_s;        // over per-trial means
  MeanStd best_found_at;      // over successful attempts
  std::vector<MeanStd> success_curve;  // one entry per sweep threshold
};

struct ExperimentReport {
  double success_threshold = 0.0;
  std::vector<double> thresholds;
  std::vector<CellSummary> cells;
  std::vector<RawRow> rows;  // cell-major, then trial, then query
};

/// |{e < threshold}| / |errors|. Throws EmptyInput; threshold must be > 0.
double success_rate(std::span<const double> errors, double threshold);

/// Recomputes a cell summary from its raw rows.
CellSummary aggregate(const GridCell& cell, std::span<const RawRow> rows, double success_threshold,
                      std::span<const double> thresholds);

/// Localizes every query `trials` times per cell. Per-query NoSolution and
/// InsufficientCandidates are recorded as failures; other errors propagate.
ExperimentReport run_grid(const BenchScene& scene, std::span<const GridCell> grid, const BenchConfig& cfg);

/// printf "%.9g" equivalent, independent of the C locale.
std::string format_number(double v);

/// Writes table.csv, success_vs_threshold.csv, iters_to_best.csv and raw_rows.csv.
void emit_report(const ExperimentReport& report, const fs::path& dir);

}  // namespace objreloc
