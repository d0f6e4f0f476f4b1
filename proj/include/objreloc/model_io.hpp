#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "objreloc/consensus.hpp"
#include "objreloc/scene.hpp"

namespace objreloc {

namespace fs = std::filesystem;

// Binary embedding file: "EMB1", u16 version, u32 dim, u32 count, then
// count * dim float32, all little-endian. Rows are stored as given.
inline constexpr std::uint16_t kEmbeddingFileVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 14;

std::vector<std::uint8_t> encode_embeddings(const EmbeddingStore& store);
/// Throws BadMagic, TruncatedFile, NonFiniteValue, ParseError.
EmbeddingStore decode_embeddings(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");
EmbeddingStore read_embeddings(const fs::path& path);
void write_embeddings(const EmbeddingStore& store, const fs::path& path);

/// Map JSON plus its companion embedding file (path stored relative to the map).
ObjectMap load_map(const fs::path& path);
void save_map(const ObjectMap& map, const fs::path& map_path, const fs::path& embeddings_path);

inline constexpr double kDefaultConfidenceFloor = 0.1;

/// Detections below `confidence_floor` are dropped; order is preserved.
DetectionSet load_detections(const fs::path& path, double confidence_floor = kDefaultConfidenceFloor);
void save_detections(const DetectionSet& detections, const fs::path& path, const fs::path& embeddings_path);

Camera load_camera(const fs::path& path);
void save_camera(const Camera& cam, const fs::path& path);

/// One TUM trajectory line: camera-to-world position and orientation.
struct TrajectoryEntry {
  std::string stamp;  // timestamp token as written
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  PoseWC world_to_camera() const { return PoseWC::from_camera_to_world(orientation, position); }
};

struct Trajectory {
  std::vector<TrajectoryEntry> entries;

  /// Entry whose stamp token equals the query id, else the nearest timestamp
  /// within `max_dt` seconds of the query timestamp. Throws MissingGroundtruth.
  const TrajectoryEntry& lookup(const Query& query, double max_dt = 0.02) const;
};

/// "timestamp tx ty tz qx qy qz qw" per line, '#' comments allowed.
/// Quaternions must be unit within 1e-3 and are re-normalized.
Trajectory load_trajectory(const fs::path& path);
void save_trajectory(const Trajectory& trajectory, const fs::path& path);

/// Distance between the estimated camera center (-R^T t) and the groundtruth position.
double translation_error(const PoseWC& estimate, const Eigen::Vector3d& gt_position);
double translation_error(const PoseWC& estimate, const TrajectoryEntry& gt);

struct QueryResult {
  std::string query_id;
  std::string method;
  bool ok = false;
  std::string error;  // failure reason when !ok
  LocalizationResult result;
  std::optional<double> translation_error;
  double wall_time_s = 0.0;  // not reproducible

  bool operator==(const QueryResult& other) const;
};

void save_results(const std::vector<QueryResult>& results, const fs::path& path, bool include_wall_time = true);
std::vector<QueryResult> load_results(const fs::path& path);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace objreloc
