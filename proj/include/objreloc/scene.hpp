#pragma once

#include <optional>
#include <string>
#include <vector>

#include "objreloc/association.hpp"
#include "objreloc/geometry.hpp"

namespace objreloc {

struct Landmark {
  int id = 0;
  Ellipsoid ellipsoid;
  DualQuadric quadric;  // cached from `ellipsoid`
  int class_id = 0;
  std::string class_name;
  std::string label;  // free text, never interpreted here
  int embedding_ref = 0;
};

struct MapMetadata {
  std::string name;
  double scene_scale_hint = 1.0;  // meters
};

/// Ellipsoidal landmarks plus the text embeddings they reference.
struct ObjectMap {
  MapMetadata metadata;
  std::vector<Landmark> landmarks;
  EmbeddingStore text_embeddings;

  /// Text embeddings reordered so row i belongs to landmark i.
  EmbeddingStore landmark_embeddings() const;
  std::vector<int> class_ids() const;
  void validate() const;
};

struct Observation {
  BBox bbox;
  int class_id = 0;
  double confidence = 1.0;
  int embedding_ref = 0;
};

struct Query {
  std::string query_id;
  std::optional<double> timestamp;
  int image_width = 0;
  int image_height = 0;
  std::vector<Observation> observations;

  std::vector<int> class_ids() const;
  std::vector<double> box_areas() const;
  /// Image embeddings of this query's observations, in observation order.
  EmbeddingStore embeddings(const EmbeddingStore& all) const;
};

struct DetectionSet {
  std::vector<Query> queries;
  EmbeddingStore image_embeddings;

  void validate() const;
};

}  // namespace objreloc
