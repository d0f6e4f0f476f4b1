#include "objreloc/scene.hpp"

#include <set>
#include <string>

#include "objreloc/error.hpp"

namespace objreloc {

EmbeddingStore ObjectMap::landmark_embeddings() const {
  std::vector<int> refs;
  refs.reserve(landmarks.size());
  for (const auto& l : landmarks) refs.push_back(l.embedding_ref);
  return text_embeddings.subset(refs);
}

std::vector<int> ObjectMap::class_ids() const {
  std::vector<int> ids;
  ids.reserve(landmarks.size());
  for (const auto& l : landmarks) ids.push_back(l.class_id);
  return ids;
}

void ObjectMap::validate() const {
  std::set<int> ids;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const Landmark& l = landmarks[i];
    if (!ids.insert(l.id).second)
      fail(ErrorCode::InvariantViolation, "duplicate landmark id " + std::to_string(l.id));
    l.ellipsoid.validate();
    if (l.embedding_ref < 0 || l.embedding_ref >= text_embeddings.size())
      fail(ErrorCode::EmbeddingRefOutOfRange, "landmarks[" + std::to_string(i) + "].embedding_ref = " +
                                                  std::to_string(l.embedding_ref) + " but the embedding file has " +
                                                  std::to_string(text_embeddings.size()) + " rows");
  }
}

std::vector<int> Query::class_ids() const {
  std::vector<int> ids;
  ids.reserve(observations.size());
  for (const auto& o : observations) ids.push_back(o.class_id);
  return ids;
}

std::vector<double> Query::box_areas() const {
  std::vector<double> areas;
  areas.reserve(observations.size());
  for (const auto& o : observations) areas.push_back(o.bbox.area());
  return areas;
}

EmbeddingStore Query::embeddings(const EmbeddingStore& all) const {
  std::vector<int> refs;
  refs.reserve(observations.size());
  for (const auto& o : observations) refs.push_back(o.embedding_ref);
  return all.subset(refs);
}

void DetectionSet::validate() const {
  std::set<std::string> ids;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Query& query = queries[q];
    if (!ids.insert(query.query_id).second)
      fail(ErrorCode::InvariantViolation, "duplicate query_id '" + query.query_id + "'");
    for (std::size_t j = 0; j < query.observations.size(); ++j) {
      const Observation& o = query.observations[j];
      const std::string where = "queries[" + std::to_string(q) + "].detections[" + std::to_string(j) + "]";
      o.bbox.validate();
      if (!(o.confidence >= 0.0 && o.confidence <= 1.0))
        fail(ErrorCode::InvariantViolation, where + ".confidence outside [0, 1]");
      if (o.embedding_ref < 0 || o.embedding_ref >= image_embeddings.size())
        fail(ErrorCode::EmbeddingRefOutOfRange, where + ".embedding_ref = " + std::to_string(o.embedding_ref));
    }
  }
}

}  // namespace objreloc
