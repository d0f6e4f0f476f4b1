#include "objreloc/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "objreloc/error.hpp"

namespace objreloc {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Little-endian packing

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// ---------------------------------------------------------------------------
// JSON field access with path context in error messages

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::ParseError, where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::ParseError, where + "." + key + ": missing field");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorCode::ParseError, where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ErrorCode::ParseError, where + ": not finite");
  return d;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(ErrorCode::ParseError, where + ": expected an integer");
  return v.get<int>();
}

std::string string_field(const json& v, const std::string& where) {
  if (!v.is_string()) fail(ErrorCode::ParseError, where + ": expected a string");
  return v.get<std::string>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N)
    fail(ErrorCode::ParseError, where + ": expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

json to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json quat_to_json(const Eigen::Quaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Eigen::Quaterniond quat(const json& v, const std::string& where) {
  const Eigen::Vector4d wxyz = vec<4>(v, where);
  return Eigen::Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
}

void check_format(const json& root, const char* expected, const std::string& origin) {
  const std::string fmt = string_field(field(root, "format", origin), origin + ".format");
  if (fmt != expected) fail(ErrorCode::ParseError, origin + ": format is '" + fmt + "', expected '" + expected + "'");
  const int version = integer(field(root, "version", origin), origin + ".version");
  if (version != 1) fail(ErrorCode::ParseError, origin + ": unsupported version " + std::to_string(version));
}

fs::path companion(const fs::path& file, const std::string& relative) {
  const fs::path p(relative);
  return p.is_absolute() ? p : file.parent_path() / p;
}

std::string relative_to(const fs::path& target, const fs::path& base_file) {
  const fs::path base = base_file.parent_path().empty() ? fs::path(".") : base_file.parent_path();
  const fs::path rel = fs::proximate(target, base);
  return rel.generic_string();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Embeddings

std::vector<std::uint8_t> encode_embeddings(const EmbeddingStore& store) {
  std::vector<std::uint8_t> out{'E', 'M', 'B', '1'};
  const auto raw = store.raw();
  out.reserve(kEmbeddingHeaderBytes + raw.size() * 4);
  put_u16(out, kEmbeddingFileVersion);
  put_u32(out, static_cast<std::uint32_t>(store.dim()));
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const float f : raw) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
  return out;
}

EmbeddingStore decode_embeddings(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "EMB1", 4) != 0)
    fail(ErrorCode::BadMagic, origin + ": missing EMB1 magic");
  if (bytes.size() < kEmbeddingHeaderBytes) fail(ErrorCode::TruncatedFile, origin + ": header is incomplete");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kEmbeddingFileVersion)
    fail(ErrorCode::ParseError, origin + ": unsupported embedding file version " + std::to_string(version));
  const std::uint32_t dim = get_u32(bytes.data() + 6);
  const std::uint32_t count = get_u32(bytes.data() + 10);
  const std::uint64_t expected = kEmbeddingHeaderBytes + 4ULL * dim * count;
  if (bytes.size() < expected)
    fail(ErrorCode::TruncatedFile, origin + ": expected " + std::to_string(expected) + " bytes, found " +
                                       std::to_string(bytes.size()));
  if (bytes.size() > expected)
    fail(ErrorCode::ParseError, origin + ": " + std::to_string(bytes.size() - expected) + " trailing bytes");
  if (dim == 0) fail(ErrorCode::ParseError, origin + ": embedding dimension is zero");

  std::vector<float> raw(static_cast<std::size_t>(dim) * count);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::uint32_t bits = get_u32(bytes.data() + kEmbeddingHeaderBytes + 4 * i);
    std::memcpy(&raw[i], &bits, sizeof bits);
    if (!std::isfinite(raw[i]))
      fail(ErrorCode::NonFiniteValue, origin + ": row " + std::to_string(i / dim) + " holds a non-finite value");
  }
  try {
    return EmbeddingStore(static_cast<int>(dim), std::move(raw));
  } catch (const Error& e) {
    fail(e.code(), origin + ": " + e.what());
  }
}

EmbeddingStore read_embeddings(const fs::path& path) {
  const std::string text = read_text_file(path);
  return decode_embeddings(std::vector<std::uint8_t>(text.begin(), text.end()), path.string());
}

void write_embeddings(const EmbeddingStore& store, const fs::path& path) {
  const auto bytes = encode_embeddings(store);
  write_text_file(path, std::string(bytes.begin(), bytes.end()));
}

// ---------------------------------------------------------------------------
// Map

ObjectMap load_map(const fs::path& path) {
  const std::string origin = path.string();
  const json root = parse_json(read_text_file(path), origin);
  check_format(root, "objreloc-map", origin);

  ObjectMap map;
  const json& meta = field(root, "metadata", origin);
  map.metadata.name = string_field(field(meta, "name", "metadata"), "metadata.name");
  map.metadata.scene_scale_hint = number(field(meta, "scene_scale_hint", "metadata"), "metadata.scene_scale_hint");

  const fs::path emb_path = companion(path, string_field(field(root, "embeddings", origin), "embeddings"));
  map.text_embeddings = read_embeddings(emb_path);

  const json& lms = field(root, "landmarks", origin);
  if (!lms.is_array()) fail(ErrorCode::ParseError, origin + ": landmarks must be an array");
  for (std::size_t i = 0; i < lms.size(); ++i) {
    const std::string where = "landmarks[" + std::to_string(i) + "]";
    const json& j = lms[i];
    Landmark l;
    l.id = integer(field(j, "id", where), where + ".id");
    const Eigen::Vector3d center = vec<3>(field(j, "center", where), where + ".center");
    const Eigen::Vector3d radii = vec<3>(field(j, "radii", where), where + ".radii");
    Eigen::Quaterniond q = quat(field(j, "rotation", where), where + ".rotation");
    if (std::abs(q.norm() - 1.0) > 1e-3)
      fail(ErrorCode::InvariantViolation, origin + ": " + where + ".rotation has norm " + format_double(q.norm()));
    q.normalize();
    try {
      l.ellipsoid = Ellipsoid(center, radii, q);
    } catch (const Error& e) {
      fail(ErrorCode::InvariantViolation, origin + ": " + where + ": " + e.what());
    }
    l.quadric = ellipsoid_to_dual_quadric(l.ellipsoid);
    l.class_id = integer(field(j, "class_id", where), where + ".class_id");
    l.class_name = string_field(field(j, "class_name", where), where + ".class_name");
    l.label = string_field(field(j, "label", where), where + ".label");
    l.embedding_ref = integer(field(j, "embedding_ref", where), where + ".embedding_ref");
    map.landmarks.push_back(std::move(l));
  }
  map.validate();
  return map;
}

void save_map(const ObjectMap& map, const fs::path& map_path, const fs::path& embeddings_path) {
  map.validate();
  json root;
  root["format"] = "objreloc-map";
  root["version"] = 1;
  root["metadata"] = {{"name", map.metadata.name}, {"scene_scale_hint", map.metadata.scene_scale_hint}};
  root["embeddings"] = relative_to(embeddings_path, map_path);
  json lms = json::array();
  for (const Landmark& l : map.landmarks) {
    lms.push_back({{"id", l.id},
                   {"center", to_json(l.ellipsoid.center)},
                   {"radii", to_json(l.ellipsoid.radii)},
                   {"rotation", quat_to_json(l.ellipsoid.rotation)},
                   {"class_id", l.class_id},
                   {"class_name", l.class_name},
                   {"label", l.label},
                   {"embedding_ref", l.embedding_ref}});
  }
  root["landmarks"] = std::move(lms);
  write_embeddings(map.text_embeddings, embeddings_path);
  write_text_file(map_path, root.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Detections

DetectionSet load_detections(const fs::path& path, double confidence_floor) {
  const std::string origin = path.string();
  const json root = parse_json(read_text_file(path), origin);
  check_format(root, "objreloc-detections", origin);

  DetectionSet set;
  set.image_embeddings = read_embeddings(companion(path, string_field(field(root, "embeddings", origin), "embeddings")));
  const json& queries = field(root, "queries", origin);
  if (!queries.is_array()) fail(ErrorCode::ParseError, origin + ": queries must be an array");
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::string where = "queries[" + std::to_string(q) + "]";
    const json& jq = queries[q];
    Query query;
    query.query_id = string_field(field(jq, "query_id", where), where + ".query_id");
    if (const auto it = jq.find("timestamp"); it != jq.end() && !it->is_null())
      query.timestamp = number(*it, where + ".timestamp");
    const json& size = field(jq, "image_size", where);
    if (!size.is_array() || size.size() != 2) fail(ErrorCode::ParseError, where + ".image_size: expected [width, height]");
    query.image_width = integer(size[0], where + ".image_size[0]");
    query.image_height = integer(size[1], where + ".image_size[1]");
    const json& dets = field(jq, "detections", where);
    if (!dets.is_array()) fail(ErrorCode::ParseError, where + ".detections must be an array");
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const std::string dw = where + ".detections[" + std::to_string(d) + "]";
      const json& jd = dets[d];
      Observation o;
      const Eigen::Vector4d box = vec<4>(field(jd, "bbox", dw), dw + ".bbox");
      o.bbox = {box[0], box[1], box[2], box[3]};
      o.class_id = integer(field(jd, "class_id", dw), dw + ".class_id");
      o.confidence = number(field(jd, "confidence", dw), dw + ".confidence");
      o.embedding_ref = integer(field(jd, "embedding_ref", dw), dw + ".embedding_ref");
      if (o.confidence < confidence_floor) continue;
      query.observations.push_back(o);
    }
    set.queries.push_back(std::move(query));
  }
  try {
    set.validate();
  } catch (const Error& e) {
    fail(e.code(), origin + ": " + e.what());
  }
  return set;
}

void save_detections(const DetectionSet& detections, const fs::path& path, const fs::path& embeddings_path) {
  detections.validate();
  json root;
  root["format"] = "objreloc-detections";
  root["version"] = 1;
  root["embeddings"] = relative_to(embeddings_path, path);
  json queries = json::array();
  for (const Query& q : detections.queries) {
    json jq;
    jq["query_id"] = q.query_id;
    if (q.timestamp) jq["timestamp"] = *q.timestamp;
    jq["image_size"] = {q.image_width, q.image_height};
    json dets = json::array();
    for (const Observation& o : q.observations) {
      dets.push_back({{"bbox", {o.bbox.xmin, o.bbox.ymin, o.bbox.xmax, o.bbox.ymax}},
                      {"class_id", o.class_id},
                      {"confidence", o.confidence},
                      {"embedding_ref", o.embedding_ref}});
    }
    jq["detections"] = std::move(dets);
    queries.push_back(std::move(jq));
  }
  root["queries"] = std::move(queries);
  write_embeddings(detections.image_embeddings, embeddings_path);
  write_text_file(path, root.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Camera

Camera load_camera(const fs::path& path) {
  const std::string origin = path.string();
  const json root = parse_json(read_text_file(path), origin);
  Camera cam;
  cam.fx = number(field(root, "fx", origin), "fx");
  cam.fy = number(field(root, "fy", origin), "fy");
  cam.cx = number(field(root, "cx", origin), "cx");
  cam.cy = number(field(root, "cy", origin), "cy");
  cam.width = integer(field(root, "width", origin), "width");
  cam.height = integer(field(root, "height", origin), "height");
  try {
    cam.validate();
  } catch (const Error& e) {
    fail(e.code(), origin + ": " + e.what());
  }
  return cam;
}

void save_camera(const Camera& cam, const fs::path& path) {
  const json root = {{"fx", cam.fx}, {"fy", cam.fy},         {"cx", cam.cx},
                     {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
  write_text_file(path, root.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Trajectories

const TrajectoryEntry& Trajectory::lookup(const Query& query, double max_dt) const {
  for (const auto& e : entries)
    if (e.stamp == query.query_id) return e;
  if (query.timestamp) {
    const TrajectoryEntry* best = nullptr;
    for (const auto& e : entries)
      if (best == nullptr || std::abs(e.time - *query.timestamp) < std::abs(best->time - *query.timestamp)) best = &e;
    if (best != nullptr && std::abs(best->time - *query.timestamp) <= max_dt) return *best;
  }
  fail(ErrorCode::MissingGroundtruth, "no groundtruth pose for query '" + query.query_id + "'");
}

Trajectory load_trajectory(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (tokens.size() != 8) fail(ErrorCode::ParseError, where + ": expected 8 fields, found " + std::to_string(tokens.size()));
    double v[8];
    for (int i = 0; i < 8; ++i)
      if (!parse_double(tokens[i], v[i]) || !std::isfinite(v[i]))
        fail(ErrorCode::ParseError, where + ": field " + std::to_string(i + 1) + " '" + tokens[i] + "' is not a number");
    TrajectoryEntry e;
    e.stamp = tokens[0];
    e.time = v[0];
    e.position = {v[1], v[2], v[3]};
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-3)
      fail(ErrorCode::InvariantViolation, where + ": quaternion norm " + format_double(q.norm()) + " is not 1");
    e.orientation = q.normalized();
    traj.entries.push_back(std::move(e));
  }
  return traj;
}

void save_trajectory(const Trajectory& trajectory, const fs::path& path) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& e : trajectory.entries) {
    const Eigen::Quaterniond& q = e.orientation;
    out += e.stamp;
    for (const double v : {e.position.x(), e.position.y(), e.position.z(), q.x(), q.y(), q.z(), q.w()})
      out += " " + format_double(v);
    out += "\n";
  }
  write_text_file(path, out);
}

double translation_error(const PoseWC& estimate, const Eigen::Vector3d& gt_position) {
  return (estimate.camera_center() - gt_position).norm();
}

double translation_error(const PoseWC& estimate, const TrajectoryEntry& gt) {
  return translation_error(estimate, gt.position);
}

// ---------------------------------------------------------------------------
// Results

bool QueryResult::operator==(const QueryResult& o) const {
  return query_id == o.query_id && method == o.method && ok == o.ok && error == o.error &&
         result.pose.rotation.coeffs() == o.result.pose.rotation.coeffs() &&
         result.pose.translation == o.result.pose.translation && result.score == o.result.score &&
         result.correspondences == o.result.correspondences && result.iterations_run == o.result.iterations_run &&
         result.best_found_at == o.result.best_found_at && translation_error == o.translation_error &&
         wall_time_s == o.wall_time_s;
}

void save_results(const std::vector<QueryResult>& results, const fs::path& path, bool include_wall_time) {
  json arr = json::array();
  for (const QueryResult& r : results) {
    json j;
    j["query_id"] = r.query_id;
    j["method"] = r.method;
    j["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) j["error"] = r.error;
    if (r.ok) {
      j["pose"] = {{"rotation", quat_to_json(r.result.pose.rotation)},
                   {"translation", to_json(r.result.pose.translation)},
                   {"camera_center", to_json(r.result.pose.camera_center())}};
      j["score"] = r.result.score;
      json corr = json::array();
      for (const auto& c : r.result.correspondences) corr.push_back({c.obs_index, c.landmark_index, c.iou});
      j["correspondences"] = std::move(corr);
      j["best_found_at"] = r.result.best_found_at;
    }
    j["iterations_run"] = r.result.iterations_run;
    if (r.translation_error) j["translation_error"] = *r.translation_error;
    if (include_wall_time) j["wall_time_s"] = r.wall_time_s;
    arr.push_back(std::move(j));
  }
  const json root = {{"format", "objreloc-results"}, {"version", 1}, {"results", std::move(arr)}};
  write_text_file(path, root.dump(1) + "\n");
}

std::vector<QueryResult> load_results(const fs::path& path) {
  const std::string origin = path.string();
  const json root = parse_json(read_text_file(path), origin);
  check_format(root, "objreloc-results", origin);
  const json& arr = field(root, "results", origin);
  if (!arr.is_array()) fail(ErrorCode::ParseError, origin + ": results must be an array");
  std::vector<QueryResult> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "results[" + std::to_string(i) + "]";
    const json& j = arr[i];
    QueryResult r;
    r.query_id = string_field(field(j, "query_id", where), where + ".query_id");
    r.method = string_field(field(j, "method", where), where + ".method");
    r.ok = string_field(field(j, "status", where), where + ".status") == "ok";
    if (!r.ok) r.error = string_field(field(j, "error", where), where + ".error");
    if (r.ok) {
      const json& pose = field(j, "pose", where);
      r.result.pose.rotation = quat(field(pose, "rotation", where + ".pose"), where + ".pose.rotation");
      r.result.pose.translation = vec<3>(field(pose, "translation", where + ".pose"), where + ".pose.translation");
      r.result.score = number(field(j, "score", where), where + ".score");
      const json& corr = field(j, "correspondences", where);
      for (const json& c : corr) {
        if (!c.is_array() || c.size() != 3) fail(ErrorCode::ParseError, where + ".correspondences: expected triples");
        r.result.correspondences.push_back({integer(c[0], where), integer(c[1], where), number(c[2], where)});
      }
      r.result.best_found_at = field(j, "best_found_at", where).get<std::int64_t>();
    }
    r.result.iterations_run = field(j, "iterations_run", where).get<std::int64_t>();
    if (const auto it = j.find("translation_error"); it != j.end()) r.translation_error = number(*it, where);
    if (const auto it = j.find("wall_time_s"); it != j.end()) r.wall_time_s = number(*it, where);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace objreloc
