#include "crowdpose/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "crowdpose/errors.hpp"

namespace crowdpose {

using nlohmann::json;

namespace {

constexpr std::string_view kNativeFormatTag = "crowdpose-kit-native";
constexpr int kNativeVersion = 1;

// Structural problems in otherwise well-formed JSON have no precise byte
// position; they are reported at offset 0 with a location hint in the text.
[[noreturn]] void structure_error(const std::string& what) {
  throw ParseError("malformed dataset: " + what, 0);
}

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) structure_error(where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) structure_error(where + " lacks \"" + key + "\"");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) structure_error(where + " is not a number");
  return j.get<double>();
}

std::string id_string(const json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  structure_error(where + " must be a string or integer id");
}

BBox bbox_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) structure_error(where + " must be [x, y, w, h]");
  return BBox{as_double(j[0], where), as_double(j[1], where),
              as_double(j[2], where), as_double(j[3], where)};
}

json bbox_to_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

/// Tight box around labeled keypoints, padded to at least one pixel.
BBox bbox_from_keypoints(const Pose& pose) {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto& kp : pose.keypoints) {
    if (!is_labeled(kp.vis)) continue;
    x0 = std::min(x0, kp.x);
    y0 = std::min(y0, kp.y);
    x1 = std::max(x1, kp.x);
    y1 = std::max(y1, kp.y);
  }
  if (x0 > x1) return BBox{0.0, 0.0, 1.0, 1.0};
  return BBox{x0, y0, std::max(1.0, x1 - x0), std::max(1.0, y1 - y0)};
}

PoseSchema schema_from_json(const json& j) {
  PoseSchema schema;
  const json& name = require(j, "name", "schema");
  if (!name.is_string()) structure_error("schema.name must be a string");
  schema.name = name.get<std::string>();
  const json& names = require(j, "keypoints", "schema");
  if (!names.is_array()) structure_error("schema.keypoints must be an array");
  for (const auto& n : names) {
    if (!n.is_string()) structure_error("schema.keypoints entries must be strings");
    schema.keypoint_names.push_back(n.get<std::string>());
  }
  return schema;
}

// ---------------------------------------------------------------------------
// COCO-like

Dataset parse_coco_like(const json& doc) {
  const json* annotations = nullptr;
  const json* images = nullptr;
  const json* categories = nullptr;
  if (doc.is_array()) {
    annotations = &doc;  // detection-results file
  } else if (doc.is_object()) {
    annotations = &require(doc, "annotations", "document");
    if (auto it = doc.find("images"); it != doc.end()) images = &*it;
    if (auto it = doc.find("categories"); it != doc.end()) categories = &*it;
  } else {
    structure_error("COCO-like document must be an object or an array");
  }
  if (!annotations->is_array()) structure_error("annotations must be an array");

  Dataset ds;
  std::optional<std::size_t> kp_count;
  if (categories && categories->is_array() && !categories->empty()) {
    const json& cat = (*categories)[0];
    if (auto it = cat.find("keypoints"); it != cat.end() && it->is_array()) {
      for (const auto& n : *it) {
        if (!n.is_string()) structure_error("category keypoint names must be strings");
        ds.schema.keypoint_names.push_back(n.get<std::string>());
      }
      ds.schema.name = cat.value("name", std::string("custom"));
      kp_count = ds.schema.count();
      if (const PoseSchema* builtin = schema_for_count(*kp_count);
          builtin && builtin->keypoint_names == ds.schema.keypoint_names) {
        ds.schema = *builtin;
      }
    }
  }

  std::unordered_map<std::string, std::size_t> index_of_image;
  if (images) {
    if (!images->is_array()) structure_error("images must be an array");
    for (std::size_t i = 0; i < images->size(); ++i) {
      const json& im = (*images)[i];
      const std::string where = "images[" + std::to_string(i) + "]";
      ImageRecord rec;
      rec.id = id_string(require(im, "id", where), where + ".id");
      rec.width = im.value("width", 0);
      rec.height = im.value("height", 0);
      if (auto it = im.find("file_name"); it != im.end() && it->is_string())
        rec.source = it->get<std::string>();
      index_of_image.emplace(rec.id, ds.images.size());
      ds.images.push_back(std::move(rec));
    }
  }

  for (std::size_t a = 0; a < annotations->size(); ++a) {
    const json& ann = (*annotations)[a];
    const std::string where = "annotations[" + std::to_string(a) + "]";
    const std::string image_id =
        id_string(require(ann, "image_id", where), where + ".image_id");
    const json& kps = require(ann, "keypoints", where);
    if (!kps.is_array() || kps.size() % 3 != 0)
      structure_error(where + ".keypoints must hold x, y, v triplets");
    const std::size_t k = kps.size() / 3;
    if (!kp_count) {
      const PoseSchema* builtin = schema_for_count(k);
      if (!builtin)
        throw SchemaMismatchError("unsupported keypoint count " +
                                  std::to_string(k) + " in " + where);
      ds.schema = *builtin;
      kp_count = k;
    } else if (k != *kp_count) {
      throw SchemaMismatchError(where + " has " + std::to_string(k) +
                                " keypoints, expected " +
                                std::to_string(*kp_count));
    }

    PersonInstance person;
    person.pose.keypoints.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double v = as_double(kps[3 * i + 2], where + ".keypoints");
      auto& kp = person.pose.keypoints[i];
      kp.x = as_double(kps[3 * i], where + ".keypoints");
      kp.y = as_double(kps[3 * i + 1], where + ".keypoints");
      kp.vis = v <= 0.0 ? Visibility::Unlabeled
               : v < 2.0 ? Visibility::Occluded
                         : Visibility::Visible;
    }
    if (auto it = ann.find("bbox"); it != ann.end())
      person.bbox = bbox_from_json(*it, where + ".bbox");
    else
      person.bbox = bbox_from_keypoints(person.pose);
    if (auto it = ann.find("score"); it != ann.end())
      person.score = as_double(*it, where + ".score");
    if (auto it = ann.find("track_id"); it != ann.end() && it->is_number_integer())
      person.track_id = it->get<std::int64_t>();
    if (auto it = ann.find("segmentation"); it != ann.end() && !it->is_null()) {
      if (!(it->is_array() && it->empty()))
        person.segmentation = segmentation_from_json(*it);
    }

    auto found = index_of_image.find(image_id);
    if (found == index_of_image.end()) {
      if (images) structure_error(where + " references unknown image " + image_id);
      found = index_of_image.emplace(image_id, ds.images.size()).first;
      ImageRecord im;
      im.id = image_id;
      ds.images.push_back(std::move(im));
    }
    ds.images[found->second].persons.push_back(std::move(person));
  }
  if (!kp_count) ds.schema = crowdpose_schema();
  return ds;
}

// ---------------------------------------------------------------------------
// JTA-like: rows of [frame, person_id, joint_type, x2D, y2D, x3D, y3D, z3D,
// occluded, self_occluded].

Dataset parse_jta_like(const json& doc) {
  const json* rows = &doc;
  int width = 1920;
  int height = 1080;
  if (doc.is_object()) {
    rows = &require(doc, "annotations", "document");
    width = doc.value("width", width);
    height = doc.value("height", height);
  }
  if (!rows->is_array()) structure_error("JTA rows must be an array");

  const PoseSchema& schema = jta_schema();
  // frame -> person id -> pose
  std::map<std::int64_t, std::map<std::int64_t, Pose>> frames;
  for (std::size_t r = 0; r < rows->size(); ++r) {
    const json& row = (*rows)[r];
    const std::string where = "row " + std::to_string(r);
    if (!row.is_array() || row.size() != 10)
      structure_error(where + " must have 10 columns");
    const auto frame = static_cast<std::int64_t>(as_double(row[0], where));
    const auto pid = static_cast<std::int64_t>(as_double(row[1], where));
    const double joint = as_double(row[2], where);
    if (joint < 0.0 || joint >= static_cast<double>(schema.count()) ||
        joint != std::floor(joint))
      throw SchemaMismatchError(where + ": joint type " + row[2].dump() +
                                " outside the 22-joint JTA schema");
    Pose& pose = frames[frame][pid];
    if (pose.keypoints.empty()) pose.keypoints.resize(schema.count());
    Keypoint& kp = pose.keypoints[static_cast<std::size_t>(joint)];
    kp.x = as_double(row[3], where);
    kp.y = as_double(row[4], where);
    kp.vis = visibility_from_jta(as_double(row[8], where) != 0.0,
                                 as_double(row[9], where) != 0.0);
  }

  Dataset ds;
  ds.schema = schema;
  for (auto& [frame, persons] : frames) {
    ImageRecord rec;
    rec.id = std::to_string(frame);
    rec.width = width;
    rec.height = height;
    for (auto& [pid, pose] : persons) {
      PersonInstance person;
      person.bbox = bbox_from_keypoints(pose);
      person.pose = std::move(pose);
      person.track_id = pid;
      rec.persons.push_back(std::move(person));
    }
    ds.images.push_back(std::move(rec));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Native

Dataset parse_native(const json& doc) {
  if (!doc.is_object()) structure_error("native document must be an object");
  if (auto it = doc.find("format");
      it != doc.end() && (!it->is_string() || it->get<std::string>() != kNativeFormatTag))
    structure_error("unexpected format tag " + it->dump());

  Dataset ds;
  ds.schema = schema_from_json(require(doc, "schema", "document"));
  if (auto it = doc.find("meta"); it != doc.end()) {
    if (!it->is_object()) structure_error("meta must be an object");
    ds.meta = *it;
  }
  const json& images = require(doc, "images", "document");
  if (!images.is_array()) structure_error("images must be an array");
  const std::size_t k = ds.schema.count();

  ds.images.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const json& im = images[i];
    const std::string where = "images[" + std::to_string(i) + "]";
    ImageRecord rec;
    rec.id = id_string(require(im, "id", where), where + ".id");
    rec.width = static_cast<int>(as_double(require(im, "width", where), where));
    rec.height = static_cast<int>(as_double(require(im, "height", where), where));
    if (auto it = im.find("source"); it != im.end() && it->is_string())
      rec.source = it->get<std::string>();
    const json& persons = require(im, "persons", where);
    if (!persons.is_array()) structure_error(where + ".persons must be an array");
    for (std::size_t p = 0; p < persons.size(); ++p) {
      const json& pj = persons[p];
      const std::string pw = where + ".persons[" + std::to_string(p) + "]";
      PersonInstance person;
      person.bbox = bbox_from_json(require(pj, "bbox", pw), pw + ".bbox");
      const json& kps = require(pj, "keypoints", pw);
      if (!kps.is_array() || kps.size() % 3 != 0)
        structure_error(pw + ".keypoints must hold x, y, code triplets");
      if (kps.size() / 3 != k)
        throw SchemaMismatchError(pw + " has " + std::to_string(kps.size() / 3) +
                                  " keypoints, schema " + ds.schema.name +
                                  " expects " + std::to_string(k));
      person.pose.keypoints.resize(k);
      for (std::size_t q = 0; q < k; ++q) {
        auto& kp = person.pose.keypoints[q];
        kp.x = as_double(kps[3 * q], pw);
        kp.y = as_double(kps[3 * q + 1], pw);
        const double code = as_double(kps[3 * q + 2], pw);
        if (code != std::floor(code) || code < 0 || code > 3)
          structure_error(pw + " has visibility code " + kps[3 * q + 2].dump());
        kp.vis = visibility_from_native(static_cast<int>(code));
      }
      if (auto it = pj.find("score"); it != pj.end())
        person.score = as_double(*it, pw + ".score");
      if (auto it = pj.find("track_id"); it != pj.end()) {
        if (!it->is_number_integer()) structure_error(pw + ".track_id must be an integer");
        person.track_id = it->get<std::int64_t>();
      }
      if (auto it = pj.find("segmentation"); it != pj.end())
        person.segmentation = segmentation_from_json(*it);
      rec.persons.push_back(std::move(person));
    }
    ds.images.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::Visible: return "visible";
    case Visibility::Occluded: return "occluded";
    case Visibility::SelfOccluded: return "self_occluded";
    case Visibility::Unlabeled: return "unlabeled";
  }
  return "?";
}

Visibility visibility_from_coco(int code) {
  if (code <= 0) return Visibility::Unlabeled;
  if (code == 1) return Visibility::Occluded;
  return Visibility::Visible;
}

int visibility_to_coco(Visibility v) {
  switch (v) {
    case Visibility::Visible:
    case Visibility::SelfOccluded: return 2;
    case Visibility::Occluded: return 1;
    case Visibility::Unlabeled: return 0;
  }
  return 0;
}

Visibility visibility_from_jta(bool occluded, bool self_occluded) {
  if (occluded) return Visibility::Occluded;
  if (self_occluded) return Visibility::SelfOccluded;
  return Visibility::Visible;
}

Visibility visibility_from_native(int code) {
  switch (code) {
    case 1: return Visibility::Occluded;
    case 2: return Visibility::Visible;
    case 3: return Visibility::SelfOccluded;
    default: return Visibility::Unlabeled;
  }
}

int visibility_to_native(Visibility v) {
  switch (v) {
    case Visibility::Occluded: return 1;
    case Visibility::Visible: return 2;
    case Visibility::SelfOccluded: return 3;
    case Visibility::Unlabeled: return 0;
  }
  return 0;
}

std::optional<std::size_t> PoseSchema::index_of(std::string_view keypoint) const {
  for (std::size_t i = 0; i < keypoint_names.size(); ++i)
    if (keypoint_names[i] == keypoint) return i;
  return std::nullopt;
}

const PoseSchema& crowdpose_schema() {
  static const PoseSchema schema{
      "crowdpose",
      {"left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
       "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
       "right_knee", "left_ankle", "right_ankle", "head_top", "neck"}};
  return schema;
}

const PoseSchema& jta_schema() {
  static const PoseSchema schema{
      "jta",
      {"head_top", "head_center", "neck", "right_clavicle", "right_shoulder",
       "right_elbow", "right_wrist", "left_clavicle", "left_shoulder",
       "left_elbow", "left_wrist", "spine0", "spine1", "spine2", "spine3",
       "spine4", "right_hip", "right_knee", "right_ankle", "left_hip",
       "left_knee", "left_ankle"}};
  return schema;
}

const PoseSchema& coco_schema() {
  static const PoseSchema schema{
      "coco",
      {"nose", "left_eye", "right_eye", "left_ear", "right_ear",
       "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
       "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
       "right_knee", "left_ankle", "right_ankle"}};
  return schema;
}

const PoseSchema* schema_for_count(std::size_t count) {
  for (const PoseSchema* s : {&crowdpose_schema(), &jta_schema(), &coco_schema()})
    if (s->count() == count) return s;
  return nullptr;
}

std::size_t Pose::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(
      keypoints.begin(), keypoints.end(),
      [](const Keypoint& kp) { return is_labeled(kp.vis); }));
}

const ImageRecord* Dataset::find(std::string_view image_id) const {
  for (const auto& im : images)
    if (im.id == image_id) return &im;
  return nullptr;
}

std::size_t Dataset::instance_count() const {
  std::size_t n = 0;
  for (const auto& im : images) n += im.persons.size();
  return n;
}

std::optional<DatasetFormat> parse_format_name(std::string_view name) {
  if (name == "coco" || name == "coco_like") return DatasetFormat::CocoLike;
  if (name == "jta" || name == "jta_like") return DatasetFormat::JtaLike;
  if (name == "native") return DatasetFormat::Native;
  return std::nullopt;
}

Dataset parse_dataset(std::string_view bytes, DatasetFormat format) {
  const json doc = parse_json(bytes);
  try {
    switch (format) {
      case DatasetFormat::CocoLike: return parse_coco_like(doc);
      case DatasetFormat::JtaLike: return parse_jta_like(doc);
      case DatasetFormat::Native: return parse_native(doc);
    }
  } catch (const json::exception& e) {
    structure_error(e.what());
  }
  structure_error("unknown format");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), format);
}

json segmentation_to_json(const SegmentMask& mask) {
  if (mask.kind == SegmentMask::Kind::Rle) {
    return json{{"size", json::array({mask.rle.height, mask.rle.width})},
                {"counts", mask.rle.counts}};
  }
  json polys = json::array();
  for (const auto& poly : mask.polygons) {
    json flat = json::array();
    for (const auto& p : poly) {
      flat.push_back(p.x);
      flat.push_back(p.y);
    }
    polys.push_back(std::move(flat));
  }
  return polys;
}

SegmentMask segmentation_from_json(const json& j) {
  SegmentMask mask;
  if (j.is_object()) {
    mask.kind = SegmentMask::Kind::Rle;
    const json& size = require(j, "size", "segmentation");
    if (!size.is_array() || size.size() != 2) structure_error("segmentation.size must be [h, w]");
    mask.rle.height = size[0].get<int>();
    mask.rle.width = size[1].get<int>();
    const json& counts = require(j, "counts", "segmentation");
    if (!counts.is_array())
      structure_error("segmentation.counts must be an uncompressed run-length array");
    for (const auto& c : counts) {
      if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
        structure_error("segmentation.counts entries must be non-negative integers");
      mask.rle.counts.push_back(c.get<std::uint32_t>());
    }
    return mask;
  }
  if (!j.is_array()) structure_error("segmentation must be polygons or RLE");
  mask.kind = SegmentMask::Kind::Polygons;
  for (const auto& flat : j) {
    if (!flat.is_array() || flat.size() % 2 != 0)
      structure_error("segmentation polygon must be a flat x, y list");
    Polygon poly;
    for (std::size_t i = 0; i < flat.size(); i += 2)
      poly.push_back({as_double(flat[i], "polygon"), as_double(flat[i + 1], "polygon")});
    mask.polygons.push_back(std::move(poly));
  }
  return mask;
}

json to_native_json(const Dataset& ds) {
  json images = json::array();
  for (const auto& im : ds.images) {
    json persons = json::array();
    for (const auto& p : im.persons) {
      json kps = json::array();
      for (const auto& kp : p.pose.keypoints) {
        kps.push_back(finite_or_zero(kp.x));
        kps.push_back(finite_or_zero(kp.y));
        kps.push_back(visibility_to_native(kp.vis));
      }
      json pj{{"bbox", bbox_to_json(p.bbox)}, {"keypoints", std::move(kps)}};
      if (p.score) pj["score"] = *p.score;
      if (p.track_id) pj["track_id"] = *p.track_id;
      if (p.segmentation) pj["segmentation"] = segmentation_to_json(*p.segmentation);
      persons.push_back(std::move(pj));
    }
    json ij{{"id", im.id},
            {"width", im.width},
            {"height", im.height},
            {"persons", std::move(persons)}};
    if (im.source) ij["source"] = *im.source;
    images.push_back(std::move(ij));
  }
  return json{{"format", kNativeFormatTag},
              {"version", kNativeVersion},
              {"schema", {{"name", ds.schema.name}, {"keypoints", ds.schema.keypoint_names}}},
              {"meta", ds.meta.is_null() ? json::object() : ds.meta},
              {"images", std::move(images)}};
}

std::string serialize_native(const Dataset& dataset) {
  return to_native_json(dataset).dump() + "\n";
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_native(dataset);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::size_t> mapping_by_name(const PoseSchema& from, const PoseSchema& to) {
  std::vector<std::size_t> mapping;
  mapping.reserve(to.count());
  for (const auto& name : to.keypoint_names) {
    auto idx = from.index_of(name);
    if (!idx)
      throw MappingError("keypoint " + name + " of schema " + to.name +
                         " has no counterpart in schema " + from.name);
    mapping.push_back(*idx);
  }
  return mapping;
}

std::vector<std::size_t> default_jta_to_crowdpose_mapping() {
  return mapping_by_name(jta_schema(), crowdpose_schema());
}

Pose convert_jta_to_crowdpose(const Pose& pose, std::span<const std::size_t> mapping) {
  std::set<std::size_t> seen;
  Pose out;
  out.keypoints.reserve(mapping.size());
  for (std::size_t src : mapping) {
    if (src >= pose.size())
      throw MappingError("mapping index " + std::to_string(src) +
                         " outside pose of " + std::to_string(pose.size()) +
                         " keypoints");
    if (!seen.insert(src).second)
      throw MappingError("mapping index " + std::to_string(src) + " used twice");
    out.keypoints.push_back(pose.keypoints[src]);
  }
  return out;
}

Dataset convert_dataset(const Dataset& dataset, std::span<const std::size_t> mapping,
                        const PoseSchema& target) {
  if (mapping.size() != target.count())
    throw MappingError("mapping has " + std::to_string(mapping.size()) +
                       " entries, target schema " + target.name + " needs " +
                       std::to_string(target.count()));
  Dataset out;
  out.schema = target;
  out.meta = dataset.meta;
  out.images.reserve(dataset.images.size());
  for (const auto& im : dataset.images) {
    ImageRecord rec = im;
    for (auto& p : rec.persons) {
      if (p.pose.size() != dataset.schema.count())
        throw SchemaMismatchError("image " + im.id + " holds a pose of " +
                                  std::to_string(p.pose.size()) + " keypoints");
      p.pose = convert_jta_to_crowdpose(p.pose, mapping);
    }
    out.images.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::size_t> load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mapping " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc = parse_json(buf.str());
  if (doc.is_object()) {
    auto it = doc.find("mapping");
    if (it == doc.end()) structure_error("mapping file lacks \"mapping\"");
    doc = *it;
  }
  if (!doc.is_array()) structure_error("mapping must be an array of indices");
  std::vector<std::size_t> mapping;
  for (const auto& v : doc) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw MappingError("mapping entries must be non-negative integers, got " + v.dump());
    mapping.push_back(v.get<std::size_t>());
  }
  return mapping;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DegenerateBBox: return "degenerate_bbox";
    case ViolationKind::SchemaMismatch: return "schema_mismatch";
    case ViolationKind::NonFiniteKeypoint: return "non_finite_keypoint";
    case ViolationKind::ScoreOutOfRange: return "score_out_of_range";
    case ViolationKind::BadSegmentation: return "bad_segmentation";
    case ViolationKind::DuplicateImageId: return "duplicate_image_id";
    case ViolationKind::InvalidSchema: return "invalid_schema";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(),
      [kind](const Violation& v) { return v.kind == kind; }));
}

std::map<std::string, std::size_t> ValidationReport::counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& v : violations) ++out[std::string(to_string(v.kind))];
  return out;
}

json ValidationReport::to_json() const {
  json list = json::array();
  for (const auto& v : violations) {
    json j{{"kind", to_string(v.kind)}, {"image_id", v.image_id}, {"detail", v.detail}};
    j["person_index"] = v.person_index ? json(*v.person_index) : json(nullptr);
    list.push_back(std::move(j));
  }
  return json{{"ok", ok()}, {"counts", counts()}, {"violations", std::move(list)}};
}

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, const std::string& image,
                 std::optional<std::size_t> person, std::string detail) {
    report.violations.push_back({kind, image, person, std::move(detail)});
  };

  std::set<std::string> names(dataset.schema.keypoint_names.begin(),
                              dataset.schema.keypoint_names.end());
  if (names.size() != dataset.schema.count() || dataset.schema.count() == 0)
    add(ViolationKind::InvalidSchema, "", std::nullopt,
        "schema keypoint names must be unique and non-empty");

  std::set<std::string> ids;
  for (const auto& im : dataset.images) {
    if (!ids.insert(im.id).second)
      add(ViolationKind::DuplicateImageId, im.id, std::nullopt, "image id repeated");
    for (std::size_t p = 0; p < im.persons.size(); ++p) {
      const auto& person = im.persons[p];
      const BBox& b = person.bbox;
      if (!(std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
            std::isfinite(b.h) && b.valid()))
        add(ViolationKind::DegenerateBBox, im.id, p, "bbox must have positive area");
      if (person.pose.size() != dataset.schema.count())
        add(ViolationKind::SchemaMismatch, im.id, p,
            "pose has " + std::to_string(person.pose.size()) + " keypoints, schema has " +
                std::to_string(dataset.schema.count()));
      for (std::size_t k = 0; k < person.pose.size(); ++k) {
        const auto& kp = person.pose.keypoints[k];
        if (is_labeled(kp.vis) && !(std::isfinite(kp.x) && std::isfinite(kp.y)))
          add(ViolationKind::NonFiniteKeypoint, im.id, p,
              "keypoint " + std::to_string(k) + " is labeled but not finite");
      }
      if (person.score && !(*person.score >= 0.0 && *person.score <= 1.0))
        add(ViolationKind::ScoreOutOfRange, im.id, p, "score outside [0, 1]");
      if (person.segmentation) {
        const auto& seg = *person.segmentation;
        if (seg.kind == SegmentMask::Kind::Polygons) {
          for (const auto& poly : seg.polygons)
            if (poly.size() < 3)
              add(ViolationKind::BadSegmentation, im.id, p, "polygon with fewer than 3 vertices");
        } else {
          std::uint64_t total = 0;
          for (auto c : seg.rle.counts) total += c;
          if (total != static_cast<std::uint64_t>(seg.rle.height) *
                           static_cast<std::uint64_t>(seg.rle.width))
            add(ViolationKind::BadSegmentation, im.id, p, "run lengths do not sum to h*w");
        }
      }
    }
  }
  return report;
}

}  // namespace crowdpose
