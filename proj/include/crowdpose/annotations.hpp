#pragma once

// Canonical pose-annotation model, the COCO-like / JTA-like / native parsers,
// and JTA to CrowdPose keypoint conversion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace crowdpose {

enum class Visibility : std::uint8_t { Visible, Occluded, SelfOccluded, Unlabeled };

std::string_view to_string(Visibility v);

/// Labeled means the keypoint carries trustworthy coordinates.
constexpr bool is_labeled(Visibility v) { return v != Visibility::Unlabeled; }

/// COCO visibility code: 2 -> Visible, 1 -> Occluded, 0 -> Unlabeled.
Visibility visibility_from_coco(int code);
int visibility_to_coco(Visibility v);
/// JTA flag pair. Both flags set resolves to Occluded.
Visibility visibility_from_jta(bool occluded, bool self_occluded);
/// Native four-state code: 0 unlabeled, 1 occluded, 2 visible, 3 self-occluded.
Visibility visibility_from_native(int code);
int visibility_to_native(Visibility v);

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  Visibility vis = Visibility::Unlabeled;

  bool operator==(const Keypoint&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Axis-aligned box, top-left origin, in image pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0; }
  /// Closed-box containment: points on an edge count as inside.
  bool contains(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }
  bool operator==(const BBox&) const = default;
};

/// Column-major run lengths, first run is background.
struct RleCounts {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  bool operator==(const RleCounts&) const = default;
};

using Polygon = std::vector<Point2>;

struct SegmentMask {
  enum class Kind { Polygons, Rle };
  Kind kind = Kind::Polygons;
  std::vector<Polygon> polygons;
  RleCounts rle;
  bool operator==(const SegmentMask&) const = default;
};

struct PoseSchema {
  std::string name;
  std::vector<std::string> keypoint_names;

  std::size_t count() const { return keypoint_names.size(); }
  /// Index of a keypoint name, or nullopt.
  std::optional<std::size_t> index_of(std::string_view keypoint) const;
  bool operator==(const PoseSchema&) const = default;
};

/// CrowdPose order: shoulders, elbows, wrists, hips, knees, ankles (left
/// before right), then head_top and neck.
const PoseSchema& crowdpose_schema();
/// JTA 22-joint order as published with the JTA dataset.
const PoseSchema& jta_schema();
/// COCO 17-keypoint order.
const PoseSchema& coco_schema();
/// Built-in schema with the given keypoint count, if any.
const PoseSchema* schema_for_count(std::size_t count);

struct Pose {
  std::vector<Keypoint> keypoints;

  std::size_t size() const { return keypoints.size(); }
  std::size_t labeled_count() const;
  bool operator==(const Pose&) const = default;
};

struct PersonInstance {
  BBox bbox;
  Pose pose;
  std::optional<SegmentMask> segmentation;
  std::optional<double> score;
  std::optional<std::int64_t> track_id;
  bool operator==(const PersonInstance&) const = default;
};

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::optional<std::string> source;
  std::vector<PersonInstance> persons;
  bool operator==(const ImageRecord&) const = default;
};

struct Dataset {
  PoseSchema schema;
  std::vector<ImageRecord> images;
  nlohmann::json meta = nlohmann::json::object();

  const ImageRecord* find(std::string_view image_id) const;
  std::size_t instance_count() const;
  bool operator==(const Dataset&) const = default;
};

enum class DatasetFormat { CocoLike, JtaLike, Native };

std::optional<DatasetFormat> parse_format_name(std::string_view name);

/// Parses a UTF-8 JSON document. Malformed JSON raises ParseError carrying
/// the byte offset; an unsupported keypoint count raises SchemaMismatchError.
Dataset parse_dataset(std::string_view bytes, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Native JSON. Output is canonical: a second parse/serialize pass is
/// byte-identical.
std::string serialize_native(const Dataset& dataset);
nlohmann::json to_native_json(const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

nlohmann::json segmentation_to_json(const SegmentMask& mask);
SegmentMask segmentation_from_json(const nlohmann::json& j);

/// Builds a mapping (one source index per target keypoint) by matching
/// keypoint names. Throws MappingError if a target name is missing.
std::vector<std::size_t> mapping_by_name(const PoseSchema& from,
                                         const PoseSchema& to);
/// mapping_by_name(jta_schema(), crowdpose_schema()).
std::vector<std::size_t> default_jta_to_crowdpose_mapping();

/// Output keypoint k is input keypoint mapping[k], copied bitwise.
Pose convert_jta_to_crowdpose(const Pose& pose,
                              std::span<const std::size_t> mapping);
/// Applies the conversion to every pose and swaps in the CrowdPose schema.
Dataset convert_dataset(const Dataset& dataset,
                        std::span<const std::size_t> mapping,
                        const PoseSchema& target = crowdpose_schema());
/// Reads a mapping file: either a bare JSON array or {"mapping": [...]}.
std::vector<std::size_t> load_mapping(const std::filesystem::path& path);

enum class ViolationKind {
  DegenerateBBox,
  SchemaMismatch,
  NonFiniteKeypoint,
  ScoreOutOfRange,
  BadSegmentation,
  DuplicateImageId,
  InvalidSchema,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string image_id;
  std::optional<std::size_t> person_index;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
  std::map<std::string, std::size_t> counts() const;
  nlohmann::json to_json() const;
};

ValidationReport validate(const Dataset& dataset);

}  // namespace crowdpose
