#pragma once

// Procedural annotated crowd scenes: 2D capsule bodies posed from activity
// templates, z-ordered rendering with an exact depth buffer, geometric
// visibility flags, and corpus generation targeting a CrowdIndex histogram.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowdpose/annotations.hpp"
#include "crowdpose/augment.hpp"
#include "crowdpose/masks.hpp"
#include "crowdpose/rng.hpp"

namespace crowdpose {

inline constexpr std::size_t kTemplateKeypoints = 14;  // CrowdPose order

struct PoseTemplate {
  std::string name;
  /// Unit body frame, x right, y down, both in [0, 1].
  std::array<Point2, kTemplateKeypoints> keypoints;
  /// Per-keypoint positional std (unit frame).
  std::array<double, kTemplateKeypoints> jitter;
  /// Per-keypoint relative depth; negative is nearer the camera.
  std::array<int, kTemplateKeypoints> depth;
};

/// walking, standing, sitting, yoga, pushup, cheering, fighting.
const std::vector<PoseTemplate>& default_templates();

enum class DepthModel { UniformZ, GroundPlane };

struct SceneConfig {
  int image_w = 320;
  int image_h = 240;
  int min_persons = 1;
  int max_persons = 14;
  double min_height = 48.0;  ///< person size range in pixels
  double max_height = 128.0;
  DepthModel depth_model = DepthModel::UniformZ;
  double limb_radius_frac = 0.04;
  /// Overlap pressure in [0, 1]: more persons, tighter clusters.
  double pressure = 0.5;
  /// When set, generate_scene() adapts pressure and retries until the scene
  /// CrowdIndex lands within 0.05 of the target (closest scene otherwise).
  std::optional<double> target_crowd_index;
  std::uint64_t seed = 0;

  void check() const;
};

/// One limb capsule in image coordinates.
struct Capsule {
  Point2 a;
  Point2 b;
  double radius = 1.0;
  int level = 0;  ///< intra-person depth level in [0, 64)
  std::size_t from = 0, to = 0;  ///< keypoint indices
};

/// True when the pixel centre (cx, cy) lies within the capsule.
bool capsule_covers(const Capsule& c, double cx, double cy);

struct ScenePerson {
  std::string activity;
  bool facing_back = false;
  std::size_t rank = 0;  ///< 0 = nearest
  std::vector<Capsule> capsules;
  std::array<int, kTemplateKeypoints> keypoint_level{};
};

/// Depth-map encoding: rank * 64 + level, background 65535.
inline constexpr std::uint16_t kDepthBackground = 65535;
inline constexpr int kDepthLevels = 64;
inline constexpr int kMaxScenePersons = 1000;

struct Scene {
  ImageRecord record;
  RasterImage image;
  DepthMap depth;
  std::vector<ScenePerson> persons;
  double crowd_index = 0.0;
};

/// Persons with template + jitter at random positions/scales/depths, rendered
/// back to front; flags are derived geometrically from the capsules.
Scene generate_scene(Rng& rng, const SceneConfig& cfg,
                     const std::vector<PoseTemplate>& templates = default_templates());

struct CorpusConfig {
  std::size_t scenes = 100;
  SceneConfig scene;
  /// Bin weights over [0, 1]; empty means uniform over `bins`.
  std::vector<double> target_histogram;
  std::size_t bins = 10;
  double tolerance = 0.03;
  /// Candidate budget as a multiple of `scenes`.
  double retry_factor = 50.0;
  std::size_t batch_size = 64;
  unsigned jobs = 1;

  std::vector<double> weights() const;
  void check() const;
};

struct Corpus {
  Dataset dataset;            ///< meta.crowd_index holds the per-scene values
  std::vector<Scene> scenes;  ///< parallel to dataset.images
  std::vector<std::size_t> histogram;
  std::size_t candidates = 0;
};

/// Rejection sampling with per-bin adaptive overlap pressure until each bin
/// holds its share of `scenes`. Throws TargetingError when the candidate
/// budget runs out.
Corpus generate_corpus(std::uint64_t seed, const CorpusConfig& cfg,
                       const std::vector<PoseTemplate>& templates = default_templates());

/// Writes annotations.json plus images/<id>.pam and depth/<id>.pam.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, bool rasters = true);

struct DensityGrid {
  int bins_x = 0;
  int bins_y = 0;
  std::vector<std::size_t> counts;  ///< row-major, bins_y rows
  std::size_t at(int x, int y) const { return counts[static_cast<std::size_t>(y) * bins_x + x]; }
  std::size_t total() const;
};

/// 2D histogram of one keypoint's position normalised to its person box
/// (clamped to the box).
DensityGrid keypoint_density_map(const Dataset& dataset, std::string_view keypoint, int bins_x,
                                 int bins_y);

/// Person cutouts taken from rendered scenes (front-most pixels only) plus
/// `object_count` random polygon objects.
CutoutInventory build_inventory(Rng& rng, const std::vector<Scene>& scenes,
                                std::size_t object_count, std::size_t max_persons = 64);

}  // namespace crowdpose
