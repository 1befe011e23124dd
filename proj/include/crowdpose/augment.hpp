#pragma once

// Cutout occlusion augmentation: object, body-part and full-body cutouts,
// their "and"/"or" combinations, and keypoint visibility updates.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdpose/annotations.hpp"
#include "crowdpose/masks.hpp"
#include "crowdpose/rng.hpp"

namespace crowdpose {

enum class AugmentMethod {
  None,
  Objects,
  BodyParts,
  FullBody,
  PartsAndObjects,
  FullAndObjects,
  PartsOrObjects,
  FullOrObjects,
};

std::string_view to_string(AugmentMethod method);
std::optional<AugmentMethod> parse_augment_method(std::string_view name);

/// How the sampled size fraction relates to the person box.
enum class SizeMode {
  Area,    ///< cutout area = f * bbox area
  Linear,  ///< cutout scaled so its larger relative extent = f
};

struct AugmentConfig {
  AugmentMethod method = AugmentMethod::Objects;
  double area_frac_min = 0.08;
  double area_frac_max = 0.70;
  double or_probability = 0.5;  ///< probability of the object branch under "or"
  std::uint64_t seed = 0;
  SizeMode size_mode = SizeMode::Area;
  /// Body-part crop size as a fraction of the person cutout's area.
  double part_frac_min = 0.2;
  double part_frac_max = 0.6;

  void check() const;
};

struct CutoutInventory {
  std::vector<Cutout> objects;
  std::vector<Cutout> persons;
};

/// Layout: <dir>/inventory.json indexing PAM files under objects/ and persons/.
void save_inventory(const std::filesystem::path& dir, const CutoutInventory& inventory);
CutoutInventory load_inventory(const std::filesystem::path& dir);

struct PixelRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const PixelRect&) const = default;
};

struct Placement {
  CutoutKind kind = CutoutKind::Object;
  std::size_t cutout_index = 0;
  /// Real-valued destination box in image coordinates.
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  double size_frac = 0.0;
  /// Body parts: sub-rectangle of the source person cutout.
  std::optional<PixelRect> part;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  /// Integer raster placement used for compositing.
  PixelRect pixel_rect() const;
  nlohmann::json to_json() const;
  static Placement from_json(const nlohmann::json& j);
};

/// Random object from the inventory scaled to a size fraction in
/// [area_frac_min, area_frac_max] (aspect kept), centre uniform in the box.
Placement plan_object_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                             const AugmentConfig& cfg = {});
/// Random sub-rectangle of a person cutout, placed like an object.
Placement plan_body_part_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                                const AugmentConfig& cfg = {});
/// Person cutout with its centre inside the box but outside the central
/// 50% x 50% region.
Placement plan_full_body_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                                const AugmentConfig& cfg = {});

/// True when (x, y) lies in the closed central half of the box on both axes.
bool in_central_region(const BBox& box, double x, double y);

/// The cutout a placement pastes (a crop for body parts).
Cutout placement_source(const Placement& placement, const CutoutInventory& inventory);

struct FlagChange {
  std::size_t person = 0;
  std::size_t keypoint = 0;
  Visibility from = Visibility::Visible;
  Visibility to = Visibility::Occluded;
  bool operator==(const FlagChange&) const = default;
};

struct AugmentationLog {
  std::string image_id;
  std::size_t target = 0;
  std::vector<Placement> placements;
  std::vector<FlagChange> changes;

  nlohmann::json to_json() const;
};

struct AugmentResult {
  RasterImage image;
  ImageRecord record;
  AugmentationLog log;
};

/// Pastes cutouts around persons[target] and turns every Visible or
/// SelfOccluded keypoint (of any person) whose floor pixel became opaque into
/// Occluded. Inputs are not modified.
AugmentResult apply_augmentation(Rng& rng, const RasterImage& image, const ImageRecord& record,
                                 std::size_t target, const AugmentConfig& cfg,
                                 const CutoutInventory& inventory);

/// Augments every person of an image in turn using the per-image stream
/// derived from (cfg.seed, record.id).
struct ImageAugmentation {
  RasterImage image;
  ImageRecord record;
  std::vector<AugmentationLog> logs;
};
ImageAugmentation augment_image(const RasterImage& image, const ImageRecord& record,
                                const AugmentConfig& cfg, const CutoutInventory& inventory);

}  // namespace crowdpose
