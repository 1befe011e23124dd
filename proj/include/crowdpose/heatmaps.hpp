#pragma once

// Top-down crop geometry and dual-branch (visible / occluded) Gaussian
// heatmap targets.

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "crowdpose/annotations.hpp"

namespace crowdpose {

inline constexpr int kInputHeight = 256;
inline constexpr int kInputWidth = 192;
inline constexpr int kHeatmapHeight = 64;
inline constexpr int kHeatmapWidth = 48;
inline constexpr int kStride = kInputHeight / kHeatmapHeight;
static_assert(kStride == kInputWidth / kHeatmapWidth);

inline constexpr double kDefaultSigma = 2.0;
inline constexpr double kDefaultConfidenceThreshold = 0.7;

/// Affine map from image coordinates to crop coordinates.
class CropTransform {
 public:
  CropTransform() = default;
  /// Row-major [a b c; d e f]: x' = a x + b y + c, y' = d x + e y + f.
  explicit CropTransform(const std::array<double, 6>& m);

  Point2 apply(Point2 p) const;
  Point2 apply_inverse(Point2 p) const;
  CropTransform inverse() const;
  const std::array<double, 6>& matrix() const { return m_; }

 private:
  std::array<double, 6> m_{1, 0, 0, 0, 1, 0};
};

/// Expands the box symmetrically to a 3:4 (w:h) aspect and maps it onto the
/// 192x256 network input.
CropTransform bbox_to_crop(const BBox& bbox);

/// K x H x W grid, channel-major.
struct Heatmap {
  int keypoints = 0;
  int height = kHeatmapHeight;
  int width = kHeatmapWidth;
  std::vector<double> values;

  Heatmap() = default;
  Heatmap(int k, int h = kHeatmapHeight, int w = kHeatmapWidth)
      : keypoints(k), height(h), width(w),
        values(static_cast<std::size_t>(k) * h * w, 0.0) {}

  std::size_t channel_size() const { return static_cast<std::size_t>(height) * width; }
  double* channel(int k) { return values.data() + k * channel_size(); }
  const double* channel(int k) const { return values.data() + k * channel_size(); }
  double& at(int k, int y, int x) { return values[k * channel_size() + y * width + x]; }
  double at(int k, int y, int x) const { return values[k * channel_size() + y * width + x]; }
  double channel_max(int k) const;
  bool same_shape(const Heatmap& o) const {
    return keypoints == o.keypoints && height == o.height && width == o.width;
  }
  bool operator==(const Heatmap&) const = default;
};

struct HeatmapPair {
  Heatmap visible;
  Heatmap occluded;
  /// Per keypoint: false when the keypoint was labeled but mapped outside the
  /// heatmap and therefore left unencoded.
  std::vector<bool> in_bounds;

  HeatmapPair() = default;
  explicit HeatmapPair(int k, int h = kHeatmapHeight, int w = kHeatmapWidth)
      : visible(k, h, w), occluded(k, h, w), in_bounds(static_cast<std::size_t>(k), true) {}
  int keypoints() const { return visible.keypoints; }
};

/// Writes a peak-1 Gaussian (std `sigma` cells, truncated at 3 sigma) into the
/// visible branch for Visible / SelfOccluded keypoints and into the occluded
/// branch for Occluded ones. Unlabeled keypoints leave both channels zero.
HeatmapPair encode(const Pose& pose, const CropTransform& transform,
                   double sigma = kDefaultSigma);

struct DecodedPose {
  Pose pose;  ///< vis carries the winning branch (Visible or Occluded)
  std::vector<double> confidence;
  std::vector<bool> low_confidence;
};

/// Branch with the larger channel maximum wins (ties go to Visible); argmax
/// is refined by a quarter cell toward the larger neighbour per axis.
DecodedPose decode(const HeatmapPair& pair, const CropTransform& transform,
                   double conf_threshold = kDefaultConfidenceThreshold);

/// Heatmap dump: 16-byte header of little-endian uint32 (magic, K, H, W)
/// followed by K*H*W little-endian float32 for the visible branch, then the
/// occluded branch.
inline constexpr std::uint32_t kHeatmapMagic = 0x31504d48;  // "HMP1"
void write_heatmaps(const std::filesystem::path& path, const HeatmapPair& pair);
HeatmapPair read_heatmaps(const std::filesystem::path& path);

}  // namespace crowdpose
