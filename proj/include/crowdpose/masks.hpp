#pragma once

// Segmentation decoding, cutout extraction and binary-alpha compositing.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "crowdpose/annotations.hpp"

namespace crowdpose {

/// Row-major binary mask, one byte per pixel (0 or 1).
struct Bitmask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Bitmask() = default;
  Bitmask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v = 1) { bits[static_cast<std::size_t>(y) * width + x] = v; }
  std::size_t area() const;
  bool operator==(const Bitmask&) const = default;
};

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  bool operator==(const Rgba&) const = default;
};

/// Row-major RGBA8 raster.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 4

  RasterImage() = default;
  RasterImage(int w, int h, Rgba fill = {0, 0, 0, 255});

  Rgba at(int x, int y) const {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 4;
    return {pixels[o], pixels[o + 1], pixels[o + 2], pixels[o + 3]};
  }
  void set(int x, int y, Rgba c) {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 4;
    pixels[o] = c.r;
    pixels[o + 1] = c.g;
    pixels[o + 2] = c.b;
    pixels[o + 3] = c.a;
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool operator==(const RasterImage&) const = default;
};

enum class CutoutKind { Object, BodyPart, FullBody };

std::string_view to_string(CutoutKind kind);

/// Alpha-masked patch. Alpha is binary and `src_bbox` is the tight bound of
/// the opaque pixels in the source image.
struct Cutout {
  RasterImage raster;
  BBox src_bbox;
  CutoutKind kind = CutoutKind::Object;
  /// Cutout-local keypoints (person cutouts only).
  std::optional<std::vector<Keypoint>> keypoints;
};

/// Even-odd fill at pixel centers, union over polygons.
Bitmask decode_polygon(const SegmentMask& mask, int width, int height);
/// Column-major runs starting with background.
Bitmask decode_rle(const SegmentMask& mask);
RleCounts encode_rle(const Bitmask& mask);
/// Decodes either kind; polygons are rasterized at the given image size.
Bitmask decode_segmentation(const SegmentMask& mask, int width, int height);

Cutout extract_cutout(const RasterImage& image, const Bitmask& mask, CutoutKind kind);

/// Nearest-neighbour scale of `cutout` to dst_w x dst_h placed at (dst_x,
/// dst_y); opaque pixels replace the target, pixels outside are clipped.
RasterImage composite(const RasterImage& target, const Cutout& cutout, int dst_x,
                      int dst_y, int dst_w, int dst_h);
/// Same traversal as composite(), but marks which target pixels were
/// overwritten into `coverage` (sized like the target).
void composite_into(RasterImage& target, const Cutout& cutout, int dst_x, int dst_y,
                    int dst_w, int dst_h, Bitmask* coverage = nullptr);

/// Source pixel index for destination offset `d` of `dst` samples over `src`
/// samples (floor rounding).
constexpr int nearest_source_index(int d, int dst, int src) {
  return static_cast<int>((static_cast<long long>(d) * src) / dst);
}

// Netpbm raster I/O. P6 carries RGB (alpha reads back as 255); PAM carries
// RGBA. 16-bit grayscale PAM is used for depth maps.
void write_ppm(const std::filesystem::path& path, const RasterImage& image);
void write_pam(const std::filesystem::path& path, const RasterImage& image);
/// Reads P6 PPM or RGBA/RGB PAM.
RasterImage read_image(const std::filesystem::path& path);

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;  // row-major

  DepthMap() = default;
  DepthMap(int w, int h, std::uint16_t fill)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}
  std::uint16_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const DepthMap&) const = default;
};

void write_depth_pam(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_pam(const std::filesystem::path& path);

}  // namespace crowdpose
