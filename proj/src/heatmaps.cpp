#include "crowdpose/heatmaps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "crowdpose/errors.hpp"

namespace crowdpose {

CropTransform::CropTransform(const std::array<double, 6>& m) : m_(m) {
  const double det = m_[0] * m_[4] - m_[1] * m_[3];
  if (det == 0.0 || !std::isfinite(det)) throw GeometryError("crop transform is singular");
}

Point2 CropTransform::apply(Point2 p) const {
  return {m_[0] * p.x + m_[1] * p.y + m_[2], m_[3] * p.x + m_[4] * p.y + m_[5]};
}

CropTransform CropTransform::inverse() const {
  const double det = m_[0] * m_[4] - m_[1] * m_[3];
  const double a = m_[4] / det, b = -m_[1] / det;
  const double d = -m_[3] / det, e = m_[0] / det;
  return CropTransform({a, b, -(a * m_[2] + b * m_[5]), d, e, -(d * m_[2] + e * m_[5])});
}

Point2 CropTransform::apply_inverse(Point2 p) const {
  // Solve directly rather than through inverse() to keep roundtrips tight.
  const double det = m_[0] * m_[4] - m_[1] * m_[3];
  const double u = p.x - m_[2];
  const double v = p.y - m_[5];
  return {(m_[4] * u - m_[1] * v) / det, (m_[0] * v - m_[3] * u) / det};
}

CropTransform bbox_to_crop(const BBox& bbox) {
  if (!bbox.valid()) throw GeometryError("bbox must have positive area");
  constexpr double aspect = double(kInputWidth) / double(kInputHeight);
  const double cx = bbox.x + bbox.w / 2.0;
  const double cy = bbox.y + bbox.h / 2.0;
  double w = bbox.w;
  double h = bbox.h;
  if (w > aspect * h) h = w / aspect;
  else w = h * aspect;
  const double s = kInputHeight / h;
  return CropTransform({s, 0.0, kInputWidth / 2.0 - s * cx, 0.0, s, kInputHeight / 2.0 - s * cy});
}

double Heatmap::channel_max(int k) const {
  const double* c = channel(k);
  return *std::max_element(c, c + channel_size());
}

HeatmapPair encode(const Pose& pose, const CropTransform& transform, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
  const int k_count = static_cast<int>(pose.size());
  HeatmapPair pair(k_count);
  const double radius = 3.0 * sigma;
  const double two_var = 2.0 * sigma * sigma;

  for (int k = 0; k < k_count; ++k) {
    const Keypoint& kp = pose.keypoints[static_cast<std::size_t>(k)];
    if (!is_labeled(kp.vis)) continue;
    const Point2 c = transform.apply({kp.x, kp.y});
    const double u = c.x / kStride;
    const double v = c.y / kStride;
    // Inside the hull of cell centers; anything else is left unencoded.
    if (!(u >= 0.0 && u <= kHeatmapWidth - 1 && v >= 0.0 && v <= kHeatmapHeight - 1)) {
      pair.in_bounds[static_cast<std::size_t>(k)] = false;
      continue;
    }
    Heatmap& target = kp.vis == Visibility::Occluded ? pair.occluded : pair.visible;
    const int x0 = std::max(0, static_cast<int>(std::ceil(u - radius)));
    const int x1 = std::min(kHeatmapWidth - 1, static_cast<int>(std::floor(u + radius)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(v - radius)));
    const int y1 = std::min(kHeatmapHeight - 1, static_cast<int>(std::floor(v + radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (x - u) * (x - u) + (y - v) * (y - v);
        if (d2 > radius * radius) continue;
        target.at(k, y, x) = std::exp(-d2 / two_var);
      }
  }
  return pair;
}

namespace {

// Quarter-cell shift toward the larger neighbour; a missing neighbour counts
// as zero.
double refine(double left, double right) {
  if (right > left) return 0.25;
  if (left > right) return -0.25;
  return 0.0;
}

}  // namespace

DecodedPose decode(const HeatmapPair& pair, const CropTransform& transform,
                   double conf_threshold) {
  if (!pair.visible.same_shape(pair.occluded))
    throw DimensionError("visible and occluded branches differ in shape");
  const int k_count = pair.keypoints();
  const int h = pair.visible.height;
  const int w = pair.visible.width;
  DecodedPose out;
  out.pose.keypoints.resize(static_cast<std::size_t>(k_count));
  out.confidence.resize(static_cast<std::size_t>(k_count));
  out.low_confidence.resize(static_cast<std::size_t>(k_count));

  for (int k = 0; k < k_count; ++k) {
    const double vis_max = pair.visible.channel_max(k);
    const double occ_max = pair.occluded.channel_max(k);
    const bool visible = vis_max >= occ_max;
    const Heatmap& hm = visible ? pair.visible : pair.occluded;
    const double* ch = hm.channel(k);
    const std::size_t arg =
        static_cast<std::size_t>(std::max_element(ch, ch + hm.channel_size()) - ch);
    const int ax = static_cast<int>(arg % static_cast<std::size_t>(w));
    const int ay = static_cast<int>(arg / static_cast<std::size_t>(w));
    const double left = ax > 0 ? hm.at(k, ay, ax - 1) : 0.0;
    const double right = ax + 1 < w ? hm.at(k, ay, ax + 1) : 0.0;
    const double up = ay > 0 ? hm.at(k, ay - 1, ax) : 0.0;
    const double down = ay + 1 < h ? hm.at(k, ay + 1, ax) : 0.0;
    const double u = ax + refine(left, right);
    const double v = ay + refine(up, down);
    const Point2 img = transform.apply_inverse({u * kStride, v * kStride});

    const double conf = std::max(vis_max, occ_max);
    auto& kp = out.pose.keypoints[static_cast<std::size_t>(k)];
    kp = Keypoint{img.x, img.y, visible ? Visibility::Visible : Visibility::Occluded};
    out.confidence[static_cast<std::size_t>(k)] = conf;
    out.low_confidence[static_cast<std::size_t>(k)] = conf < conf_threshold;
  }
  return out;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_branch(std::ofstream& out, const Heatmap& hm) {
  for (double v : hm.values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

}  // namespace

void write_heatmaps(const std::filesystem::path& path, const HeatmapPair& pair) {
  if (!pair.visible.same_shape(pair.occluded))
    throw DimensionError("visible and occluded branches differ in shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put_u32(out, kHeatmapMagic);
  put_u32(out, static_cast<std::uint32_t>(pair.visible.keypoints));
  put_u32(out, static_cast<std::uint32_t>(pair.visible.height));
  put_u32(out, static_cast<std::uint32_t>(pair.visible.width));
  put_branch(out, pair.visible);
  put_branch(out, pair.occluded);
  if (!out) throw IoError("write failed for " + path.string());
}

HeatmapPair read_heatmaps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  if (in.gcount() != 16 || get_u32(header) != kHeatmapMagic)
    throw IoError("not a heatmap dump: " + path.string());
  const auto k = static_cast<int>(get_u32(header + 4));
  const auto h = static_cast<int>(get_u32(header + 8));
  const auto w = static_cast<int>(get_u32(header + 12));
  if (k < 0 || h <= 0 || w <= 0 || static_cast<long long>(k) * h * w > (1LL << 28))
    throw IoError("implausible heatmap dimensions in " + path.string());
  HeatmapPair pair(k, h, w);
  std::vector<unsigned char> buf(pair.visible.values.size() * 4);
  for (Heatmap* hm : {&pair.visible, &pair.occluded}) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw IoError("truncated heatmap dump " + path.string());
    for (std::size_t i = 0; i < hm->values.size(); ++i)
      hm->values[i] = std::bit_cast<float>(get_u32(buf.data() + 4 * i));
  }
  return pair;
}

}  // namespace crowdpose
