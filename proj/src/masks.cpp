#include "crowdpose/masks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crowdpose/errors.hpp"

namespace crowdpose {

namespace {

// Smallest integer x with x + 0.5 >= a, evaluated with the same predicate
// the per-pixel test uses so boundary pixels are classified identically.
int first_center_at_or_after(double a, int lo, int hi) {
  if (!(a > lo + 0.5)) return lo;
  if (a > hi + 0.5) return hi + 1;
  int x = static_cast<int>(std::ceil(a - 0.5));
  while (x > lo && (x - 1) + 0.5 >= a) --x;
  while (x <= hi && x + 0.5 < a) ++x;
  return x;
}

void fill_polygon(const Polygon& poly, Bitmask& out) {
  std::vector<double> xs;
  const std::size_t n = poly.size();
  for (int y = 0; y < out.height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = poly[i];
      const Point2& b = poly[j];
      if ((a.y > yc) != (b.y > yc))
        xs.push_back((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = first_center_at_or_after(xs[k], 0, out.width - 1);
      const int x1 = first_center_at_or_after(xs[k + 1], 0, out.width - 1);
      for (int x = x0; x < x1; ++x) out.set(x, y);
    }
  }
}

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int depth = 0;
  int maxval = 0;
};

std::string read_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int c = in.peek();
    if (c == EOF) return tok;
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  in >> tok;
  return tok;
}

int to_int(const std::string& s, const std::filesystem::path& path) {
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    throw IoError("malformed netpbm header in " + path.string());
  }
}

NetpbmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  NetpbmHeader h;
  h.magic = read_token(in);
  if (h.magic == "P6") {
    h.width = to_int(read_token(in), path);
    h.height = to_int(read_token(in), path);
    h.maxval = to_int(read_token(in), path);
    h.depth = 3;
    in.get();  // single whitespace before raster
  } else if (h.magic == "P7") {
    for (;;) {
      const std::string key = read_token(in);
      if (key.empty()) throw IoError("truncated PAM header in " + path.string());
      if (key == "ENDHDR") break;
      if (key == "TUPLTYPE") {
        read_token(in);
        continue;
      }
      const int value = to_int(read_token(in), path);
      if (key == "WIDTH") h.width = value;
      else if (key == "HEIGHT") h.height = value;
      else if (key == "DEPTH") h.depth = value;
      else if (key == "MAXVAL") h.maxval = value;
    }
    in.get();  // newline after ENDHDR
  } else {
    throw IoError("unsupported raster format in " + path.string());
  }
  if (h.width <= 0 || h.height <= 0 || h.depth <= 0 || h.maxval <= 0)
    throw IoError("invalid raster dimensions in " + path.string());
  return h;
}

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 const std::uint8_t* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header;
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::size_t Bitmask::area() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

RasterImage::RasterImage(int w, int h, Rgba fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4) {
  for (std::size_t i = 0; i < pixels.size(); i += 4) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
    pixels[i + 3] = fill.a;
  }
}

std::string_view to_string(CutoutKind kind) {
  switch (kind) {
    case CutoutKind::Object: return "object";
    case CutoutKind::BodyPart: return "body_part";
    case CutoutKind::FullBody: return "full_body";
  }
  return "?";
}

Bitmask decode_polygon(const SegmentMask& mask, int width, int height) {
  if (mask.kind != SegmentMask::Kind::Polygons)
    throw GeometryError("decode_polygon expects a polygon mask");
  if (width < 0 || height < 0) throw GeometryError("negative mask size");
  Bitmask out(width, height);
  for (const auto& poly : mask.polygons) {
    if (poly.size() < 3)
      throw GeometryError("polygon with " + std::to_string(poly.size()) +
                          " vertices; at least 3 required");
    Bitmask single(width, height);
    fill_polygon(poly, single);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= single.bits[i];
  }
  return out;
}

Bitmask decode_rle(const SegmentMask& mask) {
  if (mask.kind != SegmentMask::Kind::Rle) throw DecodeError("decode_rle expects an RLE mask");
  const auto& rle = mask.rle;
  if (rle.height < 0 || rle.width < 0) throw DecodeError("negative RLE size");
  const std::uint64_t total = static_cast<std::uint64_t>(rle.height) * rle.width;
  std::uint64_t sum = 0;
  for (auto c : rle.counts) sum += c;
  if (sum != total)
    throw DecodeError("run lengths sum to " + std::to_string(sum) + ", expected " +
                      std::to_string(total));
  Bitmask out(rle.width, rle.height);
  std::uint64_t pos = 0;
  std::uint8_t value = 0;
  for (auto c : rle.counts) {
    for (std::uint32_t i = 0; i < c; ++i, ++pos) {
      if (value) {
        const int x = static_cast<int>(pos / static_cast<std::uint64_t>(rle.height));
        const int y = static_cast<int>(pos % static_cast<std::uint64_t>(rle.height));
        out.set(x, y);
      }
    }
    value ^= 1;
  }
  return out;
}

RleCounts encode_rle(const Bitmask& mask) {
  RleCounts rle{mask.height, mask.width, {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) {
      const std::uint8_t v = mask.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

Bitmask decode_segmentation(const SegmentMask& mask, int width, int height) {
  return mask.kind == SegmentMask::Kind::Rle ? decode_rle(mask)
                                             : decode_polygon(mask, width, height);
}

Cutout extract_cutout(const RasterImage& image, const Bitmask& mask, CutoutKind kind) {
  if (mask.width != image.width || mask.height != image.height)
    throw GeometryError("mask and image sizes differ");
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw EmptyCutoutError("mask has no foreground pixel");

  Cutout cut;
  cut.kind = kind;
  cut.src_bbox = BBox{double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
  cut.raster = RasterImage(x1 - x0 + 1, y1 - y0 + 1, Rgba{0, 0, 0, 0});
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      if (!mask.at(x, y)) continue;
      Rgba c = image.at(x, y);
      c.a = 255;
      cut.raster.set(x - x0, y - y0, c);
    }
  return cut;
}

void composite_into(RasterImage& target, const Cutout& cutout, int dst_x, int dst_y,
                    int dst_w, int dst_h, Bitmask* coverage) {
  if (dst_w < 1 || dst_h < 1) throw GeometryError("composite size must be at least 1x1");
  const RasterImage& src = cutout.raster;
  if (src.width <= 0 || src.height <= 0) return;
  for (int dy = 0; dy < dst_h; ++dy) {
    const int ty = dst_y + dy;
    if (ty < 0 || ty >= target.height) continue;
    const int sy = nearest_source_index(dy, dst_h, src.height);
    for (int dx = 0; dx < dst_w; ++dx) {
      const int tx = dst_x + dx;
      if (tx < 0 || tx >= target.width) continue;
      const int sx = nearest_source_index(dx, dst_w, src.width);
      Rgba c = src.at(sx, sy);
      if (c.a == 0) continue;
      c.a = 255;
      target.set(tx, ty, c);
      if (coverage) coverage->set(tx, ty);
    }
  }
}

RasterImage composite(const RasterImage& target, const Cutout& cutout, int dst_x, int dst_y,
                      int dst_w, int dst_h) {
  RasterImage out = target;
  composite_into(out, cutout, dst_x, dst_y, dst_w, dst_h);
  return out;
}

void write_ppm(const std::filesystem::path& path, const RasterImage& image) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(image.width) * image.height * 3);
  for (std::size_t i = 0; i < image.pixels.size(); i += 4)
    rgb.insert(rgb.end(), image.pixels.begin() + static_cast<std::ptrdiff_t>(i),
               image.pixels.begin() + static_cast<std::ptrdiff_t>(i) + 3);
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  write_bytes(path, header, rgb.data(), rgb.size());
}

void write_pam(const std::filesystem::path& path, const RasterImage& image) {
  const std::string header = "P7\nWIDTH " + std::to_string(image.width) + "\nHEIGHT " +
                             std::to_string(image.height) +
                             "\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n";
  write_bytes(path, header, image.pixels.data(), image.pixels.size());
}

RasterImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster " + path.string());
  const NetpbmHeader h = read_header(in, path);
  if (h.maxval != 255 || (h.depth != 3 && h.depth != 4))
    throw IoError("only 8-bit RGB/RGBA rasters are supported: " + path.string());
  std::vector<std::uint8_t> data(static_cast<std::size_t>(h.width) * h.height * h.depth);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw IoError("truncated raster data in " + path.string());
  RasterImage img(h.width, h.height);
  for (std::size_t p = 0; p < static_cast<std::size_t>(h.width) * h.height; ++p) {
    for (int c = 0; c < 3; ++c) img.pixels[p * 4 + c] = data[p * h.depth + c];
    img.pixels[p * 4 + 3] = h.depth == 4 ? data[p * 4 + 3] : 255;
  }
  return img;
}

void write_depth_pam(const std::filesystem::path& path, const DepthMap& depth) {
  std::vector<std::uint8_t> data;
  data.reserve(depth.values.size() * 2);
  for (auto v : depth.values) {
    data.push_back(static_cast<std::uint8_t>(v >> 8));
    data.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  const std::string header = "P7\nWIDTH " + std::to_string(depth.width) + "\nHEIGHT " +
                             std::to_string(depth.height) +
                             "\nDEPTH 1\nMAXVAL 65535\nTUPLTYPE GRAYSCALE\nENDHDR\n";
  write_bytes(path, header, data.data(), data.size());
}

DepthMap read_depth_pam(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open depth map " + path.string());
  const NetpbmHeader h = read_header(in, path);
  if (h.magic != "P7" || h.depth != 1 || h.maxval != 65535)
    throw IoError("expected a 16-bit grayscale PAM: " + path.string());
  DepthMap out(h.width, h.height, 0);
  std::vector<std::uint8_t> data(out.values.size() * 2);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw IoError("truncated depth data in " + path.string());
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = static_cast<std::uint16_t>((data[2 * i] << 8) | data[2 * i + 1]);
  return out;
}

}  // namespace crowdpose
