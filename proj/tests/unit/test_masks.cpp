#include <gtest/gtest.h>

#include <cmath>

#include "crowdpose/errors.hpp"
#include "crowdpose/masks.hpp"
#include "support.hpp"

using namespace crowdpose;

namespace {

// Classic crossing-number point-in-polygon test.
bool pnpoly(const Polygon& poly, double x, double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

Bitmask oracle_polygons(const std::vector<Polygon>& polys, int w, int h) {
  Bitmask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& p : polys)
        if (pnpoly(p, x + 0.5, y + 0.5)) m.set(x, y);
  return m;
}

// Column-major runs, first run background (possibly empty).
std::vector<std::uint32_t> oracle_rle(const Bitmask& m) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t len = 0;
  for (int x = 0; x < m.width; ++x)
    for (int y = 0; y < m.height; ++y) {
      const std::uint8_t v = m.at(x, y) ? 1 : 0;
      if (v != current) {
        runs.push_back(len);
        len = 0;
        current = v;
      }
      ++len;
    }
  runs.push_back(len);
  return runs;
}

Bitmask random_mask(Rng& rng, int w, int h) {
  Bitmask m(w, h);
  const double density = rng.uniform();
  for (auto& b : m.bits) b = rng.bernoulli(density) ? 1 : 0;
  return m;
}

RasterImage random_raster(Rng& rng, int w, int h) {
  RasterImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(256));
  return img;
}

}  // namespace

TEST(Polygon, AxisAlignedRectangleArea) {
  SegmentMask m{SegmentMask::Kind::Polygons, {{{0, 0}, {4, 0}, {4, 3}, {0, 3}}}, {}};
  const Bitmask b = decode_polygon(m, 10, 10);
  EXPECT_EQ(b.area(), 12u);
  EXPECT_TRUE(b.at(3, 2));
  EXPECT_FALSE(b.at(4, 2));
}

TEST(Polygon, AgreesWithCrossingNumberOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = static_cast<int>(rng.integer(1, 40));
    const int h = static_cast<int>(rng.integer(1, 40));
    std::vector<Polygon> polys(static_cast<std::size_t>(rng.integer(1, 3)));
    for (auto& p : polys) {
      const auto n = rng.integer(3, 9);
      for (int i = 0; i < n; ++i) {
        // Mix off-grid and on-grid vertices, some outside the raster.
        if (rng.bernoulli(0.3))
          p.push_back({static_cast<double>(rng.integer(-2, w + 2)),
                       static_cast<double>(rng.integer(-2, h + 2))});
        else
          p.push_back({rng.uniform(-3.0, w + 3.0), rng.uniform(-3.0, h + 3.0)});
      }
    }
    const Bitmask got = decode_polygon(SegmentMask{SegmentMask::Kind::Polygons, polys, {}}, w, h);
    ASSERT_EQ(got, oracle_polygons(polys, w, h)) << "trial " << trial;
  }
}

TEST(Polygon, TooFewVertices) {
  SegmentMask m{SegmentMask::Kind::Polygons, {{{0, 0}, {4, 0}}}, {}};
  EXPECT_THROW(decode_polygon(m, 5, 5), GeometryError);
}

TEST(Rle, RoundTripsAgainstIndependentEncoder) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Bitmask m = random_mask(rng, static_cast<int>(rng.integer(1, 30)),
                                  static_cast<int>(rng.integer(1, 30)));
    const RleCounts rle = encode_rle(m);
    ASSERT_EQ(rle.counts, oracle_rle(m));
    EXPECT_EQ(rle.width, m.width);
    EXPECT_EQ(rle.height, m.height);
    ASSERT_EQ(decode_rle(SegmentMask{SegmentMask::Kind::Rle, {}, rle}), m);
  }
}

TEST(Rle, KnownLayoutIsColumnMajor) {
  // 2 rows x 3 columns, only (x=1, y=0) and (x=1, y=1) set.
  const Bitmask b = decode_rle(SegmentMask{SegmentMask::Kind::Rle, {}, RleCounts{2, 3, {2, 2, 2}}});
  EXPECT_TRUE(b.at(1, 0));
  EXPECT_TRUE(b.at(1, 1));
  EXPECT_EQ(b.area(), 2u);
}

TEST(Rle, SumMismatchIsDecodeError) {
  EXPECT_THROW(decode_rle(SegmentMask{SegmentMask::Kind::Rle, {}, RleCounts{2, 3, {2, 2}}}),
               DecodeError);
}

TEST(Cutout, TightCropWithBinaryAlpha) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const RasterImage img = random_raster(rng, 20, 16);
    Bitmask m(20, 16);
    const int n = static_cast<int>(rng.integer(1, 30));
    for (int i = 0; i < n; ++i) m.set(static_cast<int>(rng.index(20)), static_cast<int>(rng.index(16)));
    const Cutout c = extract_cutout(img, m, CutoutKind::Object);
    int x0 = 99, y0 = 99, x1 = -1, y1 = -1;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 20; ++x)
        if (m.at(x, y)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
    ASSERT_EQ(c.src_bbox, (BBox{double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)}));
    ASSERT_EQ(c.raster.width, x1 - x0 + 1);
    for (int y = 0; y < c.raster.height; ++y)
      for (int x = 0; x < c.raster.width; ++x) {
        const Rgba px = c.raster.at(x, y);
        if (m.at(x + x0, y + y0)) {
          const Rgba src = img.at(x + x0, y + y0);
          EXPECT_EQ(px, (Rgba{src.r, src.g, src.b, 255}));
        } else {
          EXPECT_EQ(px.a, 0);
        }
      }
  }
}

TEST(Cutout, EmptyMaskThrows) {
  EXPECT_THROW(extract_cutout(RasterImage(4, 4), Bitmask(4, 4), CutoutKind::Object), EmptyCutoutError);
}

TEST(Composite, MatchesNearestNeighbourOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const RasterImage target = random_raster(rng, 24, 18);
    Cutout c;
    c.raster = random_raster(rng, static_cast<int>(rng.integer(1, 12)), static_cast<int>(rng.integer(1, 12)));
    for (std::size_t i = 3; i < c.raster.pixels.size(); i += 4) c.raster.pixels[i] = rng.bernoulli(0.6) ? 255 : 0;
    const int dx = static_cast<int>(rng.integer(-10, 30));
    const int dy = static_cast<int>(rng.integer(-10, 25));
    const int dw = static_cast<int>(rng.integer(1, 30));
    const int dh = static_cast<int>(rng.integer(1, 30));

    RasterImage expect = target;
    Bitmask expect_cov(24, 18);
    for (int y = 0; y < dh; ++y)
      for (int x = 0; x < dw; ++x) {
        const int tx = dx + x, ty = dy + y;
        if (tx < 0 || ty < 0 || tx >= 24 || ty >= 18) continue;
        const Rgba s = c.raster.at(x * c.raster.width / dw, y * c.raster.height / dh);
        if (s.a == 0) continue;
        expect.set(tx, ty, s);
        expect_cov.set(tx, ty);
      }

    const RasterImage before = target;
    const RasterImage got = composite(target, c, dx, dy, dw, dh);
    ASSERT_EQ(got, expect);
    ASSERT_EQ(target, before);

    RasterImage in_place = target;
    Bitmask cov(24, 18);
    composite_into(in_place, c, dx, dy, dw, dh, &cov);
    ASSERT_EQ(in_place, expect);
    ASSERT_EQ(cov, expect_cov);
  }
}

TEST(Netpbm, PamAndPpmRoundTrip) {
  Rng rng(2);
  const auto dir = fixtures::scratch_dir("netpbm");
  const RasterImage img = random_raster(rng, 13, 7);
  write_pam(dir / "a.pam", img);
  EXPECT_EQ(read_image(dir / "a.pam"), img);
  write_ppm(dir / "a.ppm", img);
  const RasterImage rgb = read_image(dir / "a.ppm");
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 13; ++x) {
      const Rgba a = img.at(x, y), b = rgb.at(x, y);
      EXPECT_EQ(b, (Rgba{a.r, a.g, a.b, 255}));
    }
}

TEST(Netpbm, DepthRoundTrip) {
  Rng rng(3);
  const auto dir = fixtures::scratch_dir("depth");
  DepthMap d(9, 5, 0);
  for (auto& v : d.values) v = static_cast<std::uint16_t>(rng.index(65536));
  write_depth_pam(dir / "d.pam", d);
  EXPECT_EQ(read_depth_pam(dir / "d.pam"), d);
}
