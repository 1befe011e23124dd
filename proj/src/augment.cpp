#include "crowdpose/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "crowdpose/errors.hpp"

namespace crowdpose {

using nlohmann::json;

namespace {

struct MethodName {
  AugmentMethod method;
  std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {AugmentMethod::None, "none"},
    {AugmentMethod::Objects, "objects"},
    {AugmentMethod::BodyParts, "body_parts"},
    {AugmentMethod::FullBody, "full_body"},
    {AugmentMethod::PartsAndObjects, "parts_and_objects"},
    {AugmentMethod::FullAndObjects, "full_and_objects"},
    {AugmentMethod::PartsOrObjects, "parts_or_objects"},
    {AugmentMethod::FullOrObjects, "full_or_objects"},
};

const std::vector<Cutout>& pool(const CutoutInventory& inv, CutoutKind kind) {
  return kind == CutoutKind::Object ? inv.objects : inv.persons;
}

/// Destination extents for a w x h source at size fraction f of the box.
std::pair<double, double> scaled_extent(double src_w, double src_h, const BBox& box, double f,
                                        SizeMode mode) {
  double w, h;
  if (mode == SizeMode::Area) {
    const double area = f * box.area();
    w = std::sqrt(area * src_w / src_h);
    h = area / w;
  } else {
    const double s = f * std::min(box.w / src_w, box.h / src_h);
    w = s * src_w;
    h = s * src_h;
  }
  return {std::max(1.0, w), std::max(1.0, h)};
}

void check_box(const BBox& box) {
  if (!box.valid()) throw GeometryError("target person bbox must have positive area");
}

Placement place_centered(Rng& rng, const BBox& box, double w, double h) {
  Placement p;
  const double cx = rng.uniform(box.x, box.x + box.w);
  const double cy = rng.uniform(box.y, box.y + box.h);
  p.w = w;
  p.h = h;
  p.x = cx - w / 2.0;
  p.y = cy - h / 2.0;
  return p;
}

Cutout crop(const Cutout& src, const PixelRect& r) {
  Cutout out;
  out.kind = CutoutKind::BodyPart;
  out.raster = RasterImage(r.w, r.h, Rgba{0, 0, 0, 0});
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) out.raster.set(x, y, src.raster.at(r.x + x, r.y + y));
  out.src_bbox = BBox{src.src_bbox.x + r.x, src.src_bbox.y + r.y, double(r.w), double(r.h)};
  if (src.keypoints) {
    std::vector<Keypoint> kps;
    for (Keypoint kp : *src.keypoints) {
      kp.x -= r.x;
      kp.y -= r.y;
      kps.push_back(kp);
    }
    out.keypoints = std::move(kps);
  }
  return out;
}

json rect_json(const PixelRect& r) { return json::array({r.x, r.y, r.w, r.h}); }

}  // namespace

std::string_view to_string(AugmentMethod method) {
  for (const auto& m : kMethodNames)
    if (m.method == method) return m.name;
  return "?";
}

std::optional<AugmentMethod> parse_augment_method(std::string_view name) {
  for (const auto& m : kMethodNames)
    if (m.name == name) return m.method;
  return std::nullopt;
}

void AugmentConfig::check() const {
  if (!(area_frac_min > 0.0 && area_frac_min <= area_frac_max && area_frac_max <= 1.0))
    throw ConfigError("size fractions must satisfy 0 < min <= max <= 1");
  if (!(or_probability >= 0.0 && or_probability <= 1.0))
    throw ConfigError("or_probability must lie in [0, 1]");
  if (!(part_frac_min > 0.0 && part_frac_min <= part_frac_max && part_frac_max <= 1.0))
    throw ConfigError("body-part fractions must satisfy 0 < min <= max <= 1");
}

PixelRect Placement::pixel_rect() const {
  return PixelRect{static_cast<int>(std::floor(x)), static_cast<int>(std::floor(y)),
                   std::max(1, static_cast<int>(std::lround(w))),
                   std::max(1, static_cast<int>(std::lround(h)))};
}

json Placement::to_json() const {
  json j{{"kind", to_string(kind)},
         {"cutout_index", cutout_index},
         {"box", json::array({x, y, w, h})},
         {"size_frac", size_frac},
         {"pixel_rect", rect_json(pixel_rect())}};
  if (part) j["part"] = rect_json(*part);
  return j;
}

Placement Placement::from_json(const json& j) {
  Placement p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "object") p.kind = CutoutKind::Object;
  else if (kind == "body_part") p.kind = CutoutKind::BodyPart;
  else if (kind == "full_body") p.kind = CutoutKind::FullBody;
  else throw ConfigError("unknown cutout kind " + kind);
  p.cutout_index = j.at("cutout_index").get<std::size_t>();
  const auto& box = j.at("box");
  p.x = box.at(0).get<double>();
  p.y = box.at(1).get<double>();
  p.w = box.at(2).get<double>();
  p.h = box.at(3).get<double>();
  p.size_frac = j.at("size_frac").get<double>();
  if (j.contains("part")) {
    const auto& r = j.at("part");
    p.part = PixelRect{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                       r.at(3).get<int>()};
  }
  return p;
}

bool in_central_region(const BBox& box, double x, double y) {
  return x >= box.x + 0.25 * box.w && x <= box.x + 0.75 * box.w &&
         y >= box.y + 0.25 * box.h && y <= box.y + 0.75 * box.h;
}

Placement plan_object_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                             const AugmentConfig& cfg) {
  check_box(person);
  if (inventory.objects.empty()) throw InventoryError("inventory holds no object cutouts");
  const std::size_t idx = rng.index(inventory.objects.size());
  const RasterImage& src = inventory.objects[idx].raster;
  const double f = rng.uniform(cfg.area_frac_min, cfg.area_frac_max);
  const auto [w, h] = scaled_extent(src.width, src.height, person, f, cfg.size_mode);
  Placement p = place_centered(rng, person, w, h);
  p.kind = CutoutKind::Object;
  p.cutout_index = idx;
  p.size_frac = f;
  return p;
}

Placement plan_body_part_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                                const AugmentConfig& cfg) {
  check_box(person);
  if (inventory.persons.empty()) throw InventoryError("inventory holds no person cutouts");
  const std::size_t idx = rng.index(inventory.persons.size());
  const RasterImage& src = inventory.persons[idx].raster;
  const double cw = src.width;
  const double ch = src.height;
  const double full = cw * ch;

  // Part area fraction p, split into a width fraction a in [p, 1] and a
  // height fraction p / a.
  const double p = rng.uniform(cfg.part_frac_min, cfg.part_frac_max);
  const double a = rng.uniform(p, 1.0);
  PixelRect part;
  part.w = std::clamp(static_cast<int>(std::lround(a * cw)), 1, src.width);
  part.h = std::clamp(static_cast<int>(std::lround(p * full / part.w)), 1, src.height);
  // Integer rounding may leave the configured fraction range; pull back in
  // when the cutout is large enough to allow it.
  const int lo = std::max(1, static_cast<int>(std::ceil(cfg.part_frac_min * full / part.w)));
  const int hi = std::min(src.height, static_cast<int>(std::floor(cfg.part_frac_max * full / part.w)));
  if (lo <= hi) part.h = std::clamp(part.h, lo, hi);
  part.x = static_cast<int>(rng.integer(0, src.width - part.w));
  part.y = static_cast<int>(rng.integer(0, src.height - part.h));

  const double f = rng.uniform(cfg.area_frac_min, cfg.area_frac_max);
  const auto [w, h] = scaled_extent(part.w, part.h, person, f, cfg.size_mode);
  Placement out = place_centered(rng, person, w, h);
  out.kind = CutoutKind::BodyPart;
  out.cutout_index = idx;
  out.size_frac = f;
  out.part = part;
  return out;
}

Placement plan_full_body_cutout(Rng& rng, const BBox& person, const CutoutInventory& inventory,
                                const AugmentConfig& cfg) {
  check_box(person);
  if (inventory.persons.empty()) throw InventoryError("inventory holds no person cutouts");
  const std::size_t idx = rng.index(inventory.persons.size());
  const RasterImage& src = inventory.persons[idx].raster;
  const double f = rng.uniform(cfg.area_frac_min, cfg.area_frac_max);
  const auto [w, h] = scaled_extent(src.width, src.height, person, f, cfg.size_mode);
  // Rejection sampling; the accepted region covers 3/4 of the box.
  double cx, cy;
  do {
    cx = rng.uniform(person.x, person.x + person.w);
    cy = rng.uniform(person.y, person.y + person.h);
  } while (in_central_region(person, cx, cy));
  Placement p;
  p.kind = CutoutKind::FullBody;
  p.cutout_index = idx;
  p.size_frac = f;
  p.w = w;
  p.h = h;
  p.x = cx - w / 2.0;
  p.y = cy - h / 2.0;
  return p;
}

Cutout placement_source(const Placement& placement, const CutoutInventory& inventory) {
  const auto& cutouts = pool(inventory, placement.kind);
  if (placement.cutout_index >= cutouts.size())
    throw InventoryError("placement references cutout " + std::to_string(placement.cutout_index) +
                         " beyond the inventory");
  const Cutout& src = cutouts[placement.cutout_index];
  if (placement.kind != CutoutKind::BodyPart) return src;
  const PixelRect r = placement.part.value_or(PixelRect{0, 0, src.raster.width, src.raster.height});
  if (r.x < 0 || r.y < 0 || r.w < 1 || r.h < 1 || r.x + r.w > src.raster.width ||
      r.y + r.h > src.raster.height)
    throw GeometryError("body-part rectangle outside its person cutout");
  return crop(src, r);
}

json AugmentationLog::to_json() const {
  json placements_json = json::array();
  for (const auto& p : placements) placements_json.push_back(p.to_json());
  json changes_json = json::array();
  for (const auto& c : changes)
    changes_json.push_back({{"person", c.person},
                            {"keypoint", c.keypoint},
                            {"from", to_string(c.from)},
                            {"to", to_string(c.to)}});
  return {{"image_id", image_id},
          {"target", target},
          {"placements", std::move(placements_json)},
          {"flag_changes", std::move(changes_json)}};
}

AugmentResult apply_augmentation(Rng& rng, const RasterImage& image, const ImageRecord& record,
                                 std::size_t target, const AugmentConfig& cfg,
                                 const CutoutInventory& inventory) {
  cfg.check();
  if (cfg.method == AugmentMethod::None)
    throw PreconditionError("augmentation method must not be none");
  if (target >= record.persons.size())
    throw PreconditionError("target person " + std::to_string(target) + " out of range for image " +
                            record.id);
  const BBox& box = record.persons[target].bbox;

  enum class Sub { Objects, Parts, Full };
  std::vector<Sub> subs;
  switch (cfg.method) {
    case AugmentMethod::None: break;
    case AugmentMethod::Objects: subs = {Sub::Objects}; break;
    case AugmentMethod::BodyParts: subs = {Sub::Parts}; break;
    case AugmentMethod::FullBody: subs = {Sub::Full}; break;
    case AugmentMethod::PartsAndObjects: subs = {Sub::Parts, Sub::Objects}; break;
    case AugmentMethod::FullAndObjects: subs = {Sub::Full, Sub::Objects}; break;
    case AugmentMethod::PartsOrObjects:
      subs = {rng.bernoulli(cfg.or_probability) ? Sub::Objects : Sub::Parts};
      break;
    case AugmentMethod::FullOrObjects:
      subs = {rng.bernoulli(cfg.or_probability) ? Sub::Objects : Sub::Full};
      break;
  }

  AugmentResult result{image, record, {}};
  result.log.image_id = record.id;
  result.log.target = target;
  Bitmask coverage(image.width, image.height);
  for (Sub s : subs) {
    Placement p = s == Sub::Objects ? plan_object_cutout(rng, box, inventory, cfg)
                  : s == Sub::Parts ? plan_body_part_cutout(rng, box, inventory, cfg)
                                    : plan_full_body_cutout(rng, box, inventory, cfg);
    const Cutout src = placement_source(p, inventory);
    const PixelRect r = p.pixel_rect();
    composite_into(result.image, src, r.x, r.y, r.w, r.h, &coverage);
    result.log.placements.push_back(std::move(p));
  }

  for (std::size_t pi = 0; pi < result.record.persons.size(); ++pi) {
    auto& kps = result.record.persons[pi].pose.keypoints;
    for (std::size_t k = 0; k < kps.size(); ++k) {
      Keypoint& kp = kps[k];
      if (kp.vis != Visibility::Visible && kp.vis != Visibility::SelfOccluded) continue;
      if (!std::isfinite(kp.x) || !std::isfinite(kp.y)) continue;
      const double fx = std::floor(kp.x);
      const double fy = std::floor(kp.y);
      if (fx < 0 || fy < 0 || fx >= image.width || fy >= image.height) continue;
      if (!coverage.at(static_cast<int>(fx), static_cast<int>(fy))) continue;
      result.log.changes.push_back({pi, k, kp.vis, Visibility::Occluded});
      kp.vis = Visibility::Occluded;
    }
  }
  return result;
}

ImageAugmentation augment_image(const RasterImage& image, const ImageRecord& record,
                                const AugmentConfig& cfg, const CutoutInventory& inventory) {
  Rng rng = Rng::substream(cfg.seed, record.id);
  ImageAugmentation out{image, record, {}};
  for (std::size_t t = 0; t < record.persons.size(); ++t) {
    if (!record.persons[t].bbox.valid()) continue;
    AugmentResult r = apply_augmentation(rng, out.image, out.record, t, cfg, inventory);
    out.image = std::move(r.image);
    out.record = std::move(r.record);
    out.logs.push_back(std::move(r.log));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string cutout_file(std::string_view sub, std::size_t i) {
  std::ostringstream s;
  s << sub << '/' << std::setw(5) << std::setfill('0') << i << ".pam";
  return s.str();
}

json keypoints_json(const std::vector<Keypoint>& kps) {
  json flat = json::array();
  for (const auto& kp : kps) {
    flat.push_back(kp.x);
    flat.push_back(kp.y);
    flat.push_back(visibility_to_native(kp.vis));
  }
  return flat;
}

}  // namespace

void save_inventory(const std::filesystem::path& dir, const CutoutInventory& inventory) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "objects");
  fs::create_directories(dir / "persons");
  json index{{"objects", json::array()}, {"persons", json::array()}};
  auto write_pool = [&](const std::vector<Cutout>& cutouts, const char* sub) {
    for (std::size_t i = 0; i < cutouts.size(); ++i) {
      const Cutout& c = cutouts[i];
      const std::string file = cutout_file(sub, i);
      write_pam(dir / file, c.raster);
      json entry{{"file", file},
                 {"src_bbox", json::array({c.src_bbox.x, c.src_bbox.y, c.src_bbox.w, c.src_bbox.h})}};
      if (c.keypoints) entry["keypoints"] = keypoints_json(*c.keypoints);
      index[sub].push_back(std::move(entry));
    }
  };
  write_pool(inventory.objects, "objects");
  write_pool(inventory.persons, "persons");
  std::ofstream out(dir / "inventory.json", std::ios::binary);
  if (!out) throw IoError("cannot write inventory index in " + dir.string());
  out << index.dump(1) << '\n';
}

CutoutInventory load_inventory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InventoryError("inventory directory not found: " + dir.string());
  const fs::path index_path = dir / "inventory.json";
  std::ifstream in(index_path, std::ios::binary);
  if (!in) throw InventoryError("inventory index not found: " + index_path.string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid inventory index: ") + e.what(), e.byte);
  }
  CutoutInventory inv;
  auto read_pool = [&](const char* sub, CutoutKind kind, std::vector<Cutout>& out) {
    if (!index.contains(sub)) return;
    for (const auto& entry : index.at(sub)) {
      Cutout c;
      c.kind = kind;
      c.raster = read_image(dir / entry.at("file").get<std::string>());
      const auto& b = entry.at("src_bbox");
      c.src_bbox = BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                        b.at(3).get<double>()};
      if (entry.contains("keypoints")) {
        const auto& flat = entry.at("keypoints");
        std::vector<Keypoint> kps;
        for (std::size_t i = 0; i + 2 < flat.size(); i += 3)
          kps.push_back({flat[i].get<double>(), flat[i + 1].get<double>(),
                         visibility_from_native(flat[i + 2].get<int>())});
        c.keypoints = std::move(kps);
      }
      out.push_back(std::move(c));
    }
  };
  try {
    read_pool("objects", CutoutKind::Object, inv.objects);
    read_pool("persons", CutoutKind::FullBody, inv.persons);
  } catch (const json::exception& e) {
    throw InventoryError(std::string("malformed inventory index: ") + e.what());
  }
  return inv;
}

}  // namespace crowdpose
