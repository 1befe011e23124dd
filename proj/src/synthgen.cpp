#include "crowdpose/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "crowdpose/crowd_metrics.hpp"
#include "crowdpose/errors.hpp"
#include "crowdpose/parallel.hpp"

namespace crowdpose {

namespace {

// CrowdPose keypoint indices.
enum Kp : std::size_t { LS, RS, LE, RE, LW, RW, LH, RH, LK, RK, LA, RA, HEAD, NECK };

struct Limb {
  std::size_t a, b;
  double radius_scale;
};

constexpr Limb kLimbs[] = {
    {HEAD, NECK, 1.6}, {NECK, LS, 1.0}, {NECK, RS, 1.0}, {LS, RS, 1.0},
    {LS, LE, 1.0},     {LE, LW, 1.0},   {RS, RE, 1.0},   {RE, RW, 1.0},
    {LS, LH, 1.0},     {RS, RH, 1.0},   {LH, RH, 1.0},   {LS, RH, 1.0},
    {RS, LH, 1.0},     {LH, LK, 1.0},   {LK, LA, 1.0},   {RH, RK, 1.0},
    {RK, RA, 1.0},
};

constexpr int kBaseLevel = kDepthLevels / 2;
constexpr Rgba kBackground{40, 40, 48, 255};

PoseTemplate make_template(std::string name, std::array<Point2, kTemplateKeypoints> kps,
                           double jitter, std::array<int, kTemplateKeypoints> depth) {
  PoseTemplate t{std::move(name), kps, {}, depth};
  t.jitter.fill(jitter);
  return t;
}

double point_segment_dist2(double px, double py, const Point2& a, const Point2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a.x) * dx + (py - a.y) * dy) / len2, 0.0, 1.0);
  const double ex = a.x + t * dx - px;
  const double ey = a.y + t * dy - py;
  return ex * ex + ey * ey;
}

Rgba person_color(std::size_t index) {
  const std::uint64_t h = splitmix64(index + 1);
  return Rgba{static_cast<std::uint8_t>(72 + (h & 0xff) % 184),
              static_cast<std::uint8_t>(72 + ((h >> 8) & 0xff) % 184),
              static_cast<std::uint8_t>(72 + ((h >> 16) & 0xff) % 184), 255};
}

std::string scene_id(std::size_t i) {
  std::ostringstream s;
  s << "scene_" << std::setw(6) << std::setfill('0') << i;
  return s.str();
}

Scene generate_once(Rng& rng, const SceneConfig& cfg, const std::vector<PoseTemplate>& templates,
                    double pressure) {
  const int w = cfg.image_w;
  const int h = cfg.image_h;
  const int n = static_cast<int>(rng.integer(
      cfg.min_persons,
      cfg.min_persons + std::lround(pressure * (cfg.max_persons - cfg.min_persons))));
  const double mean_size = 0.5 * (cfg.min_height + cfg.max_height);
  const double cluster_x = rng.uniform(0.0, w);
  const double cluster_y = rng.uniform(0.0, h);
  const double spread =
      (1.0 - pressure) * 0.75 * std::max(w, h) + pressure * 0.2 * mean_size;

  Scene scene;
  scene.persons.resize(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<std::array<Point2, kTemplateKeypoints>> kp_pos(static_cast<std::size_t>(n));
  std::vector<BBox> boxes(static_cast<std::size_t>(n));

  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    ScenePerson& person = scene.persons[i];
    const PoseTemplate& t = templates[rng.index(templates.size())];
    person.activity = t.name;
    person.facing_back = rng.bernoulli(0.5);
    const double size = rng.uniform(cfg.min_height, cfg.max_height);
    const double radius = std::max(1.0, cfg.limb_radius_frac * size);

    std::array<Point2, kTemplateKeypoints> local;
    std::array<int, kTemplateKeypoints> dz;
    for (std::size_t k = 0; k < kTemplateKeypoints; ++k) {
      double ux = std::clamp(t.keypoints[k].x + rng.normal(0.0, t.jitter[k]), 0.0, 1.0);
      const double uy = std::clamp(t.keypoints[k].y + rng.normal(0.0, t.jitter[k]), 0.0, 1.0);
      if (person.facing_back) ux = 1.0 - ux;
      local[k] = {ux * size, uy * size};
      dz[k] = person.facing_back ? -t.depth[k] : t.depth[k];
    }

    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const Limb& limb : kLimbs) {
      const double r = radius * limb.radius_scale;
      for (const Point2& p : {local[limb.a], local[limb.b]}) {
        x0 = std::min(x0, p.x - r);
        y0 = std::min(y0, p.y - r);
        x1 = std::max(x1, p.x + r);
        y1 = std::max(y1, p.y + r);
      }
    }
    if (x1 - x0 > w || y1 - y0 > h)
      throw ConfigError("person of size " + std::to_string(size) + " px does not fit a " +
                        std::to_string(w) + "x" + std::to_string(h) + " image");

    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double dist = spread * std::sqrt(rng.uniform());
    const double want_x = cluster_x + dist * std::cos(angle);
    const double want_y = cluster_y + dist * std::sin(angle);
    const double ox = std::clamp(want_x - 0.5 * (x0 + x1), -x0, w - x1);
    const double oy = std::clamp(want_y - 0.5 * (y0 + y1), -y0, h - y1);

    for (std::size_t k = 0; k < kTemplateKeypoints; ++k)
      kp_pos[i][k] = {local[k].x + ox, local[k].y + oy};
    boxes[i] = BBox{x0 + ox, y0 + oy, x1 - x0, y1 - y0};

    person.keypoint_level.fill(kDepthLevels - 1);
    for (const Limb& limb : kLimbs) {
      Capsule c;
      c.a = kp_pos[i][limb.a];
      c.b = kp_pos[i][limb.b];
      c.radius = radius * limb.radius_scale;
      c.level = std::clamp(kBaseLevel + (dz[limb.a] + dz[limb.b]) / 2, 0, kDepthLevels - 1);
      c.from = limb.a;
      c.to = limb.b;
      person.keypoint_level[limb.a] = std::min(person.keypoint_level[limb.a], c.level);
      person.keypoint_level[limb.b] = std::min(person.keypoint_level[limb.b], c.level);
      person.capsules.push_back(c);
    }
    z[i] = cfg.depth_model == DepthModel::UniformZ
               ? rng.uniform()
               : 1.0 - (boxes[i].y + boxes[i].h) / h + 1e-3 * rng.uniform();
  }

  std::vector<std::size_t> by_rank(scene.persons.size());
  std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
  std::stable_sort(by_rank.begin(), by_rank.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
  for (std::size_t r = 0; r < by_rank.size(); ++r) scene.persons[by_rank[r]].rank = r;

  // Depth buffer: minimum of rank * 64 + level over covering capsules.
  scene.depth = DepthMap(w, h, kDepthBackground);
  for (const ScenePerson& person : scene.persons) {
    for (const Capsule& c : person.capsules) {
      const auto value = static_cast<std::uint16_t>(person.rank * kDepthLevels + c.level);
      const int px0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.x, c.b.x) - c.radius)));
      const int px1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(c.a.x, c.b.x) + c.radius)));
      const int py0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.y, c.b.y) - c.radius)));
      const int py1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(c.a.y, c.b.y) + c.radius)));
      for (int y = py0; y <= py1; ++y)
        for (int x = px0; x <= px1; ++x) {
          if (!capsule_covers(c, x + 0.5, y + 0.5)) continue;
          auto& d = scene.depth.values[static_cast<std::size_t>(y) * w + x];
          d = std::min(d, value);
        }
    }
  }

  scene.image = RasterImage(w, h, kBackground);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint16_t d = scene.depth.at(x, y);
      if (d == kDepthBackground) continue;
      const std::size_t owner = by_rank[d / kDepthLevels];
      const int shade = 192 + (kDepthLevels - 1 - d % kDepthLevels);
      const Rgba base = person_color(owner);
      scene.image.set(x, y,
                      Rgba{static_cast<std::uint8_t>(base.r * shade / 255),
                           static_cast<std::uint8_t>(base.g * shade / 255),
                           static_cast<std::uint8_t>(base.b * shade / 255), 255});
    }

  scene.record.width = w;
  scene.record.height = h;
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    const ScenePerson& person = scene.persons[i];
    PersonInstance inst;
    inst.bbox = boxes[i];
    inst.pose.keypoints.resize(kTemplateKeypoints);
    for (std::size_t k = 0; k < kTemplateKeypoints; ++k) {
      const Point2 p = kp_pos[i][k];
      const double cx = std::floor(p.x) + 0.5;
      const double cy = std::floor(p.y) + 0.5;
      bool occluded = false;
      for (const ScenePerson& other : scene.persons) {
        if (other.rank >= person.rank) continue;
        for (const Capsule& c : other.capsules)
          if (capsule_covers(c, cx, cy)) {
            occluded = true;
            break;
          }
        if (occluded) break;
      }
      bool self = false;
      if (!occluded) {
        for (const Capsule& c : person.capsules)
          if (c.level < person.keypoint_level[k] && capsule_covers(c, cx, cy)) {
            self = true;
            break;
          }
      }
      inst.pose.keypoints[k] = Keypoint{
          p.x, p.y,
          occluded ? Visibility::Occluded
                   : (self ? Visibility::SelfOccluded : Visibility::Visible)};
    }
    scene.record.persons.push_back(std::move(inst));
  }
  scene.crowd_index = crowd_index(scene.record).value;
  return scene;
}

std::vector<std::size_t> quotas(const std::vector<double>& weights, std::size_t total) {
  std::vector<std::size_t> q(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < weights.size(); ++b) {
    const double exact = weights[b] * static_cast<double>(total);
    q[b] = static_cast<std::size_t>(std::floor(exact));
    assigned += q[b];
    remainders.emplace_back(exact - static_cast<double>(q[b]), b);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned)
    ++q[remainders[i].second];
  return q;
}

}  // namespace

const std::vector<PoseTemplate>& default_templates() {
  // Keypoints: LS RS LE RE LW RW LH RH LK RK LA RA head_top neck.
  static const std::vector<PoseTemplate> templates = {
      make_template("walking",
                    {{{0.62, 0.19}, {0.38, 0.19}, {0.65, 0.35}, {0.35, 0.36},
                      {0.70, 0.48}, {0.31, 0.50}, {0.57, 0.52}, {0.43, 0.52},
                      {0.62, 0.74}, {0.44, 0.76}, {0.66, 0.97}, {0.38, 0.98},
                      {0.50, 0.00}, {0.50, 0.16}}},
                    0.02, {0, 0, -8, 8, -10, 10, 0, 0, 4, -4, 4, -4, 0, 0}),
      make_template("standing",
                    {{{0.62, 0.19}, {0.38, 0.19}, {0.66, 0.36}, {0.34, 0.36},
                      {0.67, 0.51}, {0.33, 0.51}, {0.57, 0.52}, {0.43, 0.52},
                      {0.58, 0.75}, {0.42, 0.75}, {0.58, 0.98}, {0.42, 0.98},
                      {0.50, 0.00}, {0.50, 0.16}}},
                    0.015, {0, 0, 2, 2, 4, 4, 0, 0, -2, -2, 0, 0, 0, 0}),
      make_template("sitting",
                    {{{0.62, 0.28}, {0.38, 0.28}, {0.67, 0.45}, {0.33, 0.45},
                      {0.62, 0.58}, {0.38, 0.58}, {0.57, 0.62}, {0.43, 0.62},
                      {0.62, 0.70}, {0.38, 0.70}, {0.61, 0.96}, {0.39, 0.96},
                      {0.50, 0.08}, {0.50, 0.25}}},
                    0.02, {0, 0, -2, -2, -8, -8, 0, 0, -14, -14, -10, -10, 0, 0}),
      make_template("yoga",
                    {{{0.60, 0.28}, {0.40, 0.28}, {0.62, 0.12}, {0.38, 0.12},
                      {0.55, 0.00}, {0.45, 0.00}, {0.56, 0.60}, {0.44, 0.60},
                      {0.70, 0.74}, {0.44, 0.80}, {0.52, 0.80}, {0.44, 1.00},
                      {0.50, 0.12}, {0.50, 0.25}}},
                    0.025, {0, 0, 2, 2, 4, 4, 0, 0, -6, 0, -10, 0, 0, 0}),
      make_template("pushup",
                    {{{0.18, 0.65}, {0.20, 0.66}, {0.19, 0.80}, {0.21, 0.81},
                      {0.18, 0.95}, {0.20, 0.96}, {0.55, 0.70}, {0.56, 0.71},
                      {0.75, 0.76}, {0.76, 0.77}, {0.96, 0.82}, {0.97, 0.83},
                      {0.05, 0.62}, {0.14, 0.64}}},
                    0.02, {-6, 6, -6, 6, -6, 6, -6, 6, -6, 6, -6, 6, 0, 0}),
      make_template("cheering",
                    {{{0.62, 0.27}, {0.38, 0.27}, {0.72, 0.12}, {0.28, 0.12},
                      {0.80, 0.00}, {0.20, 0.00}, {0.57, 0.58}, {0.43, 0.58},
                      {0.58, 0.78}, {0.42, 0.78}, {0.58, 0.99}, {0.42, 0.99},
                      {0.50, 0.08}, {0.50, 0.24}}},
                    0.03, {0, 0, 2, 2, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0}),
      make_template("fighting",
                    {{{0.62, 0.22}, {0.38, 0.22}, {0.64, 0.40}, {0.36, 0.40},
                      {0.55, 0.28}, {0.45, 0.30}, {0.58, 0.55}, {0.42, 0.55},
                      {0.64, 0.76}, {0.38, 0.76}, {0.70, 0.98}, {0.32, 0.98},
                      {0.50, 0.03}, {0.50, 0.19}}},
                    0.03, {0, 0, -6, -6, -12, -12, 0, 0, -2, 2, 0, 0, 0, 0}),
  };
  return templates;
}

void SceneConfig::check() const {
  if (image_w < 8 || image_h < 8) throw ConfigError("scene image must be at least 8x8");
  if (min_persons < 1 || max_persons < min_persons || max_persons > kMaxScenePersons)
    throw ConfigError("person count range must satisfy 1 <= min <= max <= " +
                      std::to_string(kMaxScenePersons));
  if (!(min_height > 0.0 && max_height >= min_height))
    throw ConfigError("person height range must be positive and non-empty");
  if (!(limb_radius_frac > 0.0)) throw ConfigError("limb_radius_frac must be positive");
  if (!(pressure >= 0.0 && pressure <= 1.0)) throw ConfigError("pressure must lie in [0, 1]");
  if (target_crowd_index && !(*target_crowd_index >= 0.0 && *target_crowd_index <= 1.0))
    throw ConfigError("target_crowd_index must lie in [0, 1]");
  const double r = std::max(1.0, limb_radius_frac * max_height) * 1.6;
  if (max_height + 2.0 * r > std::min(image_w, image_h))
    throw ConfigError("persons up to " + std::to_string(max_height) +
                      " px do not fit the image; lower max_height or enlarge the image");
}

bool capsule_covers(const Capsule& c, double cx, double cy) {
  return point_segment_dist2(cx, cy, c.a, c.b) <= c.radius * c.radius;
}

Scene generate_scene(Rng& rng, const SceneConfig& cfg, const std::vector<PoseTemplate>& templates) {
  cfg.check();
  if (templates.empty()) throw ConfigError("no pose templates");
  if (!cfg.target_crowd_index) return generate_once(rng, cfg, templates, cfg.pressure);

  const double target = *cfg.target_crowd_index;
  double pressure = target;
  std::optional<Scene> best;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Scene s = generate_once(rng, cfg, templates, pressure);
    const double err = std::abs(s.crowd_index - target);
    if (!best || err < std::abs(best->crowd_index - target)) best = std::move(s);
    if (err <= 0.05) break;
    pressure = std::clamp(pressure + 0.5 * (target - best->crowd_index), 0.0, 1.0);
  }
  return std::move(*best);
}

std::vector<double> CorpusConfig::weights() const {
  if (target_histogram.empty()) return std::vector<double>(bins, 1.0 / static_cast<double>(bins));
  return target_histogram;
}

void CorpusConfig::check() const {
  scene.check();
  const auto w = weights();
  if (w.empty()) throw ConfigError("target histogram needs at least one bin");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw ConfigError("target histogram weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("target histogram weights must sum to 1");
  if (scenes < w.size()) throw ConfigError("need at least as many scenes as histogram bins");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(retry_factor >= 1.0)) throw ConfigError("retry factor must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
}

Corpus generate_corpus(std::uint64_t seed, const CorpusConfig& cfg,
                       const std::vector<PoseTemplate>& templates) {
  cfg.check();
  if (templates.empty()) throw ConfigError("no pose templates");
  const std::vector<double> weights = cfg.weights();
  const std::size_t bins = weights.size();
  std::vector<std::size_t> remaining = quotas(weights, cfg.scenes);
  std::vector<double> pressure(bins);
  for (std::size_t b = 0; b < bins; ++b)
    pressure[b] = (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
  constexpr double kGain = 0.3;
  constexpr double kPressureJitter = 0.1;

  const auto budget = static_cast<std::size_t>(std::ceil(cfg.retry_factor * cfg.scenes));
  Corpus corpus;
  corpus.histogram.assign(bins, 0);
  std::size_t accepted = 0;
  SceneConfig scene_cfg = cfg.scene;
  scene_cfg.target_crowd_index.reset();

  while (accepted < cfg.scenes) {
    if (corpus.candidates >= budget) {
      std::ostringstream msg;
      msg << "CrowdIndex target unreachable within " << budget << " candidates; achieved [";
      for (std::size_t b = 0; b < bins; ++b) msg << (b ? ", " : "") << corpus.histogram[b];
      msg << "] of " << cfg.scenes;
      throw TargetingError(msg.str());
    }
    std::vector<std::size_t> open;
    for (std::size_t b = 0; b < bins; ++b)
      if (remaining[b] > 0) open.push_back(b);
    const std::size_t m = std::min(cfg.batch_size, budget - corpus.candidates);

    std::vector<std::size_t> target(m);
    std::vector<double> scene_pressure(m);
    for (std::size_t j = 0; j < m; ++j) {
      target[j] = open[j % open.size()];
      scene_pressure[j] = pressure[target[j]];
    }
    std::vector<Scene> batch(m);
    parallel_for(m, cfg.jobs, [&](std::size_t j) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(corpus.candidates + j));
      const double p = std::clamp(
          scene_pressure[j] + kPressureJitter * (rng.uniform() - 0.5), 0.0, 1.0);
      batch[j] = generate_once(rng, scene_cfg, templates, p);
    });

    for (std::size_t j = 0; j < m && accepted < cfg.scenes; ++j) {
      Scene& s = batch[j];
      const std::size_t t = target[j];
      const double center = (static_cast<double>(t) + 0.5) / static_cast<double>(bins);
      pressure[t] = std::clamp(pressure[t] + kGain * (center - s.crowd_index), 0.0, 1.0);
      const std::size_t bin = histogram_bin(s.crowd_index, bins);
      if (remaining[bin] == 0) continue;
      --remaining[bin];
      ++corpus.histogram[bin];
      s.record.id = scene_id(accepted++);
      corpus.scenes.push_back(std::move(s));
    }
    corpus.candidates += m;
  }

  for (std::size_t b = 0; b < bins; ++b) {
    const double freq = static_cast<double>(corpus.histogram[b]) / static_cast<double>(cfg.scenes);
    if (std::abs(freq - weights[b]) > cfg.tolerance)
      throw TargetingError("bin " + std::to_string(b) + " frequency " + std::to_string(freq) +
                           " misses its target " + std::to_string(weights[b]));
  }

  Dataset& ds = corpus.dataset;
  ds.schema = crowdpose_schema();
  nlohmann::json per_scene = nlohmann::json::object();
  for (auto& s : corpus.scenes) {
    s.record.source = "images/" + s.record.id + ".pam";
    per_scene[s.record.id] = s.crowd_index;
    ds.images.push_back(s.record);
  }
  ds.meta = {{"generator", "synthgen"},
             {"seed", seed},
             {"bins", bins},
             {"target_histogram", weights},
             {"histogram", corpus.histogram},
             {"candidates", corpus.candidates},
             {"crowd_index", std::move(per_scene)}};
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, bool rasters) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_dataset(dir / "annotations.json", corpus.dataset);
  if (!rasters) return;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "depth");
  for (const Scene& s : corpus.scenes) {
    write_pam(dir / "images" / (s.record.id + ".pam"), s.image);
    write_depth_pam(dir / "depth" / (s.record.id + ".pam"), s.depth);
  }
}

std::size_t DensityGrid::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

DensityGrid keypoint_density_map(const Dataset& dataset, std::string_view keypoint, int bins_x,
                                 int bins_y) {
  if (bins_x < 2 || bins_y < 2) throw PreconditionError("density map needs at least 2 bins per axis");
  const auto k = dataset.schema.index_of(keypoint);
  if (!k) throw ConfigError("schema " + dataset.schema.name + " has no keypoint " + std::string(keypoint));
  DensityGrid grid{bins_x, bins_y, std::vector<std::size_t>(static_cast<std::size_t>(bins_x) * bins_y, 0)};
  for (const auto& im : dataset.images)
    for (const auto& p : im.persons) {
      if (*k >= p.pose.size() || !p.bbox.valid()) continue;
      const Keypoint& kp = p.pose.keypoints[*k];
      if (!is_labeled(kp.vis)) continue;
      const double u = std::clamp((kp.x - p.bbox.x) / p.bbox.w, 0.0, 1.0);
      const double v = std::clamp((kp.y - p.bbox.y) / p.bbox.h, 0.0, 1.0);
      const int bx = std::min(bins_x - 1, static_cast<int>(u * bins_x));
      const int by = std::min(bins_y - 1, static_cast<int>(v * bins_y));
      ++grid.counts[static_cast<std::size_t>(by) * bins_x + bx];
    }
  return grid;
}

CutoutInventory build_inventory(Rng& rng, const std::vector<Scene>& scenes,
                                std::size_t object_count, std::size_t max_persons) {
  CutoutInventory inv;
  for (const Scene& s : scenes) {
    for (std::size_t i = 0; i < s.persons.size() && inv.persons.size() < max_persons; ++i) {
      Bitmask mask(s.depth.width, s.depth.height);
      const std::size_t rank = s.persons[i].rank;
      for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
          const std::uint16_t d = s.depth.at(x, y);
          if (d != kDepthBackground && d / kDepthLevels == rank) mask.set(x, y);
        }
      if (mask.area() < 16) continue;
      Cutout c = extract_cutout(s.image, mask, CutoutKind::FullBody);
      std::vector<Keypoint> kps = s.record.persons[i].pose.keypoints;
      for (auto& kp : kps) {
        kp.x -= c.src_bbox.x;
        kp.y -= c.src_bbox.y;
      }
      c.keypoints = std::move(kps);
      inv.persons.push_back(std::move(c));
    }
  }
  while (inv.objects.size() < object_count) {
    const int size = static_cast<int>(rng.integer(16, 48));
    const int vertices = static_cast<int>(rng.integer(5, 9));
    std::vector<double> angles(static_cast<std::size_t>(vertices));
    for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    Polygon poly;
    for (double a : angles) {
      const double r = rng.uniform(0.5, 1.0) * size / 2.0;
      poly.push_back({size / 2.0 + r * std::cos(a), size / 2.0 + r * std::sin(a)});
    }
    const Rgba color{static_cast<std::uint8_t>(rng.integer(0, 255)),
                     static_cast<std::uint8_t>(rng.integer(0, 255)),
                     static_cast<std::uint8_t>(rng.integer(0, 255)), 255};
    const Bitmask mask = decode_polygon(SegmentMask{SegmentMask::Kind::Polygons, {poly}, {}}, size, size);
    if (mask.area() == 0) continue;
    inv.objects.push_back(extract_cutout(RasterImage(size, size, color), mask, CutoutKind::Object));
  }
  return inv;
}

}  // namespace crowdpose
