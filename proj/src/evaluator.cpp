#include "crowdpose/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "crowdpose/errors.hpp"
#include "crowdpose/masks.hpp"
#include "crowdpose/parallel.hpp"

namespace crowdpose {

using nlohmann::json;

OksConfig OksConfig::defaults(std::size_t keypoint_count) {
  OksConfig cfg;
  cfg.sigmas.assign(keypoint_count, kDefaultKeypointSigma);
  for (int i = 0; i < 10; ++i) cfg.thresholds.push_back(0.50 + 0.05 * i);
  return cfg;
}

void OksConfig::check() const {
  if (sigmas.empty()) throw ConfigError("OKS sigmas are empty");
  for (double s : sigmas)
    if (!(s > 0.0)) throw ConfigError("OKS sigmas must be positive");
  if (thresholds.empty()) throw ConfigError("no OKS thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] <= 1.0))
      throw ConfigError("OKS thresholds must lie in (0, 1]");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw ConfigError("OKS thresholds must be strictly increasing");
  }
}

OksConfig load_oks_config(const std::filesystem::path& path, std::size_t keypoint_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sigma file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid sigma file: ") + e.what(), e.byte);
  }
  OksConfig cfg = OksConfig::defaults(keypoint_count);
  try {
    if (doc.is_array()) {
      cfg.sigmas = doc.get<std::vector<double>>();
    } else if (doc.is_object()) {
      if (doc.contains("sigmas")) cfg.sigmas = doc.at("sigmas").get<std::vector<double>>();
      if (doc.contains("thresholds"))
        cfg.thresholds = doc.at("thresholds").get<std::vector<double>>();
      if (doc.contains("area_mode")) {
        const auto mode = doc.at("area_mode").get<std::string>();
        if (mode == "bbox") cfg.area_mode = AreaMode::BBoxArea;
        else if (mode == "segment") cfg.area_mode = AreaMode::SegmentArea;
        else throw ConfigError("area_mode must be \"bbox\" or \"segment\"");
      }
    } else {
      throw ConfigError("sigma file must be an array or an object");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sigma file: ") + e.what());
  }
  if (cfg.sigmas.size() != keypoint_count)
    throw ConfigError("sigma file lists " + std::to_string(cfg.sigmas.size()) +
                      " sigmas, dataset schema has " + std::to_string(keypoint_count));
  cfg.check();
  return cfg;
}

double oks(const Pose& pred, const Pose& gt, double scale, const OksConfig& cfg) {
  if (pred.size() != gt.size() || gt.size() != cfg.sigmas.size())
    throw SchemaMismatchError("OKS needs poses and sigmas of equal length");
  double sum = 0.0;
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Keypoint& g = gt.keypoints[i];
    if (!is_labeled(g.vis)) continue;
    ++labeled;
    const Keypoint& p = pred.keypoints[i];
    const double dx = p.x - g.x;
    const double dy = p.y - g.y;
    const double k = 2.0 * cfg.sigmas[i];
    const double e = (dx * dx + dy * dy) / (2.0 * scale * k * k);
    if (std::isfinite(e)) sum += std::exp(-e);
  }
  if (labeled == 0) throw UndefinedSimilarityError("ground truth has no labeled keypoint");
  return sum / static_cast<double>(labeled);
}

namespace {

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    a += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  return std::abs(a) / 2.0;
}

}  // namespace

double gt_scale(const PersonInstance& gt, const OksConfig& cfg, int, int) {
  if (cfg.area_mode == AreaMode::SegmentArea && gt.segmentation) {
    const SegmentMask& seg = *gt.segmentation;
    double area = 0.0;
    if (seg.kind == SegmentMask::Kind::Rle) {
      area = static_cast<double>(decode_rle(seg).area());
    } else {
      for (const auto& poly : seg.polygons)
        if (poly.size() >= 3) area += polygon_area(poly);
    }
    if (area > 0.0) return area;
  }
  return gt.bbox.area();
}

std::vector<std::vector<double>> oks_matrix(const std::vector<PersonInstance>& preds,
                                            const std::vector<PersonInstance>& gts,
                                            const OksConfig& cfg, int image_width,
                                            int image_height) {
  std::vector<std::vector<double>> table(preds.size(), std::vector<double>(gts.size(), -1.0));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].pose.labeled_count() == 0) continue;
    const double scale = gt_scale(gts[g], cfg, image_width, image_height);
    for (std::size_t p = 0; p < preds.size(); ++p)
      table[p][g] = oks(preds[p].pose, gts[g].pose, scale, cfg);
  }
  return table;
}

Matching match_greedy(const std::vector<PersonInstance>& preds,
                      const std::vector<std::vector<double>>& table,
                      const std::vector<bool>& gt_eligible, double threshold) {
  const std::size_t n_gt = gt_eligible.size();
  Matching m;
  m.pred_to_gt.assign(preds.size(), -1);
  m.gt_to_pred.assign(n_gt, -1);
  m.gt_eligible = gt_eligible;

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t p = 0; p < preds.size(); ++p)
    if (!preds[p].score)
      throw ProtocolError("prediction " + std::to_string(p) + " carries no score");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *preds[a].score > *preds[b].score;
  });

  for (std::size_t p : order) {
    int best = -1;
    double best_oks = threshold;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (!gt_eligible[g] || m.gt_to_pred[g] >= 0) continue;
      const double v = table[p][g];
      if (v > best_oks || (best < 0 && v >= best_oks)) {
        best = static_cast<int>(g);
        best_oks = v;
      }
    }
    if (best >= 0) {
      m.pred_to_gt[p] = best;
      m.gt_to_pred[static_cast<std::size_t>(best)] = static_cast<int>(p);
    }
  }
  return m;
}

Matching match_greedy(const std::vector<PersonInstance>& preds,
                      const std::vector<PersonInstance>& gts, double threshold,
                      const OksConfig& cfg, int image_width, int image_height) {
  std::vector<bool> eligible(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) eligible[g] = gts[g].pose.labeled_count() > 0;
  for (std::size_t p = 0; p < preds.size(); ++p)
    if (!preds[p].score)
      throw ProtocolError("prediction " + std::to_string(p) + " carries no score");
  return match_greedy(preds, oks_matrix(preds, gts, cfg, image_width, image_height), eligible,
                      threshold);
}

double average_precision(std::vector<ScoredDetection> dets, std::size_t gt_count) {
  if (gt_count == 0) throw UndefinedApError("no ground-truth instances");
  std::stable_sort(dets.begin(), dets.end(), [](const ScoredDetection& a, const ScoredDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_index != b.image_index) return a.image_index < b.image_index;
    return a.pred_index < b.pred_index;
  });
  std::vector<double> recall(dets.size());
  std::vector<double> precision(dets.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].true_positive) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = dets.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int t = 0; t <= 100; ++t) {
    const double r = t / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

namespace {

struct ImageEval {
  CrowdLevel level = CrowdLevel::Easy;
  std::size_t eligible_gts = 0;
  std::vector<std::vector<ScoredDetection>> per_threshold;
};

json level_json(const LevelReport& lr) {
  json thr = json::array();
  for (const auto& t : lr.per_threshold) thr.push_back({{"threshold", t.threshold}, {"ap", t.ap}});
  return {{"ap", lr.ap ? json(*lr.ap) : json(nullptr)},
          {"per_threshold", std::move(thr)},
          {"images", lr.images},
          {"instances", lr.instances}};
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(1);
  s << *v * 100.0;
  return s.str();
}

}  // namespace

json EvalReport::to_json() const {
  json thr = json::array();
  for (const auto& t : per_threshold) thr.push_back({{"threshold", t.threshold}, {"ap", t.ap}});
  return {{"ap", ap},
          {"ap_easy", levels[0].ap ? json(*levels[0].ap) : json(nullptr)},
          {"ap_medium", levels[1].ap ? json(*levels[1].ap) : json(nullptr)},
          {"ap_hard", levels[2].ap ? json(*levels[2].ap) : json(nullptr)},
          {"per_threshold", std::move(thr)},
          {"counts", {{"images", images}, {"instances", instances}}},
          {"levels",
           {{"easy", level_json(levels[0])},
            {"medium", level_json(levels[1])},
            {"hard", level_json(levels[2])}}}};
}

std::string EvalReport::to_csv(const std::string& method) const {
  std::ostringstream s;
  s << "method,AP,AP_Easy,AP_Med,AP_Hard\n"
    << method << ',' << percent(ap) << ',' << percent(levels[0].ap) << ','
    << percent(levels[1].ap) << ',' << percent(levels[2].ap) << '\n';
  return s.str();
}

EvalReport eval_by_crowding(const Dataset& predictions, const Dataset& ground_truth,
                            const OksConfig& cfg, const EvalOptions& options) {
  cfg.check();
  if (cfg.sigmas.size() != ground_truth.schema.count())
    throw ConfigError("sigma count " + std::to_string(cfg.sigmas.size()) +
                      " does not match schema " + ground_truth.schema.name);
  if (predictions.schema.count() != ground_truth.schema.count())
    throw SchemaMismatchError("prediction and ground-truth schemas differ in keypoint count");

  std::unordered_map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < ground_truth.images.size(); ++i)
    gt_index.emplace(ground_truth.images[i].id, i);
  std::vector<const ImageRecord*> pred_for(ground_truth.images.size(), nullptr);
  std::vector<std::string> unknown;
  for (const auto& im : predictions.images) {
    auto it = gt_index.find(im.id);
    if (it == gt_index.end()) unknown.push_back(im.id);
    else if (pred_for[it->second]) throw AlignmentError("duplicate prediction image id " + im.id);
    else pred_for[it->second] = &im;
  }
  if (!unknown.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unknown.size() && i < 20; ++i) list += (i ? ", " : "") + unknown[i];
    if (unknown.size() > 20) list += ", ...";
    throw AlignmentError(std::to_string(unknown.size()) +
                         " prediction image ids missing from ground truth: " + list);
  }

  const std::size_t n_thr = cfg.thresholds.size();
  const std::vector<PersonInstance> no_preds;
  std::vector<ImageEval> evals(ground_truth.images.size());
  parallel_for(ground_truth.images.size(), options.jobs, [&](std::size_t i) {
    const ImageRecord& gt = ground_truth.images[i];
    const std::vector<PersonInstance>& preds = pred_for[i] ? pred_for[i]->persons : no_preds;
    ImageEval& ev = evals[i];
    // Images without ground-truth persons have no CrowdIndex; they are
    // reported with the easy level.
    ev.level = gt.persons.empty() ? CrowdLevel::Easy
                                  : partition(crowd_index(gt, options.counting).value);
    std::vector<bool> eligible(gt.persons.size());
    for (std::size_t g = 0; g < gt.persons.size(); ++g) {
      eligible[g] = gt.persons[g].pose.labeled_count() > 0;
      if (eligible[g]) ++ev.eligible_gts;
    }
    for (std::size_t p = 0; p < preds.size(); ++p)
      if (!preds[p].score)
        throw ProtocolError("prediction " + std::to_string(p) + " in image " + gt.id +
                            " carries no score");
    const auto table = oks_matrix(preds, gt.persons, cfg, gt.width, gt.height);
    ev.per_threshold.resize(n_thr);
    for (std::size_t t = 0; t < n_thr; ++t) {
      const Matching m = match_greedy(preds, table, eligible, cfg.thresholds[t]);
      for (std::size_t p = 0; p < preds.size(); ++p)
        ev.per_threshold[t].push_back({*preds[p].score, i, p, m.pred_to_gt[p] >= 0});
    }
  });

  EvalReport report;
  auto summarize = [&](std::optional<CrowdLevel> level, std::vector<ThresholdAp>& out,
                       std::size_t& images, std::size_t& instances) -> std::optional<double> {
    images = 0;
    instances = 0;
    for (const auto& ev : evals) {
      if (level && ev.level != *level) continue;
      ++images;
      instances += ev.eligible_gts;
    }
    if (instances == 0) return std::nullopt;
    std::vector<double> aps;
    for (std::size_t t = 0; t < n_thr; ++t) {
      std::vector<ScoredDetection> dets;
      for (const auto& ev : evals)
        if (!level || ev.level == *level)
          dets.insert(dets.end(), ev.per_threshold[t].begin(), ev.per_threshold[t].end());
      const double ap = average_precision(std::move(dets), instances);
      out.push_back({cfg.thresholds[t], ap});
      aps.push_back(ap);
    }
    return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
  };

  const auto overall = summarize(std::nullopt, report.per_threshold, report.images, report.instances);
  if (!overall) throw UndefinedApError("ground truth holds no labeled instances");
  report.ap = *overall;
  for (int l = 0; l < 3; ++l) {
    LevelReport& lr = report.levels[static_cast<std::size_t>(l)];
    lr.ap = summarize(static_cast<CrowdLevel>(l), lr.per_threshold, lr.images, lr.instances);
  }
  return report;
}

}  // namespace crowdpose
