// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance --kit <path to crowdpose-kit> --workdir <scratch dir>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdpose/annotations.hpp"
#include "crowdpose/augment.hpp"
#include "crowdpose/crowd_metrics.hpp"
#include "crowdpose/evaluator.hpp"
#include "crowdpose/heatmaps.hpp"
#include "crowdpose/occloss.hpp"
#include "crowdpose/synthgen.hpp"
#include "support.hpp"

using namespace crowdpose;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1-3: loss

Verdict gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double alpha : {0.5, 1.5, 3.0}) {
    LossConfig cfg;
    cfg.alpha = alpha;
    worst = std::max(worst, grad_check(cfg, 100, 1e-4, 20240101));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-5 && secs < 30.0,
          "max relative error " + fmt(worst) + " (< 1e-5), " + fmt(secs) + " s (< 30)"};
}

Verdict alpha_ratio() {
  Rng rng(2);
  const HeatmapPair zero(14);
  HeatmapPair vis_truth(14), occ_truth(14);
  for (std::size_t i = 0; i < vis_truth.visible.values.size(); ++i) {
    const double g = rng.uniform();
    vis_truth.visible.values[i] = g;
    occ_truth.occluded.values[i] = g;
  }
  double worst = 0.0;
  for (double alpha : {0.5, 1.5, 3.0}) {
    LossConfig cfg;
    cfg.alpha = alpha;
    const double ratio = loss(zero, occ_truth, cfg).total / loss(zero, vis_truth, cfg).total;
    worst = std::max(worst, std::abs(ratio - alpha) / alpha);
  }
  return {worst <= 1e-12, "max relative deviation " + fmt(worst) + " (<= 1e-12)"};
}

Verdict convergence() {
  Rng rng(3);
  HeatmapPair truth(2, 16, 12), init(2, 16, 12);
  for (auto* h : {&truth.visible, &truth.occluded, &init.visible, &init.occluded})
    for (auto& v : h->values) v = rng.uniform();
  const LossConfig cfg;
  const double lr = 0.5 * stable_learning_rate_bound(cfg, 2, 16, 12);
  const FitResult r = fit_direct(truth, init, cfg, lr, 5000);
  bool monotone = true;
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    monotone = monotone && r.trajectory[i] <= r.trajectory[i - 1];
  const double final_loss = r.trajectory.back();
  return {monotone && final_loss < 1e-6,
          "final loss " + fmt(final_loss) + " (< 1e-6), monotone " + (monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 4: heatmaps

Verdict heatmap_roundtrip() {
  Rng rng(4);
  double worst = 0.0;
  std::size_t checked = 0, overlaps = 0, misrouted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double h = rng.uniform(20.0, 256.0);
    const double w = h * rng.uniform(0.3, 1.0);
    const BBox box{rng.uniform(0, 500), rng.uniform(0, 500), w, h};
    Pose pose;
    pose.keypoints.resize(14);
    for (auto& kp : pose.keypoints) {
      kp.x = box.x + rng.uniform(-0.2, 1.2) * w;
      kp.y = box.y + rng.uniform(-0.2, 1.2) * h;
      kp.vis = fixtures::random_visibility(rng);
    }
    const CropTransform t = bbox_to_crop(box);
    const HeatmapPair hp = encode(pose, t);
    const DecodedPose d = decode(hp, t);
    for (std::size_t k = 0; k < 14; ++k) {
      const double vmax = hp.visible.channel_max(static_cast<int>(k));
      const double omax = hp.occluded.channel_max(static_cast<int>(k));
      overlaps += vmax > 0.0 && omax > 0.0;
      const Keypoint& kp = pose.keypoints[k];
      if (!is_labeled(kp.vis) || !hp.in_bounds[k]) continue;
      ++checked;
      worst = std::max(worst, std::hypot(d.pose.keypoints[k].x - kp.x, d.pose.keypoints[k].y - kp.y));
      const Visibility want = kp.vis == Visibility::Occluded ? Visibility::Occluded : Visibility::Visible;
      misrouted += d.pose.keypoints[k].vis != want;
    }
  }
  return {worst <= 2.0 && overlaps == 0 && misrouted == 0,
          "max error " + fmt(worst) + " px (<= 2) over " + std::to_string(checked) +
              " keypoints, branch overlaps " + std::to_string(overlaps) + ", misrouted " +
              std::to_string(misrouted)};
}

// ---------------------------------------------------------------------------
// 5: CrowdIndex

double crowd_index_oracle(const ImageRecord& rec) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rec.persons.size(); ++i) {
    const BBox& b = rec.persons[i].bbox;
    double own = 0, others = 0;
    for (std::size_t j = 0; j < rec.persons.size(); ++j)
      for (const auto& k : rec.persons[j].pose.keypoints) {
        if (!is_labeled(k.vis)) continue;
        if (k.x < b.x || k.x > b.x + b.w || k.y < b.y || k.y > b.y + b.h) continue;
        (i == j ? own : others) += 1;
      }
    if (own > 0) sum += others / own;
  }
  return std::min(sum / static_cast<double>(rec.persons.size()), 1.0);
}

Verdict crowd_index_agreement() {
  Rng rng(5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ImageRecord rec = fixtures::random_image(rng, "s", 1 + rng.index(8));
    if (crowd_index(rec).value != crowd_index_oracle(rec)) ++mismatches;
  }
  const bool edges = partition(std::nextafter(0.1, 0.0)) == CrowdLevel::Easy &&
                     partition(0.1) == CrowdLevel::Medium &&
                     partition(std::nextafter(0.8, 0.0)) == CrowdLevel::Medium &&
                     partition(0.8) == CrowdLevel::Hard;
  return {mismatches == 0 && edges,
          std::to_string(mismatches) + " mismatches over 1000 scenes, boundaries " +
              (edges ? "ok" : "wrong")};
}

// ---------------------------------------------------------------------------
// 6: augmentation

bool pasted_opaque(const AugmentationLog& log, const CutoutInventory& inv, int px, int py) {
  for (const Placement& p : log.placements) {
    const Cutout src = placement_source(p, inv);
    const PixelRect r = p.pixel_rect();
    const int dx = px - r.x, dy = py - r.y;
    if (dx < 0 || dy < 0 || dx >= r.w || dy >= r.h) continue;
    const int sx = static_cast<int>(static_cast<long long>(dx) * src.raster.width / r.w);
    const int sy = static_cast<int>(static_cast<long long>(dy) * src.raster.height / r.h);
    if (src.raster.at(sx, sy).a != 0) return true;
  }
  return false;
}

Verdict augmentation() {
  CorpusConfig cc;
  cc.scenes = 120;
  cc.bins = 4;
  cc.tolerance = 0.1;
  const Corpus corpus = generate_corpus(6, cc);
  Rng inv_rng(6);
  const CutoutInventory inv = build_inventory(inv_rng, corpus.scenes, 64);
  const AugmentMethod methods[] = {AugmentMethod::Objects,        AugmentMethod::BodyParts,
                                   AugmentMethod::FullBody,       AugmentMethod::PartsAndObjects,
                                   AugmentMethod::FullAndObjects, AugmentMethod::PartsOrObjects,
                                   AugmentMethod::FullOrObjects};
  Rng rng(60);
  std::size_t persons = 0, keypoints = 0, disagreements = 0, central = 0, full = 0, objects = 0;
  double lo = 1.0, hi = 0.0;
  for (std::size_t si = 0; persons < 1000; si = (si + 1) % corpus.scenes.size()) {
    const Scene& s = corpus.scenes[si];
    for (std::size_t t = 0; t < s.record.persons.size() && persons < 1000; ++t, ++persons) {
      AugmentConfig cfg;
      cfg.method = methods[persons % 7];
      const AugmentResult r = apply_augmentation(rng, s.image, s.record, t, cfg, inv);
      const BBox& box = s.record.persons[t].bbox;
      for (const Placement& p : r.log.placements) {
        if (p.kind == CutoutKind::Object) {
          ++objects;
          const double frac = p.w * p.h / box.area();
          lo = std::min(lo, frac);
          hi = std::max(hi, frac);
        } else if (p.kind == CutoutKind::FullBody) {
          ++full;
          const double cx = p.center_x(), cy = p.center_y();
          central += cx >= box.x + 0.25 * box.w && cx <= box.x + 0.75 * box.w &&
                     cy >= box.y + 0.25 * box.h && cy <= box.y + 0.75 * box.h;
        }
      }
      for (std::size_t p = 0; p < s.record.persons.size(); ++p)
        for (std::size_t k = 0; k < s.record.persons[p].pose.keypoints.size(); ++k) {
          ++keypoints;
          const Keypoint& before = s.record.persons[p].pose.keypoints[k];
          const int px = static_cast<int>(std::floor(before.x));
          const int py = static_cast<int>(std::floor(before.y));
          const bool hit = px >= 0 && py >= 0 && px < s.image.width && py < s.image.height &&
                           pasted_opaque(r.log, inv, px, py);
          const bool flips = hit && (before.vis == Visibility::Visible ||
                                     before.vis == Visibility::SelfOccluded);
          const Visibility want = flips ? Visibility::Occluded : before.vis;
          disagreements += r.record.persons[p].pose.keypoints[k].vis != want;
        }
    }
  }
  const bool pass = disagreements == 0 && lo >= 0.08 - 1e-12 && hi <= 0.70 + 1e-12 && lo < 0.10 &&
                    hi > 0.68 && central == 0 && full > 0;
  return {pass, std::to_string(persons) + " persons, flag disagreements " +
                    std::to_string(disagreements) + "/" + std::to_string(keypoints) +
                    ", object area fraction [" + fmt(lo) + ", " + fmt(hi) + "] over " +
                    std::to_string(objects) + ", full-body centres in central region " +
                    std::to_string(central) + "/" + std::to_string(full)};
}

// ---------------------------------------------------------------------------
// 7: evaluation

std::vector<int> reference_match(const std::vector<PersonInstance>& preds,
                                 const std::vector<PersonInstance>& gts, double threshold) {
  std::vector<std::size_t> order(preds.size());
  for (std::size_t p = 0; p < preds.size(); ++p) order[p] = p;
  for (std::size_t i = 1; i < order.size(); ++i)
    for (std::size_t j = i; j > 0 && *preds[order[j]].score > *preds[order[j - 1]].score; --j)
      std::swap(order[j], order[j - 1]);
  std::vector<int> result(preds.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  const double kappa = 2.0 * kDefaultKeypointSigma;
  for (std::size_t p : order) {
    int best = -1;
    double best_v = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      double sum = 0.0;
      int n = 0;
      for (std::size_t k = 0; k < gts[g].pose.size(); ++k) {
        const Keypoint& gk = gts[g].pose.keypoints[k];
        if (!is_labeled(gk.vis)) continue;
        const Keypoint& pk = preds[p].pose.keypoints[k];
        const double d2 = (pk.x - gk.x) * (pk.x - gk.x) + (pk.y - gk.y) * (pk.y - gk.y);
        sum += std::exp(-d2 / (2.0 * gts[g].bbox.area() * kappa * kappa));
        ++n;
      }
      if (n == 0) continue;
      const double v = sum / n;
      if (v >= threshold && v > best_v) {
        best = static_cast<int>(g);
        best_v = v;
      }
    }
    if (best >= 0) {
      result[p] = best;
      taken[static_cast<std::size_t>(best)] = true;
    }
  }
  return result;
}

Dataset jittered(Rng& rng, const Dataset& gt, double rel_sigma) {
  Dataset pred = gt;
  for (auto& im : pred.images)
    for (auto& p : im.persons) {
      const double s = std::sqrt(p.bbox.area());
      for (auto& kp : p.pose.keypoints) {
        kp.x += rng.normal(0.0, rel_sigma * s);
        kp.y += rng.normal(0.0, rel_sigma * s);
        kp.vis = Visibility::Visible;
      }
      p.score = rng.uniform(0.05, 1.0);
    }
  return pred;
}

Verdict evaluation() {
  Rng rng(7);
  Dataset gt;
  gt.schema = crowdpose_schema();
  for (int i = 0; i < 500; ++i)
    gt.images.push_back(fixtures::random_image(rng, "img" + std::to_string(i), 1 + rng.index(6)));
  const OksConfig cfg = OksConfig::defaults(14);

  const Dataset perfect = jittered(rng, gt, 0.0);
  const double ap_perfect = eval_by_crowding(perfect, gt, cfg).ap;

  std::size_t disagreements = 0;
  const Dataset noisy = jittered(rng, gt, 0.05);
  for (std::size_t i = 0; i < gt.images.size(); ++i)
    for (double thr : cfg.thresholds) {
      const auto& preds = noisy.images[i].persons;
      const auto& gts = gt.images[i].persons;
      if (match_greedy(preds, gts, thr, cfg).pred_to_gt != reference_match(preds, gts, thr))
        ++disagreements;
    }

  std::vector<double> aps;
  for (double sigma : {0.01, 0.05, 0.1}) aps.push_back(eval_by_crowding(jittered(rng, gt, sigma), gt, cfg).ap);
  const bool decreasing = aps[0] > aps[1] && aps[1] > aps[2];
  return {ap_perfect == 1.0 && disagreements == 0 && decreasing,
          "perfect AP " + fmt(ap_perfect) + ", matcher disagreements " + std::to_string(disagreements) +
              " over 500 scenes x 10 thresholds, AP at jitter 0.01/0.05/0.1: " + fmt(aps[0]) + "/" +
              fmt(aps[1]) + "/" + fmt(aps[2])};
}

// ---------------------------------------------------------------------------
// 8: synthetic corpus

Verdict synthetic_corpus() {
  CorpusConfig cc;
  cc.scenes = 2000;
  cc.bins = 10;
  cc.tolerance = 0.03;
  Corpus corpus;
  try {
    corpus = generate_corpus(8, cc);
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  double worst = 0.0;
  for (std::size_t n : corpus.histogram) worst = std::max(worst, std::abs(n / 2000.0 - 0.1));
  std::size_t stored_mismatch = 0, flag_mismatch = 0, keypoints = 0;
  const json& stored = corpus.dataset.meta.at("crowd_index");
  for (const Scene& s : corpus.scenes) {
    if (stored.at(s.record.id).get<double>() != crowd_index_oracle(s.record)) ++stored_mismatch;
    for (std::size_t p = 0; p < s.persons.size(); ++p)
      for (std::size_t k = 0; k < kTemplateKeypoints; ++k) {
        ++keypoints;
        const Keypoint& kp = s.record.persons[p].pose.keypoints[k];
        const std::uint16_t d = s.depth.at(static_cast<int>(std::floor(kp.x)),
                                           static_cast<int>(std::floor(kp.y)));
        Visibility want = Visibility::Visible;
        if (d / kDepthLevels != s.persons[p].rank) want = Visibility::Occluded;
        else if (d % kDepthLevels < s.persons[p].keypoint_level[k]) want = Visibility::SelfOccluded;
        flag_mismatch += kp.vis != want;
      }
  }
  return {worst <= 0.03 && stored_mismatch == 0 && flag_mismatch == 0,
          "max bin deviation " + fmt(worst) + " (<= 0.03), stored index mismatches " +
              std::to_string(stored_mismatch) + ", flag/depth mismatches " +
              std::to_string(flag_mismatch) + "/" + std::to_string(keypoints)};
}

// ---------------------------------------------------------------------------
// 9: reproducibility through the command-line tool

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_kit(const std::string& kit, const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(kit);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > " + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json outputs_of(const fs::path& manifest) {
  std::ifstream in(manifest);
  return json::parse(in).at("outputs");
}

Verdict reproducibility(const std::string& kit, const fs::path& work) {
  const fs::path dir = work / "repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> failures;
  std::map<std::string, json> digests[2];
  const char* jobs[2] = {"1", "8"};
  for (int j = 0; j < 2; ++j) {
    const fs::path base = dir / ("jobs" + std::string(jobs[j]));
    const auto step = [&](const std::string& name, std::vector<std::string> args,
                          const fs::path& manifest) {
      args.insert(args.end(), {"--jobs", jobs[j]});
      if (run_kit(kit, args, base.string() + "." + name + ".log") != 0) {
        failures.push_back(name + " --jobs " + jobs[j]);
        return;
      }
      digests[j][name] = outputs_of(manifest);
    };
    step("gen",
         {"gen", "--scenes", "60", "--bins", "3", "--tolerance", "0.05", "--seed", "9", "--out",
          (base / "corpus").string(), "--inventory-out", (base / "inventory").string()},
         base / "corpus" / "manifest.json");
    step("augment",
         {"augment", "--method", "parts_or_objects", "--seed", "4", "--inventory",
          (base / "inventory").string(), "--in", (base / "corpus" / "annotations.json").string(),
          "--out", (base / "augmented").string()},
         base / "augmented" / "manifest.json");
    if (fs::exists(base / "corpus" / "annotations.json")) {
      Rng rng(99);
      const Dataset gt = load_dataset(base / "corpus" / "annotations.json", DatasetFormat::Native);
      save_dataset(base / "pred.json", jittered(rng, gt, 0.03));
    }
    step("eval",
         {"eval", "--gt", (base / "corpus" / "annotations.json").string(), "--pred",
          (base / "pred.json").string(), "--out", (base / "report.json").string(), "--csv",
          (base / "table.csv").string()},
         base / "report.json.manifest.json");
  }
  std::vector<std::string> differing;
  for (const char* name : {"gen", "augment", "eval"})
    if (digests[0].count(name) && digests[1].count(name) && digests[0][name] != digests[1][name])
      differing.push_back(name);
  std::string detail = "runs failed: " + std::to_string(failures.size()) + ", differing digests:";
  for (const auto& d : differing) detail += " " + d;
  if (differing.empty()) detail += " none";
  std::size_t files = 0;
  for (const auto& [name, out] : digests[0]) files += out.size();
  detail += " (" + std::to_string(files) + " files compared)";
  return {failures.empty() && differing.empty(), detail};
}

// ---------------------------------------------------------------------------
// 10: JTA conversion

Verdict jta_preservation(const fs::path& work) {
  // Keypoint names of both skeletons, independent of the library tables.
  const std::vector<std::string> jta = {
      "head_top",      "head_center", "neck",      "right_clavicle", "right_shoulder", "right_elbow",
      "right_wrist",   "left_clavicle", "left_shoulder", "left_elbow", "left_wrist",   "spine0",
      "spine1",        "spine2",      "spine3",    "spine4",         "right_hip",      "right_knee",
      "right_ankle",   "left_hip",    "left_knee", "left_ankle"};
  const std::vector<std::string> crowdpose = {
      "left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
      "right_wrist",   "left_hip",       "right_hip",  "left_knee",   "right_knee",
      "left_ankle",    "right_ankle",    "head_top",   "neck"};
  std::vector<std::size_t> source(crowdpose.size());
  for (std::size_t k = 0; k < crowdpose.size(); ++k)
    source[k] = static_cast<std::size_t>(std::find(jta.begin(), jta.end(), crowdpose[k]) - jta.begin());

  Rng rng(10);
  struct Raw {
    double x, y;
    int occ, self;
  };
  std::vector<std::vector<Raw>> raw(1000, std::vector<Raw>(22));
  json rows = json::array();
  for (int pose = 0; pose < 1000; ++pose)
    for (int j = 0; j < 22; ++j) {
      // Full-precision doubles, including values that need all 17 digits.
      Raw r{rng.uniform(0, 1920), rng.uniform(0, 1080), rng.bernoulli(0.3), rng.bernoulli(0.3)};
      if (rng.bernoulli(0.05)) r.x = std::nextafter(r.x, 0.0);
      raw[pose][j] = r;
      rows.push_back(json::array({pose / 10, pose % 10, j, r.x, r.y, 0.0, 0.0, 5.0, r.occ, r.self}));
    }
  const fs::path dir = work / "jta";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "fixture.json") << rows.dump();

  const Dataset parsed = load_dataset(dir / "fixture.json", DatasetFormat::JtaLike);
  save_dataset(dir / "native.json", convert_dataset(parsed, default_jta_to_crowdpose_mapping()));
  const Dataset back = load_dataset(dir / "native.json", DatasetFormat::Native);

  std::size_t coord_mismatch = 0, flag_mismatch = 0, poses = 0;
  for (const auto& im : back.images)
    for (std::size_t p = 0; p < im.persons.size(); ++p) {
      const int frame = std::stoi(im.id.substr(im.id.find_last_not_of("0123456789") + 1));
      const int pose = frame * 10 + static_cast<int>(p);
      ++poses;
      for (std::size_t k = 0; k < crowdpose.size(); ++k) {
        const Raw& r = raw[pose][source[k]];
        const Keypoint& kp = im.persons[p].pose.keypoints[k];
        coord_mismatch += std::bit_cast<std::uint64_t>(kp.x) != std::bit_cast<std::uint64_t>(r.x) ||
                          std::bit_cast<std::uint64_t>(kp.y) != std::bit_cast<std::uint64_t>(r.y);
        const Visibility want = r.occ ? Visibility::Occluded
                                      : (r.self ? Visibility::SelfOccluded : Visibility::Visible);
        flag_mismatch += kp.vis != want;
      }
    }
  return {poses == 1000 && coord_mismatch == 0 && flag_mismatch == 0,
          std::to_string(poses) + " poses, coordinate mismatches " + std::to_string(coord_mismatch) +
              ", flag mismatches " + std::to_string(flag_mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string kit;
  fs::path work = fs::temp_directory_path() / "crowdpose_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--kit") kit = argv[i + 1];
    else if (flag == "--workdir") work = argv[i + 1];
  }
  if (kit.empty()) {
    std::cerr << "usage: acceptance --kit <crowdpose-kit> [--workdir <dir>]\n";
    return 2;
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"loss gradient matches finite differences", gradient_check},
      {"occluded-branch weighting ratio", alpha_ratio},
      {"direct fit converges monotonically", convergence},
      {"heatmap encode/decode round trip", heatmap_roundtrip},
      {"CrowdIndex matches brute force", crowd_index_agreement},
      {"augmentation flags and placement bounds", augmentation},
      {"keypoint AP evaluation", evaluation},
      {"synthetic corpus hits target histogram", synthetic_corpus},
      {"outputs independent of --jobs", [&] { return reproducibility(kit, work); }},
      {"JTA conversion preserves coordinates and flags", [&] { return jta_preservation(work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << (i + 1) << ": " << (v.pass ? "PASS" : "FAIL") << "  "
              << criteria[i].first << "  [" << v.detail << "]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
