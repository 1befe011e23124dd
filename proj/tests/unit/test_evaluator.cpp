#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "crowdpose/crowd_metrics.hpp"
#include "crowdpose/errors.hpp"
#include "crowdpose/evaluator.hpp"
#include "support.hpp"

using namespace crowdpose;

namespace {

// Reference greedy matcher written from the protocol description: visit
// predictions by descending score (input order on ties) and give each the
// unmatched labeled gt with the highest OKS >= threshold, lowest index on ties.
std::vector<int> reference_match(const std::vector<PersonInstance>& preds,
                                 const std::vector<PersonInstance>& gts, double threshold,
                                 double sigma) {
  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < preds.size(); ++p) order.push_back(p);
  for (std::size_t i = 1; i < order.size(); ++i)  // insertion sort: stable
    for (std::size_t j = i; j > 0 && *preds[order[j]].score > *preds[order[j - 1]].score; --j)
      std::swap(order[j], order[j - 1]);

  std::vector<int> result(preds.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t p : order) {
    int best = -1;
    double best_v = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      double sum = 0.0;
      int n = 0;
      for (std::size_t k = 0; k < gts[g].pose.size(); ++k) {
        const Keypoint& gk = gts[g].pose.keypoints[k];
        if (gk.vis == Visibility::Unlabeled) continue;
        const Keypoint& pk = preds[p].pose.keypoints[k];
        const double d2 = (pk.x - gk.x) * (pk.x - gk.x) + (pk.y - gk.y) * (pk.y - gk.y);
        const double kappa = 2.0 * sigma;
        sum += std::exp(-d2 / (2.0 * (gts[g].bbox.w * gts[g].bbox.h) * kappa * kappa));
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

PersonInstance jittered(Rng& rng, const PersonInstance& gt, double rel_sigma, double score) {
  PersonInstance p = gt;
  const double s = std::sqrt(gt.bbox.area());
  for (auto& kp : p.pose.keypoints) {
    kp.x += rng.normal(0.0, rel_sigma * s);
    kp.y += rng.normal(0.0, rel_sigma * s);
    kp.vis = Visibility::Visible;
  }
  p.score = score;
  return p;
}

Dataset random_gt(Rng& rng, int images) {
  Dataset ds;
  ds.schema = crowdpose_schema();
  for (int i = 0; i < images; ++i)
    ds.images.push_back(fixtures::random_image(rng, "img" + std::to_string(i), 1 + rng.index(6)));
  return ds;
}

Dataset predictions_from(Rng& rng, const Dataset& gt, double rel_sigma) {
  Dataset pred = gt;
  for (auto& im : pred.images)
    for (auto& p : im.persons) p = jittered(rng, p, rel_sigma, rng.uniform(0.05, 1.0));
  return pred;
}

}  // namespace

TEST(Oks, ClosedFormAtOneSigma) {
  // One labeled keypoint displaced so that d^2 = s^2 k^2 gives exp(-1/2).
  OksConfig cfg = OksConfig::defaults(2);
  Pose gt, pred;
  gt.keypoints = {{10, 10, Visibility::Visible}, {0, 0, Visibility::Unlabeled}};
  const double area = 400.0;
  const double k = 2 * kDefaultKeypointSigma;
  pred.keypoints = {{10 + std::sqrt(area) * k, 10, Visibility::Visible}, {99, 99, Visibility::Visible}};
  EXPECT_NEAR(oks(pred, gt, area, cfg), std::exp(-0.5), 1e-15);
  EXPECT_EQ(oks(gt, gt, area, cfg), 1.0);
}

TEST(Oks, UndefinedWithoutLabeledKeypoints) {
  OksConfig cfg = OksConfig::defaults(1);
  Pose gt;
  gt.keypoints = {{0, 0, Visibility::Unlabeled}};
  EXPECT_THROW(oks(gt, gt, 1.0, cfg), UndefinedSimilarityError);
}

TEST(Oks, SegmentAreaScale) {
  OksConfig cfg = OksConfig::defaults(14);
  cfg.area_mode = AreaMode::SegmentArea;
  PersonInstance p;
  p.bbox = {0, 0, 10, 10};
  EXPECT_EQ(gt_scale(p, cfg, 0, 0), 100.0);
  p.segmentation = SegmentMask{SegmentMask::Kind::Polygons, {{{0, 0}, {4, 0}, {4, 5}}}, {}};
  EXPECT_EQ(gt_scale(p, cfg, 0, 0), 10.0);
  p.segmentation = SegmentMask{SegmentMask::Kind::Rle, {}, RleCounts{2, 2, {1, 3}}};
  EXPECT_EQ(gt_scale(p, cfg, 0, 0), 3.0);
}

TEST(Matcher, AgreesWithReference) {
  Rng rng(31);
  const OksConfig cfg = OksConfig::defaults(14);
  for (int scene = 0; scene < 500; ++scene) {
    std::vector<PersonInstance> gts;
    const auto n_gt = rng.index(5);
    for (std::size_t g = 0; g < n_gt; ++g) {
      gts.push_back(fixtures::random_person(rng, 14, 200, 200));
      if (rng.bernoulli(0.1))
        for (auto& kp : gts.back().pose.keypoints) kp.vis = Visibility::Unlabeled;
    }
    std::vector<PersonInstance> preds;
    const auto n_pred = rng.index(6);
    for (std::size_t p = 0; p < n_pred; ++p) {
      if (!gts.empty() && rng.bernoulli(0.7))
        preds.push_back(jittered(rng, gts[rng.index(gts.size())], rng.uniform(0.0, 0.1),
                                 0.1 * static_cast<double>(rng.integer(1, 4))));
      else {
        preds.push_back(fixtures::random_person(rng, 14, 200, 200));
        preds.back().score = 0.1 * static_cast<double>(rng.integer(1, 4));
      }
    }
    for (double thr : {0.5, 0.75, 0.9}) {
      const Matching m = match_greedy(preds, gts, thr, cfg);
      ASSERT_EQ(m.pred_to_gt, reference_match(preds, gts, thr, kDefaultKeypointSigma))
          << "scene " << scene << " threshold " << thr;
      for (std::size_t g = 0; g < gts.size(); ++g)
        if (m.gt_to_pred[g] >= 0) EXPECT_EQ(m.pred_to_gt[static_cast<std::size_t>(m.gt_to_pred[g])], int(g));
    }
  }
}

TEST(Matcher, MissingScoreIsProtocolError) {
  Rng rng(1);
  std::vector<PersonInstance> gts{fixtures::random_person(rng, 14, 100, 100)};
  std::vector<PersonInstance> preds{gts[0]};
  EXPECT_THROW(match_greedy(preds, gts, 0.5, OksConfig::defaults(14)), ProtocolError);
}

TEST(Matcher, EqualOksTieGoesToLowestGtIndex) {
  PersonInstance g;
  g.bbox = {0, 0, 10, 10};
  g.pose.keypoints = {{5, 5, Visibility::Visible}};
  std::vector<PersonInstance> gts{g, g};
  PersonInstance p = g;
  p.score = 0.9;
  const Matching m = match_greedy({p}, gts, 0.5, OksConfig::defaults(1));
  EXPECT_EQ(m.pred_to_gt[0], 0);
}

TEST(Ap, HalfRecallAtFullPrecision) {
  // One true positive out of two gts: recall points 0.00..0.50 score 1.
  std::vector<ScoredDetection> d{{0.9, 0, 0, true}};
  EXPECT_NEAR(average_precision(d, 2), 51.0 / 101.0, 1e-15);
  EXPECT_EQ(average_precision({{0.9, 0, 0, false}}, 1), 0.0);
  EXPECT_THROW(average_precision({}, 0), UndefinedApError);
}

TEST(Ap, InterpolatesPrecisionEnvelope) {
  // TP, FP, TP over 2 gts: precision 1, 0.5, 2/3 at recall 0.5, 0.5, 1.
  std::vector<ScoredDetection> d{{0.9, 0, 0, true}, {0.8, 0, 1, false}, {0.7, 0, 2, true}};
  EXPECT_NEAR(average_precision(d, 2), (51.0 * 1.0 + 50.0 * (2.0 / 3.0)) / 101.0, 1e-15);
}

TEST(Eval, PerfectPredictionsScoreOne) {
  Rng rng(2);
  const Dataset gt = random_gt(rng, 60);
  const Dataset pred = predictions_from(rng, gt, 0.0);
  const EvalReport r = eval_by_crowding(pred, gt, OksConfig::defaults(14));
  EXPECT_EQ(r.ap, 1.0);
  int populated = 0;
  for (const auto& l : r.levels)
    if (l.ap) {
      EXPECT_EQ(*l.ap, 1.0);
      ++populated;
    }
  EXPECT_GE(populated, 2);
  EXPECT_EQ(r.levels[0].images + r.levels[1].images + r.levels[2].images, r.images);
}

TEST(Eval, ApFallsWithJitter) {
  Rng rng(3);
  const Dataset gt = random_gt(rng, 80);
  const OksConfig cfg = OksConfig::defaults(14);
  double previous = 1.1;
  for (double sigma : {0.01, 0.05, 0.1}) {
    Rng jr(17);
    const double ap = eval_by_crowding(predictions_from(jr, gt, sigma), gt, cfg).ap;
    EXPECT_LT(ap, previous) << sigma;
    previous = ap;
  }
}

TEST(Eval, LevelsFollowGroundTruthCrowdIndex) {
  Rng rng(4);
  const Dataset gt = random_gt(rng, 40);
  std::array<std::size_t, 3> expect{};
  for (const auto& im : gt.images) ++expect[static_cast<std::size_t>(partition(crowd_index(im).value))];
  const EvalReport r = eval_by_crowding(predictions_from(rng, gt, 0.02), gt, OksConfig::defaults(14));
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(r.levels[l].images, expect[l]);
}

TEST(Eval, ReportIndependentOfJobs) {
  Rng rng(5);
  const Dataset gt = random_gt(rng, 50);
  const Dataset pred = predictions_from(rng, gt, 0.04);
  EvalOptions one, many;
  many.jobs = 8;
  EXPECT_EQ(eval_by_crowding(pred, gt, OksConfig::defaults(14), one).to_json().dump(),
            eval_by_crowding(pred, gt, OksConfig::defaults(14), many).to_json().dump());
}

TEST(Eval, UnknownPredictionImageIsAlignmentError) {
  Rng rng(6);
  const Dataset gt = random_gt(rng, 3);
  Dataset pred = predictions_from(rng, gt, 0.0);
  pred.images[1].id = "stray";
  try {
    eval_by_crowding(pred, gt, OksConfig::defaults(14));
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("stray"), std::string::npos);
  }
}

TEST(Eval, MissingPredictionImagesCountAsMisses) {
  Rng rng(7);
  const Dataset gt = random_gt(rng, 10);
  Dataset pred = predictions_from(rng, gt, 0.0);
  pred.images.resize(5);
  const EvalReport r = eval_by_crowding(pred, gt, OksConfig::defaults(14));
  EXPECT_LT(r.ap, 1.0);
  EXPECT_GT(r.ap, 0.0);
}

TEST(Eval, CsvLayout) {
  Rng rng(8);
  const Dataset gt = random_gt(rng, 10);
  const EvalReport r = eval_by_crowding(predictions_from(rng, gt, 0.0), gt, OksConfig::defaults(14));
  const std::string csv = r.to_csv("baseline");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,AP,AP_Easy,AP_Med,AP_Hard");
  EXPECT_EQ(csv.rfind("baseline,100.0,", csv.find('\n') + 1), csv.find('\n') + 1);
}

TEST(OksConfigFile, ArrayAndObjectForms) {
  const auto dir = fixtures::scratch_dir("sigmas");
  std::ofstream(dir / "a.json") << "[0.1, 0.2]";
  std::ofstream(dir / "b.json") << R"({"sigmas": [0.1, 0.2], "thresholds": [0.5], "area_mode": "segment"})";
  std::ofstream(dir / "c.json") << "[0.1]";
  EXPECT_EQ(load_oks_config(dir / "a.json", 2).sigmas, (std::vector<double>{0.1, 0.2}));
  const OksConfig b = load_oks_config(dir / "b.json", 2);
  EXPECT_EQ(b.thresholds, std::vector<double>{0.5});
  EXPECT_EQ(b.area_mode, AreaMode::SegmentArea);
  EXPECT_THROW(load_oks_config(dir / "c.json", 2), ConfigError);
}
