#pragma once

// Keypoint AP evaluation: OKS similarity, greedy matching, interpolated AP
// and per-crowding-level reporting.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdpose/annotations.hpp"
#include "crowdpose/crowd_metrics.hpp"

namespace crowdpose {

inline constexpr double kDefaultKeypointSigma = 0.079;

enum class AreaMode { BBoxArea, SegmentArea };

struct OksConfig {
  std::vector<double> sigmas;
  AreaMode area_mode = AreaMode::BBoxArea;
  std::vector<double> thresholds;

  /// Uniform sigmas and thresholds 0.50:0.05:0.95.
  static OksConfig defaults(std::size_t keypoint_count);
  /// Throws ConfigError if an invariant is violated.
  void check() const;
};

/// Reads {"sigmas": [...], "thresholds": [...]?, "area_mode": "bbox"|"segment"?}
/// or a bare array of sigmas.
OksConfig load_oks_config(const std::filesystem::path& path, std::size_t keypoint_count);

/// Mean over gt-labeled keypoints of exp(-d^2 / (2 s^2 k^2)), s^2 = gt_scale,
/// k = 2 sigma.
double oks(const Pose& pred, const Pose& gt, double gt_scale, const OksConfig& cfg);

/// Area used as s^2 for a ground-truth instance.
double gt_scale(const PersonInstance& gt, const OksConfig& cfg, int image_width,
                int image_height);

struct Matching {
  std::vector<int> pred_to_gt;  ///< -1 when unmatched
  std::vector<int> gt_to_pred;  ///< -1 when unmatched
  /// Ground truths that take part (those with >= 1 labeled keypoint).
  std::vector<bool> gt_eligible;
};

/// Precomputed OKS table, rows = predictions, columns = ground truths;
/// ineligible ground truths hold -1.
std::vector<std::vector<double>> oks_matrix(const std::vector<PersonInstance>& preds,
                                            const std::vector<PersonInstance>& gts,
                                            const OksConfig& cfg, int image_width = 0,
                                            int image_height = 0);

/// Predictions in descending score (stable); each takes the unmatched
/// eligible ground truth with the highest OKS if it reaches `threshold`.
Matching match_greedy(const std::vector<PersonInstance>& preds,
                      const std::vector<PersonInstance>& gts, double threshold,
                      const OksConfig& cfg, int image_width = 0, int image_height = 0);
Matching match_greedy(const std::vector<PersonInstance>& preds,
                      const std::vector<std::vector<double>>& oks_table,
                      const std::vector<bool>& gt_eligible, double threshold);

/// One scored detection after matching.
struct ScoredDetection {
  double score = 0.0;
  std::size_t image_index = 0;
  std::size_t pred_index = 0;
  bool true_positive = false;
};

/// 101-point interpolated AP over detections pooled across images. Throws
/// UndefinedApError when there are no ground-truth instances.
double average_precision(std::vector<ScoredDetection> detections, std::size_t gt_count);

struct ThresholdAp {
  double threshold = 0.0;
  double ap = 0.0;
};

struct LevelReport {
  std::optional<double> ap;  ///< absent when the level has no ground truth
  std::vector<ThresholdAp> per_threshold;
  std::size_t images = 0;
  std::size_t instances = 0;
};

struct EvalReport {
  double ap = 0.0;
  std::vector<ThresholdAp> per_threshold;
  std::size_t images = 0;
  std::size_t instances = 0;
  std::array<LevelReport, 3> levels;  ///< indexed by CrowdLevel

  std::optional<double> ap_easy() const { return levels[0].ap; }
  std::optional<double> ap_medium() const { return levels[1].ap; }
  std::optional<double> ap_hard() const { return levels[2].ap; }

  nlohmann::json to_json() const;
  /// Header plus one row: method, AP, AP_Easy, AP_Med, AP_Hard (percent).
  std::string to_csv(const std::string& method) const;
};

struct EvalOptions {
  CountingMode counting = CountingMode::AllLabeled;
  unsigned jobs = 1;
};

/// Images bucketed by the ground-truth CrowdIndex; AP computed overall and
/// within each bucket. Prediction image ids must all exist in the ground
/// truth (AlignmentError otherwise); ground-truth images absent from the
/// predictions have no detections.
EvalReport eval_by_crowding(const Dataset& predictions, const Dataset& ground_truth,
                            const OksConfig& cfg, const EvalOptions& options = {});

}  // namespace crowdpose
