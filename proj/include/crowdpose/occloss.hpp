#pragma once

// Dual-branch occlusion loss: visible and occluded heatmap stacks, the
// occluded term weighted by alpha, averaged over the n keypoints.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "crowdpose/heatmaps.hpp"

namespace crowdpose {

inline constexpr double kDefaultAlpha = 1.5;

enum class NormMode {
  Mse,     ///< mean of squared differences over the cells of a channel
  L2Norm,  ///< Euclidean norm of the channel residual
};

std::string_view to_string(NormMode mode);

struct LossConfig {
  double alpha = kDefaultAlpha;
  NormMode norm = NormMode::Mse;
  /// Denominator; 0 means "use the keypoint count K". Otherwise must equal K.
  int n = 0;
};

struct LossValue {
  double total = 0.0;
  double visible_term = 0.0;
  double occluded_term = 0.0;
};

struct LossGradient {
  Heatmap visible;
  Heatmap occluded;
};

/// Order-independent pairwise summation.
double pairwise_sum(std::span<const double> values);

LossValue loss(const HeatmapPair& pred, const HeatmapPair& truth, const LossConfig& cfg);

/// d total / d pred. In L2Norm mode a channel with zero residual is not
/// differentiable and raises NonDifferentiableError.
LossGradient loss_grad(const HeatmapPair& pred, const HeatmapPair& truth, const LossConfig& cfg);

struct GradCheckShape {
  int keypoints = 3;
  int height = 16;
  int width = 12;
};

/// Worst element-wise relative error between loss_grad() and central finite
/// differences over `trials` random instances.
double grad_check(const LossConfig& cfg, int trials, double fd_step, std::uint64_t seed,
                  GradCheckShape shape = {});

struct FitResult {
  HeatmapPair pred;
  std::vector<double> trajectory;  ///< loss before the first step and after each step
};

/// Largest learning rate for which plain gradient descent on the MSE loss is
/// a contraction: n*H*W / max(1, alpha).
double stable_learning_rate_bound(const LossConfig& cfg, int keypoints, int height, int width);

/// Plain gradient descent with the heatmaps as free parameters (MSE only).
FitResult fit_direct(const HeatmapPair& truth, const HeatmapPair& init, const LossConfig& cfg,
                     double lr, int steps);

}  // namespace crowdpose
