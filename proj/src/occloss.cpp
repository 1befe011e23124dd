#include "crowdpose/occloss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowdpose/errors.hpp"
#include "crowdpose/rng.hpp"

namespace crowdpose {

namespace {

constexpr std::size_t kPairwiseBlock = 8;

void check_shapes(const HeatmapPair& pred, const HeatmapPair& truth) {
  if (!pred.visible.same_shape(pred.occluded) || !truth.visible.same_shape(truth.occluded) ||
      !pred.visible.same_shape(truth.visible)) {
    std::ostringstream msg;
    msg << "heatmap shapes differ: pred " << pred.visible.keypoints << "x"
        << pred.visible.height << "x" << pred.visible.width << ", truth "
        << truth.visible.keypoints << "x" << truth.visible.height << "x"
        << truth.visible.width;
    throw DimensionError(msg.str());
  }
}

int denominator(const LossConfig& cfg, int k) {
  if (!(cfg.alpha > 0.0)) throw PreconditionError("alpha must be positive");
  if (cfg.n == 0) {
    if (k < 1) throw DimensionError("loss needs at least one keypoint");
    return k;
  }
  if (cfg.n != k)
    throw DimensionError("loss denominator n=" + std::to_string(cfg.n) +
                         " does not match keypoint count " + std::to_string(k));
  return cfg.n;
}

// Per-channel term: mean or root of the summed squared residual.
double channel_term(const double* p, const double* g, std::size_t cells, NormMode mode,
                    std::vector<double>& scratch) {
  scratch.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double r = p[i] - g[i];
    scratch[i] = r * r;
  }
  const double ss = pairwise_sum(scratch);
  return mode == NormMode::Mse ? ss / static_cast<double>(cells) : std::sqrt(ss);
}

double branch_term(const Heatmap& p, const Heatmap& g, NormMode mode) {
  std::vector<double> scratch;
  std::vector<double> terms(static_cast<std::size_t>(p.keypoints));
  for (int k = 0; k < p.keypoints; ++k)
    terms[static_cast<std::size_t>(k)] =
        channel_term(p.channel(k), g.channel(k), p.channel_size(), mode, scratch);
  return pairwise_sum(terms);
}

void fill_random(Heatmap& hm, Rng& rng) {
  for (double& v : hm.values) v = rng.uniform();
}

}  // namespace

std::string_view to_string(NormMode mode) {
  return mode == NormMode::Mse ? "mse" : "l2norm";
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossValue loss(const HeatmapPair& pred, const HeatmapPair& truth, const LossConfig& cfg) {
  check_shapes(pred, truth);
  const int n = denominator(cfg, pred.keypoints());
  LossValue out;
  out.visible_term = branch_term(pred.visible, truth.visible, cfg.norm);
  out.occluded_term = branch_term(pred.occluded, truth.occluded, cfg.norm);
  out.total = (out.visible_term + cfg.alpha * out.occluded_term) / n;
  return out;
}

LossGradient loss_grad(const HeatmapPair& pred, const HeatmapPair& truth, const LossConfig& cfg) {
  check_shapes(pred, truth);
  const int n = denominator(cfg, pred.keypoints());
  const std::size_t cells = pred.visible.channel_size();
  LossGradient grad{Heatmap(pred.visible.keypoints, pred.visible.height, pred.visible.width),
                    Heatmap(pred.visible.keypoints, pred.visible.height, pred.visible.width)};

  auto branch = [&](const Heatmap& p, const Heatmap& g, double weight, Heatmap& out,
                    const char* name) {
    std::vector<double> scratch;
    for (int k = 0; k < p.keypoints; ++k) {
      const double* pc = p.channel(k);
      const double* gc = g.channel(k);
      double* oc = out.channel(k);
      double scale = 0.0;
      if (cfg.norm == NormMode::Mse) {
        scale = 2.0 * weight / (static_cast<double>(n) * static_cast<double>(cells));
      } else {
        const double norm = channel_term(pc, gc, cells, NormMode::L2Norm, scratch);
        if (norm == 0.0)
          throw NonDifferentiableError(std::string("L2 norm of the ") + name +
                                       " residual is zero for keypoint " + std::to_string(k));
        scale = weight / (static_cast<double>(n) * norm);
      }
      for (std::size_t i = 0; i < cells; ++i) oc[i] = scale * (pc[i] - gc[i]);
    }
  };
  branch(pred.visible, truth.visible, 1.0, grad.visible, "visible");
  branch(pred.occluded, truth.occluded, cfg.alpha, grad.occluded, "occluded");
  return grad;
}

double grad_check(const LossConfig& cfg, int trials, double fd_step, std::uint64_t seed,
                  GradCheckShape shape) {
  if (trials < 1) throw PreconditionError("grad_check needs at least one trial");
  if (!(fd_step > 0.0)) throw PreconditionError("finite-difference step must be positive");
  // Absolute floor on the denominator so near-zero gradients are measured
  // against a scale well above the rounding noise of the differenced loss.
  constexpr double kDenominatorFloor = 1e-6;

  LossConfig c = cfg;
  c.n = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(t));
    HeatmapPair pred(shape.keypoints, shape.height, shape.width);
    HeatmapPair truth(shape.keypoints, shape.height, shape.width);
    fill_random(pred.visible, rng);
    fill_random(pred.occluded, rng);
    fill_random(truth.visible, rng);
    fill_random(truth.occluded, rng);

    const LossGradient analytic = loss_grad(pred, truth, c);
    for (int b = 0; b < 2; ++b) {
      Heatmap& param = b == 0 ? pred.visible : pred.occluded;
      const Heatmap& ga = b == 0 ? analytic.visible : analytic.occluded;
      for (std::size_t i = 0; i < param.values.size(); ++i) {
        const double saved = param.values[i];
        param.values[i] = saved + fd_step;
        const double up = loss(pred, truth, c).total;
        param.values[i] = saved - fd_step;
        const double down = loss(pred, truth, c).total;
        param.values[i] = saved;
        const double numeric = (up - down) / (2.0 * fd_step);
        const double a = ga.values[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), kDenominatorFloor});
        worst = std::max(worst, std::abs(a - numeric) / denom);
      }
    }
  }
  return worst;
}

double stable_learning_rate_bound(const LossConfig& cfg, int keypoints, int height, int width) {
  const int n = cfg.n == 0 ? keypoints : cfg.n;
  return static_cast<double>(n) * height * width / std::max(1.0, cfg.alpha);
}

FitResult fit_direct(const HeatmapPair& truth, const HeatmapPair& init, const LossConfig& cfg,
                     double lr, int steps) {
  if (!(lr > 0.0)) throw PreconditionError("learning rate must be positive");
  if (steps < 0) throw PreconditionError("step count must be non-negative");
  if (cfg.norm != NormMode::Mse) throw PreconditionError("fit_direct supports MSE mode only");

  FitResult result{init, {}};
  result.trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  const double initial = loss(result.pred, truth, cfg).total;
  result.trajectory.push_back(initial);
  for (int s = 0; s < steps; ++s) {
    const LossGradient g = loss_grad(result.pred, truth, cfg);
    for (std::size_t i = 0; i < g.visible.values.size(); ++i) {
      result.pred.visible.values[i] -= lr * g.visible.values[i];
      result.pred.occluded.values[i] -= lr * g.occluded.values[i];
    }
    const double value = loss(result.pred, truth, cfg).total;
    if (!std::isfinite(value) || value > 1e6 * initial) {
      std::ostringstream msg;
      msg << "gradient descent diverged at step " << s + 1 << " with lr=" << lr;
      throw DivergenceError(msg.str());
    }
    result.trajectory.push_back(value);
  }
  return result;
}

}  // namespace crowdpose
