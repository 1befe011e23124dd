#include "crowdpose/crowd_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "crowdpose/errors.hpp"

namespace crowdpose {

namespace {

bool counts(Visibility v, CountingMode mode) {
  if (mode == CountingMode::VisibleOnly)
    return v == Visibility::Visible || v == Visibility::SelfOccluded;
  return is_labeled(v);
}

std::size_t keypoints_inside(const Pose& pose, const BBox& box, CountingMode mode) {
  std::size_t n = 0;
  for (const auto& kp : pose.keypoints)
    if (counts(kp.vis, mode) && box.contains(kp.x, kp.y)) ++n;
  return n;
}

}  // namespace

std::string_view to_string(CrowdLevel level) {
  switch (level) {
    case CrowdLevel::Easy: return "easy";
    case CrowdLevel::Medium: return "medium";
    case CrowdLevel::Hard: return "hard";
  }
  return "?";
}

CrowdIndexResult crowd_index(const ImageRecord& record, CountingMode mode) {
  const std::size_t n = record.persons.size();
  if (n == 0) throw UndefinedInputError("image " + record.id + " has no persons");

  CrowdIndexResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& box = record.persons[i].bbox;
    const std::size_t own = keypoints_inside(record.persons[i].pose, box, mode);
    if (own == 0) {
      result.degenerate_persons.push_back(i);
      continue;
    }
    std::size_t foreign = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) foreign += keypoints_inside(record.persons[j].pose, box, mode);
    sum += static_cast<double>(foreign) / static_cast<double>(own);
  }
  result.value = std::min(sum / static_cast<double>(n), 1.0);
  return result;
}

CrowdLevel partition(double c) {
  if (c < 0.1) return CrowdLevel::Easy;
  if (c < 0.8) return CrowdLevel::Medium;
  return CrowdLevel::Hard;
}

std::size_t histogram_bin(double value, std::size_t bins) {
  if (!(value > 0.0)) return 0;
  const auto b = static_cast<std::size_t>(std::floor(value * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

CrowdIndexStats dataset_histogram(const Dataset& dataset, std::size_t bins, CountingMode mode) {
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");
  CrowdIndexStats stats;
  stats.histogram.assign(bins, 0);
  for (const auto& im : dataset.images) {
    if (im.persons.empty()) {
      stats.skipped.push_back(im.id);
      continue;
    }
    const CrowdIndexResult c = crowd_index(im, mode);
    stats.warnings += c.degenerate_persons.size();
    stats.per_image.emplace_back(im.id, c.value);
    ++stats.histogram[histogram_bin(c.value, bins)];
    ++stats.levels[static_cast<std::size_t>(partition(c.value))];
  }
  return stats;
}

nlohmann::json CrowdIndexStats::to_json() const {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& [id, c] : per_image) images.push_back({{"id", id}, {"crowd_index", c}});
  const std::size_t bins = histogram.size();
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t b = 0; b <= bins; ++b)
    edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  return {{"per_image", std::move(images)},
          {"histogram", {{"bins", bins}, {"edges", std::move(edges)}, {"counts", histogram}}},
          {"levels",
           {{"easy", levels[0]}, {"medium", levels[1]}, {"hard", levels[2]}}},
          {"skipped", skipped},
          {"warnings", warnings}};
}

}  // namespace crowdpose
