#pragma once

// CrowdIndex and crowding-level statistics.

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdpose/annotations.hpp"

namespace crowdpose {

enum class CrowdLevel { Easy, Medium, Hard };

std::string_view to_string(CrowdLevel level);

/// Which keypoints participate in the counts.
enum class CountingMode {
  AllLabeled,   ///< Visible, Occluded and SelfOccluded
  VisibleOnly,  ///< Visible and SelfOccluded
};

struct CrowdIndexResult {
  double value = 0.0;
  /// Persons with no own keypoint inside their box; they contribute 0.
  std::vector<std::size_t> degenerate_persons;
};

/// C = min{(1/N) sum_i N_a^i / N_b^i, 1}. Keypoints on a box edge count as
/// inside. Throws UndefinedInputError when the image has no persons.
CrowdIndexResult crowd_index(const ImageRecord& record,
                             CountingMode mode = CountingMode::AllLabeled);

/// Easy [0, 0.1), Medium [0.1, 0.8), Hard [0.8, 1].
CrowdLevel partition(double crowd_index);

struct CrowdIndexStats {
  std::vector<std::pair<std::string, double>> per_image;
  std::vector<std::size_t> histogram;  // bin b covers [b/bins, (b+1)/bins)
  std::array<std::size_t, 3> levels{};  // indexed by CrowdLevel
  /// Images without persons are skipped and listed here.
  std::vector<std::string> skipped;
  std::size_t warnings = 0;

  nlohmann::json to_json() const;
};

/// Histogram bin of a value in [0, 1]; the last bin is closed at 1.
std::size_t histogram_bin(double value, std::size_t bins);

CrowdIndexStats dataset_histogram(const Dataset& dataset, std::size_t bins,
                                  CountingMode mode = CountingMode::AllLabeled);

}  // namespace crowdpose
