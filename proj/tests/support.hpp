#pragma once

// Shared fixtures for the test binaries: temporary directories and random
// pose/scene generators.

#include <cstdint>
#include <filesystem>
#include <string>

#include "crowdpose/annotations.hpp"
#include "crowdpose/rng.hpp"

namespace crowdpose::fixtures {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("crowdpose_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline Visibility random_visibility(Rng& rng, bool allow_unlabeled = true) {
  const auto n = allow_unlabeled ? 4 : 3;
  return static_cast<Visibility>(rng.index(n));
}

/// Person with k keypoints scattered over a random box inside w x h.
inline PersonInstance random_person(Rng& rng, std::size_t k, double w, double h,
                                    bool allow_unlabeled = true) {
  PersonInstance p;
  const double bw = rng.uniform(8.0, w / 2.0);
  const double bh = rng.uniform(8.0, h / 2.0);
  p.bbox = BBox{rng.uniform(0.0, w - bw), rng.uniform(0.0, h - bh), bw, bh};
  p.pose.keypoints.resize(k);
  for (auto& kp : p.pose.keypoints) {
    // Some keypoints spill slightly outside their own box.
    kp.x = p.bbox.x + rng.uniform(-0.1, 1.1) * bw;
    kp.y = p.bbox.y + rng.uniform(-0.1, 1.1) * bh;
    kp.vis = random_visibility(rng, allow_unlabeled);
  }
  return p;
}

inline ImageRecord random_image(Rng& rng, std::string id, std::size_t persons, std::size_t k = 14) {
  ImageRecord rec;
  rec.id = std::move(id);
  rec.width = 640;
  rec.height = 480;
  for (std::size_t i = 0; i < persons; ++i) rec.persons.push_back(random_person(rng, k, 640, 480));
  return rec;
}

}  // namespace crowdpose::fixtures
