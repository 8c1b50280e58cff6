#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rerankkit/eval.hpp"
#include "rerankkit/train.hpp"

namespace rerankkit::testing {

/// n examples with m candidates each; features and losses uniform in [0, 1).
inline std::vector<TrainingExample> random_examples(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<TrainingExample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample& ex = out[i];
    ex.example_id = "ex" + std::to_string(i);
    for (double& v : ex.gt_features) v = u(rng);
    for (std::size_t j = 0; j < m; ++j) {
      FeatureVector f;
      for (double& v : f) v = u(rng);
      ex.candidate_features.push_back(f);
      ex.losses.push_back(u(rng));
    }
  }
  return out;
}

/// GT feature vectors beat every candidate by at least 1 on the objectness
/// coordinate; losses stay in [0.1, 1).
inline std::vector<TrainingExample> separable_examples(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(0, 1), loss(0.1, 1);
  std::vector<TrainingExample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample& ex = out[i];
    ex.example_id = "sep" + std::to_string(i);
    for (double& v : ex.gt_features) v = u(rng);
    ex.gt_features[kCnn] = 2.0 + u(rng);
    for (std::size_t j = 0; j < m; ++j) {
      FeatureVector f;
      for (double& v : f) v = u(rng);
      f[kCnn] = ex.gt_features[kCnn] - 1.0 - u(rng);
      ex.candidate_features.push_back(f);
      ex.losses.push_back(loss(rng));
    }
  }
  return out;
}

/// Images with 0-4 GT objects of classes 2 and 3, where every third
/// proposal is a jittered copy of a GT box and the rest are random.
inline EvalDataset fuzz_dataset(std::mt19937_64& rng, int images, int proposals) {
  std::uniform_real_distribution<double> u(0, 100), ext(2, 30), trunc(0, 1);
  std::uniform_int_distribution<int> n_gt(0, 4), level(0, 3), cls(2, 3);
  EvalDataset d;
  d.classes = ClassMap::defaults();
  for (int i = 0; i < images; ++i) {
    RankedImage img;
    for (int g = n_gt(rng); g > 0; --g) {
      const double x = u(rng), y = u(rng);
      img.ground_truth.push_back({cls(rng), {x, y, x + ext(rng), y + ext(rng)}, level(rng), trunc(rng)});
    }
    for (int j = 0; j < proposals; ++j) {
      if (!img.ground_truth.empty() && j % 3 == 0) {
        const auto& gt = img.ground_truth[static_cast<std::size_t>(j) % img.ground_truth.size()].box;
        std::normal_distribution<double> jit(0, 0.1 * gt.width());
        const double dx = jit(rng), dy = jit(rng);
        img.ranked.push_back({gt.x1 + dx, gt.y1 + dy, gt.x2 + dx + std::abs(jit(rng)), gt.y2 + dy + 1});
      } else {
        const double x = u(rng), y = u(rng);
        img.ranked.push_back({x, y, x + ext(rng), y + ext(rng)});
      }
    }
    d.images.push_back(std::move(img));
  }
  return d;
}

}  // namespace rerankkit::testing
