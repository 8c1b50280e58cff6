#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rerankkit/geometry.hpp"
#include "rerankkit/integral_image.hpp"
#include "rerankkit/scene.hpp"

namespace rerankkit {

inline constexpr std::size_t kNumFeatures = 7;

/// Bumped whenever the meaning or order of FeatureVector components changes.
inline constexpr int kFeatureLayoutVersion = 1;

enum FeatureIndex : std::size_t {
  kSemClass = 0,   // fraction of box pixels labelled with the target class
  kSemRoad = 1,    // fraction of box pixels labelled road
  kHeight = 2,     // minus the fraction of box pixels taller than tau
  kCtxRoad = 3,    // road fraction of the strip below the box
  kCtxHeight = 4,  // minus the tall-pixel fraction of that strip
  kCnn = 5,        // objectness passthrough
  kLow = 6,        // generator score passthrough
};

using FeatureVector = std::array<double, kNumFeatures>;

std::string_view feature_name(std::size_t index);

struct ScoreRange {
  double min = 0.0;
  double max = 1.0;
};

struct FeatureConfig {
  double tau = 2.5;  // meters
  double context_height_ratio = 1.0 / 3.0;
  ClassId road_class_id = 1;
  /// Generator emits no scores: every proposal gets low-level score 1.0.
  bool unscored_generator = false;
  /// When set, generator scores are min-max normalized with this range.
  std::optional<ScoreRange> score_normalization;

  /// Throws std::invalid_argument on tau <= 0 or ratio <= 0.
  void validate() const;
};

/// Min and max generator score over every proposal of every scene.
ScoreRange generator_score_range(std::span<const Scene> scenes);

/// The integral images one scene needs: one per requested class, one for
/// road, one for "height exceeds tau". Box and context features share them.
class SceneTables {
 public:
  SceneTables(const Scene& scene, std::span<const ClassId> classes, const FeatureConfig& config);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  /// Throws std::invalid_argument when the class was not requested.
  const IntegralImage& class_table(ClassId id) const;
  const IntegralImage& road() const noexcept { return road_; }
  const IntegralImage& tall() const noexcept { return tall_; }

 private:
  int width_;
  int height_;
  std::map<ClassId, IntegralImage> classes_;
  IntegralImage road_;
  IntegralImage tall_;
};

/// Fraction of `rect` covered by `table`'s predicate; 0 for an empty rect.
double seg_ratio(const IntegralImage& table, const std::optional<PixelRect>& rect);

double seg_ratio(const SceneTables& tables, const std::optional<PixelRect>& rect, ClassId class_id);

/// Minus the fraction of `rect` whose height exceeds the tables' tau.
double height_feature(const SceneTables& tables, const std::optional<PixelRect>& rect);

/// Strip directly below `b`: same width, height ratio * b.height(). Unclipped.
BoundingBox context_box(const BoundingBox& b, double ratio);

FeatureVector extract(const SceneTables& tables, const Proposal& proposal, ClassId class_id,
                      const FeatureConfig& config);

/// One feature vector per proposal, in proposal order. Builds the scene's
/// tables once.
std::vector<FeatureVector> extract_all(const Scene& scene, ClassId class_id,
                                       const FeatureConfig& config);

std::vector<FeatureVector> extract_all(const SceneTables& tables, std::span<const Proposal> proposals,
                                       ClassId class_id, const FeatureConfig& config);

}  // namespace rerankkit
