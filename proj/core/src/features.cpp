#include "rerankkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rerankkit {

std::string_view feature_name(std::size_t index) {
  static constexpr std::array<std::string_view, kNumFeatures> kNames = {
      "sem_class", "sem_road", "height", "ctx_road", "ctx_height", "cnn", "low"};
  if (index >= kNumFeatures) {
    throw std::out_of_range("feature index " + std::to_string(index));
  }
  return kNames[index];
}

void FeatureConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("tau must be positive");
  }
  if (!(context_height_ratio > 0.0) || !std::isfinite(context_height_ratio)) {
    throw std::invalid_argument("context height ratio must be positive");
  }
  if (score_normalization && !(score_normalization->max >= score_normalization->min)) {
    throw std::invalid_argument("score normalization range is inverted");
  }
}

ScoreRange generator_score_range(std::span<const Scene> scenes) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Scene& s : scenes) {
    for (const Proposal& p : s.proposals) {
      lo = std::min(lo, p.generator_score);
      hi = std::max(hi, p.generator_score);
    }
  }
  if (lo > hi) return {0.0, 1.0};
  return {lo, hi};
}

SceneTables::SceneTables(const Scene& scene, std::span<const ClassId> classes,
                         const FeatureConfig& config)
    : width_(scene.width), height_(scene.height) {
  scene.validate();
  config.validate();
  const auto& mask = scene.seg_mask;
  for (ClassId id : classes) {
    if (classes_.count(id)) continue;
    classes_.emplace(id, IntegralImage::build(width_, height_, [&](int r, int c) {
                       return mask(r, c) == id;
                     }));
  }
  const ClassId road = config.road_class_id;
  road_ = IntegralImage::build(width_, height_, [&](int r, int c) { return mask(r, c) == road; });
  // NaN compares false, so invalid heights never count as tall.
  const auto& hm = scene.height_map;
  const double tau = config.tau;
  tall_ = IntegralImage::build(width_, height_,
                               [&](int r, int c) { return static_cast<double>(hm(r, c)) > tau; });
}

const IntegralImage& SceneTables::class_table(ClassId id) const {
  auto it = classes_.find(id);
  if (it == classes_.end()) {
    throw std::invalid_argument("no integral image built for class " + std::to_string(id));
  }
  return it->second;
}

double seg_ratio(const IntegralImage& table, const std::optional<PixelRect>& rect) {
  if (!rect || rect->empty()) return 0.0;
  return static_cast<double>(table.box_sum(*rect)) / static_cast<double>(rect->area());
}

double seg_ratio(const SceneTables& tables, const std::optional<PixelRect>& rect, ClassId class_id) {
  return seg_ratio(tables.class_table(class_id), rect);
}

double height_feature(const SceneTables& tables, const std::optional<PixelRect>& rect) {
  if (!rect || rect->empty()) return 0.0;
  const std::int64_t tall = tables.tall().box_sum(*rect);
  if (tall == 0) return 0.0;
  return -static_cast<double>(tall) / static_cast<double>(rect->area());
}

BoundingBox context_box(const BoundingBox& b, double ratio) {
  return {b.x1, b.y2, b.x2, b.y2 + ratio * (b.y2 - b.y1)};
}

namespace {

double low_level_score(const Proposal& p, const FeatureConfig& config) {
  if (config.unscored_generator) return 1.0;
  if (config.score_normalization) {
    const auto [lo, hi] = *config.score_normalization;
    if (hi <= lo) return 0.0;
    return (p.generator_score - lo) / (hi - lo);
  }
  return p.generator_score;
}

}  // namespace

FeatureVector extract(const SceneTables& tables, const Proposal& proposal, ClassId class_id,
                      const FeatureConfig& config) {
  const auto rect = clip_to_pixels(proposal.box, tables.width(), tables.height());
  const auto ctx = clip_to_pixels(context_box(proposal.box, config.context_height_ratio),
                                  tables.width(), tables.height());
  FeatureVector f{};
  f[kSemClass] = seg_ratio(tables, rect, class_id);
  f[kSemRoad] = seg_ratio(tables.road(), rect);
  f[kHeight] = height_feature(tables, rect);
  f[kCtxRoad] = seg_ratio(tables.road(), ctx);
  f[kCtxHeight] = height_feature(tables, ctx);
  f[kCnn] = proposal.objectness;
  f[kLow] = low_level_score(proposal, config);
  return f;
}

std::vector<FeatureVector> extract_all(const SceneTables& tables, std::span<const Proposal> proposals,
                                       ClassId class_id, const FeatureConfig& config) {
  std::vector<FeatureVector> out;
  out.reserve(proposals.size());
  for (const Proposal& p : proposals) {
    out.push_back(extract(tables, p, class_id, config));
  }
  return out;
}

std::vector<FeatureVector> extract_all(const Scene& scene, ClassId class_id,
                                       const FeatureConfig& config) {
  const ClassId classes[] = {class_id};
  const SceneTables tables(scene, classes, config);
  return extract_all(tables, scene.proposals, class_id, config);
}

}  // namespace rerankkit
