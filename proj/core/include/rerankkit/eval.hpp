#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rerankkit/scene.hpp"

namespace rerankkit {

/// KITTI-style difficulty gate on ground-truth objects.
struct DifficultyFilter {
  double min_box_height_px = 0.0;
  int max_occlusion = 3;
  double max_truncation = 1.0;

  bool admits(const GroundTruthObject& gt) const noexcept {
    return gt.box.height() >= min_box_height_px && gt.occlusion <= max_occlusion &&
           gt.truncation <= max_truncation;
  }

  static DifficultyFilter easy() { return {40.0, 0, 0.15}; }
  static DifficultyFilter moderate() { return {25.0, 1, 0.30}; }
  static DifficultyFilter hard() { return {25.0, 2, 0.50}; }
};

/// "easy" | "moderate" | "hard" | "none"; nullopt for "none".
std::optional<DifficultyFilter> parse_difficulty(std::string_view name);

/// Proposals of one image in ranked order, plus its ground truth.
struct RankedImage {
  std::vector<BoundingBox> ranked;
  std::vector<GroundTruthObject> ground_truth;
};

struct EvalDataset {
  std::vector<RankedImage> images;
  ClassMap classes;
};

/// Proposals in generator order.
RankedImage ranked_image(const Scene& scene);
/// Proposals permuted by `order` (order[r] = original index of rank r).
RankedImage ranked_image(const Scene& scene, std::span<const std::size_t> order);

/// Orders proposals by their best IoU against the class's admitted GT
/// objects, descending, ties by generator rank. The upper-bound ranking.
std::vector<std::size_t> oracle_order(std::span<const BoundingBox> proposals,
                                      std::span<const GroundTruthObject> ground_truth,
                                      ClassId class_id, const DifficultyFilter* filter = nullptr);

/// True iff some proposal among the first min(K, n) reaches IoU >= t.
bool gt_matched(const GroundTruthObject& gt, std::span<const BoundingBox> ranked, std::size_t k,
                double t);

struct RecallPoint {
  double axis_value = 0.0;
  /// nullopt when no GT object was counted.
  std::optional<double> recall;
  std::size_t matched = 0;
  std::size_t total = 0;
};

struct RecallCurve {
  std::string axis;  // "k", "iou" or "ar_k"
  std::vector<RecallPoint> points;
};

/// Throws std::invalid_argument on an unknown class or t outside (0, 1].
RecallPoint recall(const EvalDataset& data, ClassId class_id, std::size_t k, double t,
                   const DifficultyFilter* filter = nullptr);

/// {10, 50, 100, 500, 1000, 1500, 2000, 3000, 4000, 5000}
std::vector<std::size_t> default_budgets();
/// 0.50, 0.55, ..., 1.00
std::vector<double> default_iou_thresholds();
/// 0.7 for car, 0.5 otherwise.
double default_iou_threshold(std::string_view class_name);

/// Throws std::invalid_argument unless budgets strictly ascend.
RecallCurve recall_vs_k(const EvalDataset& data, ClassId class_id, double t,
                        std::span<const std::size_t> budgets,
                        const DifficultyFilter* filter = nullptr);

/// Throws std::invalid_argument on a threshold outside (0, 1].
RecallCurve recall_vs_iou(const EvalDataset& data, ClassId class_id, std::size_t k,
                          std::span<const double> thresholds,
                          const DifficultyFilter* filter = nullptr);

/// Mean recall over the 11 default thresholds at budget k.
std::optional<double> average_recall(const EvalDataset& data, ClassId class_id, std::size_t k,
                                     const DifficultyFilter* filter = nullptr);

/// AR per budget. Each point's matched/total are summed over the 11
/// thresholds, so recall == matched / total still holds.
RecallCurve ar_vs_k(const EvalDataset& data, ClassId class_id,
                    std::span<const std::size_t> budgets, const DifficultyFilter* filter = nullptr);

/// Header `axis,value,recall,matched,total`, LF endings, shortest round-trip
/// decimals; undefined recall is written as `nan`.
void write_curve_csv(std::ostream& os, const RecallCurve& curve);

}  // namespace rerankkit
