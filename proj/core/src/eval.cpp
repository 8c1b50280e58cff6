#include "rerankkit/eval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rerankkit/model.hpp"

namespace rerankkit {

std::optional<DifficultyFilter> parse_difficulty(std::string_view name) {
  if (name == "easy") return DifficultyFilter::easy();
  if (name == "moderate") return DifficultyFilter::moderate();
  if (name == "hard") return DifficultyFilter::hard();
  if (name == "none") return std::nullopt;
  throw std::invalid_argument("unknown difficulty: " + std::string(name));
}

RankedImage ranked_image(const Scene& scene) {
  RankedImage img;
  img.ranked.reserve(scene.proposals.size());
  for (const Proposal& p : scene.proposals) img.ranked.push_back(p.box);
  img.ground_truth = scene.ground_truth;
  return img;
}

RankedImage ranked_image(const Scene& scene, std::span<const std::size_t> order) {
  if (order.size() != scene.proposals.size()) {
    throw std::invalid_argument("ranked_image: order length differs from proposal count");
  }
  RankedImage img;
  img.ranked.reserve(order.size());
  for (std::size_t idx : order) img.ranked.push_back(scene.proposals.at(idx).box);
  img.ground_truth = scene.ground_truth;
  return img;
}

namespace {

bool counts(const GroundTruthObject& gt, ClassId class_id, const DifficultyFilter* filter) {
  return gt.class_id == class_id && (!filter || filter->admits(gt));
}

void check_class(const EvalDataset& data, ClassId class_id) {
  if (!data.classes.contains(class_id)) {
    throw std::invalid_argument("unknown class id " + std::to_string(class_id));
  }
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("IoU threshold outside (0, 1]: " + std::to_string(t));
  }
}

RecallPoint make_point(double axis, std::size_t matched, std::size_t total) {
  RecallPoint p;
  p.axis_value = axis;
  p.matched = matched;
  p.total = total;
  if (total > 0) p.recall = static_cast<double>(matched) / static_cast<double>(total);
  return p;
}

}  // namespace

std::vector<std::size_t> oracle_order(std::span<const BoundingBox> proposals,
                                      std::span<const GroundTruthObject> ground_truth,
                                      ClassId class_id, const DifficultyFilter* filter) {
  std::vector<double> quality(proposals.size(), 0.0);
  for (std::size_t j = 0; j < proposals.size(); ++j) {
    for (const GroundTruthObject& gt : ground_truth) {
      if (counts(gt, class_id, filter)) quality[j] = std::max(quality[j], iou(gt.box, proposals[j]));
    }
  }
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quality[a] > quality[b]; });
  return order;
}

bool gt_matched(const GroundTruthObject& gt, std::span<const BoundingBox> ranked, std::size_t k,
                double t) {
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (iou(gt.box, ranked[r]) >= t) return true;
  }
  return false;
}

RecallPoint recall(const EvalDataset& data, ClassId class_id, std::size_t k, double t,
                   const DifficultyFilter* filter) {
  check_class(data, class_id);
  check_threshold(t);
  std::size_t matched = 0;
  std::size_t total = 0;
  for (const RankedImage& img : data.images) {
    for (const GroundTruthObject& gt : img.ground_truth) {
      if (!counts(gt, class_id, filter)) continue;
      ++total;
      if (gt_matched(gt, img.ranked, k, t)) ++matched;
    }
  }
  return make_point(static_cast<double>(k), matched, total);
}

std::vector<std::size_t> default_budgets() {
  return {10, 50, 100, 500, 1000, 1500, 2000, 3000, 4000, 5000};
}

std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int i = 10; i <= 20; ++i) t.push_back(static_cast<double>(i) / 20.0);
  return t;
}

double default_iou_threshold(std::string_view class_name) {
  return class_name == "car" ? 0.7 : 0.5;
}

RecallCurve recall_vs_k(const EvalDataset& data, ClassId class_id, double t,
                        std::span<const std::size_t> budgets, const DifficultyFilter* filter) {
  check_class(data, class_id);
  check_threshold(t);
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) {
      throw std::invalid_argument("recall_vs_k: budgets must be strictly ascending");
    }
  }
  // Earliest rank reaching t, per counted GT object; matched at K iff < K.
  std::vector<std::size_t> first_hit;
  for (const RankedImage& img : data.images) {
    for (const GroundTruthObject& gt : img.ground_truth) {
      if (!counts(gt, class_id, filter)) continue;
      std::size_t hit = std::numeric_limits<std::size_t>::max();
      for (std::size_t r = 0; r < img.ranked.size(); ++r) {
        if (iou(gt.box, img.ranked[r]) >= t) {
          hit = r;
          break;
        }
      }
      first_hit.push_back(hit);
    }
  }
  RecallCurve curve{"k", {}};
  for (std::size_t k : budgets) {
    const auto matched = static_cast<std::size_t>(
        std::count_if(first_hit.begin(), first_hit.end(), [&](std::size_t h) { return h < k; }));
    curve.points.push_back(make_point(static_cast<double>(k), matched, first_hit.size()));
  }
  return curve;
}

namespace {

// Best IoU among the first k proposals, per counted GT object.
std::vector<double> best_overlaps(const EvalDataset& data, ClassId class_id, std::size_t k,
                                  const DifficultyFilter* filter) {
  std::vector<double> best;
  for (const RankedImage& img : data.images) {
    const std::size_t n = std::min(k, img.ranked.size());
    for (const GroundTruthObject& gt : img.ground_truth) {
      if (!counts(gt, class_id, filter)) continue;
      double b = 0.0;
      for (std::size_t r = 0; r < n; ++r) b = std::max(b, iou(gt.box, img.ranked[r]));
      best.push_back(b);
    }
  }
  return best;
}

}  // namespace

RecallCurve recall_vs_iou(const EvalDataset& data, ClassId class_id, std::size_t k,
                          std::span<const double> thresholds, const DifficultyFilter* filter) {
  check_class(data, class_id);
  for (double t : thresholds) check_threshold(t);
  const std::vector<double> best = best_overlaps(data, class_id, k, filter);
  RecallCurve curve{"iou", {}};
  for (double t : thresholds) {
    const auto matched = static_cast<std::size_t>(
        std::count_if(best.begin(), best.end(), [&](double b) { return b >= t; }));
    curve.points.push_back(make_point(t, matched, best.size()));
  }
  return curve;
}

std::optional<double> average_recall(const EvalDataset& data, ClassId class_id, std::size_t k,
                                     const DifficultyFilter* filter) {
  const std::vector<double> grid = default_iou_thresholds();
  const RecallCurve curve = recall_vs_iou(data, class_id, k, grid, filter);
  double sum = 0.0;
  for (const RecallPoint& p : curve.points) {
    if (!p.recall) return std::nullopt;
    sum += *p.recall;
  }
  return sum / static_cast<double>(curve.points.size());
}

RecallCurve ar_vs_k(const EvalDataset& data, ClassId class_id,
                    std::span<const std::size_t> budgets, const DifficultyFilter* filter) {
  check_class(data, class_id);
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) {
      throw std::invalid_argument("ar_vs_k: budgets must be strictly ascending");
    }
  }
  const std::vector<double> grid = default_iou_thresholds();
  RecallCurve curve{"ar_k", {}};
  for (std::size_t k : budgets) {
    const RecallCurve at_k = recall_vs_iou(data, class_id, k, grid, filter);
    std::size_t matched = 0;
    std::size_t total = 0;
    double sum = 0.0;
    for (const RecallPoint& p : at_k.points) {
      matched += p.matched;
      total += p.total;
      sum += p.recall.value_or(0.0);
    }
    RecallPoint point = make_point(static_cast<double>(k), matched, total);
    if (point.recall) point.recall = sum / static_cast<double>(at_k.points.size());
    curve.points.push_back(point);
  }
  return curve;
}

void write_curve_csv(std::ostream& os, const RecallCurve& curve) {
  os << "axis,value,recall,matched,total\n";
  for (const RecallPoint& p : curve.points) {
    os << curve.axis << ',' << format_double(p.axis_value) << ','
       << (p.recall ? format_double(*p.recall) : std::string("nan")) << ',' << p.matched << ','
       << p.total << '\n';
  }
}

}  // namespace rerankkit
