#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rerankkit/eval.hpp"
#include "rerankkit/synth.hpp"
#include "support/fixtures.hpp"

namespace rerankkit {
namespace {

constexpr ClassId kCar = 2;

EvalDataset single_image(std::vector<BoundingBox> ranked, std::vector<GroundTruthObject> gts) {
  EvalDataset d;
  d.classes = ClassMap::defaults();
  d.images.push_back({std::move(ranked), std::move(gts)});
  return d;
}

TEST(GtMatched, Examples) {
  const GroundTruthObject gt{kCar, {0, 0, 2, 2}, 0, 0.0};
  const std::vector<BoundingBox> dup{{0, 0, 2, 2}};
  EXPECT_TRUE(gt_matched(gt, dup, 1, 1.0));
  const std::vector<BoundingBox> far{{10, 10, 12, 12}, {20, 20, 22, 22}};
  EXPECT_FALSE(gt_matched(gt, far, 2, 1e-9));
  const std::vector<BoundingBox> seventh{{1, 1, 3, 3}};
  EXPECT_FALSE(gt_matched(gt, seventh, 1, 0.7));
  EXPECT_TRUE(gt_matched(gt, seventh, 1, 0.14));
  EXPECT_FALSE(gt_matched(gt, dup, 0, 0.5));
  const std::vector<BoundingBox> late{{10, 10, 12, 12}, {0, 0, 2, 2}};
  EXPECT_FALSE(gt_matched(gt, late, 1, 0.5));
  EXPECT_TRUE(gt_matched(gt, late, 100, 0.5));
}

TEST(Recall, DuplicatesAndEmpty) {
  const std::vector<GroundTruthObject> gts{{kCar, {0, 0, 10, 10}, 0, 0}, {kCar, {20, 20, 30, 35}, 0, 0}};
  const EvalDataset dup = single_image({{20, 20, 30, 35}, {0, 0, 10, 10}}, gts);
  EXPECT_EQ(recall(dup, kCar, 2, 1.0).recall, 1.0);
  const EvalDataset none = single_image({}, gts);
  const RecallPoint p = recall(none, kCar, 100, 0.5);
  EXPECT_EQ(p.recall, 0.0);
  EXPECT_EQ(p.total, 2u);
}

TEST(Recall, UndefinedWithoutGt) {
  const EvalDataset d = single_image({{0, 0, 1, 1}}, {});
  const RecallPoint p = recall(d, kCar, 10, 0.5);
  EXPECT_FALSE(p.recall.has_value());
  EXPECT_EQ(p.total, 0u);
  EXPECT_FALSE(average_recall(d, kCar, 10).has_value());
}

TEST(Recall, ArgumentErrors) {
  const EvalDataset d = single_image({}, {});
  EXPECT_THROW(recall(d, 99, 10, 0.5), std::invalid_argument);
  EXPECT_THROW(recall(d, kCar, 10, 0.0), std::invalid_argument);
  EXPECT_THROW(recall(d, kCar, 10, 1.01), std::invalid_argument);
  const std::vector<std::size_t> bad{10, 10};
  EXPECT_THROW(recall_vs_k(d, kCar, 0.5, bad, nullptr), std::invalid_argument);
  const std::vector<std::size_t> down{50, 10};
  EXPECT_THROW(recall_vs_k(d, kCar, 0.5, down, nullptr), std::invalid_argument);
  const std::vector<double> ts{0.5, 1.5};
  EXPECT_THROW(recall_vs_iou(d, kCar, 10, ts, nullptr), std::invalid_argument);
}

TEST(Defaults, Grids) {
  EXPECT_EQ(default_budgets(),
            (std::vector<std::size_t>{10, 50, 100, 500, 1000, 1500, 2000, 3000, 4000, 5000}));
  const auto ts = default_iou_thresholds();
  ASSERT_EQ(ts.size(), 11u);
  EXPECT_EQ(ts.front(), 0.5);
  EXPECT_EQ(ts[4], 0.7);
  EXPECT_EQ(ts.back(), 1.0);
  EXPECT_EQ(default_iou_threshold("car"), 0.7);
  EXPECT_EQ(default_iou_threshold("pedestrian"), 0.5);
  EXPECT_EQ(default_iou_threshold("cyclist"), 0.5);
}

TEST(Curves, SingleBudgetEqualsRecall) {
  std::mt19937_64 rng(1);
  const EvalDataset d = testing::fuzz_dataset(rng, 20, 60);
  const std::vector<std::size_t> one{25};
  const RecallCurve c = recall_vs_k(d, kCar, 0.6, one, nullptr);
  ASSERT_EQ(c.points.size(), 1u);
  const RecallPoint p = recall(d, kCar, 25, 0.6);
  EXPECT_EQ(c.points[0].matched, p.matched);
  EXPECT_EQ(c.points[0].total, p.total);
}

TEST(Curves, AllDuplicatesFlatAtOne) {
  const std::vector<GroundTruthObject> gts{{kCar, {3, 3, 13, 9}, 0, 0}};
  const EvalDataset d = single_image({{3, 3, 13, 9}, {3, 3, 13, 9}}, gts);
  for (const auto& p : recall_vs_iou(d, kCar, 500, default_iou_thresholds(), nullptr).points)
    EXPECT_EQ(p.recall, 1.0);
  EXPECT_EQ(average_recall(d, kCar, 500), 1.0);
  const EvalDataset miss = single_image({{50, 50, 60, 60}}, gts);
  EXPECT_EQ(average_recall(miss, kCar, 500), 0.0);
}

TEST(Curves, FastPathsAgreeWithPointwiseRecall) {
  std::mt19937_64 rng(2);
  const EvalDataset d = testing::fuzz_dataset(rng, 30, 80);
  const auto budgets = default_budgets();
  const auto ts = default_iou_thresholds();
  for (double t : ts) {
    const RecallCurve c = recall_vs_k(d, kCar, t, budgets, nullptr);
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      const RecallPoint p = recall(d, kCar, budgets[i], t);
      EXPECT_EQ(c.points[i].matched, p.matched);
      EXPECT_EQ(c.points[i].total, p.total);
    }
  }
  for (std::size_t k : {1u, 7u, 40u, 500u}) {
    const RecallCurve c = recall_vs_iou(d, kCar, k, ts, nullptr);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(c.points[i].matched, recall(d, kCar, k, ts[i]).matched);
  }
}

TEST(Curves, MonotoneInKAndThreshold) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const EvalDataset d = testing::fuzz_dataset(rng, 10, 40);
    const auto budgets = default_budgets();
    const auto ts = default_iou_thresholds();
    for (ClassId cls : {2, 3}) {
      for (double t : ts) {
        const auto c = recall_vs_k(d, cls, t, budgets, nullptr);
        for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GE(c.points[i].matched, c.points[i - 1].matched);
      }
      for (std::size_t k : budgets) {
        const auto c = recall_vs_iou(d, cls, k, ts, nullptr);
        for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_LE(c.points[i].matched, c.points[i - 1].matched);
      }
    }
  }
}

TEST(AverageRecall, EqualsGridMeanTwoWays) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const EvalDataset d = testing::fuzz_dataset(rng, 15, 50);
    for (std::size_t k : {10u, 50u}) {
      const auto ar = average_recall(d, kCar, k);
      if (!ar) continue;
      // Backwards accumulation of per-threshold recall() calls.
      const auto ts = default_iou_thresholds();
      double sum = 0.0;
      for (std::size_t i = ts.size(); i-- > 0;) sum += *recall(d, kCar, k, ts[i]).recall;
      EXPECT_NEAR(*ar, sum / 11.0, 1e-12);
      const RecallCurve curve = ar_vs_k(d, kCar, std::vector<std::size_t>{k}, nullptr);
      EXPECT_NEAR(*curve.points[0].recall, *ar, 1e-12);
      EXPECT_EQ(curve.points[0].total, 11 * recall(d, kCar, k, 0.5).total);
    }
  }
}

TEST(OracleOrder, OptimalOnSingleGtScenes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 60), ext(3, 30);
  for (int trial = 0; trial < 200; ++trial) {
    const double gx = u(rng), gy = u(rng);
    const std::vector<GroundTruthObject> gts{{kCar, {gx, gy, gx + ext(rng), gy + ext(rng)}, 0, 0}};
    std::vector<BoundingBox> props;
    for (int j = 0; j < 12; ++j) {
      const double x = gx + (u(rng) - 30) / 5, y = gy + (u(rng) - 30) / 5;
      props.push_back({x, y, x + ext(rng), y + ext(rng)});
    }
    const auto order = oracle_order(props, gts, kCar);
    std::vector<BoundingBox> best;
    for (std::size_t i : order) best.push_back(props[i]);
    std::vector<std::size_t> perm(props.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (int shuffle = 0; shuffle < 20; ++shuffle) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<BoundingBox> other;
      for (std::size_t i : perm) other.push_back(props[i]);
      for (std::size_t k = 0; k <= props.size(); ++k)
        for (double t : default_iou_thresholds())
          ASSERT_GE(gt_matched(gts[0], best, k, t), gt_matched(gts[0], other, k, t));
    }
  }
}

TEST(OracleOrder, TiesKeepGeneratorOrder) {
  const std::vector<GroundTruthObject> gts{{kCar, {0, 0, 10, 10}, 0, 0}};
  const std::vector<BoundingBox> props{{50, 50, 60, 60}, {0, 0, 10, 10}, {70, 70, 80, 80}, {0, 0, 10, 10}};
  EXPECT_EQ(oracle_order(props, gts, kCar), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(Filter, TighteningNeverRaisesTotal) {
  std::mt19937_64 rng(6);
  const EvalDataset d = testing::fuzz_dataset(rng, 50, 5);
  std::size_t last = recall(d, kCar, 5, 0.5).total;
  for (const DifficultyFilter& f : {DifficultyFilter::hard(), DifficultyFilter::moderate(), DifficultyFilter::easy()}) {
    const std::size_t total = recall(d, kCar, 5, 0.5, &f).total;
    EXPECT_LE(total, last);
    last = total;
  }
  std::uniform_real_distribution<double> u(0, 50);
  std::uniform_int_distribution<int> lv(0, 3);
  for (int i = 0; i < 200; ++i) {
    DifficultyFilter a{u(rng), lv(rng), u(rng) / 50};
    DifficultyFilter b = a;
    b.min_box_height_px += u(rng) / 5;
    b.max_occlusion = std::max(0, b.max_occlusion - lv(rng));
    b.max_truncation *= 0.8;
    EXPECT_LE(recall(d, kCar, 5, 0.5, &b).total, recall(d, kCar, 5, 0.5, &a).total);
  }
}

TEST(Filter, Parse) {
  EXPECT_FALSE(parse_difficulty("none").has_value());
  EXPECT_EQ(parse_difficulty("easy")->min_box_height_px, 40.0);
  EXPECT_EQ(parse_difficulty("moderate")->max_occlusion, 1);
  EXPECT_EQ(parse_difficulty("hard")->max_truncation, 0.5);
  EXPECT_THROW(parse_difficulty("insane"), std::invalid_argument);
}

// Recall from the answer key alone: a GT is matched iff some plant for it
// with achieved IoU >= t sits at rank < K.
TEST(Recall, PlantedSyntheticMatchesAnswerKey) {
  SynthConfig cfg;
  cfg.num_scenes = 12;
  cfg.seed = 99;
  const SyntheticDataset ds = generate_synthetic(cfg);
  EvalDataset gen, shuffled;
  gen.classes = shuffled.classes = ds.classes;
  std::mt19937_64 rng(7);
  std::map<std::string, std::vector<std::size_t>> rank_of;
  for (const Scene& s : ds.scenes) {
    gen.images.push_back(ranked_image(s));
    std::vector<std::size_t> order(s.proposals.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    shuffled.images.push_back(ranked_image(s, order));
    auto& inv = rank_of[s.id];
    inv.resize(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) inv[order[r]] = r;
  }
  for (ClassId cls : {2, 3, 4}) {
    for (std::size_t k : {10u, 50u, 100u, 500u}) {
      for (double t : default_iou_thresholds()) {
        std::map<std::pair<std::string, std::size_t>, std::pair<bool, bool>> hit;
        std::size_t total = 0;
        for (const Scene& s : ds.scenes)
          for (std::size_t g = 0; g < s.ground_truth.size(); ++g)
            if (s.ground_truth[g].class_id == cls) {
              hit[{s.id, g}] = {false, false};
              ++total;
            }
        for (const Plant& p : ds.answer_key) {
          if (p.class_id != cls || p.achieved_iou < t) continue;
          auto& h = hit[{p.scene_id, p.gt_index}];
          h.first = h.first || p.proposal_index < k;
          h.second = h.second || rank_of[p.scene_id][p.proposal_index] < k;
        }
        std::size_t m_gen = 0, m_shuf = 0;
        for (const auto& [key, h] : hit) {
          m_gen += h.first;
          m_shuf += h.second;
        }
        const RecallPoint pg = recall(gen, cls, k, t);
        const RecallPoint ps = recall(shuffled, cls, k, t);
        ASSERT_EQ(pg.total, total);
        EXPECT_EQ(pg.matched, m_gen) << cls << " " << k << " " << t;
        EXPECT_EQ(ps.matched, m_shuf) << cls << " " << k << " " << t;
      }
    }
  }
}

TEST(CurveCsv, Format) {
  RecallCurve c;
  c.axis = "k";
  RecallPoint a;
  a.axis_value = 10;
  a.recall = 0.5;
  a.matched = 1;
  a.total = 2;
  RecallPoint b;
  b.axis_value = 50;
  c.points = {a, b};
  std::ostringstream os;
  write_curve_csv(os, c);
  EXPECT_EQ(os.str(), "axis,value,recall,matched,total\nk,10,0.5,1,2\nk,50,nan,0,0\n");
}

}  // namespace
}  // namespace rerankkit
