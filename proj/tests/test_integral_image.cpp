#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <stdexcept>
#include <vector>

#include "rerankkit/integral_image.hpp"

namespace rerankkit {
namespace {

std::vector<std::vector<bool>> random_mask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution bit(p);
  std::vector<std::vector<bool>> m(h, std::vector<bool>(w));
  for (auto& row : m)
    for (int c = 0; c < w; ++c) row[c] = bit(rng);
  return m;
}

std::int64_t loop_count(const std::vector<std::vector<bool>>& m, const PixelRect& r) {
  std::int64_t n = 0;
  for (int y = r.row0; y < r.row1; ++y)
    for (int x = r.col0; x < r.col1; ++x) n += m[y][x];
  return n;
}

PixelRect random_rect(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> cx(0, w), cy(0, h);
  int a = cx(rng), b = cx(rng), c = cy(rng), d = cy(rng);
  return {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
}

TEST(IntegralImage, AllZero) {
  const auto img = IntegralImage::build(9, 7, [](int, int) { return false; });
  EXPECT_EQ(img.total(), 0);
  EXPECT_EQ(img.box_sum({2, 1, 8, 6}), 0);
}

TEST(IntegralImage, AllOneAreaIdentity) {
  const auto img = IntegralImage::build(4, 4, [](int, int) { return true; });
  EXPECT_EQ(img.box_sum({1, 1, 3, 3}), 4);
  EXPECT_EQ(img.box_sum({0, 0, 4, 4}), 16);
}

TEST(IntegralImage, TableHasZeroBorder) {
  const auto img = IntegralImage::build(5, 3, [](int, int) { return true; });
  for (int c = 0; c <= 5; ++c) EXPECT_EQ(img.at(0, c), 0);
  for (int r = 0; r <= 3; ++r) EXPECT_EQ(img.at(r, 0), 0);
  EXPECT_EQ(img.at(2, 3), 6);
}

TEST(IntegralImage, EmptyImageThrows) {
  EXPECT_THROW(IntegralImage::build(0, 5, [](int, int) { return true; }), std::invalid_argument);
  EXPECT_THROW(IntegralImage::build(5, 0, [](int, int) { return true; }), std::invalid_argument);
}

TEST(IntegralImage, OutOfBoundsRectThrows) {
  const auto img = IntegralImage::build(4, 4, [](int, int) { return true; });
  EXPECT_THROW(img.box_sum({-1, 0, 2, 2}), std::invalid_argument);
  EXPECT_THROW(img.box_sum({0, 0, 5, 2}), std::invalid_argument);
  EXPECT_THROW(img.box_sum({0, 0, 2, 5}), std::invalid_argument);
}

TEST(IntegralImage, EmptyRectIsZero) {
  const auto img = IntegralImage::build(4, 4, [](int, int) { return true; });
  EXPECT_EQ(img.box_sum({2, 2, 2, 4}), 0);
  EXPECT_EQ(img.box_sum({3, 1, 1, 4}), 0);
}

TEST(IntegralImage, MatchesPixelLoop16x16) {
  std::mt19937_64 rng(16);
  const auto m = random_mask(rng, 16, 16, 0.4);
  const auto img = IntegralImage::build(16, 16, [&](int r, int c) { return m[r][c]; });
  EXPECT_EQ(img.total(), loop_count(m, {0, 0, 16, 16}));
  for (int i = 0; i < 50; ++i) {
    const PixelRect r = random_rect(rng, 16, 16);
    EXPECT_EQ(img.box_sum(r), loop_count(m, r));
  }
}

TEST(IntegralImage, MatchesPixelLoopRandomShapes) {
  std::mt19937_64 rng(1000);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const int w = dim(rng), h = dim(rng);
    const auto m = random_mask(rng, w, h, density(rng));
    const auto img = IntegralImage::build(w, h, [&](int r, int c) { return m[r][c]; });
    const PixelRect r = random_rect(rng, w, h);
    ASSERT_EQ(img.box_sum(r), loop_count(m, r));
  }
}

TEST(IntegralImage, AdditiveAndNestedMonotone) {
  std::mt19937_64 rng(8);
  const int w = 40, h = 30;
  const auto m = random_mask(rng, w, h, 0.5);
  const auto img = IntegralImage::build(w, h, [&](int r, int c) { return m[r][c]; });
  for (int i = 0; i < 500; ++i) {
    const PixelRect r = random_rect(rng, w, h);
    const int mid = (r.col0 + r.col1) / 2;
    EXPECT_EQ(img.box_sum({r.col0, r.row0, mid, r.row1}) + img.box_sum({mid, r.row0, r.col1, r.row1}),
              img.box_sum(r));
    if (r.empty()) continue;
    std::uniform_int_distribution<int> ic(r.col0, r.col1), ir(r.row0, r.row1);
    int a = ic(rng), b = ic(rng), c = ir(rng), d = ir(rng);
    const PixelRect inner{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
    EXPECT_LE(img.box_sum(inner), img.box_sum(r));
  }
}

TEST(IntegralImage, MillionQueriesOnKittiSizedTable) {
  std::mt19937_64 rng(2);
  const int w = 1242, h = 375;
  const auto img = IntegralImage::build(w, h, [](int r, int c) { return ((r * 31 + c * 17) % 7) < 3; });
  std::vector<PixelRect> rects;
  for (int i = 0; i < 4096; ++i) rects.push_back(random_rect(rng, w, h));
  std::int64_t sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1'000'000; ++i) sink += img.box_sum(rects[static_cast<std::size_t>(i) & 4095]);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GT(sink, 0);
  EXPECT_LT(secs, 1.0);
}

}  // namespace
}  // namespace rerankkit
