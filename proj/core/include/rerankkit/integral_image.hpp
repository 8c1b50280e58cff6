#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rerankkit/geometry.hpp"

namespace rerankkit {

/// Summed-area table over a binary per-pixel predicate.
///
/// table(r, c) holds the number of set pixels with row < r and col < c, so
/// the table is (height + 1) x (width + 1) with a zero first row and column.
/// Any rectangle count is then four lookups.
class IntegralImage {
 public:
  IntegralImage() = default;

  /// Builds the table in one pass. `pred(row, col)` must return something
  /// convertible to bool. Throws std::invalid_argument if w or h is < 1.
  template <typename Predicate>
  static IntegralImage build(int w, int h, Predicate&& pred) {
    if (w < 1 || h < 1) {
      throw std::invalid_argument("IntegralImage::build: empty image");
    }
    IntegralImage img(w, h);
    const std::size_t stride = static_cast<std::size_t>(w) + 1;
    for (int r = 0; r < h; ++r) {
      std::int64_t row_sum = 0;
      const std::int64_t* above = &img.table_[static_cast<std::size_t>(r) * stride];
      std::int64_t* out = &img.table_[static_cast<std::size_t>(r + 1) * stride];
      for (int c = 0; c < w; ++c) {
        row_sum += pred(r, c) ? 1 : 0;
        out[c + 1] = above[c + 1] + row_sum;
      }
    }
    return img;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  /// Cumulative count for row < r, col < c. No bounds checks.
  std::int64_t at(int r, int c) const noexcept {
    return table_[static_cast<std::size_t>(r) * (static_cast<std::size_t>(width_) + 1) +
                  static_cast<std::size_t>(c)];
  }

  /// Number of set pixels in the whole image.
  std::int64_t total() const noexcept { return at(height_, width_); }

  /// Number of set pixels inside `rect`. Empty rects count 0; a rect that
  /// leaves [0,w] x [0,h] throws std::invalid_argument (clip first).
  std::int64_t box_sum(const PixelRect& rect) const;

 private:
  IntegralImage(int w, int h)
      : width_(w),
        height_(h),
        table_((static_cast<std::size_t>(w) + 1) * (static_cast<std::size_t>(h) + 1), 0) {}

  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> table_;
};

}  // namespace rerankkit
