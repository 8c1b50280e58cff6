#pragma once

#include <cstdint>
#include <optional>

namespace rerankkit {

/// Axis-aligned box in real pixel coordinates, half-open: [x1, x2) x [y1, y2).
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  /// True when both extents are strictly positive and finite.
  bool valid() const noexcept;

  BoundingBox translated(double dx, double dy) const noexcept {
    return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Integer pixel rectangle [col0, col1) x [row0, row1). May be empty.
struct PixelRect {
  int col0 = 0;
  int row0 = 0;
  int col1 = 0;
  int row1 = 0;

  bool empty() const noexcept { return col0 >= col1 || row0 >= row1; }
  std::int64_t area() const noexcept {
    return empty() ? 0 : std::int64_t{col1 - col0} * (row1 - row0);
  }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Intersection over union of two valid boxes. Throws std::invalid_argument
/// on a degenerate box.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Maps a real box onto the pixel grid of a w x h image using
/// round-half-away-from-zero on every coordinate. Returns nullopt when the
/// clipped rectangle is empty.
std::optional<PixelRect> clip_to_pixels(const BoundingBox& b, int w, int h);

}  // namespace rerankkit
