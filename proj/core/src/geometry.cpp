#include "rerankkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rerankkit {

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x1 < x2 && y1 < y2;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) {
    throw std::invalid_argument("iou: degenerate bounding box");
  }
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

// std::round is half-away-from-zero; clamp before the integer cast so huge
// coordinates cannot overflow.
int round_clamped(double v, int lo, int hi) {
  const double r = std::round(v);
  if (r <= lo) return lo;
  if (r >= hi) return hi;
  return static_cast<int>(r);
}

}  // namespace

std::optional<PixelRect> clip_to_pixels(const BoundingBox& b, int w, int h) {
  if (w < 1 || h < 1 || std::isnan(b.x1) || std::isnan(b.y1) ||
      std::isnan(b.x2) || std::isnan(b.y2)) {
    return std::nullopt;
  }
  PixelRect r;
  r.col0 = round_clamped(b.x1, 0, w);
  r.row0 = round_clamped(b.y1, 0, h);
  r.col1 = round_clamped(b.x2, 0, w);
  r.row1 = round_clamped(b.y2, 0, h);
  if (r.empty()) {
    return std::nullopt;
  }
  return r;
}

}  // namespace rerankkit
