#include "rerankkit/integral_image.hpp"

namespace rerankkit {

std::int64_t IntegralImage::box_sum(const PixelRect& rect) const {
  if (rect.col0 < 0 || rect.row0 < 0 || rect.col1 > width_ || rect.row1 > height_ ||
      rect.col0 > width_ || rect.row0 > height_ || rect.col1 < 0 || rect.row1 < 0) {
    throw std::invalid_argument("IntegralImage::box_sum: rect outside image bounds");
  }
  if (rect.empty()) {
    return 0;
  }
  return at(rect.row1, rect.col1) - at(rect.row0, rect.col1) - at(rect.row1, rect.col0) +
         at(rect.row0, rect.col0);
}

}  // namespace rerankkit
