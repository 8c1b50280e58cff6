#include "rerankkit/stereo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rerankkit {

void StereoCalibration::validate() const {
  if (!(focal_px > 0.0) || !(baseline_m > 0.0) || !(cam_height_m > 0.0) || !(cy_px >= 0.0)) {
    throw std::invalid_argument("invalid stereo calibration");
  }
}

Grid<float> disparity_to_height(const Grid<float>& disparity, const StereoCalibration& calib) {
  calib.validate();
  Grid<float> heights(disparity.width(), disparity.height(), kInvalidHeight);
  for (int v = 0; v < disparity.height(); ++v) {
    for (int u = 0; u < disparity.width(); ++u) {
      const double d = disparity(v, u);
      if (!(d > 0.0)) continue;
      const double depth = calib.focal_px * calib.baseline_m / d;
      const double drop = (static_cast<double>(v) - calib.cy_px) * depth / calib.focal_px;
      heights(v, u) = static_cast<float>(calib.cam_height_m - drop);
    }
  }
  return heights;
}

Grid<float> disparity_to_height(const Grid<float>& disparity, const StereoCalibration& calib,
                                int expected_width, int expected_height) {
  if (disparity.width() != expected_width || disparity.height() != expected_height) {
    throw std::invalid_argument("disparity grid is " + std::to_string(disparity.width()) + "x" +
                                std::to_string(disparity.height()) + ", scene is " +
                                std::to_string(expected_width) + "x" + std::to_string(expected_height));
  }
  return disparity_to_height(disparity, calib);
}

}  // namespace rerankkit
