#pragma once

#include "rerankkit/scene.hpp"

namespace rerankkit {

/// Rectified stereo rig over a flat road with zero camera pitch.
struct StereoCalibration {
  double focal_px = 721.5377;
  double baseline_m = 0.5327;
  double cy_px = 172.854;
  double cam_height_m = 1.65;

  /// Throws std::invalid_argument unless focal, baseline and camera height
  /// are positive and cy >= 0.
  void validate() const;
};

/// Height above the road plane for every pixel. With depth Z = f * B / d and
/// camera-frame drop Y = (v - cy) * Z / f, height = cam_height - Y. Pixels
/// with d <= 0 (or NaN) get kInvalidHeight.
Grid<float> disparity_to_height(const Grid<float>& disparity, const StereoCalibration& calib);

/// Same, but first checks the grid against the scene size (throws
/// std::invalid_argument on mismatch).
Grid<float> disparity_to_height(const Grid<float>& disparity, const StereoCalibration& calib,
                                int expected_width, int expected_height);

}  // namespace rerankkit
