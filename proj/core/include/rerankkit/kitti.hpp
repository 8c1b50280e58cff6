#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rerankkit/scene.hpp"

namespace rerankkit {

struct KittiParseStats {
  std::size_t dont_care = 0;
  /// Object types absent from the class map (Van, Tram, Misc, ...).
  std::size_t unmapped = 0;
};

/// Parses KITTI devkit label text: one object per line, 15 space-separated
/// fields (a 16th score field is tolerated):
///   type truncated occluded alpha left top right bottom h w l x y z ry
/// The inclusive pixel box becomes half-open by adding 1 to right and bottom.
/// `DontCare` lines and unmapped types are dropped and counted. Throws
/// ParseError carrying the 1-based line number.
std::vector<GroundTruthObject> parse_kitti_labels(std::string_view text, const ClassMap& classes,
                                                  KittiParseStats* stats = nullptr,
                                                  const std::string& source = "<kitti>");

}  // namespace rerankkit
