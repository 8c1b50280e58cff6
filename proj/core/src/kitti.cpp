#include "rerankkit/kitti.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "rerankkit/errors.hpp"

namespace rerankkit {

namespace {

double to_double(const std::string& tok, const std::string& source, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("non-numeric field '" + tok + "'", source, line);
  }
  return v;
}

}  // namespace

std::vector<GroundTruthObject> parse_kitti_labels(std::string_view text, const ClassMap& classes,
                                                  KittiParseStats* stats,
                                                  const std::string& source) {
  KittiParseStats local;
  std::vector<GroundTruthObject> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string tok; ls >> tok;) fields.push_back(tok);
    if (fields.size() != 15 && fields.size() != 16) {
      throw ParseError("expected 15 fields, found " + std::to_string(fields.size()), source,
                       line_no);
    }
    if (fields[0] == "DontCare") {
      ++local.dont_care;
      continue;
    }
    // Validate every numeric field even though only a few are kept.
    std::vector<double> nums;
    for (std::size_t i = 1; i < fields.size(); ++i) nums.push_back(to_double(fields[i], source, line_no));

    const auto id = classes.id_of(fields[0]);
    if (!id) {
      ++local.unmapped;
      continue;
    }
    GroundTruthObject gt;
    gt.class_id = *id;
    gt.truncation = nums[0];
    const double occ = nums[1];
    if (occ != std::floor(occ) || occ < 0 || occ > 3) {
      throw ParseError("occlusion level must be 0..3", source, line_no);
    }
    gt.occlusion = static_cast<int>(occ);
    if (gt.truncation < 0.0 || gt.truncation > 1.0) {
      throw ParseError("truncation outside [0, 1]", source, line_no);
    }
    gt.box = BoundingBox{nums[3], nums[4], nums[5] + 1.0, nums[6] + 1.0};
    if (!gt.box.valid()) {
      throw ParseError("degenerate bounding box", source, line_no);
    }
    out.push_back(gt);
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace rerankkit
