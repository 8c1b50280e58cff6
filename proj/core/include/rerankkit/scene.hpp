#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rerankkit/geometry.hpp"

namespace rerankkit {

using ClassId = int;

struct Proposal {
  BoundingBox box;
  /// Rank score emitted by the source generator (the low-level cue).
  double generator_score = 0.0;
  /// Class-agnostic objectness in [0, 1], computed upstream.
  double objectness = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct GroundTruthObject {
  ClassId class_id = 0;
  BoundingBox box;
  int occlusion = 0;        // 0..3
  double truncation = 0.0;  // [0, 1]

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

/// Row-major dense 2D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int row, int col) noexcept { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const noexcept { return data_[index(row, col)]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Marker stored in height maps for pixels without a valid height (no
/// disparity). It never exceeds any threshold.
inline constexpr float kInvalidHeight = std::numeric_limits<float>::quiet_NaN();

inline bool is_invalid_height(float h) noexcept { return std::isnan(h); }

/// Everything known about one image.
struct Scene {
  std::string id;
  int width = 0;
  int height = 0;
  Grid<std::uint8_t> seg_mask;  // class id per pixel
  Grid<float> height_map;       // meters above road, or kInvalidHeight
  std::vector<Proposal> proposals;  // generator rank order
  std::vector<GroundTruthObject> ground_truth;

  /// Throws std::invalid_argument when grid dimensions disagree with
  /// (width, height).
  void validate() const;
};

/// Class name <-> id mapping shared by ingestion, training and evaluation.
class ClassMap {
 public:
  ClassMap() = default;

  /// road=1, car=2, pedestrian=3, cyclist=4, building=5, vegetation=6.
  static ClassMap defaults();

  /// Throws std::invalid_argument if the name or id is already mapped to
  /// something else.
  void add(const std::string& name, ClassId id);
  void set_road(ClassId id) { road_id_ = id; }

  /// Case-insensitive lookup.
  std::optional<ClassId> id_of(const std::string& name) const;
  std::optional<std::string> name_of(ClassId id) const;
  bool contains(ClassId id) const { return by_id_.count(id) > 0; }
  ClassId road_id() const noexcept { return road_id_; }

  const std::map<std::string, ClassId>& entries() const noexcept { return by_name_; }

 private:
  std::map<std::string, ClassId> by_name_;
  std::map<ClassId, std::string> by_id_;
  ClassId road_id_ = 1;
};

}  // namespace rerankkit
