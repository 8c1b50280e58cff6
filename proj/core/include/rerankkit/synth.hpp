#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rerankkit/scene.hpp"

namespace rerankkit {

inline constexpr std::uint64_t kDefaultBenchmarkSeed = 2017;

struct ClassPrior {
  ClassId class_id = 2;
  double weight = 1.0;  // relative sampling frequency
  int min_height_px = 18;
  int max_height_px = 40;
  double min_aspect = 1.4;  // width / height
  double max_aspect = 2.2;
  double height_m = 1.5;    // physical height, kept below tau
};

struct SynthConfig {
  std::uint64_t seed = kDefaultBenchmarkSeed;
  int width = 384;
  int height = 128;
  int num_scenes = 10;
  int min_objects = 1;
  int max_objects = 4;
  std::vector<ClassPrior> priors = default_priors();
  /// One planted proposal per target IoU per GT object. Achieved IoUs stay
  /// within 0.02 of target.
  std::vector<double> plant_targets = {0.95, 0.85, 0.75, 0.65, 0.55, 0.45, 0.35};
  int proposals_per_scene = 500;
  /// Distractors (and other objects' plants) stay below this IoU with every
  /// GT object, so the answer key alone determines recall above it.
  double distractor_max_iou = 0.3;
  double road_band_fraction = 0.35;
  /// Probability that a mask pixel is relabelled at random.
  double mask_noise = 0.02;
  /// Generator score = quality_weight * best IoU + noise * N(0, 1).
  double generator_quality_weight = 0.5;
  double generator_noise = 1.0;
  std::string id_prefix = "synth";

  static std::vector<ClassPrior> default_priors();
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct Plant {
  std::string scene_id;
  std::size_t gt_index = 0;
  ClassId class_id = 0;
  /// Index into the scene's proposals (generator order).
  std::size_t proposal_index = 0;
  double target_iou = 0.0;
  double achieved_iou = 0.0;
};

struct SyntheticDataset {
  std::vector<Scene> scenes;
  std::vector<Plant> answer_key;
  ClassMap classes;
};

/// Deterministic in `config`: the same config yields identical scenes on
/// every run. Throws GenerationError when a plant cannot be placed.
SyntheticDataset generate_synthetic(const SynthConfig& config);

/// CSV: scene_id,gt_index,class,proposal_index,target_iou,achieved_iou
void write_answer_key_csv(std::ostream& os, std::span<const Plant> plants, const ClassMap& classes);

}  // namespace rerankkit
