#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rerankkit/features.hpp"
#include "rerankkit/model.hpp"
#include "rerankkit/qp.hpp"
#include "rerankkit/scene.hpp"

namespace rerankkit {

struct DifficultyFilter;

/// One ground-truth object against every candidate of its image; owns one
/// slack variable.
struct TrainingExample {
  std::string example_id;
  FeatureVector gt_features{};
  std::vector<FeatureVector> candidate_features;
  std::vector<double> losses;  // per candidate, in [0, 1]
};

struct TrainConfig {
  double C = 1.0;
  LossMode loss_mode = LossMode::kOneMinusIou;
  double epsilon_cut = 1e-3;
  double qp_tol = 1e-6;
  int max_rounds = 200;
  double loss_floor = 1e-6;

  void validate() const;
};

struct TraceRow {
  int round = 0;
  std::size_t working_set_size = 0;
  /// Largest H(y) - xi_i found by the separation pass that opened the round.
  double max_violation = 0.0;
  /// Dual bound of the restricted problem after the round's re-solve.
  double objective = 0.0;
  double gap = 0.0;
};

struct TrainReport {
  int rounds = 0;
  bool converged = false;
  /// Every candidate of every example was at or below the loss floor.
  bool vacuous = false;
  std::size_t working_set_size = 0;
  double final_max_violation = 0.0;
  /// Primal objective of the restricted problem at the returned model.
  double final_objective = 0.0;
  std::vector<double> slacks;
  std::vector<TraceRow> trace;
};

/// Loss of predicting `candidate` when `gt` is the answer.
double candidate_loss(const BoundingBox& gt, const BoundingBox& candidate, LossMode mode);

struct Violation {
  std::size_t candidate = 0;
  /// H(y) = loss(y) * (1 - theta . (f_gt - f_y)).
  double value = 0.0;
};

/// Separation oracle: the candidate maximizing H(y) among candidates with
/// loss above `loss_floor`. nullopt when none has H(y) > 0.
std::optional<Violation> most_violated(const TrainingExample& example, const FeatureVector& theta,
                                       double loss_floor);

struct TrainResult {
  ScoringModel model;
  TrainReport report;
};

/// n-slack cutting-plane training. Throws SolverError if a restricted
/// re-solve fails; the error carries the last iterate.
TrainResult train(std::span<const TrainingExample> examples, ClassId class_id,
                  const TrainConfig& config);

struct ExampleDiagnostics {
  std::size_t scenes_without_proposals = 0;
  std::size_t filtered_objects = 0;
};

/// One example per ground-truth object of `class_id` that passes `filter`.
/// The GT box's objectness and generator score are not observed, so its
/// passthrough components are copied from the proposal with the highest IoU
/// against it.
std::vector<TrainingExample> build_examples(std::span<const Scene> scenes, ClassId class_id,
                                            const FeatureConfig& feature_config, LossMode mode,
                                            const DifficultyFilter* filter = nullptr,
                                            ExampleDiagnostics* diagnostics = nullptr);

/// CSV: round,working_set_size,max_violation,objective,gap
void write_trace_csv(std::ostream& os, const TrainReport& report);

}  // namespace rerankkit
