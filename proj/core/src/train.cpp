#include "rerankkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rerankkit/eval.hpp"

namespace rerankkit {

void TrainConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
  if (!(epsilon_cut > 0.0)) throw std::invalid_argument("epsilon_cut must be positive");
  if (!(qp_tol > 0.0)) throw std::invalid_argument("qp_tol must be positive");
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  if (!(loss_floor > 0.0)) throw std::invalid_argument("loss_floor must be positive");
}

double candidate_loss(const BoundingBox& gt, const BoundingBox& candidate, LossMode mode) {
  const double overlap = iou(gt, candidate);
  return mode == LossMode::kOneMinusIou ? 1.0 - overlap : overlap;
}

namespace {

double margin(const FeatureVector& theta, const FeatureVector& gt, const FeatureVector& cand) {
  double s = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) s += theta[k] * (gt[k] - cand[k]);
  return s;
}

FeatureVector difference(const FeatureVector& a, const FeatureVector& b) {
  FeatureVector d;
  for (std::size_t k = 0; k < kNumFeatures; ++k) d[k] = a[k] - b[k];
  return d;
}

}  // namespace

std::optional<Violation> most_violated(const TrainingExample& example, const FeatureVector& theta,
                                       double loss_floor) {
  if (example.candidate_features.size() != example.losses.size()) {
    throw std::invalid_argument("training example " + example.example_id +
                                ": candidate and loss counts differ");
  }
  std::optional<Violation> best;
  for (std::size_t j = 0; j < example.candidate_features.size(); ++j) {
    const double loss = example.losses[j];
    if (!(loss > loss_floor)) continue;
    const double h = loss * (1.0 - margin(theta, example.gt_features, example.candidate_features[j]));
    if (h > 0.0 && (!best || h > best->value)) {
      best = Violation{j, h};
    }
  }
  return best;
}

TrainResult train(std::span<const TrainingExample> examples, ClassId class_id,
                  const TrainConfig& config) {
  config.validate();
  if (examples.empty()) {
    throw std::invalid_argument("train: no training examples");
  }

  TrainResult result;
  result.model.class_id = class_id;
  result.model.loss_mode = config.loss_mode;
  result.model.C = config.C;
  TrainReport& report = result.report;
  report.slacks.assign(examples.size(), 0.0);

  const bool vacuous = std::all_of(examples.begin(), examples.end(), [&](const TrainingExample& ex) {
    return std::none_of(ex.losses.begin(), ex.losses.end(),
                        [&](double l) { return l > config.loss_floor; });
  });
  if (vacuous) {
    report.vacuous = true;
    report.converged = true;
    return result;
  }

  RestrictedQp qp(examples.size(), config.C);
  FeatureVector theta{};
  std::vector<double> slacks(examples.size(), 0.0);
  double objective = 0.0;

  // Returns the largest H(y) - xi_i; appends violators to `added` when given.
  auto separate = [&](std::vector<std::pair<std::size_t, Violation>>* added) {
    double worst = 0.0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto v = most_violated(examples[i], theta, config.loss_floor);
      if (!v) continue;
      worst = std::max(worst, v->value - slacks[i]);
      if (added && v->value > slacks[i] + config.epsilon_cut) {
        added->emplace_back(i, *v);
      }
    }
    return worst;
  };

  int round = 0;
  while (true) {
    std::vector<std::pair<std::size_t, Violation>> added;
    const double worst = separate(&added);
    if (added.empty()) {
      report.converged = true;
      report.final_max_violation = worst;
      break;
    }
    if (round == config.max_rounds) {
      report.final_max_violation = worst;
      break;
    }
    ++round;
    for (const auto& [i, v] : added) {
      const TrainingExample& ex = examples[i];
      qp.add(i, Constraint{difference(ex.gt_features, ex.candidate_features[v.candidate]),
                           ex.losses[v.candidate], v.candidate});
    }
    RestrictedSolution sol;
    try {
      sol = qp.solve(config.qp_tol);
    } catch (const SolverError&) {
      report.rounds = round;
      report.working_set_size = qp.num_constraints();
      throw;
    }
    theta = sol.theta;
    slacks = sol.slacks;
    objective = sol.objective;
    report.trace.push_back(
        TraceRow{round, qp.num_constraints(), worst, sol.dual_objective, sol.gap()});
  }

  report.rounds = round;
  report.working_set_size = qp.num_constraints();
  report.final_objective = objective;
  report.slacks = slacks;
  result.model.weights = theta;
  result.model.rounds = round;
  return result;
}

std::vector<TrainingExample> build_examples(std::span<const Scene> scenes, ClassId class_id,
                                            const FeatureConfig& feature_config, LossMode mode,
                                            const DifficultyFilter* filter,
                                            ExampleDiagnostics* diagnostics) {
  ExampleDiagnostics diag;
  std::vector<TrainingExample> out;
  for (const Scene& scene : scenes) {
    const bool has_class = std::any_of(scene.ground_truth.begin(), scene.ground_truth.end(),
                                       [&](const GroundTruthObject& g) { return g.class_id == class_id; });
    if (!has_class) continue;
    if (scene.proposals.empty()) {
      ++diag.scenes_without_proposals;
      continue;
    }
    const ClassId classes[] = {class_id};
    const SceneTables tables(scene, classes, feature_config);
    const std::vector<FeatureVector> candidates =
        extract_all(tables, scene.proposals, class_id, feature_config);

    for (std::size_t g = 0; g < scene.ground_truth.size(); ++g) {
      const GroundTruthObject& gt = scene.ground_truth[g];
      if (gt.class_id != class_id) continue;
      if (filter && !filter->admits(gt)) {
        ++diag.filtered_objects;
        continue;
      }
      TrainingExample ex;
      ex.example_id = scene.id + "#" + std::to_string(g);
      ex.losses.reserve(scene.proposals.size());
      std::size_t best = 0;
      double best_iou = -1.0;
      for (std::size_t j = 0; j < scene.proposals.size(); ++j) {
        const double overlap = iou(gt.box, scene.proposals[j].box);
        if (overlap > best_iou) {
          best_iou = overlap;
          best = j;
        }
        ex.losses.push_back(mode == LossMode::kOneMinusIou ? 1.0 - overlap : overlap);
      }
      Proposal as_proposal{gt.box, scene.proposals[best].generator_score,
                           scene.proposals[best].objectness};
      ex.gt_features = extract(tables, as_proposal, class_id, feature_config);
      ex.candidate_features = candidates;
      out.push_back(std::move(ex));
    }
  }
  if (diagnostics) *diagnostics = diag;
  return out;
}

void write_trace_csv(std::ostream& os, const TrainReport& report) {
  os << "round,working_set_size,max_violation,objective,gap\n";
  for (const TraceRow& row : report.trace) {
    os << row.round << ',' << row.working_set_size << ',' << format_double(row.max_violation) << ','
       << format_double(row.objective) << ',' << format_double(row.gap) << '\n';
  }
}

}  // namespace rerankkit
