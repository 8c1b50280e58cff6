#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rerankkit/features.hpp"

namespace rerankkit {

/// One margin constraint of the structured SVM:
///   theta . delta >= 1 - xi_i / loss
/// where delta = f(gt) - f(candidate) and xi_i is the slack of the owning
/// example.
struct Constraint {
  FeatureVector delta{};
  double loss = 1.0;
  std::size_t candidate = 0;
};

/// Constraints collected so far, grouped by example.
using WorkingSet = std::vector<std::vector<Constraint>>;

struct RestrictedSolution {
  FeatureVector theta{};
  std::vector<double> slacks;
  /// ||theta||^2 + C * sum(slacks) at the returned point.
  double objective = 0.0;
  /// Dual value; a lower bound on the restricted optimum.
  double dual_objective = 0.0;
  std::size_t sweeps = 0;

  double gap() const noexcept { return objective - dual_objective; }
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, RestrictedSolution last)
      : std::runtime_error(what), last_(std::move(last)) {}

  /// Iterate and residuals (objective, dual bound) when the solver gave up.
  const RestrictedSolution& last_iterate() const noexcept { return last_; }

 private:
  RestrictedSolution last_;
};

/// Solves
///   min ||theta||^2 + C sum_i xi_i
///   s.t. loss_j * theta . delta_j >= loss_j - xi_i   for every constraint j of example i
///        xi_i >= 0
/// through its dual. With psi_j = loss_j * delta_j the dual is
///   max sum_j alpha_j loss_j - 1/4 ||sum_j alpha_j psi_j||^2
/// where each example's multipliers, together with the multiplier of
/// xi_i >= 0, lie on the simplex of mass C, and theta = 1/2 sum alpha_j psi_j.
/// Each simplex is optimized by pairwise (SMO) steps; the duality gap is the
/// stopping certificate, so the returned primal is within qp_tol of the
/// optimum and the dual bound never decreases as constraints are added.
class RestrictedQp {
 public:
  RestrictedQp(std::size_t num_examples, double C);

  /// Appends a constraint with a zero multiplier, keeping the current
  /// solution as a warm start.
  void add(std::size_t example, const Constraint& c);

  std::size_t num_examples() const noexcept { return blocks_.size(); }
  std::size_t num_constraints() const noexcept { return num_constraints_; }

  /// Throws SolverError when the gap is still above qp_tol after max_sweeps.
  RestrictedSolution solve(double qp_tol, std::size_t max_sweeps = 200000);

 private:
  struct Row {
    FeatureVector psi{};
    double b = 0.0;
    double sqnorm = 0.0;
    double alpha = 0.0;
  };

  void recompute_theta();
  double gradient(const Row& row) const;
  void optimize_block(std::vector<Row>& block, double block_tol);
  RestrictedSolution current(std::size_t sweeps) const;

  double C_;
  std::vector<std::vector<Row>> blocks_;  // row 0 of each block is xi_i >= 0
  std::size_t num_constraints_ = 0;
  FeatureVector theta_{};
};

/// Cold-start convenience wrapper around RestrictedQp.
RestrictedSolution solve_restricted(const WorkingSet& working_set, double C, double qp_tol);

}  // namespace rerankkit
