#include "rerankkit/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rerankkit {

namespace {

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

RestrictedQp::RestrictedQp(std::size_t num_examples, double C) : C_(C), blocks_(num_examples) {
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw std::invalid_argument("RestrictedQp: C must be positive");
  }
  for (auto& block : blocks_) {
    Row slack;
    slack.alpha = C_;
    block.push_back(slack);
  }
}

void RestrictedQp::add(std::size_t example, const Constraint& c) {
  if (example >= blocks_.size()) {
    throw std::out_of_range("RestrictedQp::add: example index");
  }
  if (!(c.loss > 0.0)) {
    throw std::invalid_argument("RestrictedQp::add: constraint loss must be positive");
  }
  Row row;
  for (std::size_t k = 0; k < kNumFeatures; ++k) row.psi[k] = c.loss * c.delta[k];
  row.b = c.loss;
  row.sqnorm = dot(row.psi, row.psi);
  blocks_[example].push_back(row);
  ++num_constraints_;
}

void RestrictedQp::recompute_theta() {
  theta_.fill(0.0);
  for (const auto& block : blocks_) {
    for (std::size_t j = 1; j < block.size(); ++j) {
      const Row& row = block[j];
      if (row.alpha == 0.0) continue;
      for (std::size_t k = 0; k < kNumFeatures; ++k) theta_[k] += 0.5 * row.alpha * row.psi[k];
    }
  }
}

// Partial derivative of the dual in alpha_j; equals the slack the j-th
// constraint demands at the current theta.
double RestrictedQp::gradient(const Row& row) const { return row.b - dot(theta_, row.psi); }

void RestrictedQp::optimize_block(std::vector<Row>& block, double block_tol) {
  if (block.size() < 2) return;
  std::vector<double> g(block.size());
  const std::size_t max_steps = 50 * block.size();
  for (std::size_t step = 0; step < max_steps; ++step) {
    std::size_t p = 0;
    std::size_t q = block.size();
    for (std::size_t j = 0; j < block.size(); ++j) {
      g[j] = gradient(block[j]);
      if (g[j] > g[p]) p = j;
      if (block[j].alpha > 0.0 && (q == block.size() || g[j] < g[q])) q = j;
    }
    if (q == block.size() || p == q) return;

    double block_gap = 0.0;
    for (std::size_t j = 0; j < block.size(); ++j) block_gap += block[j].alpha * (g[p] - g[j]);
    if (block_gap <= block_tol || g[p] - g[q] <= 0.0) return;

    Row& up = block[p];
    Row& down = block[q];
    FeatureVector diff;
    for (std::size_t k = 0; k < kNumFeatures; ++k) diff[k] = up.psi[k] - down.psi[k];
    const double curvature = dot(diff, diff);
    double delta = down.alpha;
    if (curvature > 0.0) {
      delta = std::min(delta, 2.0 * (g[p] - g[q]) / curvature);
    }
    if (!(delta > 0.0)) return;
    if (delta >= down.alpha) {
      delta = down.alpha;
      down.alpha = 0.0;
    } else {
      down.alpha -= delta;
    }
    up.alpha += delta;
    for (std::size_t k = 0; k < kNumFeatures; ++k) theta_[k] += 0.5 * delta * diff[k];
  }
}

RestrictedSolution RestrictedQp::current(std::size_t sweeps) const {
  RestrictedSolution sol;
  sol.theta = theta_;
  sol.sweeps = sweeps;
  sol.slacks.reserve(blocks_.size());
  const double theta_sq = dot(theta_, theta_);
  double slack_sum = 0.0;
  double linear = 0.0;
  for (const auto& block : blocks_) {
    double xi = 0.0;
    for (const Row& row : block) {
      xi = std::max(xi, gradient(row));
      linear += row.alpha * row.b;
    }
    sol.slacks.push_back(xi);
    slack_sum += xi;
  }
  sol.objective = theta_sq + C_ * slack_sum;
  sol.dual_objective = linear - theta_sq;
  return sol;
}

RestrictedSolution RestrictedQp::solve(double qp_tol, std::size_t max_sweeps) {
  if (!(qp_tol > 0.0)) {
    throw std::invalid_argument("RestrictedQp::solve: qp_tol must be positive");
  }
  recompute_theta();
  RestrictedSolution sol = current(0);
  const double block_tol = qp_tol / (2.0 * static_cast<double>(std::max<std::size_t>(1, blocks_.size())));
  for (std::size_t sweep = 1; sol.gap() > qp_tol; ++sweep) {
    if (sweep > max_sweeps) {
      throw SolverError("restricted QP did not reach gap " + std::to_string(qp_tol) + " in " +
                            std::to_string(max_sweeps) + " sweeps (gap " +
                            std::to_string(sol.gap()) + ")",
                        sol);
    }
    for (auto& block : blocks_) optimize_block(block, block_tol);
    recompute_theta();
    sol = current(sweep);
  }
  return sol;
}

RestrictedSolution solve_restricted(const WorkingSet& working_set, double C, double qp_tol) {
  RestrictedQp qp(working_set.size(), C);
  for (std::size_t i = 0; i < working_set.size(); ++i) {
    for (const Constraint& c : working_set[i]) qp.add(i, c);
  }
  return qp.solve(qp_tol);
}

}  // namespace rerankkit
