#pragma once

#include <Eigen/Dense>

#include "ddgd/kernels.hpp"
#include "ddgd/objective.hpp"
#include "ddgd/weights.hpp"

namespace ddgd {

/// Per-agent iterate pair: row i of x is x_i^k, row i of y is y_i^k.
struct AgentStates {
  Eigen::MatrixXd x;  // n x p
  Eigen::MatrixXd y;  // n x p
  long k = 0;

  static AgentStates init(Eigen::MatrixXd x0);  // y^0 = 0

  int agents() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }

  /// Stacked z in R^{2n x p}: x rows on top, y rows below.
  Eigen::MatrixXd stacked() const;
  static AgentStates from_stacked(const Eigen::MatrixXd& z, long k);

  /// Accumulation point: (1/n) (sum_i x_i + sum_i y_i).
  Eigen::VectorXd accumulation_point() const;

  double max_x_distance_to(const Eigen::VectorXd& point) const;
  double max_y_norm() const;
};

/// One blockwise update of both state vectors:
///
///   x_i <- sum_j a_ij x_j + eps y_i - alpha grad f_i(x_i)
///   y_i <- x_i - sum_j a_ij x_j + sum_j b_ij y_j - eps y_i
///
/// Equivalent to the stacked form z <- M z - alpha g with g_i the
/// subgradient for the first n rows and zero below.
AgentStates ddgd_step(const AgentStates& st, const WeightSystem& ws, const Objective& obj,
                      double alpha,
                      kernels::Backend backend = kernels::default_backend());

/// Same update through the assembled 2n x 2n matrix, for cross-checking
/// the blockwise path.
AgentStates ddgd_step_stacked(const AgentStates& st, const WeightSystem& ws,
                              const Objective& obj, double alpha,
                              kernels::Backend backend = kernels::default_backend());

/// Classic synchronous update x_i <- sum_j w_ij x_j - alpha grad f_i(x_i).
/// The caller declares the stochasticity regime of w by construction.
Eigen::MatrixXd dgd_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                         const Objective& obj, double alpha,
                         kernels::Backend backend = kernels::default_backend());

/// Mean row of the agent states. Along a column-stochastic trajectory it
/// obeys x_bar^{k+1} = x_bar^k - (alpha/n) sum_i grad f_i(x_i^k) exactly.
Eigen::VectorXd column_stochastic_average_track(const Eigen::MatrixXd& x);

/// Push-sum-with-gradients state: numerators w, positive weights v, and
/// de-biased estimates x_i = w_i / v_i.
struct PushSumState {
  Eigen::MatrixXd w;  // n x p
  Eigen::VectorXd v;  // n, positive, sum conserved at n
  Eigen::MatrixXd x;  // n x p
  long k = 0;

  static PushSumState init(Eigen::MatrixXd x0);  // v^0 = 1
};

/// One gradient-push round:
///
///   w <- B (w - alpha g),  v <- B v,  x_i <- w_i / v_i
///
/// with g_i = grad f_i(x_i). The de-biasing division is the nonlinearity
/// this baseline carries and the augmented linear iteration avoids.
/// Throws NumericError when some v_i collapses toward zero, which signals
/// a non-column-stochastic b or a disconnected graph.
PushSumState gradient_push_step(const PushSumState& st, const Eigen::MatrixXd& b,
                                const Objective& obj, double alpha,
                                kernels::Backend backend = kernels::default_backend());

/// Metropolis weights on the symmetrized edge set: symmetric and doubly
/// stochastic, the classic undirected-DGD regime.
Eigen::MatrixXd metropolis_weights(const Digraph& g);

}  // namespace ddgd
