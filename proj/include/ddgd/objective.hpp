#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace ddgd {

/// Per-agent least squares data: s_i = R_i x_true + noise.
struct LeastSquaresProblem {
  std::vector<Eigen::MatrixXd> sensing;   // R_i, each m_i x p
  std::vector<Eigen::VectorXd> observed;  // s_i
  Eigen::VectorXd x_true;

  int agents() const { return static_cast<int>(sensing.size()); }
  int dim() const { return static_cast<int>(x_true.size()); }

  /// Seeded generation: R_i entries and x_true are standard normal, noise
  /// is N(0, noise_sigma^2). scale_spread = r scales agent i's data by
  /// r^(i/(n-1) - 1/2), so r = 1 is homogeneous and larger r makes the
  /// agents' sensing quality increasingly unequal.
  static LeastSquaresProblem generate(int agents, int dim, int rows_per_agent,
                                      double noise_sigma, double scale_spread,
                                      std::uint64_t seed);

  /// Self-describing text format (dimensions header + row-major matrices).
  void save(std::ostream& out) const;
  static LeastSquaresProblem load(std::istream& in);
};

/// Subgradient of x -> ||R_i x - s_i|| (unscaled). Returns zero at the
/// kink, which is a valid subgradient; satisfies ||g|| <= sigma_max(R_i).
Eigen::VectorXd ls_subgradient(const LeastSquaresProblem& prob, int agent,
                               const Eigen::VectorXd& x);

struct AgentFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> subgrad;
};

enum class LsFlavor {
  unsquared,  // f_i(x) = (1/n) ||R_i x - s_i||   (bounded subgradients)
  squared,    // f_i(x) = (1/n) ||R_i x - s_i||^2 (closed-form optimum)
};

class Objective;

namespace detail {
Objective make_ls_objective(std::shared_ptr<const LeastSquaresProblem> prob, LsFlavor flavor,
                            Eigen::VectorXd scales);
}

/// Sum-structured convex objective f(x) = sum_i f_i(x) with per-agent
/// subgradient oracles, a subgradient bound D enforced at query time, and
/// an optimum oracle (x*, f*).
///
/// The squared least squares flavor has no global subgradient bound; its
/// queries are restricted to ||x|| <= radius_guard and D is the bound on
/// that ball. Evaluation is pure and safe for concurrent queries.
class Objective {
 public:
  static Objective from_agents(int dim, std::vector<AgentFunction> agents,
                               double subgrad_bound);

  /// Builds the paper-style least squares objective and eagerly runs the
  /// optimum oracle: normal equations for the squared flavor, centralized
  /// subgradient descent plus a local polish for the unsquared one.
  static Objective least_squares(LeastSquaresProblem prob, LsFlavor flavor);

  int agents() const { return static_cast<int>(agent_fns_.size()); }
  int dim() const { return dim_; }
  double subgrad_bound() const { return subgrad_bound_; }
  double radius_guard() const { return radius_guard_; }

  double agent_value(int i, const Eigen::VectorXd& x) const;
  /// Queries the oracle and enforces ||g|| <= D (and the radius guard for
  /// the squared flavor). Throws NumericError on violation.
  Eigen::VectorXd agent_subgradient(int i, const Eigen::VectorXd& x) const;

  /// Raw per-agent oracle (1-based id), without the bound checks.
  const AgentFunction& agent_function(int i) const;

  /// f(x) = sum_i f_i(x).
  double value(const Eigen::VectorXd& x) const;

  bool has_optimum() const { return has_optimum_; }
  const Eigen::VectorXd& optimum() const;
  double optimal_value() const;
  void set_optimum(Eigen::VectorXd x, double f);

  // Metadata used by solve_centralized and weighted_objective.
  const LeastSquaresProblem* ls_problem() const { return ls_ ? ls_.get() : nullptr; }
  LsFlavor ls_flavor() const { return flavor_; }
  const Eigen::VectorXd& agent_scales() const { return agent_scales_; }

 private:
  friend Objective detail::make_ls_objective(std::shared_ptr<const LeastSquaresProblem>,
                                             LsFlavor, Eigen::VectorXd);
  Objective() = default;

  int dim_ = 0;
  std::vector<AgentFunction> agent_fns_;
  double subgrad_bound_ = 0.0;
  double radius_guard_ = 0.0;  // 0 = unguarded
  bool has_optimum_ = false;
  Eigen::VectorXd optimum_;
  double optimal_value_ = 0.0;
  std::shared_ptr<const LeastSquaresProblem> ls_;
  LsFlavor flavor_ = LsFlavor::unsquared;
  Eigen::VectorXd agent_scales_;  // w_i: f_i = (w_i/n) * base term
};

struct CentralizedSolution {
  Eigen::VectorXd x;
  double f = 0.0;
};

/// Centralized optimum oracle. Runs subgradient descent with
/// alpha_k = 1/sqrt(k+1) and best-iterate tracking for `iters` steps; for
/// least squares objectives the result is then refined (normal equations
/// for the squared flavor, damped Newton on the smooth region for the
/// unsquared one). best_f_trace, when given, receives the best-so-far f
/// after every subgradient step.
CentralizedSolution solve_centralized(const Objective& obj, long iters,
                                      std::vector<double>* best_f_trace = nullptr);

/// The pi-weighted objective: agent i's function becomes n * pi_i * f_i,
/// so the new total equals n * sum_i pi_i f_i and shares its minimizers
/// with sum_i pi_i f_i. Requires pi >= 0 with sum 1. The optimum oracle is
/// re-run on the weighted problem.
Objective weighted_objective(const Objective& obj, const Eigen::VectorXd& pi);

}  // namespace ddgd
