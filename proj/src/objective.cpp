#include "ddgd/objective.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "ddgd/errors.hpp"

namespace ddgd {

namespace {

constexpr double kRadiusGuard = 1e3;
constexpr double kKinkTol = 1e-12;

double sigma_max(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v(i));
    if (i > 0) out << ' ';
    out << buf;
  }
  out << '\n';
}

}  // namespace

LeastSquaresProblem LeastSquaresProblem::generate(int agents, int dim, int rows_per_agent,
                                                  double noise_sigma, double scale_spread,
                                                  std::uint64_t seed) {
  if (agents < 1 || dim < 1 || rows_per_agent < 1) {
    throw InputError("least squares generation needs positive agents, dim and rows");
  }
  if (noise_sigma < 0.0) throw InputError("noise_sigma must be nonnegative");
  if (scale_spread <= 0.0) throw InputError("scale_spread must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LeastSquaresProblem prob;
  prob.sensing.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    const double rho =
        agents > 1 ? std::pow(scale_spread, static_cast<double>(i) / (agents - 1) - 0.5) : 1.0;
    Eigen::MatrixXd r(rows_per_agent, dim);
    for (int row = 0; row < rows_per_agent; ++row) {
      for (int col = 0; col < dim; ++col) r(row, col) = rho * gauss(rng);
    }
    prob.sensing.push_back(std::move(r));
  }
  prob.x_true.resize(dim);
  for (int col = 0; col < dim; ++col) prob.x_true(col) = gauss(rng);
  prob.observed.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    Eigen::VectorXd noise(rows_per_agent);
    for (int row = 0; row < rows_per_agent; ++row) noise(row) = noise_sigma * gauss(rng);
    prob.observed.push_back(prob.sensing[i] * prob.x_true + noise);
  }
  return prob;
}

void LeastSquaresProblem::save(std::ostream& out) const {
  out << "least_squares\n";
  out << "agents " << agents() << "\n";
  out << "dim " << dim() << "\n";
  out << "x_true ";
  write_vector(out, x_true);
  for (int i = 0; i < agents(); ++i) {
    out << "agent " << (i + 1) << " rows " << sensing[i].rows() << "\n";
    for (Eigen::Index row = 0; row < sensing[i].rows(); ++row) {
      write_vector(out, sensing[i].row(row).transpose());
    }
    out << "s ";
    write_vector(out, observed[i]);
  }
}

LeastSquaresProblem LeastSquaresProblem::load(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "least_squares") {
    throw InputError("problem file: expected `least_squares` header");
  }
  int agents = 0, dim = 0;
  if (!(in >> tag >> agents) || tag != "agents" || agents < 1) {
    throw InputError("problem file: bad `agents` line");
  }
  if (!(in >> tag >> dim) || tag != "dim" || dim < 1) {
    throw InputError("problem file: bad `dim` line");
  }
  LeastSquaresProblem prob;
  if (!(in >> tag) || tag != "x_true") throw InputError("problem file: bad `x_true` line");
  prob.x_true.resize(dim);
  for (int c = 0; c < dim; ++c) {
    if (!(in >> prob.x_true(c))) throw InputError("problem file: truncated x_true");
  }
  for (int i = 0; i < agents; ++i) {
    int id = 0, rows = 0;
    if (!(in >> tag >> id >> tag >> rows) || rows < 1 || id != i + 1) {
      throw InputError("problem file: bad agent header for agent " + std::to_string(i + 1));
    }
    Eigen::MatrixXd r(rows, dim);
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < dim; ++col) {
        if (!(in >> r(row, col))) throw InputError("problem file: truncated sensing matrix");
      }
    }
    if (!(in >> tag) || tag != "s") throw InputError("problem file: bad `s` line");
    Eigen::VectorXd s(rows);
    for (int row = 0; row < rows; ++row) {
      if (!(in >> s(row))) throw InputError("problem file: truncated observation vector");
    }
    prob.sensing.push_back(std::move(r));
    prob.observed.push_back(std::move(s));
  }
  return prob;
}

Eigen::VectorXd ls_subgradient(const LeastSquaresProblem& prob, int agent,
                               const Eigen::VectorXd& x) {
  if (agent < 1 || agent > prob.agents()) {
    throw InputError("agent id " + std::to_string(agent) + " out of range");
  }
  const Eigen::MatrixXd& r = prob.sensing[agent - 1];
  const Eigen::VectorXd residual = r * x - prob.observed[agent - 1];
  const double norm = residual.norm();
  if (norm <= kKinkTol) return Eigen::VectorXd::Zero(x.size());
  return r.transpose() * residual / norm;
}

Objective Objective::from_agents(int dim, std::vector<AgentFunction> agents,
                                 double subgrad_bound) {
  if (dim < 1) throw InputError("objective dimension must be positive");
  if (agents.empty()) throw InputError("objective needs at least one agent");
  if (subgrad_bound <= 0.0) throw InputError("subgradient bound must be positive");
  Objective obj;
  obj.dim_ = dim;
  obj.agent_scales_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(agents.size()));
  obj.agent_fns_ = std::move(agents);
  obj.subgrad_bound_ = subgrad_bound;
  return obj;
}

namespace {

Eigen::VectorXd weighted_normal_equations(const LeastSquaresProblem& prob,
                                          const Eigen::VectorXd& scales) {
  const int p = prob.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < prob.agents(); ++i) {
    h += scales(i) * prob.sensing[i].transpose() * prob.sensing[i];
    rhs += scales(i) * prob.sensing[i].transpose() * prob.observed[i];
  }
  // ldlt handles the semidefinite case (e.g. degenerate weights).
  return h.ldlt().solve(rhs);
}

// Damped Newton on the smooth region of the weighted sum-of-norms
// objective. Stops at kinks, which generically do not occur at the joint
// minimizer of noisy data.
Eigen::VectorXd polish_sum_of_norms(const LeastSquaresProblem& prob,
                                    const Eigen::VectorXd& scales, const Objective& obj,
                                    Eigen::VectorXd x) {
  const int n = prob.agents();
  const int p = prob.dim();
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
    bool at_kink = false;
    for (int i = 0; i < n; ++i) {
      if (scales(i) == 0.0) continue;
      const Eigen::MatrixXd& r = prob.sensing[i];
      const Eigen::VectorXd residual = r * x - prob.observed[i];
      const double norm = residual.norm();
      if (norm < 1e-10) {
        at_kink = true;
        break;
      }
      const Eigen::VectorXd u = r.transpose() * residual;
      const double w = scales(i) / n;
      grad += w * u / norm;
      hess += w * (r.transpose() * r - u * u.transpose() / (norm * norm)) / norm;
    }
    if (at_kink) break;
    hess.diagonal().array() += 1e-14;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    const double f0 = obj.value(x);
    const double slope = grad.dot(step);
    double t = 1.0;
    while (t > 1e-14 && obj.value(x - t * step) > f0 - 1e-4 * t * slope) t *= 0.5;
    const Eigen::VectorXd next = x - t * step;
    if ((next - x).norm() < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

namespace detail {

// Shared construction for plain and pi-weighted least squares objectives.
// Agent i's function is (scales_i / n) * ||R_i x - s_i||  (or squared).
Objective make_ls_objective(std::shared_ptr<const LeastSquaresProblem> prob, LsFlavor flavor,
                            Eigen::VectorXd scales) {
  const int n = prob->agents();
  const int p = prob->dim();
  Objective obj;
  obj.dim_ = p;
  obj.ls_ = prob;
  obj.flavor_ = flavor;
  obj.agent_scales_ = scales;

  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const double smax = sigma_max(prob->sensing[i]);
    const double snorm = prob->observed[i].norm();
    if (flavor == LsFlavor::unsquared) {
      bound = std::max(bound, scales(i) / n * smax);
    } else {
      bound = std::max(bound, scales(i) / n * 2.0 * smax * (smax * kRadiusGuard + snorm));
    }
  }
  obj.subgrad_bound_ = std::max(bound, 1e-300);
  if (flavor == LsFlavor::squared) obj.radius_guard_ = kRadiusGuard;

  obj.agent_fns_.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double w = scales(i) / n;
    const LeastSquaresProblem* raw = prob.get();
    if (flavor == LsFlavor::unsquared) {
      obj.agent_fns_.push_back(AgentFunction{
          [raw, i, w](const Eigen::VectorXd& x) {
            return w * (raw->sensing[i] * x - raw->observed[i]).norm();
          },
          [raw, i, w](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(w * ls_subgradient(*raw, i + 1, x));
          }});
    } else {
      obj.agent_fns_.push_back(AgentFunction{
          [raw, i, w](const Eigen::VectorXd& x) {
            return w * (raw->sensing[i] * x - raw->observed[i]).squaredNorm();
          },
          [raw, i, w](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(2.0 * w * raw->sensing[i].transpose() *
                                   (raw->sensing[i] * x - raw->observed[i]));
          }});
    }
  }
  return obj;
}

}  // namespace detail

namespace {

void run_optimum_oracle(Objective& obj, long iters) {
  const CentralizedSolution sol = solve_centralized(obj, iters);
  obj.set_optimum(sol.x, sol.f);
}

}  // namespace

Objective Objective::least_squares(LeastSquaresProblem prob, LsFlavor flavor) {
  auto shared = std::make_shared<const LeastSquaresProblem>(std::move(prob));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(shared->agents());
  Objective obj = detail::make_ls_objective(shared, flavor, ones);
  run_optimum_oracle(obj, 30000);
  return obj;
}

double Objective::agent_value(int i, const Eigen::VectorXd& x) const {
  if (i < 1 || i > agents()) throw InputError("agent id " + std::to_string(i) + " out of range");
  return agent_fns_[i - 1].value(x);
}

Eigen::VectorXd Objective::agent_subgradient(int i, const Eigen::VectorXd& x) const {
  if (i < 1 || i > agents()) throw InputError("agent id " + std::to_string(i) + " out of range");
  if (radius_guard_ > 0.0 && x.norm() > radius_guard_) {
    throw NumericError("query outside the radius guard ||x|| <= " +
                       std::to_string(radius_guard_) +
                       "; the squared flavor has unbounded gradients there");
  }
  Eigen::VectorXd g = agent_fns_[i - 1].subgrad(x);
  if (g.norm() > subgrad_bound_ * (1.0 + 1e-9) + 1e-12) {
    throw NumericError("subgradient bound violated: ||g|| = " + std::to_string(g.norm()) +
                       " > D = " + std::to_string(subgrad_bound_) + " at agent " +
                       std::to_string(i));
  }
  return g;
}

const AgentFunction& Objective::agent_function(int i) const {
  if (i < 1 || i > agents()) throw InputError("agent id " + std::to_string(i) + " out of range");
  return agent_fns_[i - 1];
}

double Objective::value(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (const auto& fn : agent_fns_) total += fn.value(x);
  return total;
}

const Eigen::VectorXd& Objective::optimum() const {
  if (!has_optimum_) throw NumericError("objective has no optimum oracle");
  return optimum_;
}

double Objective::optimal_value() const {
  if (!has_optimum_) throw NumericError("objective has no optimum oracle");
  return optimal_value_;
}

void Objective::set_optimum(Eigen::VectorXd x, double f) {
  optimum_ = std::move(x);
  optimal_value_ = f;
  has_optimum_ = true;
}

CentralizedSolution solve_centralized(const Objective& obj, long iters,
                                      std::vector<double>* best_f_trace) {
  if (iters < 0) throw InputError("iteration count must be nonnegative");
  const LeastSquaresProblem* ls = obj.ls_problem();

  if (ls && obj.ls_flavor() == LsFlavor::squared) {
    CentralizedSolution sol;
    sol.x = weighted_normal_equations(*ls, obj.agent_scales());
    sol.f = obj.value(sol.x);
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(obj.dim());
  Eigen::VectorXd best_x = x;
  double best_f = obj.value(x);
  for (long k = 0; k < iters; ++k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(obj.dim());
    for (int i = 1; i <= obj.agents(); ++i) g += obj.agent_subgradient(i, x);
    x -= 1.0 / std::sqrt(static_cast<double>(k) + 1.0) * g;
    const double f = obj.value(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    if (best_f_trace) best_f_trace->push_back(best_f);
  }

  if (ls && obj.ls_flavor() == LsFlavor::unsquared) {
    const Eigen::VectorXd polished = polish_sum_of_norms(*ls, obj.agent_scales(), obj, best_x);
    const double f = obj.value(polished);
    if (f < best_f) {
      best_f = f;
      best_x = polished;
    }
  }
  return {best_x, best_f};
}

Objective weighted_objective(const Objective& obj, const Eigen::VectorXd& pi) {
  const int n = obj.agents();
  if (pi.size() != n) throw InputError("pi must have one weight per agent");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (pi(i) < 0.0) {
      throw InputError("pi has a negative weight at agent " + std::to_string(i + 1));
    }
    sum += pi(i);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("pi must sum to 1");

  if (const LeastSquaresProblem* ls = obj.ls_problem()) {
    Eigen::VectorXd scales = obj.agent_scales().cwiseProduct(pi) * n;
    auto shared = std::shared_ptr<const LeastSquaresProblem>(
        std::make_shared<const LeastSquaresProblem>(*ls));
    Objective weighted = detail::make_ls_objective(shared, obj.ls_flavor(), std::move(scales));
    run_optimum_oracle(weighted, 30000);
    return weighted;
  }

  std::vector<AgentFunction> fns;
  fns.reserve(n);
  double max_pi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = n * pi(i);
    max_pi = std::max(max_pi, pi(i));
    const AgentFunction& base = obj.agent_function(i + 1);
    fns.push_back(AgentFunction{
        [w, value = base.value](const Eigen::VectorXd& x) { return w * value(x); },
        [w, subgrad = base.subgrad](const Eigen::VectorXd& x) {
          return Eigen::VectorXd(w * subgrad(x));
        }});
  }
  Objective weighted =
      Objective::from_agents(obj.dim(), std::move(fns), n * max_pi * obj.subgrad_bound());
  run_optimum_oracle(weighted, 30000);
  return weighted;
}

}  // namespace ddgd
