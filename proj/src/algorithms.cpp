#include "ddgd/algorithms.hpp"

#include <cmath>
#include <string>

#include "ddgd/errors.hpp"

namespace ddgd {

namespace {

constexpr double kPushSumFloor = 1e-300;

Eigen::MatrixXd gradient_rows(const Objective& obj, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    g.row(i) = obj.agent_subgradient(i + 1, x.row(i).transpose()).transpose();
  }
  return g;
}

void check_dims(const Eigen::MatrixXd& x, const Objective& obj, Eigen::Index n) {
  if (x.rows() != n) throw InputError("state row count does not match the weight matrix");
  if (obj.agents() != n) throw InputError("objective agent count does not match the graph");
  if (obj.dim() != x.cols()) throw InputError("objective dimension does not match the states");
}

}  // namespace

AgentStates AgentStates::init(Eigen::MatrixXd x0) {
  AgentStates st;
  st.y = Eigen::MatrixXd::Zero(x0.rows(), x0.cols());
  st.x = std::move(x0);
  st.k = 0;
  return st;
}

Eigen::MatrixXd AgentStates::stacked() const {
  Eigen::MatrixXd z(2 * x.rows(), x.cols());
  z.topRows(x.rows()) = x;
  z.bottomRows(y.rows()) = y;
  return z;
}

AgentStates AgentStates::from_stacked(const Eigen::MatrixXd& z, long k) {
  if (z.rows() % 2 != 0) throw InputError("stacked state must have 2n rows");
  const Eigen::Index n = z.rows() / 2;
  AgentStates st;
  st.x = z.topRows(n);
  st.y = z.bottomRows(n);
  st.k = k;
  return st;
}

Eigen::VectorXd AgentStates::accumulation_point() const {
  const double n = static_cast<double>(x.rows());
  return (x.colwise().sum() + y.colwise().sum()).transpose() / n;
}

double AgentStates::max_x_distance_to(const Eigen::VectorXd& point) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    worst = std::max(worst, (x.row(i).transpose() - point).norm());
  }
  return worst;
}

double AgentStates::max_y_norm() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) worst = std::max(worst, y.row(i).norm());
  return worst;
}

AgentStates ddgd_step(const AgentStates& st, const WeightSystem& ws, const Objective& obj,
                      double alpha, kernels::Backend backend) {
  const Eigen::Index n = ws.a.rows();
  check_dims(st.x, obj, n);
  const Eigen::MatrixXd g = gradient_rows(obj, st.x);
  AgentStates next;
  next.k = st.k + 1;
  kernels::ddgd_mix(ws.a, ws.b, ws.eps, st.x, st.y, g, alpha, next.x, next.y, backend);
  return next;
}

AgentStates ddgd_step_stacked(const AgentStates& st, const WeightSystem& ws,
                              const Objective& obj, double alpha, kernels::Backend backend) {
  const Eigen::Index n = ws.a.rows();
  check_dims(st.x, obj, n);
  Eigen::MatrixXd g_stacked = Eigen::MatrixXd::Zero(2 * n, st.x.cols());
  g_stacked.topRows(n) = gradient_rows(obj, st.x);
  Eigen::MatrixXd mixed;
  kernels::mix(ws.m, st.stacked(), mixed, backend);
  mixed -= alpha * g_stacked;
  return AgentStates::from_stacked(mixed, st.k + 1);
}

Eigen::MatrixXd dgd_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                         const Objective& obj, double alpha, kernels::Backend backend) {
  if (w.rows() != w.cols()) throw InputError("weight matrix must be square");
  check_dims(x, obj, w.rows());
  const Eigen::MatrixXd g = gradient_rows(obj, x);
  Eigen::MatrixXd mixed;
  kernels::mix(w, x, mixed, backend);
  return mixed - alpha * g;
}

Eigen::VectorXd column_stochastic_average_track(const Eigen::MatrixXd& x) {
  return x.colwise().sum().transpose() / static_cast<double>(x.rows());
}

PushSumState PushSumState::init(Eigen::MatrixXd x0) {
  PushSumState st;
  st.v = Eigen::VectorXd::Ones(x0.rows());
  st.x = x0;
  st.w = std::move(x0);
  st.k = 0;
  return st;
}

PushSumState gradient_push_step(const PushSumState& st, const Eigen::MatrixXd& b,
                                const Objective& obj, double alpha, kernels::Backend backend) {
  const Eigen::Index n = b.rows();
  if (b.cols() != n) throw InputError("weight matrix must be square");
  check_dims(st.x, obj, n);
  const Eigen::MatrixXd g = gradient_rows(obj, st.x);

  PushSumState next;
  next.k = st.k + 1;
  const Eigen::MatrixXd stepped = st.w - alpha * g;
  kernels::mix(b, stepped, next.w, backend);
  next.v = b * st.v;
  next.x.resize(n, st.x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(next.v(i) > kPushSumFloor)) {
      throw NumericError("push-sum weight v_" + std::to_string(i + 1) +
                         " collapsed to " + std::to_string(next.v(i)) +
                         "; b is not column-stochastic or the graph is disconnected");
    }
    next.x.row(i) = next.w.row(i) / next.v(i);
  }
  return next;
}

Eigen::MatrixXd metropolis_weights(const Digraph& g) {
  const int n = g.nodes();
  // Symmetrized neighborhoods (union of in and out, self excluded).
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 1; i <= n; ++i) {
    for (int j : g.in_neighbors(i)) {
      if (j != i) nbrs[i - 1].push_back(j);
    }
    for (int j : g.out_neighbors(i)) {
      if (j != i && !g.has_edge(j, i)) nbrs[i - 1].push_back(j);
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int j : nbrs[i]) {
      const double value =
          1.0 / (1.0 + std::max(nbrs[i].size(), nbrs[j - 1].size()));
      w(i, j - 1) = value;
      total += value;
    }
    w(i, i) = 1.0 - total;
  }
  return w;
}

}  // namespace ddgd
