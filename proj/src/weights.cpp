#include "ddgd/weights.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <string>

#include "ddgd/errors.hpp"

namespace ddgd {

namespace {

constexpr double kStochasticTol = 1e-12;

void require_row_stochastic(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (a.cols() != n) throw InputError("A must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) < 0.0) {
        throw InputError("A has a negative entry at row " + std::to_string(i + 1) +
                         ", column " + std::to_string(j + 1));
      }
      sum += a(i, j);
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw InputError("A is not row-stochastic: row " + std::to_string(i + 1) +
                       " sums to " + std::to_string(sum));
    }
  }
}

void require_column_stochastic(const Eigen::MatrixXd& b) {
  const auto n = b.rows();
  if (b.cols() != n) throw InputError("B must be square");
  for (Eigen::Index j = 0; j < n; ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (b(i, j) < 0.0) {
        throw InputError("B has a negative entry at row " + std::to_string(i + 1) +
                         ", column " + std::to_string(j + 1));
      }
      sum += b(i, j);
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw InputError("B is not column-stochastic: column " + std::to_string(j + 1) +
                       " sums to " + std::to_string(sum));
    }
  }
}

}  // namespace

WeightPair uniform_weights(const Digraph& g) {
  const int n = g.nodes();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i <= n; ++i) {
    const auto& in = g.in_neighbors(i);
    const double w = 1.0 / static_cast<double>(in.size());
    for (int j : in) a(i - 1, j - 1) = w;
  }
  for (int j = 1; j <= n; ++j) {
    const auto& out = g.out_neighbors(j);
    const double w = 1.0 / static_cast<double>(out.size());
    for (int i : out) b(i - 1, j - 1) = w;
  }
  return {std::move(a), std::move(b)};
}

WeightPair lazy_weights(const Digraph& g, double self_weight) {
  if (self_weight <= 0.0 || self_weight >= 1.0) {
    throw InputError("self_weight must lie in (0, 1), got " + std::to_string(self_weight));
  }
  WeightPair w = uniform_weights(g);
  const int n = g.nodes();
  if (n == 1) return w;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  w.a = self_weight * id + (1.0 - self_weight) * w.a;
  w.b = self_weight * id + (1.0 - self_weight) * w.b;
  return w;
}

Eigen::MatrixXd assemble_m(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps) {
  require_row_stochastic(a);
  require_column_stochastic(b);
  if (a.rows() != b.rows()) throw InputError("A and B must have matching dimensions");
  const auto n = a.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = a;
  m.topRightCorner(n, n) = eps * id;
  m.bottomLeftCorner(n, n) = id - a;
  m.bottomRightCorner(n, n) = b - eps * id;
  return m;
}

double epsilon_bound(const Eigen::MatrixXd& m0) {
  if (m0.rows() != m0.cols() || m0.rows() % 2 != 0) {
    throw InputError("epsilon_bound expects a 2n x 2n matrix");
  }
  const int n = static_cast<int>(m0.rows()) / 2;
  if (n < 2) {
    throw InputError("epsilon_bound needs n >= 2: a 2x2 matrix has no third eigenvalue");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m0, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed on M(0)");
  std::vector<std::complex<double>> ev(solver.eigenvalues().data(),
                                       solver.eigenvalues().data() + 2 * n);
  // Magnitude descending; ties by real part descending, then imaginary part
  // descending, so conjugate pairs order deterministically.
  std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  const double lam3 = std::abs(ev[2]);
  return std::pow(1.0 / (20.0 + 8.0 * n), n) * std::pow(1.0 - lam3, n);
}

WeightSystem WeightSystem::assemble(Eigen::MatrixXd a, Eigen::MatrixXd b, double eps) {
  if (eps <= 0.0) throw InputError("epsilon must be positive, got " + std::to_string(eps));
  WeightSystem ws;
  ws.m = assemble_m(a, b, eps);
  ws.a = std::move(a);
  ws.b = std::move(b);
  ws.eps = eps;
  return ws;
}

SpectralVerdict validate_epsilon(const WeightSystem& ws) { return certify(ws.m); }

double choose_certified_epsilon(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                std::span<const double> grid) {
  double best_eps = 0.0;
  double best_margin = -1.0;
  for (double eps : grid) {
    if (eps <= 0.0) continue;
    const SpectralVerdict v = certify(assemble_m(a, b, eps));
    if (v.unit_eigenvalue_simple && v.margin > best_margin) {
      best_margin = v.margin;
      best_eps = eps;
    }
  }
  if (best_margin < 0.0) {
    throw NumericError("no epsilon in the grid yields a simple unit eigenvalue");
  }
  return best_eps;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace ddgd
