#include "ddgd/spectral.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>

#include "ddgd/errors.hpp"
#include "ddgd/kernels.hpp"

namespace ddgd {

namespace {

constexpr double kUnitTol = 1e-8;
// Below this the distance to the limit is roundoff, not signal.
constexpr double kNumericFloor = 1e-13;

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  return solver.eigenvalues();
}

double inf_norm_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) row += std::abs(a(i, j) - b(i, j));
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace

Eigen::VectorXd stationary_left_eigenvector(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("stationary_left_eigenvector expects a square matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a.transpose(), /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  Eigen::Index unit = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    if (std::abs(ev[i] - 1.0) < std::abs(ev[unit] - 1.0)) unit = i;
  }
  Eigen::VectorXcd vec = solver.eigenvectors().col(unit);
  // Rotate the complex phase away using the largest component, then take
  // the real part; for a Perron vector this is exact up to roundoff.
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 1; i < vec.size(); ++i) {
    if (std::abs(vec[i]) > std::abs(vec[pivot])) pivot = i;
  }
  Eigen::VectorXd real_vec = (vec / vec[pivot]).real();
  const double sum = real_vec.sum();
  if (std::abs(sum) > 1e-12 * real_vec.cwiseAbs().sum()) {
    real_vec /= sum;
  } else {
    real_vec /= real_vec.cwiseAbs().sum();
  }
  return real_vec;
}

SpectralVerdict certify(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InputError("certify expects a square matrix");
  const Eigen::VectorXcd ev = eigenvalues_of(m);

  Eigen::Index unit = 0;
  int near_one = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i] - 1.0) <= kUnitTol) ++near_one;
    if (std::abs(ev[i] - 1.0) < std::abs(ev[unit] - 1.0)) unit = i;
  }
  double second = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i == unit) continue;
    second = std::max(second, std::abs(ev[i]));
  }

  SpectralVerdict verdict;
  verdict.second_magnitude = second;
  verdict.margin = 1.0 - second;
  verdict.unit_eigenvalue_simple = near_one == 1 && second <= 1.0 - kUnitTol;
  verdict.left_pi = stationary_left_eigenvector(m);
  return verdict;
}

Eigen::MatrixXd limit_matrix(int n) {
  if (n < 1) throw InputError("limit_matrix needs n >= 1");
  Eigen::MatrixXd limit = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  limit.topRows(n).setConstant(1.0 / n);
  return limit;
}

RateFit power_convergence(const Eigen::MatrixXd& m, int k_max, double tol,
                          std::vector<double>* dk_out) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) {
    throw InputError("power_convergence expects a 2n x 2n matrix");
  }
  if (k_max < 1) throw InputError("power_convergence needs k_max >= 1");
  const int n = static_cast<int>(m.rows()) / 2;
  const Eigen::MatrixXd limit = limit_matrix(n);

  Eigen::MatrixXd power = m;
  Eigen::MatrixXd next(m.rows(), m.cols());
  std::vector<double> dk;
  dk.reserve(256);
  RateFit fit;
  for (int k = 1; k <= k_max; ++k) {
    const double d = inf_norm_diff(power, limit);
    if (fit.first_k_at_tol < 0 && d <= tol) fit.first_k_at_tol = k;
    if (d <= kNumericFloor) break;
    dk.push_back(d);
    if (k < k_max) {
      kernels::matmul(power, m, next);
      power.swap(next);
    }
  }
  if (dk_out) dk_out->insert(dk_out->end(), dk.begin(), dk.end());

  // Already at (or numerically indistinguishable from) the limit.
  if (dk.size() < 3) {
    if (fit.first_k_at_tol < 0 && dk.empty()) fit.first_k_at_tol = 1;
    return fit;
  }

  // Least squares on log d_k over the tail; the transient is skipped
  // because early iterates carry polynomial Jordan factors.
  const std::size_t lo = dk.size() / 10;
  const std::size_t count = dk.size() - lo;
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  for (std::size_t idx = lo; idx < dk.size(); ++idx) {
    const double k = static_cast<double>(idx + 1);
    const double y = std::log(dk[idx]);
    sk += k;
    sy += y;
    skk += k * k;
    sky += k * y;
  }
  const double denom = count * skk - sk * sk;
  const double slope = (count * sky - sk * sy) / denom;
  const double intercept = (sy - slope * sk) / count;
  if (slope >= 0.0) {
    throw NumericError("matrix powers do not contract over the fit window; "
                       "the unit eigenvalue is likely not simple");
  }
  fit.gamma_hat = std::exp(slope);
  fit.Gamma_hat = std::exp(intercept);
  double worst = 0.0;
  for (std::size_t idx = lo; idx < dk.size(); ++idx) {
    const double predicted = intercept + slope * static_cast<double>(idx + 1);
    worst = std::max(worst, std::abs(std::log(dk[idx]) - predicted));
  }
  fit.max_residual = worst;
  return fit;
}

void write_decay_csv(std::ostream& out, const std::vector<double>& dk) {
  out << "k,d_k\n";
  char buf[32];
  for (std::size_t i = 0; i < dk.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", dk[i]);
    out << (i + 1) << ',' << buf << '\n';
  }
}

}  // namespace ddgd
