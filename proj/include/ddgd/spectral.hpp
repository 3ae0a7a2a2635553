#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ddgd {

/// Result of the eigenstructure check on a mixing matrix.
///
/// `left_pi` is the left eigenvector for the eigenvalue closest to 1,
/// normalized to sum 1; for a row-stochastic A this is the stationary
/// distribution pi with pi A = pi.
struct SpectralVerdict {
  bool unit_eigenvalue_simple = false;
  double second_magnitude = 0.0;  // |lambda_2|
  double margin = 0.0;            // 1 - |lambda_2|
  Eigen::VectorXd left_pi;
};

/// Empirical geometric-decay fit d_k ~ Gamma_hat * gamma_hat^k.
struct RateFit {
  double gamma_hat = 0.0;
  double Gamma_hat = 0.0;
  /// Worst multiplicative deviation of the fit over the window:
  /// max |log d_k - (log Gamma_hat + k log gamma_hat)|.
  double max_residual = 0.0;
  /// First k with d_k <= tol, or -1 if never reached within k_max.
  long first_k_at_tol = -1;
};

/// Full dense eigen-decomposition of m. The unit eigenvalue counts as
/// simple iff exactly one eigenvalue lies within 1e-8 of 1 and every other
/// eigenvalue has magnitude at most 1 - 1e-8.
///
/// Intended for desk-scale matrices (up to ~100x100).
SpectralVerdict certify(const Eigen::MatrixXd& m);

/// The 2n x 2n limit of M^k for a certified M: top half all 1/n, bottom
/// half zero.
Eigen::MatrixXd limit_matrix(int n);

/// Measures d_k = ||M^k - limit_matrix(n)||_inf for k = 1..k_max and fits
/// log d_k against k by least squares over the tail (the first 10% of the
/// recorded iterates are skipped; recording stops once d_k falls below the
/// numeric floor so roundoff does not pollute the fit).
///
/// If dk_out is non-null the recorded series is appended to it.
/// Throws NumericError when the tail fails to contract (fitted rate >= 1),
/// which signals a matrix whose unit eigenvalue is not simple.
RateFit power_convergence(const Eigen::MatrixXd& m, int k_max, double tol,
                          std::vector<double>* dk_out = nullptr);

/// Left eigenvector for the eigenvalue nearest 1, normalized to sum 1.
Eigen::VectorXd stationary_left_eigenvector(const Eigen::MatrixXd& a);

/// CSV export of a (k, d_k) series, one row per k starting at k = 1.
void write_decay_csv(std::ostream& out, const std::vector<double>& dk);

}  // namespace ddgd
