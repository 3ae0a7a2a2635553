#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>

#include "ddgd/digraph.hpp"
#include "ddgd/spectral.hpp"

namespace ddgd {

/// A row-stochastic / B column-stochastic pair supported on the digraph:
/// a_ij > 0 iff j in N_i^in, b_ij > 0 iff i in N_j^out.
struct WeightPair {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

/// a_ij = 1/|N_i^in| on the in-neighborhood, b_ij = 1/|N_j^out| on the
/// out-neighborhood. The b side only needs out-degree knowledge, matching
/// a broadcast setting.
WeightPair uniform_weights(const Digraph& g);

/// Heavier self-weights: self_weight on the diagonal plus
/// (1 - self_weight) times the uniform weights. Keeps stochasticity and
/// the support pattern while shifting the non-unit spectrum toward 1,
/// which is what makes large epsilon values (e.g. 0.7) certifiable.
WeightPair lazy_weights(const Digraph& g, double self_weight);

/// The augmented mixing matrix
///
///   M = [ A      eps*I     ]
///       [ I - A  B - eps*I ]
///
/// Validates that A is row-stochastic and B column-stochastic (tolerance
/// 1e-12, offending index reported) and that eps > 0. Every column of M
/// sums to 1; M generally has negative entries, which is expected.
Eigen::MatrixXd assemble_m(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps);

/// The conservative epsilon bound
///
///   Upsilon = (1 / (20 + 8n)^n) * (1 - |lambda_3|)^n
///
/// where lambda_3 is the third largest eigenvalue of M assembled with
/// eps = 0, ordered by magnitude descending with ties broken by real part
/// then imaginary part descending. Any eps in (0, Upsilon) yields a simple
/// unit eigenvalue. The bound shrinks super-exponentially in n; direct
/// certification (validate_epsilon) is the practical selection tool, and
/// Upsilon is reported as a diagnostic.
double epsilon_bound(const Eigen::MatrixXd& m0);

/// Assembled weight system for one digraph: A, B, eps and M.
struct WeightSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  double eps = 0.0;
  Eigen::MatrixXd m;

  static WeightSystem assemble(Eigen::MatrixXd a, Eigen::MatrixXd b, double eps);
  int agents() const { return static_cast<int>(a.rows()); }
};

/// Certifies M(eps): simple unit eigenvalue with everything else strictly
/// inside the unit circle, plus the spectral margin 1 - |lambda_2|.
SpectralVerdict validate_epsilon(const WeightSystem& ws);

inline constexpr double kDefaultEpsilonGrid[] = {0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01};

/// Certified eps with the largest spectral margin over the grid.
/// Throws NumericError when no grid point certifies.
double choose_certified_epsilon(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                std::span<const double> grid = kDefaultEpsilonGrid);

/// Row-major CSV, full precision.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace ddgd
