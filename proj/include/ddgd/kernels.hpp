#pragma once

#include <Eigen/Dense>

namespace ddgd::kernels {

enum class Backend { serial, openmp };

/// openmp when compiled with OpenMP support, serial otherwise.
Backend default_backend();

int thread_count();

// Row helpers shared by both backends so that serial and openmp results
// are bitwise identical: every output row is one fixed-order accumulation.
namespace detail {

inline void mix_row(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out,
                    Eigen::Index i) {
  const Eigen::Index m = w.cols();
  const Eigen::Index p = x.cols();
  for (Eigen::Index c = 0; c < p; ++c) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += w(i, j) * x(j, c);
    out(i, c) = acc;
  }
}

inline void matmul_row(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out,
                       Eigen::Index i) {
  const Eigen::Index inner = a.cols();
  const Eigen::Index p = b.cols();
  for (Eigen::Index c = 0; c < p; ++c) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < inner; ++j) acc += a(i, j) * b(j, c);
    out(i, c) = acc;
  }
}

inline void ddgd_mix_row(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                         const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         const Eigen::MatrixXd& g, double alpha, Eigen::MatrixXd& x_next,
                         Eigen::MatrixXd& y_next, Eigen::Index i) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = x.cols();
  for (Eigen::Index c = 0; c < p; ++c) {
    double ax = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) ax += a(i, j) * x(j, c);
    double by = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) by += b(i, j) * y(j, c);
    x_next(i, c) = ax + eps * y(i, c) - alpha * g(i, c);
    y_next(i, c) = x(i, c) - ax + by - eps * y(i, c);
  }
}

}  // namespace detail

/// out = w * x. out must not alias w or x.
void mix(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out,
         Backend backend);
inline void mix(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
  mix(w, x, out, default_backend());
}

/// out = a * b. out must not alias a or b.
void matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out,
            Backend backend);
inline void matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out) {
  matmul(a, b, out, default_backend());
}

/// One fused blockwise step of the augmented iteration:
///
///   x_next_i = sum_j a_ij x_j + eps y_i - alpha g_i
///   y_next_i = x_i - sum_j a_ij x_j + sum_j b_ij y_j - eps y_i
///
/// Outputs must not alias inputs.
void ddgd_mix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
              const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
              double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next, Backend backend);
inline void ddgd_mix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                     const Eigen::MatrixXd& g, double alpha, Eigen::MatrixXd& x_next,
                     Eigen::MatrixXd& y_next) {
  ddgd_mix(a, b, eps, x, y, g, alpha, x_next, y_next, default_backend());
}

namespace detail {
void mix_serial(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out);
void matmul_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out);
void ddgd_mix_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
                     double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next);
void mix_openmp(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out);
void matmul_openmp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out);
void ddgd_mix_openmp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
                     double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next);
}  // namespace detail

}  // namespace ddgd::kernels
