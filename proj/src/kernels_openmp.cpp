#include "ddgd/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddgd::kernels {

Backend default_backend() {
#ifdef _OPENMP
  return Backend::openmp;
#else
  return Backend::serial;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace detail {

// Static schedule: each output row is produced by exactly one thread with
// the same accumulation order as the serial path, so results are bitwise
// identical for any thread count.

void mix_openmp(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
#ifdef _OPENMP
  const Eigen::Index rows = w.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) mix_row(w, x, out, i);
#else
  mix_serial(w, x, out);
#endif
}

void matmul_openmp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out) {
#ifdef _OPENMP
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) matmul_row(a, b, out, i);
#else
  matmul_serial(a, b, out);
#endif
}

void ddgd_mix_openmp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
                     double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next) {
#ifdef _OPENMP
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    ddgd_mix_row(a, b, eps, x, y, g, alpha, x_next, y_next, i);
  }
#else
  ddgd_mix_serial(a, b, eps, x, y, g, alpha, x_next, y_next);
#endif
}

}  // namespace detail

}  // namespace ddgd::kernels
