#include "ddgd/kernels.hpp"

#include "ddgd/errors.hpp"

namespace ddgd::kernels {

namespace detail {

void mix_serial(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) mix_row(w, x, out, i);
}

void matmul_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void ddgd_mix_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
                     double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    ddgd_mix_row(a, b, eps, x, y, g, alpha, x_next, y_next, i);
  }
}

}  // namespace detail

void mix(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, Eigen::MatrixXd& out,
         Backend backend) {
  if (w.cols() != x.rows()) throw InputError("mix: dimension mismatch");
  out.resize(w.rows(), x.cols());
  if (backend == Backend::openmp) {
    detail::mix_openmp(w, x, out);
  } else {
    detail::mix_serial(w, x, out);
  }
}

void matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& out,
            Backend backend) {
  if (a.cols() != b.rows()) throw InputError("matmul: dimension mismatch");
  out.resize(a.rows(), b.cols());
  if (backend == Backend::openmp) {
    detail::matmul_openmp(a, b, out);
  } else {
    detail::matmul_serial(a, b, out);
  }
}

void ddgd_mix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps,
              const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& g,
              double alpha, Eigen::MatrixXd& x_next, Eigen::MatrixXd& y_next, Backend backend) {
  const Eigen::Index n = a.rows();
  if (x.rows() != n || y.rows() != n || g.rows() != n || x.cols() != y.cols() ||
      x.cols() != g.cols()) {
    throw InputError("ddgd_mix: dimension mismatch");
  }
  x_next.resize(n, x.cols());
  y_next.resize(n, x.cols());
  if (backend == Backend::openmp) {
    detail::ddgd_mix_openmp(a, b, eps, x, y, g, alpha, x_next, y_next);
  } else {
    detail::ddgd_mix_serial(a, b, eps, x, y, g, alpha, x_next, y_next);
  }
}

}  // namespace ddgd::kernels
