#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "ddgd/errors.hpp"
#include "ddgd/kernels.hpp"

using ddgd::kernels::Backend;
using ddgd::kernels::ddgd_mix;
using ddgd::kernels::matmul;
using ddgd::kernels::mix;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("serial and openmp backends agree bitwise") {
  std::mt19937_64 rng(11);
  for (int n : {1, 3, 17, 64}) {
    for (int p : {1, 2, 9}) {
      const Eigen::MatrixXd w = random_matrix(n, n, rng);
      const Eigen::MatrixXd x = random_matrix(n, p, rng);
      Eigen::MatrixXd serial, openmp;
      mix(w, x, serial, Backend::serial);
      mix(w, x, openmp, Backend::openmp);
      CHECK(serial == openmp);

      const Eigen::MatrixXd y = random_matrix(n, p, rng);
      const Eigen::MatrixXd g = random_matrix(n, p, rng);
      Eigen::MatrixXd xs, ys, xo, yo;
      ddgd_mix(w, w.transpose().eval(), 0.3, x, y, g, 0.05, xs, ys, Backend::serial);
      ddgd_mix(w, w.transpose().eval(), 0.3, x, y, g, 0.05, xo, yo, Backend::openmp);
      CHECK(xs == xo);
      CHECK(ys == yo);
    }
    const Eigen::MatrixXd a = random_matrix(n, n, rng);
    const Eigen::MatrixXd b = random_matrix(n, n, rng);
    Eigen::MatrixXd serial, openmp;
    matmul(a, b, serial, Backend::serial);
    matmul(a, b, openmp, Backend::openmp);
    CHECK(serial == openmp);
  }
}

TEST_CASE("kernels match the Eigen products") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd w = random_matrix(23, 23, rng);
  const Eigen::MatrixXd x = random_matrix(23, 4, rng);
  Eigen::MatrixXd out;
  mix(w, x, out);
  CHECK((out - w * x).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd prod;
  matmul(w, w, prod);
  CHECK((prod - w * w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ddgd_mix equals the assembled block computation") {
  std::mt19937_64 rng(9);
  const int n = 12, p = 3;
  Eigen::MatrixXd a = random_matrix(n, n, rng).cwiseAbs();
  for (int i = 0; i < n; ++i) a.row(i) /= a.row(i).sum();
  Eigen::MatrixXd b = random_matrix(n, n, rng).cwiseAbs();
  for (int j = 0; j < n; ++j) b.col(j) /= b.col(j).sum();
  const Eigen::MatrixXd x = random_matrix(n, p, rng);
  const Eigen::MatrixXd y = random_matrix(n, p, rng);
  const Eigen::MatrixXd g = random_matrix(n, p, rng);
  const double eps = 0.4, alpha = 0.07;

  Eigen::MatrixXd xn, yn;
  ddgd_mix(a, b, eps, x, y, g, alpha, xn, yn);
  const Eigen::MatrixXd x_ref = a * x + eps * y - alpha * g;
  const Eigen::MatrixXd y_ref = x - a * x + b * y - eps * y;
  CHECK((xn - x_ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((yn - y_ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dimension mismatches are input errors") {
  Eigen::MatrixXd w(3, 3), x(4, 2), out;
  w.setIdentity();
  x.setZero();
  CHECK_THROWS_AS(mix(w, x, out), ddgd::InputError);
  CHECK_THROWS_AS(matmul(w, x, out), ddgd::InputError);
}
