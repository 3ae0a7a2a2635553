#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ddgd/algorithms.hpp"
#include "ddgd/errors.hpp"
#include "ddgd/schedule.hpp"
#include "ddgd/spectral.hpp"

using ddgd::AgentStates;
using ddgd::Digraph;
using ddgd::LeastSquaresProblem;
using ddgd::LsFlavor;
using ddgd::Objective;
using ddgd::PushSumState;
using ddgd::StepSchedule;
using ddgd::uniform_weights;
using ddgd::WeightPair;
using ddgd::WeightSystem;

namespace {

Digraph cycle(int n) {
  Digraph g(n);
  for (int i = 1; i <= n; ++i) g.add_edge(i, i % n + 1);
  return g;
}

Objective abs_objective() {
  std::vector<ddgd::AgentFunction> fns;
  fns.push_back(ddgd::AgentFunction{
      [](const Eigen::VectorXd& x) { return std::abs(x(0)); },
      [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g(0) = x(0) > 0.0 ? 1.0 : (x(0) < 0.0 ? -1.0 : 0.0);
        return g;
      }});
  return Objective::from_agents(1, std::move(fns), 1.0);
}

Objective constant_objective(int n, int p) {
  std::vector<ddgd::AgentFunction> fns;
  for (int i = 0; i < n; ++i) {
    fns.push_back(ddgd::AgentFunction{
        [](const Eigen::VectorXd&) { return 1.0; },
        [p](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(p)); }});
  }
  return Objective::from_agents(p, std::move(fns), 1e-6);
}

Eigen::MatrixXd random_states(int n, int p, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) x(i, c) = scale * gauss(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("single agent collapse to centralized subgradient descent") {
  Eigen::MatrixXd a(1, 1), b(1, 1);
  a << 1.0;
  b << 1.0;
  const WeightSystem ws = WeightSystem::assemble(a, b, 0.3);
  const Objective obj = abs_objective();

  AgentStates st = AgentStates::init(Eigen::MatrixXd::Constant(1, 1, 2.0));
  st = ddgd_step(st, ws, obj, 1.0);
  CHECK(st.x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.y(0, 0) == 0.0);
  CHECK(st.k == 1);
}

TEST_CASE("constant objective conserves the state sum") {
  const Digraph g = ddgd::random_strongly_connected(5, 0.4, 3);
  const WeightPair w = uniform_weights(g);
  const WeightSystem ws = WeightSystem::assemble(w.a, w.b, 0.2);
  const Objective obj = constant_objective(5, 2);

  AgentStates st = AgentStates::init(random_states(5, 2, 17));
  const Eigen::RowVectorXd sum0 = st.x.colwise().sum() + st.y.colwise().sum();
  for (int k = 0; k < 50; ++k) st = ddgd_step(st, ws, obj, 0.5);
  const Eigen::RowVectorXd sum1 = st.x.colwise().sum() + st.y.colwise().sum();
  CHECK((sum1 - sum0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("state sum follows the gradient recursion exactly") {
  const Digraph g = ddgd::random_strongly_connected(6, 0.3, 2);
  const WeightPair w = uniform_weights(g);
  const WeightSystem ws = WeightSystem::assemble(w.a, w.b, 0.2);
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(6, 3, 3, 0.1, 1.0, 11);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);

  AgentStates st = AgentStates::init(random_states(6, 3, 4));
  const StepSchedule sched = StepSchedule::inverse_pow(1.0, 0.75);
  for (long k = 0; k < 300; ++k) {
    const double alpha_k = ddgd::alpha(sched, k);
    Eigen::RowVectorXd expected = st.x.colwise().sum() + st.y.colwise().sum();
    for (int i = 1; i <= 6; ++i) {
      expected -= alpha_k * obj.agent_subgradient(i, st.x.row(i - 1).transpose()).transpose();
    }
    st = ddgd_step(st, ws, obj, alpha_k);
    const Eigen::RowVectorXd actual = st.x.colwise().sum() + st.y.colwise().sum();
    CHECK((actual - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("blockwise and stacked updates agree to 1e-12") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Digraph g = ddgd::random_strongly_connected(n, 0.35, seed);
    const WeightPair w = uniform_weights(g);
    const WeightSystem ws = WeightSystem::assemble(w.a, w.b, 0.15);
    const LeastSquaresProblem prob =
        LeastSquaresProblem::generate(n, 3, 3, 0.2, 1.0, seed + 100);
    const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);

    for (int trial = 0; trial < 10; ++trial) {
      AgentStates st = AgentStates::init(random_states(n, 3, seed * 31 + trial));
      st.y = random_states(n, 3, seed * 57 + trial);
      const AgentStates block = ddgd_step(st, ws, obj, 0.1);
      const AgentStates stacked = ddgd_step_stacked(st, ws, obj, 0.1);
      CHECK((block.x - stacked.x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((block.y - stacked.y).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("3-cycle consensus: agents meet at the accumulation point and y vanishes") {
  const Digraph g = cycle(3);
  const WeightPair w = uniform_weights(g);
  const double eps = ddgd::choose_certified_epsilon(w.a, w.b);
  const WeightSystem ws = WeightSystem::assemble(w.a, w.b, eps);
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(3, 3, 3, 0.1, 1.0, 11);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);
  const StepSchedule sched = StepSchedule::inverse_pow(0.25, 0.75);

  AgentStates st = AgentStates::init(random_states(3, 3, 4));
  for (long k = 0; k < 2000; ++k) st = ddgd_step(st, ws, obj, ddgd::alpha(sched, k));
  CHECK(st.max_x_distance_to(st.accumulation_point()) < 1e-3);
  CHECK(st.max_y_norm() < 1e-3);
}

TEST_CASE("stacked state bookkeeping") {
  AgentStates st = AgentStates::init(random_states(4, 2, 9));
  st.y = random_states(4, 2, 10);
  const Eigen::MatrixXd z = st.stacked();
  CHECK(z.rows() == 8);
  CHECK(z.topRows(4) == st.x);
  CHECK(z.bottomRows(4) == st.y);
  const AgentStates back = AgentStates::from_stacked(z, 5);
  CHECK(back.x == st.x);
  CHECK(back.y == st.y);

  const Eigen::VectorXd zbar = st.accumulation_point();
  const Eigen::VectorXd expected = (st.x.colwise().sum() + st.y.colwise().sum()).transpose() / 4.0;
  CHECK((zbar - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dgd with identity weights is plain decentralized descent") {
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(3, 2, 2, 0.1, 1.0, 6);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);
  const Eigen::MatrixXd x0 = random_states(3, 2, 8);
  const Eigen::MatrixXd x1 = ddgd::dgd_step(x0, Eigen::MatrixXd::Identity(3, 3), obj, 0.3);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd expected =
        x0.row(i).transpose() - 0.3 * obj.agent_subgradient(i + 1, x0.row(i).transpose());
    CHECK((x1.row(i).transpose() - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("metropolis weights are symmetric and doubly stochastic") {
  const Digraph g = ddgd::random_strongly_connected(7, 0.3, 5);
  const Eigen::MatrixXd w = ddgd::metropolis_weights(g);
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  for (int i = 0; i < 7; ++i) {
    CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-12);
    CHECK(std::abs(w.col(i).sum() - 1.0) < 1e-12);
    CHECK(w(i, i) >= 0.0);
  }
}

TEST_CASE("classic doubly-stochastic DGD drives every agent to the optimum") {
  const Digraph g = ddgd::random_strongly_connected(5, 0.4, 9);
  const Eigen::MatrixXd w = ddgd::metropolis_weights(g);
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(5, 3, 3, 0.1, 1.0, 11);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);
  const StepSchedule sched = StepSchedule::inverse_pow(1.0, 0.75);

  Eigen::MatrixXd x = random_states(5, 3, 4);
  const double den = (x.rowwise() - obj.optimum().transpose()).norm();
  for (long k = 0; k < 20000; ++k) x = ddgd::dgd_step(x, w, obj, ddgd::alpha(sched, k));
  const double residual = (x.rowwise() - obj.optimum().transpose()).norm() / den;
  CHECK(residual < 1e-2);
}

TEST_CASE("average track: consensus rows return the common value") {
  Eigen::MatrixXd x(3, 2);
  x << 1.5, -2.0, 1.5, -2.0, 1.5, -2.0;
  const Eigen::VectorXd avg = ddgd::column_stochastic_average_track(x);
  CHECK(avg(0) == 1.5);
  CHECK(avg(1) == -2.0);
}

TEST_CASE("column-stochastic mixing: the average follows the exact recursion") {
  const Digraph g = ddgd::random_strongly_connected(6, 0.3, 2);
  const Eigen::MatrixXd b = uniform_weights(g).b;
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(6, 3, 3, 0.1, 1.0, 11);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);
  const StepSchedule sched = StepSchedule::inverse_pow(0.5, 0.75);

  // One step from an exact consensus state.
  Eigen::MatrixXd consensus(6, 3);
  for (int i = 0; i < 6; ++i) consensus.row(i) = Eigen::RowVector3d(0.4, -1.0, 2.0);
  const double alpha0 = ddgd::alpha(sched, 0);
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(3);
  for (int i = 1; i <= 6; ++i) {
    grad_sum += obj.agent_subgradient(i, consensus.row(i - 1).transpose());
  }
  const Eigen::MatrixXd stepped = ddgd::dgd_step(consensus, b, obj, alpha0);
  const Eigen::VectorXd predicted =
      ddgd::column_stochastic_average_track(consensus) - alpha0 / 6.0 * grad_sum;
  CHECK((ddgd::column_stochastic_average_track(stepped) - predicted).cwiseAbs().maxCoeff() <
        1e-12);

  // And along a full trajectory from a spread-out start.
  Eigen::MatrixXd x = random_states(6, 3, 4);
  for (long k = 0; k < 500; ++k) {
    const double alpha_k = ddgd::alpha(sched, k);
    Eigen::VectorXd gsum = Eigen::VectorXd::Zero(3);
    for (int i = 1; i <= 6; ++i) gsum += obj.agent_subgradient(i, x.row(i - 1).transpose());
    const Eigen::VectorXd pred = ddgd::column_stochastic_average_track(x) - alpha_k / 6.0 * gsum;
    x = ddgd::dgd_step(x, b, obj, alpha_k);
    CHECK((ddgd::column_stochastic_average_track(x) - pred).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradient push with one agent is centralized descent with v = 1") {
  Eigen::MatrixXd b(1, 1);
  b << 1.0;
  const Objective obj = abs_objective();
  PushSumState st = PushSumState::init(Eigen::MatrixXd::Constant(1, 1, 2.0));
  st = ddgd::gradient_push_step(st, b, obj, 1.0);
  CHECK(st.v(0) == 1.0);
  CHECK(st.x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("push-sum weights: sum conserved, zero-gradient limit is stationary") {
  const Digraph g = ddgd::random_strongly_connected(6, 0.3, 2);
  const Eigen::MatrixXd b = uniform_weights(g).b;
  const Objective obj = constant_objective(6, 2);

  PushSumState st = PushSumState::init(random_states(6, 2, 4));
  for (int k = 0; k < 400; ++k) {
    st = ddgd::gradient_push_step(st, b, obj, 0.1);
    CHECK(std::abs(st.v.sum() - 6.0) < 1e-9);
    CHECK(st.v.minCoeff() > 0.0);
  }
  // v approaches n times the right Perron vector of B.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(b, true);
  Eigen::Index unit = 0;
  for (Eigen::Index i = 1; i < 6; ++i) {
    if (std::abs(solver.eigenvalues()[i] - 1.0) < std::abs(solver.eigenvalues()[unit] - 1.0)) {
      unit = i;
    }
  }
  Eigen::VectorXd perron = solver.eigenvectors().col(unit).real();
  perron *= 6.0 / perron.sum();
  CHECK((st.v - perron).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("push-sum collapse raises a numeric error") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1.0, 0.0, 0.0;  // second row absorbs nothing: v_2 dies
  const Objective obj = constant_objective(2, 1);
  PushSumState st = PushSumState::init(random_states(2, 1, 3));
  CHECK_THROWS_AS(ddgd::gradient_push_step(st, bad, obj, 0.1), ddgd::NumericError);
}

TEST_CASE("dimension mismatches are rejected") {
  const Digraph g = cycle(3);
  const WeightPair w = uniform_weights(g);
  const WeightSystem ws = WeightSystem::assemble(w.a, w.b, 0.1);
  const LeastSquaresProblem prob = LeastSquaresProblem::generate(4, 3, 3, 0.1, 1.0, 11);
  const Objective obj = Objective::least_squares(prob, LsFlavor::unsquared);
  AgentStates st = AgentStates::init(random_states(3, 3, 1));
  CHECK_THROWS_AS(ddgd_step(st, ws, obj, 0.1), ddgd::InputError);
}
