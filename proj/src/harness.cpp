#include "ddgd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <random>

#include "ddgd/errors.hpp"
#include "ddgd/spectral.hpp"
#include "ddgd/weights.hpp"

namespace ddgd {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ddgd: return "ddgd";
    case Algorithm::dgd_doubly: return "dgd_doubly";
    case Algorithm::dgd_row: return "dgd_row";
    case Algorithm::dgd_col: return "dgd_col";
    case Algorithm::gradient_push: return "gradient_push";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "ddgd") return Algorithm::ddgd;
  if (name == "dgd_doubly") return Algorithm::dgd_doubly;
  if (name == "dgd_row") return Algorithm::dgd_row;
  if (name == "dgd_col") return Algorithm::dgd_col;
  if (name == "gradient_push") return Algorithm::gradient_push;
  throw InputError("unknown algorithm `" + name +
                   "`; expected ddgd, dgd_doubly, dgd_row, dgd_col or gradient_push");
}

Digraph make_graph(const GraphSpec& spec) {
  if (!spec.edge_list_path.empty()) {
    std::ifstream in(spec.edge_list_path);
    if (!in) throw InputError("cannot open edge list file `" + spec.edge_list_path + "`");
    return read_edge_list(in);
  }
  if (spec.nodes < 1) throw InputError("graph.nodes must be positive");
  return random_strongly_connected(spec.nodes, spec.extra_edge_prob, spec.seed);
}

WeightPair make_weights(const Digraph& g, const WeightSpec& spec) {
  switch (spec.kind) {
    case WeightKind::uniform: return uniform_weights(g);
    case WeightKind::lazy: return lazy_weights(g, spec.self_weight);
  }
  throw InputError("unknown weight kind");
}

Objective make_objective(const ProblemSpec& spec, int agents) {
  const LsFlavor flavor = spec.squared ? LsFlavor::squared : LsFlavor::unsquared;
  LeastSquaresProblem prob;
  if (!spec.file.empty()) {
    std::ifstream in(spec.file);
    if (!in) throw InputError("cannot open problem file `" + spec.file + "`");
    prob = LeastSquaresProblem::load(in);
    if (prob.agents() != agents) {
      throw InputError("problem file has " + std::to_string(prob.agents()) +
                       " agents but the graph has " + std::to_string(agents));
    }
  } else {
    prob = LeastSquaresProblem::generate(agents, spec.dim, spec.rows_per_agent,
                                         spec.noise_sigma, spec.scale_spread, spec.seed);
  }
  return Objective::least_squares(std::move(prob), flavor);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canon = config_to_json_string(cfg);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string default_run_id(const RunConfig& cfg) {
  return to_string(cfg.algorithm) + "-" + config_hash(cfg).substr(0, 8);
}

long RunTrace::first_k_below(double threshold) const {
  for (const TraceRecord& rec : records) {
    if (rec.residual <= threshold) return rec.k;
  }
  return -1;
}

namespace {

Eigen::MatrixXd initial_states(const RunConfig& cfg, int n, int p) {
  if (cfg.init.kind == InitKind::zero) return Eigen::MatrixXd::Zero(n, p);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x0(n, p);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) x0(i, c) = cfg.init.scale * gauss(rng);
  }
  return x0;
}

double frobenius_to(const Eigen::MatrixXd& x, const Eigen::VectorXd& point) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sum += (x.row(i).transpose() - point).squaredNorm();
  }
  return std::sqrt(sum);
}

double max_row_distance(const Eigen::MatrixXd& x, const Eigen::VectorXd& point) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    worst = std::max(worst, (x.row(i).transpose() - point).norm());
  }
  return worst;
}

struct Engine {
  // Working estimates for metrics, one row per agent.
  virtual const Eigen::MatrixXd& estimates() const = 0;
  // Consensus center: the accumulation point for ddgd, the mean otherwise.
  virtual Eigen::VectorXd center() const = 0;
  virtual double y_norm() const { return 0.0; }
  virtual void step(double alpha) = 0;
  virtual ~Engine() = default;
};

struct DdgdEngine : Engine {
  WeightSystem ws;
  const Objective* obj;
  AgentStates st;
  const Eigen::MatrixXd& estimates() const override { return st.x; }
  Eigen::VectorXd center() const override { return st.accumulation_point(); }
  double y_norm() const override { return st.max_y_norm(); }
  void step(double alpha) override {
#ifndef NDEBUG
    // Debug builds verify the state-sum recursion every step: the column
    // sums of M conserve sum(x + y) up to the gradient drift.
    Eigen::RowVectorXd expected = st.x.colwise().sum() + st.y.colwise().sum();
    for (int i = 1; i <= obj->agents(); ++i) {
      expected -= alpha * obj->agent_subgradient(i, st.x.row(i - 1).transpose()).transpose();
    }
#endif
    st = ddgd_step(st, ws, *obj, alpha);
#ifndef NDEBUG
    const Eigen::RowVectorXd actual = st.x.colwise().sum() + st.y.colwise().sum();
    if ((actual - expected).cwiseAbs().maxCoeff() > 1e-10) {
      throw NumericError("conservation check failed: sum(x+y) drifted off the recursion");
    }
#endif
  }
};

struct DgdEngine : Engine {
  Eigen::MatrixXd w;
  const Objective* obj;
  Eigen::MatrixXd x;
  const Eigen::MatrixXd& estimates() const override { return x; }
  Eigen::VectorXd center() const override { return column_stochastic_average_track(x); }
  void step(double alpha) override { x = dgd_step(x, w, *obj, alpha); }
};

struct PushEngine : Engine {
  Eigen::MatrixXd b;
  const Objective* obj;
  PushSumState st;
  const Eigen::MatrixXd& estimates() const override { return st.x; }
  Eigen::VectorXd center() const override { return column_stochastic_average_track(st.x); }
  void step(double alpha) override { st = gradient_push_step(st, b, *obj, alpha); }
};

}  // namespace

RunTrace run(const RunConfig& cfg) {
  if (cfg.iterations < 0) throw InputError("iterations must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();

  const Digraph g = make_graph(cfg.graph);
  const int n = g.nodes();

  if (cfg.algorithm == Algorithm::dgd_doubly) {
    // The doubly-stochastic regime lives on the symmetrized topology.
    Digraph sym(n);
    for (auto [from, to] : g.edges()) {
      sym.add_edge(from, to);
      sym.add_edge(to, from);
    }
    if (!sym.is_strongly_connected()) {
      throw InputError("symmetrized graph is not connected");
    }
  } else if (!g.is_strongly_connected()) {
    throw InputError("graph is not strongly connected");
  }

  const Objective obj = make_objective(cfg.problem, n);
  const WeightPair wp = make_weights(g, cfg.weights);

  RunTrace trace;
  trace.config_hash = config_hash(cfg);
  trace.x_star = obj.optimum();
  trace.f_star = obj.optimal_value();
  trace.has_f_star = true;

  std::unique_ptr<Engine> engine;
  const Eigen::MatrixXd x0 = initial_states(cfg, n, obj.dim());
  switch (cfg.algorithm) {
    case Algorithm::ddgd: {
      double eps = cfg.epsilon;
      if (cfg.epsilon_auto) {
        eps = choose_certified_epsilon(wp.a, wp.b);
      }
      auto e = std::make_unique<DdgdEngine>();
      e->ws = WeightSystem::assemble(wp.a, wp.b, eps);
      const SpectralVerdict verdict = validate_epsilon(e->ws);
      trace.epsilon_used = eps;
      trace.spectral_margin = verdict.margin;
      trace.certified = verdict.unit_eigenvalue_simple;
      if (!verdict.unit_eigenvalue_simple && !cfg.allow_uncertified) {
        throw NumericError(
            "M(epsilon) is not certified: the unit eigenvalue is not simple or the "
            "spectral margin is nonpositive (|lambda_2| = " +
            std::to_string(verdict.second_magnitude) +
            "); pick epsilon by certification or set allow_uncertified");
      }
      e->obj = &obj;
      e->st = AgentStates::init(x0);
      engine = std::move(e);
      break;
    }
    case Algorithm::dgd_doubly:
    case Algorithm::dgd_row:
    case Algorithm::dgd_col: {
      auto e = std::make_unique<DgdEngine>();
      if (cfg.algorithm == Algorithm::dgd_doubly) {
        e->w = metropolis_weights(g);
      } else if (cfg.algorithm == Algorithm::dgd_row) {
        e->w = wp.a;
      } else {
        e->w = wp.b;
      }
      e->obj = &obj;
      e->x = x0;
      engine = std::move(e);
      break;
    }
    case Algorithm::gradient_push: {
      auto e = std::make_unique<PushEngine>();
      e->b = wp.b;
      e->obj = &obj;
      e->st = PushSumState::init(x0);
      engine = std::move(e);
      break;
    }
  }

  trace.residual_denominator = frobenius_to(x0, trace.x_star);
  const double x0_scale = std::max(1.0, x0.norm());
  trace.converged_at_start = trace.residual_denominator <= 1e-15 * x0_scale;

  trace.records.reserve(cfg.iterations + 1);
  trace.f_m = std::numeric_limits<double>::infinity();
  for (long k = 0; k <= cfg.iterations; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.alpha = alpha(cfg.schedule, k);
    const Eigen::MatrixXd& x = engine->estimates();
    const Eigen::VectorXd center = engine->center();
    rec.residual = trace.converged_at_start
                       ? 0.0
                       : frobenius_to(x, trace.x_star) / trace.residual_denominator;
    rec.consensus_error = max_row_distance(x, center);
    rec.y_norm = engine->y_norm();
    rec.objective_gap = obj.value(center) - trace.f_star;
    if (rec.objective_gap + trace.f_star < trace.f_m) {
      trace.f_m = rec.objective_gap + trace.f_star;
      trace.best_k = k;
    }
    trace.records.push_back(rec);
    if (k < cfg.iterations) engine->step(rec.alpha);
  }

  trace.final_x = engine->estimates();
  trace.final_center = engine->center();
  trace.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

RateReport rate_envelope(const RunTrace& trace, const StepSchedule& sched) {
  if (sched.effective_exponent() != 0.5) {
    throw InputError("rate envelope applies to the inverse-sqrt schedule (q = 0.5)");
  }
  if (!trace.has_f_star) throw InputError("trace carries no optimum oracle value");
  if (trace.records.size() < 9) throw InputError("trace too short for the K-grid");

  const long K = trace.records.back().k;
  RateReport report;
  report.grid = {K / 8, K / 4, K / 2, K};

  // Prefix minima of f(center_k) at the grid points.
  std::vector<double> fm_at;
  {
    double fm = std::numeric_limits<double>::infinity();
    std::size_t gi = 0;
    for (const TraceRecord& rec : trace.records) {
      fm = std::min(fm, rec.objective_gap);
      while (gi < report.grid.size() && rec.k == report.grid[gi]) {
        fm_at.push_back(fm);
        ++gi;
      }
    }
  }
  report.gaps = fm_at;

  // Least squares for gap ~ C1 / S1 + C2 * S2 / S1 with S1 = sum alpha,
  // S2 = sum alpha^2 up to K'.
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  {
    double s1 = 0.0, s2 = 0.0;
    std::size_t gi = 0;
    for (long k = 0; k <= K && gi < report.grid.size(); ++k) {
      const double a = alpha(sched, k);
      s1 += a;
      s2 += a * a;
      if (k == report.grid[gi]) {
        const double u = 1.0 / s1;
        const double v = s2 / s1;
        const double y = report.gaps[gi];
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * y;
        b2 += v * y;
        ++gi;
      }
    }
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) > 1e-300) {
    report.C1_emp = (b1 * a22 - b2 * a12) / det;
    report.C2_emp = (a11 * b2 - a12 * b1) / det;
  }

  report.ratios.reserve(report.grid.size());
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const double kk = static_cast<double>(report.grid[i]);
    report.ratios.push_back(std::max(report.gaps[i], 0.0) / (std::log(kk) / std::sqrt(kk)));
  }
  report.envelope_ok = true;
  for (std::size_t i = 0; i + 1 < report.ratios.size(); ++i) {
    if (report.ratios[i + 1] > 1.2 * report.ratios[i]) report.envelope_ok = false;
  }
  return report;
}

namespace {

std::string graph_key(const GraphSpec& g) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d|%.17g|%llu|%s", g.nodes, g.extra_edge_prob,
                static_cast<unsigned long long>(g.seed), g.edge_list_path.c_str());
  return buf;
}

std::string problem_key(const ProblemSpec& p) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d|%d|%.17g|%.17g|%llu|%d|%s", p.dim, p.rows_per_agent,
                p.noise_sigma, p.scale_spread, static_cast<unsigned long long>(p.seed),
                p.squared ? 1 : 0, p.file.c_str());
  return buf;
}

}  // namespace

Comparison compare(const std::vector<RunConfig>& cfgs) {
  if (cfgs.empty()) throw InputError("compare needs at least one config");
  for (const RunConfig& cfg : cfgs) {
    if (graph_key(cfg.graph) != graph_key(cfgs.front().graph)) {
      throw InputError("compare configs must share the graph spec");
    }
    if (problem_key(cfg.problem) != problem_key(cfgs.front().problem)) {
      throw InputError("compare configs must share the problem spec");
    }
  }

  Comparison cmp;
  bool have_row = false, row_ok = false;
  bool have_ddgd = false, ddgd_decays = false;
  bool have_push = false, push_decays = false;

  for (const RunConfig& cfg : cfgs) {
    CompareEntry entry;
    entry.algorithm = cfg.algorithm;
    entry.trace = run(cfg);
    entry.terminal_residual = entry.trace.records.back().residual;
    const Eigen::VectorXd mean = column_stochastic_average_track(entry.trace.final_x);
    entry.dist_to_true_opt = (mean - entry.trace.x_star).norm();

    const bool decays = entry.terminal_residual < 0.5 || entry.trace.converged_at_start;
    if (cfg.algorithm == Algorithm::ddgd) {
      have_ddgd = true;
      ddgd_decays = decays;
    }
    if (cfg.algorithm == Algorithm::gradient_push) {
      have_push = true;
      push_decays = decays;
    }
    if (cfg.algorithm == Algorithm::dgd_row) {
      have_row = true;
      const Digraph g = make_graph(cfg.graph);
      const WeightPair wp = make_weights(g, cfg.weights);
      const Eigen::VectorXd pi = stationary_left_eigenvector(wp.a);
      const Objective obj = make_objective(cfg.problem, g.nodes());
      const Objective weighted = weighted_objective(obj, pi);
      entry.dist_to_weighted_opt = (mean - weighted.optimum()).norm();
      row_ok = entry.dist_to_weighted_opt <= entry.dist_to_true_opt;
    }
    cmp.entries.push_back(std::move(entry));
  }
  cmp.row_plateaus_at_weighted_opt = have_row && row_ok;
  cmp.ddgd_and_push_decay = have_ddgd && have_push && ddgd_decays && push_decays;
  return cmp;
}

SweepResult density_sweep(const RunConfig& base, const std::vector<double>& probs,
                          double threshold) {
  if (probs.empty()) throw InputError("density sweep needs at least one probability");
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (probs[i + 1] < probs[i]) throw InputError("extra edge probabilities must be ascending");
  }
  if (!base.graph.edge_list_path.empty()) {
    throw InputError("density sweep needs a generated graph, not an edge list");
  }

  SweepResult result;
  result.threshold = threshold;
  for (double p : probs) {
    RunConfig cfg = base;
    cfg.graph.extra_edge_prob = p;
    const Digraph g = make_graph(cfg.graph);
    RunTrace trace = run(cfg);
    SweepRow row;
    row.extra_edge_prob = p;
    row.edges = g.edge_count();
    row.epsilon_used = trace.epsilon_used;
    row.iterations_to_threshold = trace.first_k_below(threshold);
    row.terminal_residual = trace.records.back().residual;
    result.rows.push_back(row);
  }
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
    const long a = result.rows[i].iterations_to_threshold;
    const long b = result.rows[i + 1].iterations_to_threshold;
    const long av = a < 0 ? std::numeric_limits<long>::max() : a;
    const long bv = b < 0 ? std::numeric_limits<long>::max() : b;
    if (bv > av) ++inversions;
  }
  result.trend_ok = inversions <= 1;
  return result;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "k,alpha,residual,consensus_error,y_norm,objective_gap\n";
  char buf[192];
  for (const TraceRecord& rec : trace.records) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.k, rec.alpha,
                  rec.residual, rec.consensus_error, rec.y_norm, rec.objective_gap);
    out << buf;
  }
}

}  // namespace ddgd
