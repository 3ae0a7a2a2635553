#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddgd/algorithms.hpp"
#include "ddgd/digraph.hpp"
#include "ddgd/objective.hpp"
#include "ddgd/schedule.hpp"

namespace ddgd {

enum class Algorithm { ddgd, dgd_doubly, dgd_row, dgd_col, gradient_push };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

/// Either a seeded generator (edge_list_path empty) or an edge-list file.
struct GraphSpec {
  int nodes = 0;
  double extra_edge_prob = 0.0;
  std::uint64_t seed = 0;
  std::string edge_list_path;
};

enum class WeightKind { uniform, lazy };

struct WeightSpec {
  WeightKind kind = WeightKind::uniform;
  double self_weight = 0.7;  // lazy only
};

enum class InitKind { zero, random };

struct InitSpec {
  InitKind kind = InitKind::random;
  double scale = 1.0;
};

/// Least squares problem: generated from the seed unless `file` is set.
struct ProblemSpec {
  int dim = 3;
  int rows_per_agent = 3;
  double noise_sigma = 0.1;
  double scale_spread = 1.0;
  std::uint64_t seed = 1;
  bool squared = false;
  std::string file;
};

struct RunConfig {
  std::string run_id;  // empty: derived from algorithm + config hash
  Algorithm algorithm = Algorithm::ddgd;
  double epsilon = 0.0;
  bool epsilon_auto = false;  // pick eps by spectral certification
  bool allow_uncertified = false;
  long iterations = 1000;
  std::uint64_t seed = 1;  // x^0 seed
  InitSpec init;
  GraphSpec graph;
  WeightSpec weights;
  StepSchedule schedule = StepSchedule::inverse_pow(1.0, 0.75);
  ProblemSpec problem;
};

Digraph make_graph(const GraphSpec& spec);
WeightPair make_weights(const Digraph& g, const WeightSpec& spec);
Objective make_objective(const ProblemSpec& spec, int agents);

/// FNV-1a hash of the canonical JSON form, 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::string default_run_id(const RunConfig& cfg);

struct TraceRecord {
  long k = 0;
  double alpha = 0.0;
  double residual = 0.0;         // ||X_k - 1 x*^T||_F / ||X_0 - 1 x*^T||_F
  double consensus_error = 0.0;  // max_i ||x_i - center||
  double y_norm = 0.0;           // max_i ||y_i|| (ddgd only, else 0)
  double objective_gap = 0.0;    // f(center) - f*
};

struct RunTrace {
  std::vector<TraceRecord> records;  // one per k = 0..K
  double f_m = 0.0;                  // min_k f(center_k)
  long best_k = 0;
  double wall_time_sec = 0.0;
  bool converged_at_start = false;  // X_0 already 1 x*^T; residual fixed at 0
  double residual_denominator = 0.0;

  std::string config_hash;
  double epsilon_used = 0.0;     // ddgd
  double spectral_margin = -1.0; // ddgd, 1 - |lambda_2| of M(eps)
  bool certified = false;

  double f_star = 0.0;
  bool has_f_star = false;
  Eigen::VectorXd x_star;
  Eigen::MatrixXd final_x;     // working estimates at K
  Eigen::VectorXd final_center;

  /// First k with residual <= threshold, or -1 if never.
  long first_k_below(double threshold) const;
};

/// Builds everything from the config and runs K synchronous rounds,
/// recording the metrics at every iterate (K + 1 records). Deterministic
/// for a fixed config on one platform. For ddgd the assembled M(eps) must
/// certify unless allow_uncertified is set.
RunTrace run(const RunConfig& cfg);

struct RateReport {
  double C1_emp = 0.0;
  double C2_emp = 0.0;
  bool envelope_ok = false;
  std::vector<long> grid;       // {K/8, K/4, K/2, K}
  std::vector<double> gaps;     // f_m(K') - f*
  std::vector<double> ratios;   // gap / (ln K' / sqrt(K'))
};

/// Fits the (f_m - f*) <= C1/sum(alpha) + C2 sum(alpha^2)/sum(alpha) form
/// over the K-grid of the finished trace and checks that the ratio to
/// ln K / sqrt(K) is non-increasing within 20% slack. The schedule must be
/// the inverse-sqrt one.
RateReport rate_envelope(const RunTrace& trace, const StepSchedule& sched);

struct CompareEntry {
  Algorithm algorithm = Algorithm::ddgd;
  RunTrace trace;
  double terminal_residual = 0.0;
  double dist_to_true_opt = -1.0;      // ||mean x - x*||
  double dist_to_weighted_opt = -1.0;  // dgd_row only: ||mean x - x_hat*||
};

struct Comparison {
  std::vector<CompareEntry> entries;
  /// dgd_row present and its consensus point sits no farther from the
  /// pi-weighted minimizer than from the true optimum.
  bool row_plateaus_at_weighted_opt = false;
  /// ddgd and gradient_push both end below half their initial residual.
  bool ddgd_and_push_decay = false;
};

/// Runs the same problem/graph under several algorithms. All configs must
/// share graph, problem, schedule, iterations and seed.
Comparison compare(const std::vector<RunConfig>& cfgs);

struct SweepRow {
  double extra_edge_prob = 0.0;
  int edges = 0;
  double epsilon_used = 0.0;
  long iterations_to_threshold = -1;
  double terminal_residual = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double threshold = 0.0;
  bool trend_ok = false;  // non-increasing with at most one inversion
};

/// Re-runs the base config over generated graphs of increasing extra-edge
/// probability (probs must be ascending) and records the iterations needed
/// to reach the residual threshold.
SweepResult density_sweep(const RunConfig& base, const std::vector<double>& probs,
                          double threshold = 1e-2);

/// CSV columns exactly: k, alpha, residual, consensus_error, y_norm,
/// objective_gap. Full precision; byte-stable for identical traces.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

/// Writes <runid>.trace.csv, <runid>.config.json and <runid>.rate.json
/// into out_dir. Returns the run id used.
std::string write_outputs(const RunConfig& cfg, const RunTrace& trace,
                          const std::string& out_dir);

// Config file handling (JSON). Unknown keys are hard errors.
struct ConfigFile {
  RunConfig run;
  std::vector<Algorithm> algorithms;    // compare
  std::vector<double> extra_edge_probs; // sweep
  double sweep_threshold = 1e-2;        // sweep
  long k_max = 10000;                   // spectra
  double tol = 1e-8;                    // spectra
  bool has_algorithm = false;
  bool has_epsilon = false;
};

ConfigFile parse_config_text(const std::string& json_text);
ConfigFile load_config_file(const std::string& path);
std::string config_to_json_string(const RunConfig& cfg);

}  // namespace ddgd
