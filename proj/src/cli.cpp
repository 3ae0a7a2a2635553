#include "ddgd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "ddgd/errors.hpp"
#include "ddgd/harness.hpp"
#include "ddgd/spectral.hpp"
#include "ddgd/weights.hpp"

namespace ddgd::cli {

namespace {

constexpr const char* kConfigSchema = R"(Config file schema (JSON, unknown keys are errors):
  run_id        optional string; default <algorithm>-<hash8>
  algorithm     ddgd | dgd_doubly | dgd_row | dgd_col | gradient_push
  epsilon       positive number or "auto" (ddgd/spectra/certify-eps)
  allow_uncertified  bool, default false
  iterations    nonnegative integer
  seed          integer, seeds the initial states
  init          {"kind": "random"|"zero", "scale": s}
  graph         {"nodes": n, "extra_edge_prob": p, "seed": s}
                or {"edge_list": "path"}
  weights       {"kind": "uniform"} or {"kind": "lazy", "self_weight": w}
  schedule      {"kind": "inverse_sqrt"|"inverse", "scale": a}
                or {"kind": "inverse_pow", "scale": a, "exponent": q}
  problem       {"kind": "least_squares", "dim": p, "rows_per_agent": m,
                 "noise_sigma": s, "scale_spread": r, "seed": s,
                 "squared": bool} or {..., "file": "path"}
  algorithms    list of algorithm names (compare only)
  extra_edge_probs  ascending list of probabilities (sweep only)
  sweep_threshold   residual threshold, default 1e-2 (sweep only)
  k_max, tol    power-iteration horizon and target (spectra only)
)";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  bool verbose = false;
  bool dump_matrices = false;
  std::string dump_problem_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_dump = false) {
  cmd->add_option("--config", opts.config_path, "JSON config file")->required();
  cmd->add_option("--output-dir", opts.out_dir, "directory for output artifacts");
  cmd->add_option("--seed", opts.seed_override, "override the config seed");
  cmd->add_flag("-v,--verbose", opts.verbose, "chattier summaries");
  if (with_dump) {
    cmd->add_flag("--dump-matrices", opts.dump_matrices, "write A, B and M as CSV");
  }
}

ConfigFile load_config(const CommonOpts& opts) {
  ConfigFile file = load_config_file(opts.config_path);
  if (opts.seed_override) file.run.seed = *opts.seed_override;
  return file;
}

void print_run_summary(std::ostream& out, const std::string& run_id, const RunConfig& cfg,
                       const RunTrace& trace, bool verbose) {
  const TraceRecord& last = trace.records.back();
  out << "run " << run_id << ": algorithm=" << to_string(cfg.algorithm)
      << " agents and iterations from config, K=" << last.k << "\n";
  out << "  terminal residual   " << last.residual << "\n";
  out << "  consensus error     " << last.consensus_error << "\n";
  if (cfg.algorithm == Algorithm::ddgd) {
    out << "  max ||y_i||         " << last.y_norm << "\n";
    out << "  epsilon used        " << trace.epsilon_used
        << (trace.certified ? " (certified, margin " : " (NOT certified, margin ")
        << trace.spectral_margin << ")\n";
  }
  out << "  f_m = min_k f       " << trace.f_m << " at k=" << trace.best_k << "\n";
  out << "  f*                  " << trace.f_star << "\n";
  if (verbose) {
    out << "  residual denominator " << trace.residual_denominator << "\n";
    out << "  config hash          " << trace.config_hash << "\n";
    out << "  wall time            " << trace.wall_time_sec << " s\n";
  }
}

struct WeightContext {
  Digraph graph;
  WeightPair weights;
  double eps = 0.0;
};

WeightContext build_weight_context(const ConfigFile& file) {
  WeightContext ctx{make_graph(file.run.graph), {}, 0.0};
  if (!ctx.graph.is_strongly_connected()) {
    throw InputError("graph is not strongly connected");
  }
  ctx.weights = make_weights(ctx.graph, file.run.weights);
  if (!file.has_epsilon) throw InputError("config needs `epsilon`");
  ctx.eps = file.run.epsilon_auto ? choose_certified_epsilon(ctx.weights.a, ctx.weights.b)
                                  : file.run.epsilon;
  return ctx;
}

void maybe_dump_matrices(const CommonOpts& opts, const WeightContext& ctx,
                         const Eigen::MatrixXd& m) {
  if (!opts.dump_matrices) return;
  std::filesystem::create_directories(opts.out_dir);
  const auto base = std::filesystem::path(opts.out_dir);
  for (const auto& [name, matrix] :
       {std::pair<const char*, const Eigen::MatrixXd&>{"A", ctx.weights.a},
        {"B", ctx.weights.b},
        {"M", m}}) {
    std::ofstream out(base / (std::string(name) + ".csv"));
    write_matrix_csv(out, matrix);
  }
}

void print_upsilon(std::ostream& out, const WeightContext& ctx) {
  if (ctx.graph.nodes() < 2) return;
  const double upsilon = epsilon_bound(assemble_m(ctx.weights.a, ctx.weights.b, 0.0));
  out << "  Upsilon bound       " << upsilon << " (conservative; any eps in (0, Upsilon) certifies)\n";
}

int cmd_run(const CommonOpts& opts, std::ostream& out) {
  ConfigFile file = load_config(opts);
  if (!file.has_algorithm) throw InputError("config needs `algorithm`");
  if (file.run.algorithm == Algorithm::ddgd && !file.has_epsilon) {
    throw InputError("ddgd runs need `epsilon` (a positive number or \"auto\")");
  }
  if (file.run.algorithm == Algorithm::ddgd && !file.run.epsilon_auto &&
      file.run.epsilon <= 0.0) {
    throw InputError("epsilon must be positive for ddgd runs");
  }
  const RunTrace trace = run(file.run);
  const std::string run_id = write_outputs(file.run, trace, opts.out_dir);
  print_run_summary(out, run_id, file.run, trace, opts.verbose);
  if (!opts.dump_problem_path.empty()) {
    const Digraph g = make_graph(file.run.graph);
    const Objective obj = make_objective(file.run.problem, g.nodes());
    std::ofstream prob_out(opts.dump_problem_path);
    if (!prob_out) throw InputError("cannot write problem to `" + opts.dump_problem_path + "`");
    obj.ls_problem()->save(prob_out);
    out << "wrote problem instance to " << opts.dump_problem_path << "\n";
  }
  out << "wrote " << run_id << ".{trace.csv,config.json,rate.json} in " << opts.out_dir << "\n";
  return 0;
}

int cmd_compare(const CommonOpts& opts, std::ostream& out) {
  ConfigFile file = load_config(opts);
  if (file.algorithms.empty()) {
    throw InputError("compare needs an `algorithms` list in the config");
  }
  std::vector<RunConfig> cfgs;
  for (Algorithm algo : file.algorithms) {
    RunConfig cfg = file.run;
    cfg.algorithm = algo;
    if (!cfg.run_id.empty()) cfg.run_id += "-" + to_string(algo);
    cfgs.push_back(std::move(cfg));
  }
  const Comparison cmp = compare(cfgs);

  for (std::size_t i = 0; i < cmp.entries.size(); ++i) {
    write_outputs(cfgs[i], cmp.entries[i].trace, opts.out_dir);
  }
  // Aligned residual table.
  const std::string table_name =
      (file.run.run_id.empty() ? std::string("compare") : file.run.run_id) + ".compare.csv";
  {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream csv(std::filesystem::path(opts.out_dir) / table_name, std::ios::binary);
    csv << "k";
    for (const auto& entry : cmp.entries) csv << ",residual_" << to_string(entry.algorithm);
    csv << "\n";
    const auto& first = cmp.entries.front().trace.records;
    char buf[32];
    for (std::size_t r = 0; r < first.size(); ++r) {
      csv << first[r].k;
      for (const auto& entry : cmp.entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", entry.trace.records[r].residual);
        csv << ',' << buf;
      }
      csv << "\n";
    }
  }

  out << "compare over " << cmp.entries.size() << " algorithms:\n";
  for (const auto& entry : cmp.entries) {
    out << "  " << std::left << std::setw(14) << to_string(entry.algorithm)
        << " terminal residual " << entry.terminal_residual;
    if (entry.dist_to_weighted_opt >= 0.0) {
      out << "  dist to pi-weighted optimum " << entry.dist_to_weighted_opt
          << "  dist to true optimum " << entry.dist_to_true_opt;
    }
    out << "\n";
  }
  out << "  row-stochastic DGD plateaus at the pi-weighted optimum: "
      << (cmp.row_plateaus_at_weighted_opt ? "yes" : "n/a or no") << "\n";
  out << "  ddgd and gradient-push both decay: " << (cmp.ddgd_and_push_decay ? "yes" : "n/a or no")
      << "\n";
  out << "wrote " << table_name << " in " << opts.out_dir << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts, std::ostream& out) {
  ConfigFile file = load_config(opts);
  if (!file.has_algorithm) throw InputError("config needs `algorithm`");
  if (file.extra_edge_probs.empty()) {
    throw InputError("sweep needs an `extra_edge_probs` list in the config");
  }
  const SweepResult sweep = density_sweep(file.run, file.extra_edge_probs, file.sweep_threshold);

  const std::string name =
      (file.run.run_id.empty() ? std::string("sweep") : file.run.run_id) + ".sweep.csv";
  {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream csv(std::filesystem::path(opts.out_dir) / name, std::ios::binary);
    csv << "extra_edge_prob,edges,epsilon_used,iterations_to_threshold,terminal_residual\n";
    char buf[96];
    for (const SweepRow& row : sweep.rows) {
      std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%ld,%.17g\n", row.extra_edge_prob,
                    row.edges, row.epsilon_used, row.iterations_to_threshold,
                    row.terminal_residual);
      csv << buf;
    }
  }

  out << "density sweep (threshold " << sweep.threshold << "):\n";
  for (const SweepRow& row : sweep.rows) {
    out << "  p=" << row.extra_edge_prob << "  edges=" << row.edges
        << "  eps=" << row.epsilon_used << "  iterations-to-threshold=";
    if (row.iterations_to_threshold < 0) {
      out << "never";
    } else {
      out << row.iterations_to_threshold;
    }
    out << "  terminal residual=" << row.terminal_residual << "\n";
  }
  out << "  non-increasing trend (<=1 inversion): " << (sweep.trend_ok ? "yes" : "NO") << "\n";
  out << "wrote " << name << " in " << opts.out_dir << "\n";
  return 0;
}

int cmd_spectra(const CommonOpts& opts, std::ostream& out) {
  ConfigFile file = load_config(opts);
  const WeightContext ctx = build_weight_context(file);
  const Eigen::MatrixXd m = assemble_m(ctx.weights.a, ctx.weights.b, ctx.eps);
  maybe_dump_matrices(opts, ctx, m);

  const SpectralVerdict verdict = certify(m);
  out << "spectra for n=" << ctx.graph.nodes() << ", eps=" << ctx.eps << ":\n";
  out << "  unit eigenvalue simple: " << (verdict.unit_eigenvalue_simple ? "yes" : "NO") << "\n";
  out << "  |lambda_2|          " << verdict.second_magnitude << "\n";
  out << "  spectral margin     " << verdict.margin << "\n";
  print_upsilon(out, ctx);
  if (!verdict.unit_eigenvalue_simple) {
    throw NumericError("M(eps) is not certified; no geometric decay to measure");
  }

  std::vector<double> decay;
  const RateFit fit = power_convergence(m, static_cast<int>(file.k_max), file.tol, &decay);
  out << "  gamma_hat           " << fit.gamma_hat << "\n";
  out << "  Gamma_hat           " << fit.Gamma_hat << "\n";
  out << "  fit max residual    " << fit.max_residual << "\n";
  out << "  first k with d_k <= " << file.tol << ": ";
  if (fit.first_k_at_tol < 0) {
    out << "not reached within " << file.k_max << "\n";
  } else {
    out << fit.first_k_at_tol << "\n";
  }

  const std::string name =
      (file.run.run_id.empty() ? std::string("spectra") : file.run.run_id) + ".decay.csv";
  std::filesystem::create_directories(opts.out_dir);
  std::ofstream csv(std::filesystem::path(opts.out_dir) / name, std::ios::binary);
  write_decay_csv(csv, decay);
  out << "wrote " << name << " in " << opts.out_dir << "\n";
  return 0;
}

int cmd_certify(const CommonOpts& opts, std::ostream& out) {
  ConfigFile file = load_config(opts);
  const WeightContext ctx = build_weight_context(file);
  const Eigen::MatrixXd m = assemble_m(ctx.weights.a, ctx.weights.b, ctx.eps);
  maybe_dump_matrices(opts, ctx, m);

  const SpectralVerdict verdict = certify(m);
  out << "certify eps=" << ctx.eps << " on n=" << ctx.graph.nodes() << ":\n";
  out << "  unit eigenvalue simple: " << (verdict.unit_eigenvalue_simple ? "yes" : "NO") << "\n";
  out << "  |lambda_2|          " << verdict.second_magnitude << "\n";
  out << "  spectral margin     " << verdict.margin << "\n";
  print_upsilon(out, ctx);
  if (!verdict.unit_eigenvalue_simple) {
    throw NumericError("M(eps) does not have a simple unit eigenvalue");
  }
  out << "certified\n";
  return 0;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus-based first-order optimization over directed graphs"};
  app.footer(kConfigSchema);
  app.require_subcommand(1);

  CommonOpts run_opts, compare_opts, sweep_opts, spectra_opts, certify_opts;
  CLI::App* c_run = app.add_subcommand("run", "run one experiment from a config");
  add_common(c_run, run_opts);
  c_run->add_option("--dump-problem", run_opts.dump_problem_path,
                    "also write the problem instance in its replay format");
  CLI::App* c_compare =
      app.add_subcommand("compare", "run several algorithms on one problem/graph");
  add_common(c_compare, compare_opts);
  CLI::App* c_sweep = app.add_subcommand("sweep", "sweep extra-edge density");
  add_common(c_sweep, sweep_opts);
  CLI::App* c_spectra =
      app.add_subcommand("spectra", "certify M(eps) and measure its geometric decay");
  add_common(c_spectra, spectra_opts, /*with_dump=*/true);
  CLI::App* c_certify = app.add_subcommand("certify-eps", "certify M(eps) only");
  add_common(c_certify, certify_opts, /*with_dump=*/true);

  // CLI11 wants argv-style reversed arguments.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_run->parsed()) return cmd_run(run_opts, out);
    if (c_compare->parsed()) return cmd_compare(compare_opts, out);
    if (c_sweep->parsed()) return cmd_sweep(sweep_opts, out);
    if (c_spectra->parsed()) return cmd_spectra(spectra_opts, out);
    if (c_certify->parsed()) return cmd_certify(certify_opts, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ddgd::cli
