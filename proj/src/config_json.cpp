#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ddgd/errors.hpp"
#include "ddgd/harness.hpp"

namespace ddgd {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, const std::string& where,
                        const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw InputError("unknown config key `" + (where.empty() ? it.key() : where + "." + it.key()) +
                       "`");
    }
  }
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.at(key).is_number()) {
    throw InputError("config key `" + where + key + "` must be a number");
  }
  return obj.at(key).get<double>();
}

GraphSpec parse_graph(const json& obj) {
  require_known_keys(obj, "graph", {"nodes", "extra_edge_prob", "seed", "edge_list"});
  GraphSpec spec;
  if (obj.contains("edge_list")) {
    spec.edge_list_path = obj.at("edge_list").get<std::string>();
    if (obj.contains("nodes") || obj.contains("extra_edge_prob") || obj.contains("seed")) {
      throw InputError("graph: give either `edge_list` or generator parameters, not both");
    }
    return spec;
  }
  if (!obj.contains("nodes")) throw InputError("graph.nodes is required");
  spec.nodes = obj.at("nodes").get<int>();
  if (spec.nodes < 1) throw InputError("graph.nodes must be positive");
  if (obj.contains("extra_edge_prob")) {
    spec.extra_edge_prob = number_at(obj, "extra_edge_prob", "graph.");
    if (spec.extra_edge_prob < 0.0 || spec.extra_edge_prob > 1.0) {
      throw InputError("graph.extra_edge_prob must lie in [0, 1]");
    }
  }
  if (obj.contains("seed")) spec.seed = obj.at("seed").get<std::uint64_t>();
  return spec;
}

WeightSpec parse_weights(const json& obj) {
  require_known_keys(obj, "weights", {"kind", "self_weight"});
  WeightSpec spec;
  const std::string kind = obj.value("kind", "uniform");
  if (kind == "uniform") {
    spec.kind = WeightKind::uniform;
    if (obj.contains("self_weight")) {
      throw InputError("weights.self_weight only applies to the lazy kind");
    }
  } else if (kind == "lazy") {
    spec.kind = WeightKind::lazy;
    if (obj.contains("self_weight")) {
      spec.self_weight = number_at(obj, "self_weight", "weights.");
      if (spec.self_weight <= 0.0 || spec.self_weight >= 1.0) {
        throw InputError("weights.self_weight must lie in (0, 1)");
      }
    }
  } else {
    throw InputError("weights.kind must be `uniform` or `lazy`");
  }
  return spec;
}

InitSpec parse_init(const json& obj) {
  require_known_keys(obj, "init", {"kind", "scale"});
  InitSpec spec;
  const std::string kind = obj.value("kind", "random");
  if (kind == "zero") {
    spec.kind = InitKind::zero;
  } else if (kind == "random") {
    spec.kind = InitKind::random;
  } else {
    throw InputError("init.kind must be `zero` or `random`");
  }
  if (obj.contains("scale")) {
    spec.scale = number_at(obj, "scale", "init.");
    if (spec.scale <= 0.0) throw InputError("init.scale must be positive");
  }
  return spec;
}

StepSchedule parse_schedule(const json& obj) {
  require_known_keys(obj, "schedule", {"kind", "scale", "exponent"});
  const std::string kind = obj.value("kind", "inverse_sqrt");
  const double scale = obj.contains("scale") ? number_at(obj, "scale", "schedule.") : 1.0;
  if (scale <= 0.0) throw InputError("schedule.scale must be positive");
  if (kind == "inverse_sqrt") {
    if (obj.contains("exponent")) {
      throw InputError("schedule.exponent only applies to inverse_pow");
    }
    return StepSchedule::inverse_sqrt(scale);
  }
  if (kind == "inverse") {
    if (obj.contains("exponent")) {
      throw InputError("schedule.exponent only applies to inverse_pow");
    }
    return StepSchedule::inverse(scale);
  }
  if (kind == "inverse_pow") {
    if (!obj.contains("exponent")) throw InputError("schedule.exponent is required");
    const double exponent = number_at(obj, "exponent", "schedule.");
    if (exponent <= 0.0) throw InputError("schedule.exponent must be positive");
    return StepSchedule::inverse_pow(scale, exponent);
  }
  throw InputError("schedule.kind must be inverse_sqrt, inverse or inverse_pow");
}

ProblemSpec parse_problem(const json& obj) {
  require_known_keys(obj, "problem",
                     {"kind", "dim", "rows_per_agent", "noise_sigma", "scale_spread", "seed",
                      "squared", "file"});
  const std::string kind = obj.value("kind", "least_squares");
  if (kind != "least_squares") throw InputError("problem.kind must be `least_squares`");
  ProblemSpec spec;
  if (obj.contains("file")) spec.file = obj.at("file").get<std::string>();
  if (obj.contains("dim")) spec.dim = obj.at("dim").get<int>();
  if (obj.contains("rows_per_agent")) spec.rows_per_agent = obj.at("rows_per_agent").get<int>();
  if (spec.dim < 1 || spec.rows_per_agent < 1) {
    throw InputError("problem.dim and problem.rows_per_agent must be positive");
  }
  if (obj.contains("noise_sigma")) {
    spec.noise_sigma = number_at(obj, "noise_sigma", "problem.");
    if (spec.noise_sigma < 0.0) throw InputError("problem.noise_sigma must be nonnegative");
  }
  if (obj.contains("scale_spread")) {
    spec.scale_spread = number_at(obj, "scale_spread", "problem.");
    if (spec.scale_spread <= 0.0) throw InputError("problem.scale_spread must be positive");
  }
  if (obj.contains("seed")) spec.seed = obj.at("seed").get<std::uint64_t>();
  if (obj.contains("squared")) spec.squared = obj.at("squared").get<bool>();
  return spec;
}

}  // namespace

ConfigFile parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw InputError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) throw InputError("config must be a JSON object");
  require_known_keys(root, "",
                     {"run_id", "algorithm", "algorithms", "epsilon", "allow_uncertified",
                      "iterations", "seed", "init", "graph", "weights", "schedule", "problem",
                      "extra_edge_probs", "sweep_threshold", "k_max", "tol", "config_hash"});

  ConfigFile file;
  RunConfig& cfg = file.run;
  if (root.contains("run_id")) cfg.run_id = root.at("run_id").get<std::string>();
  if (root.contains("algorithm")) {
    cfg.algorithm = algorithm_from_string(root.at("algorithm").get<std::string>());
    file.has_algorithm = true;
  }
  if (root.contains("epsilon")) {
    file.has_epsilon = true;
    if (root.at("epsilon").is_string()) {
      if (root.at("epsilon").get<std::string>() != "auto") {
        throw InputError("epsilon must be a number or \"auto\"");
      }
      cfg.epsilon_auto = true;
    } else {
      cfg.epsilon = number_at(root, "epsilon", "");
      if (cfg.epsilon < 0.0) throw InputError("epsilon must be nonnegative");
    }
  }
  if (root.contains("allow_uncertified")) {
    cfg.allow_uncertified = root.at("allow_uncertified").get<bool>();
  }
  if (root.contains("iterations")) {
    cfg.iterations = root.at("iterations").get<long>();
    if (cfg.iterations < 0) throw InputError("iterations must be nonnegative");
  }
  if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
  if (root.contains("init")) cfg.init = parse_init(root.at("init"));
  if (!root.contains("graph")) throw InputError("config needs a `graph` object");
  cfg.graph = parse_graph(root.at("graph"));
  if (root.contains("weights")) cfg.weights = parse_weights(root.at("weights"));
  if (root.contains("schedule")) cfg.schedule = parse_schedule(root.at("schedule"));
  if (root.contains("problem")) cfg.problem = parse_problem(root.at("problem"));

  if (root.contains("algorithms")) {
    for (const auto& name : root.at("algorithms")) {
      file.algorithms.push_back(algorithm_from_string(name.get<std::string>()));
    }
    if (file.algorithms.empty()) throw InputError("algorithms list is empty");
  }
  if (root.contains("extra_edge_probs")) {
    for (const auto& p : root.at("extra_edge_probs")) {
      file.extra_edge_probs.push_back(p.get<double>());
    }
    if (file.extra_edge_probs.empty()) throw InputError("extra_edge_probs list is empty");
  }
  if (root.contains("sweep_threshold")) {
    file.sweep_threshold = number_at(root, "sweep_threshold", "");
    if (file.sweep_threshold <= 0.0) throw InputError("sweep_threshold must be positive");
  }
  if (root.contains("k_max")) {
    file.k_max = root.at("k_max").get<long>();
    if (file.k_max < 1) throw InputError("k_max must be positive");
  }
  if (root.contains("tol")) {
    file.tol = number_at(root, "tol", "");
    if (file.tol <= 0.0) throw InputError("tol must be positive");
  }
  return file;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file `" + path + "`");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

json config_to_json(const RunConfig& cfg) {
  json root;
  if (!cfg.run_id.empty()) root["run_id"] = cfg.run_id;
  root["algorithm"] = to_string(cfg.algorithm);
  if (cfg.algorithm == Algorithm::ddgd) {
    if (cfg.epsilon_auto) {
      root["epsilon"] = "auto";
    } else {
      root["epsilon"] = cfg.epsilon;
    }
    if (cfg.allow_uncertified) root["allow_uncertified"] = true;
  }
  root["iterations"] = cfg.iterations;
  root["seed"] = cfg.seed;
  root["init"] = {{"kind", cfg.init.kind == InitKind::zero ? "zero" : "random"},
                  {"scale", cfg.init.scale}};
  if (!cfg.graph.edge_list_path.empty()) {
    root["graph"] = {{"edge_list", cfg.graph.edge_list_path}};
  } else {
    root["graph"] = {{"nodes", cfg.graph.nodes},
                     {"extra_edge_prob", cfg.graph.extra_edge_prob},
                     {"seed", cfg.graph.seed}};
  }
  if (cfg.weights.kind == WeightKind::lazy) {
    root["weights"] = {{"kind", "lazy"}, {"self_weight", cfg.weights.self_weight}};
  } else {
    root["weights"] = {{"kind", "uniform"}};
  }
  json sched{{"kind", to_string(cfg.schedule.kind)}, {"scale", cfg.schedule.scale}};
  if (cfg.schedule.kind == ScheduleKind::inverse_pow) {
    sched["exponent"] = cfg.schedule.exponent;
  }
  root["schedule"] = sched;
  json prob{{"kind", "least_squares"}};
  if (!cfg.problem.file.empty()) {
    prob["file"] = cfg.problem.file;
    prob["squared"] = cfg.problem.squared;
  } else {
    prob["dim"] = cfg.problem.dim;
    prob["rows_per_agent"] = cfg.problem.rows_per_agent;
    prob["noise_sigma"] = cfg.problem.noise_sigma;
    prob["scale_spread"] = cfg.problem.scale_spread;
    prob["seed"] = cfg.problem.seed;
    prob["squared"] = cfg.problem.squared;
  }
  root["problem"] = prob;
  return root;
}

}  // namespace

std::string config_to_json_string(const RunConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

std::string write_outputs(const RunConfig& cfg, const RunTrace& trace,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  const std::string run_id = cfg.run_id.empty() ? default_run_id(cfg) : cfg.run_id;
  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / run_id;

  {
    std::ofstream out(base.string() + ".trace.csv", std::ios::binary);
    if (!out) throw InputError("cannot write trace to " + base.string() + ".trace.csv");
    write_trace_csv(out, trace);
  }
  {
    json echo = config_to_json(cfg);
    echo["config_hash"] = trace.config_hash;
    std::ofstream out(base.string() + ".config.json", std::ios::binary);
    if (!out) throw InputError("cannot write config echo");
    out << echo.dump(2) << "\n";
  }
  {
    json rate;
    rate["config_hash"] = trace.config_hash;
    rate["iterations"] = static_cast<long>(trace.records.size()) - 1;
    rate["f_m"] = trace.f_m;
    rate["f_star"] = trace.f_star;
    rate["best_k"] = trace.best_k;
    rate["wall_time_sec"] = trace.wall_time_sec;
    rate["terminal_residual"] = trace.records.back().residual;
    rate["converged_at_start"] = trace.converged_at_start;
    if (cfg.algorithm == Algorithm::ddgd) {
      rate["epsilon_used"] = trace.epsilon_used;
      rate["spectral_margin"] = trace.spectral_margin;
      rate["certified"] = trace.certified;
    }
    if (cfg.schedule.effective_exponent() == 0.5 && trace.records.size() >= 9) {
      const RateReport report = rate_envelope(trace, cfg.schedule);
      rate["C1_emp"] = report.C1_emp;
      rate["C2_emp"] = report.C2_emp;
      rate["envelope_ok"] = report.envelope_ok;
      rate["grid"] = report.grid;
      rate["gaps"] = report.gaps;
      rate["ratios"] = report.ratios;
    }
    std::ofstream out(base.string() + ".rate.json", std::ios::binary);
    if (!out) throw InputError("cannot write rate report");
    out << rate.dump(2) << "\n";
  }
  return run_id;
}

}  // namespace ddgd
