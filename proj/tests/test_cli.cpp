#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddgd/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = ddgd::cli::run_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ddgd_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto path = dir / name;
  std::ofstream out(path);
  out << text;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kRunConfig = R"({
  "run_id": "smoke",
  "algorithm": "ddgd",
  "epsilon": "auto",
  "iterations": 120,
  "seed": 4,
  "graph": {"nodes": 5, "extra_edge_prob": 0.4, "seed": 8},
  "schedule": {"kind": "inverse_pow", "scale": 1.0, "exponent": 0.75},
  "problem": {"kind": "least_squares", "dim": 3, "rows_per_agent": 3,
              "noise_sigma": 0.1, "seed": 11}
})";

}  // namespace

TEST_CASE("help exits zero") {
  const CliResult r = invoke({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("certify-eps") != std::string::npos);
  CHECK(r.out.find("schema") != std::string::npos);
}

TEST_CASE("run: valid config produces exit 0 and three artifacts") {
  const auto dir = fresh_dir("run");
  const auto cfg = write_config(dir, "c.json", kRunConfig);
  const CliResult r =
      invoke({"run", "--config", cfg.string(), "--output-dir", (dir / "out").string()});
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "smoke.trace.csv"));
  CHECK(fs::exists(dir / "out" / "smoke.config.json"));
  CHECK(fs::exists(dir / "out" / "smoke.rate.json"));
  CHECK(r.out.find("terminal residual") != std::string::npos);
}

TEST_CASE("run: the echoed config reruns to an identical trace") {
  const auto dir = fresh_dir("echo");
  const auto cfg = write_config(dir, "c.json", kRunConfig);
  const auto out1 = dir / "out1";
  const auto out2 = dir / "out2";
  CHECK(invoke({"run", "--config", cfg.string(), "--output-dir", out1.string()}).code == 0);
  const auto echoed = out1 / "smoke.config.json";
  CHECK(invoke({"run", "--config", echoed.string(), "--output-dir", out2.string()}).code == 0);
  CHECK(slurp(out1 / "smoke.trace.csv") == slurp(out2 / "smoke.trace.csv"));
}

TEST_CASE("run: nonpositive epsilon is a validation error naming the key") {
  const auto dir = fresh_dir("badeps");
  const auto cfg = write_config(dir, "c.json", R"({
    "algorithm": "ddgd", "epsilon": 0.0, "iterations": 5,
    "graph": {"nodes": 3, "extra_edge_prob": 0.0, "seed": 1}
  })");
  const CliResult r = invoke({"run", "--config", cfg.string(), "--output-dir", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("epsilon") != std::string::npos);

  const auto neg = write_config(dir, "neg.json", R"({
    "algorithm": "ddgd", "epsilon": -0.7, "iterations": 5,
    "graph": {"nodes": 3, "extra_edge_prob": 0.0, "seed": 1}
  })");
  const CliResult rn = invoke({"run", "--config", neg.string(), "--output-dir", dir.string()});
  CHECK(rn.code == 1);
  CHECK(rn.err.find("epsilon") != std::string::npos);
}

TEST_CASE("run: unknown keys are validation errors") {
  const auto dir = fresh_dir("unknown");
  const auto cfg = write_config(dir, "c.json", R"({
    "algorithm": "ddgd", "epsilon": 0.2, "iterationz": 5,
    "graph": {"nodes": 3, "extra_edge_prob": 0.0, "seed": 1}
  })");
  const CliResult r = invoke({"run", "--config", cfg.string(), "--output-dir", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("iterationz") != std::string::npos);
}

TEST_CASE("certify-eps: eps = 0 fails certification with exit 2") {
  const auto dir = fresh_dir("certify0");
  const auto cfg = write_config(dir, "c.json", R"({
    "epsilon": 0.0,
    "graph": {"nodes": 2, "extra_edge_prob": 0.0, "seed": 1}
  })");
  const CliResult r = invoke({"certify-eps", "--config", cfg.string()});
  CHECK(r.code == 2);
}

TEST_CASE("certify-eps: certified epsilon exits zero and reports the margin") {
  const auto dir = fresh_dir("certify");
  const auto cfg = write_config(dir, "c.json", R"({
    "epsilon": 0.2,
    "graph": {"nodes": 6, "extra_edge_prob": 0.3, "seed": 2}
  })");
  const CliResult r = invoke({"certify-eps", "--config", cfg.string()});
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("certified") != std::string::npos);
  CHECK(r.out.find("Upsilon") != std::string::npos);
}

TEST_CASE("spectra: writes the decay series and reports the fitted rate") {
  const auto dir = fresh_dir("spectra");
  const auto cfg = write_config(dir, "c.json", R"({
    "run_id": "spec",
    "epsilon": "auto",
    "graph": {"nodes": 5, "extra_edge_prob": 0.4, "seed": 8}
  })");
  const CliResult r =
      invoke({"spectra", "--config", cfg.string(), "--output-dir", dir.string(),
              "--dump-matrices"});
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("gamma_hat") != std::string::npos);
  CHECK(fs::exists(dir / "spec.decay.csv"));
  CHECK(fs::exists(dir / "M.csv"));
  CHECK(slurp(dir / "spec.decay.csv").rfind("k,d_k\n", 0) == 0);
}

TEST_CASE("compare: runs the listed algorithms over one problem") {
  const auto dir = fresh_dir("compare");
  const auto cfg = write_config(dir, "c.json", R"({
    "run_id": "cmp",
    "algorithms": ["ddgd", "gradient_push"],
    "epsilon": "auto",
    "iterations": 150,
    "seed": 4,
    "graph": {"nodes": 5, "extra_edge_prob": 0.4, "seed": 8},
    "schedule": {"kind": "inverse_pow", "scale": 1.0, "exponent": 0.75},
    "problem": {"kind": "least_squares", "seed": 11}
  })");
  const CliResult r =
      invoke({"compare", "--config", cfg.string(), "--output-dir", dir.string()});
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "cmp.compare.csv"));
  const std::string head = slurp(dir / "cmp.compare.csv");
  CHECK(head.rfind("k,residual_ddgd,residual_gradient_push\n", 0) == 0);
}

TEST_CASE("sweep: emits one row per probability") {
  const auto dir = fresh_dir("sweep");
  const auto cfg = write_config(dir, "c.json", R"({
    "run_id": "sw",
    "algorithm": "ddgd",
    "epsilon": "auto",
    "iterations": 400,
    "seed": 4,
    "graph": {"nodes": 5, "extra_edge_prob": 0.0, "seed": 8},
    "schedule": {"kind": "inverse_pow", "scale": 1.0, "exponent": 0.75},
    "problem": {"kind": "least_squares", "seed": 11},
    "extra_edge_probs": [0.0, 0.5],
    "sweep_threshold": 0.1
  })");
  const CliResult r = invoke({"sweep", "--config", cfg.string(), "--output-dir", dir.string()});
  CAPTURE(r.err);
  CHECK(r.code == 0);
  const std::string csv = slurp(dir / "sw.sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
}

TEST_CASE("missing config file is a validation error") {
  const CliResult r = invoke({"run", "--config", "/nonexistent/nope.json"});
  CHECK(r.code == 1);
}

TEST_CASE("run: dumped problem replays to the same optimum") {
  const auto dir = fresh_dir("dump");
  const auto cfg = write_config(dir, "c.json", kRunConfig);
  const auto prob = dir / "prob.txt";
  const CliResult r = invoke({"run", "--config", cfg.string(), "--output-dir",
                              (dir / "a").string(), "--dump-problem", prob.string()});
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(prob));

  // Re-run against the dumped file instead of the generator.
  const auto replay = write_config(dir, "replay.json", std::string(R"({
  "run_id": "smoke",
  "algorithm": "ddgd",
  "epsilon": "auto",
  "iterations": 120,
  "seed": 4,
  "graph": {"nodes": 5, "extra_edge_prob": 0.4, "seed": 8},
  "schedule": {"kind": "inverse_pow", "scale": 1.0, "exponent": 0.75},
  "problem": {"kind": "least_squares", "file": ")") +
                                                     prob.string() + R"("}
})");
  const CliResult r2 =
      invoke({"run", "--config", replay.string(), "--output-dir", (dir / "b").string()});
  CAPTURE(r2.err);
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "a" / "smoke.trace.csv") == slurp(dir / "b" / "smoke.trace.csv"));
}

TEST_CASE("seed override changes the trace") {
  const auto dir = fresh_dir("seedover");
  const auto cfg = write_config(dir, "c.json", kRunConfig);
  const auto out1 = dir / "a";
  const auto out2 = dir / "b";
  CHECK(invoke({"run", "--config", cfg.string(), "--output-dir", out1.string()}).code == 0);
  CHECK(invoke({"run", "--config", cfg.string(), "--output-dir", out2.string(), "--seed", "99"})
            .code == 0);
  CHECK(slurp(out1 / "smoke.trace.csv") != slurp(out2 / "smoke.trace.csv"));
}
