#include <gtest/gtest.h>

#include <json.hpp>

#include <sstream>

#include "test_support.hpp"
#include "vmpladmm/app/io.hpp"
#include "vmpladmm/app/runner.hpp"

using namespace vmpladmm;
using namespace vmpladmm::app;
using namespace testing_support;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kToy = R"({
  "problem": {"generator": "consensus_toy", "target": [1.0, -2.0]},
  "solver": {"alpha_policy": "audit", "beta": 1.0,
             "schedule": {"kind": "fixed-scaled-identity", "q1": "auto", "q2": 1},
             "tol_delta": 1e-10, "tol_residual": 1e-10}
})";

const char* kLasso = R"({
  "problem": {"generator": "sparse_regression", "n": 20, "m_rows": 30, "sparsity": 3,
              "noise_sigma": 0.0, "penalty": "l1", "lambda_scale": 0.1, "seed": 2},
  "solver": {"alpha_policy": "audit", "beta": 1.0,
             "schedule": {"kind": "fixed-scaled-identity", "q1": "auto", "q2": "lipschitz"}},
  "deterministic": true
})";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "config.json";
  std::ofstream(path) << text;
  return path;
}

Outcome run_text(const std::string& name, const std::string& text, bool audit = false) {
  const auto dir = scratch_dir(name);
  const auto path = write_config(dir, text);
  RunOptions opts;
  opts.output_dir = dir / "out";
  std::ostringstream out, err;
  const int code = audit ? audit_command(path, opts, out, err) : run_command(path, opts, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

int count_trace_fails(const fs::path& trace_csv) {
  std::istringstream is(read_file(trace_csv));
  std::string line;
  std::getline(is, line);
  int fails = 0;
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) fails += cell == "fail";
  }
  return fails;
}

}  // namespace

TEST(Config, ParsesDefaultsAndKeywords) {
  const auto cfg = parse_config(kLasso);
  EXPECT_EQ(cfg.problem.generator, "sparse_regression");
  EXPECT_EQ(cfg.problem.sparse.n, 20);
  EXPECT_EQ(*cfg.problem.sparse.lambda_scale, 0.1);
  EXPECT_FALSE(cfg.solver.alpha.has_value());
  EXPECT_FALSE(cfg.solver.schedule.q1.has_value());
  EXPECT_FALSE(cfg.solver.schedule.q2.has_value());
  EXPECT_EQ(cfg.solver.betas, std::vector<double>{1.0});
  EXPECT_EQ(cfg.solver.r, 2.0);
  EXPECT_TRUE(cfg.deterministic);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("{ not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "consensus_toy"}, "extra": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "nope"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "sparse_regression", "lambda": 1, "lambda_scale": 1}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "sparse_regression", "lambda": 1, "penalty": "l9"}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "consensus_toy"},
                               "solver": {"schedule": {"kind": "adaptive-scaled-identity"}}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "consensus_toy"},
                               "solver": {"alpha_policy": "fixed"}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "consensus_toy"},
                               "solver": {"beta": 1, "beta_sweep": [0.5]}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"generator": "consensus_toy"},
                               "solver": {"max_iter": "many"}})"),
               ConfigError);
}

TEST(Config, MissingFileIsAnError) {
  std::ostringstream out, err;
  EXPECT_EQ(run_command("/nonexistent/config.json", {}, out, err), kExitError);
  EXPECT_NE(err.str().find("cannot open"), std::string::npos);
}

TEST(Config, AuditPolicyResolvesAlpha) {
  const auto inst = lasso_n20();
  SolverSpec spec;
  const auto run = resolve_run(spec, inst.problem, 1.0);
  EXPECT_FALSE(run.initial_audit.pass);
  EXPECT_TRUE(run.alpha_from_audit);
  EXPECT_TRUE(check_sufficient_decrease(compute_constants(inst.problem, run.config)).pass);
  EXPECT_EQ(run.config.schedule.q1[0], 2 * run.config.alpha * 1.0);
  EXPECT_EQ(run.config.schedule.q2[0], inst.problem.h.lipschitz);
}

TEST(Run, ConsensusToyConverges) {
  const auto o = run_text("toy", kToy);
  EXPECT_EQ(o.code, kExitOk) << o.err;
  const auto base = fs::temp_directory_path() / "vmpladmm_test_toy" / "out";
  const auto summary = read_json(base / "beta_1" / "summary.json");
  EXPECT_EQ(summary["status"], "converged");
  EXPECT_EQ(summary["violations"], 0);
  EXPECT_TRUE(summary["limit_consistency"]["pass"].get<bool>());
  EXPECT_LE(summary["stationarity"]["r_y"].get<double>(), 1e-6);
  EXPECT_TRUE(fs::exists(base / "report.json"));
  EXPECT_TRUE(fs::exists(base / "instance" / "instance.json"));
}

TEST(Run, BetaGuardRejected) {
  const auto o = run_text("guard", R"({"problem": {"generator": "consensus_toy"},
                                       "solver": {"alpha": 4, "beta": 1.99}})");
  EXPECT_EQ(o.code, kExitError);
  EXPECT_NE(o.err.find("beta"), std::string::npos);
}

TEST(Run, NonConvergenceExitsTwo) {
  const auto o = run_text("maxiter", R"({"problem": {"generator": "consensus_toy"},
                                         "solver": {"alpha": 4, "beta": 1.0, "max_iter": 3}})");
  EXPECT_EQ(o.code, kExitViolations);
}

TEST(Run, SummaryCountsMatchTraceFailures) {
  // q2 = 1 at beta = 1.5 is known to break the regularized decrease.
  const auto o = run_text("violations", R"({
    "problem": {"generator": "sparse_regression", "n": 20, "m_rows": 30, "sparsity": 3,
                "noise_sigma": 0.0, "penalty": "l1", "lambda_scale": 0.1, "seed": 2},
    "solver": {"alpha_policy": "audit", "beta": 1.5, "max_iter": 300,
               "schedule": {"kind": "fixed-scaled-identity", "q1": "auto", "q2": 1}}})");
  EXPECT_EQ(o.code, kExitViolations);
  const auto base = fs::temp_directory_path() / "vmpladmm_test_violations" / "out" / "beta_1.5";
  const auto summary = read_json(base / "summary.json");
  const int fails = count_trace_fails(base / "trace.csv");
  EXPECT_GT(fails, 0);
  EXPECT_EQ(summary["violations"].get<int>(), fails);
  int per_cert = 0;
  for (const auto& [name, c] : summary["certificates"].items()) per_cert += c["violations"].get<int>();
  EXPECT_EQ(per_cert, fails);
}

TEST(Run, BetaSweepWritesOneTracePerMember) {
  const auto o = run_text("sweep", R"({
    "problem": {"generator": "sparse_regression", "n": 50, "m_rows": 80, "sparsity": 5,
                "noise_sigma": 0.01, "penalty": "l1", "lambda_scale": 0.1, "seed": 1},
    "solver": {"alpha_policy": "audit", "beta_sweep": [0.5, 1.0, 1.5],
               "schedule": {"kind": "fixed-scaled-identity", "q1": "auto", "q2": "lipschitz"}},
    "deterministic": false})");
  EXPECT_EQ(o.code, kExitOk) << o.out << o.err;
  const auto base = fs::temp_directory_path() / "vmpladmm_test_sweep" / "out";
  for (const char* b : {"beta_0.5", "beta_1", "beta_1.5"}) {
    EXPECT_TRUE(fs::exists(base / b / "trace.csv")) << b;
    EXPECT_EQ(read_json(base / b / "summary.json")["status"], "converged") << b;
  }
  EXPECT_EQ(read_json(base / "report.json").size(), 3u);
}

TEST(Run, DeterministicTraceIsBitIdentical) {
  const auto a = run_text("det_a", kLasso);
  const auto b = run_text("det_b", kLasso);
  ASSERT_EQ(a.code, kExitOk);
  ASSERT_EQ(b.code, kExitOk);
  const auto tmp = fs::temp_directory_path();
  const auto ta = read_file(tmp / "vmpladmm_test_det_a" / "out" / "beta_1" / "trace.csv");
  const auto tb = read_file(tmp / "vmpladmm_test_det_b" / "out" / "beta_1" / "trace.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, tb);
}

TEST(Run, ReplayReproducesTheTrace) {
  const auto first = run_text("replay_src", kLasso);
  ASSERT_EQ(first.code, kExitOk);
  const auto src = fs::temp_directory_path() / "vmpladmm_test_replay_src" / "out";
  const std::string cfg = R"({"problem": {"generator": "replay", "path": ")" + (src / "instance").string() +
                          R"("}, "solver": {"alpha_policy": "audit", "beta": 1.0,
                             "schedule": {"kind": "fixed-scaled-identity", "q1": "auto", "q2": "lipschitz"}}})";
  const auto second = run_text("replay_dst", cfg);
  ASSERT_EQ(second.code, kExitOk) << second.err;
  const auto dst = fs::temp_directory_path() / "vmpladmm_test_replay_dst" / "out";
  EXPECT_EQ(read_file(src / "beta_1" / "trace.csv"), read_file(dst / "beta_1" / "trace.csv"));
}

TEST(Audit, FailingConfigSuggestsAlphaFour) {
  const auto o = run_text("audit_fail", R"({"problem": {"generator": "consensus_toy"},
    "solver": {"alpha": 1, "beta": 1.0, "schedule": {"kind": "fixed-scaled-identity", "q1": 2, "q2": 1}}})", true);
  EXPECT_EQ(o.code, kExitAuditFail);
  EXPECT_NE(o.out.find("suggested alpha = 4"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("sigma2 = -9"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("unconditional pass"), std::string::npos) << o.out;
}

TEST(Audit, PassingConfigPrintsPositiveSigma) {
  const auto o = run_text("audit_pass", R"({"problem": {"generator": "consensus_toy"},
    "solver": {"alpha": 4, "beta": 1.0, "schedule": {"kind": "fixed-scaled-identity", "q1": 8, "q2": 1}}})", true);
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("sigma  = 0.25  pass"), std::string::npos) << o.out;
}

TEST(Io, MatrixCsvRoundTrip) {
  const auto dir = scratch_dir("io");
  const Mat m = random_matrix(4, 3, 5) * 1e-3;
  write_matrix_csv(dir / "m.csv", m);
  EXPECT_EQ(read_matrix_csv(dir / "m.csv"), m);
  EXPECT_EQ(std::stod(format_real(0.1)), 0.1);
  EXPECT_THROW(read_matrix_csv(dir / "missing.csv"), Error);
}

TEST(Io, InstanceRoundTrip) {
  const auto dir = scratch_dir("instance");
  for (const auto& inst : {lasso_n20(), make_nonconvex_qp<double>(5, 0.5, 2.0, 7), make_consensus_toy<double>(vec({3}))}) {
    save_instance(dir / inst.generator, inst);
    const auto back = load_instance(dir / inst.generator);
    EXPECT_EQ(back.generator, inst.generator);
    EXPECT_EQ(back.data, inst.data);
    EXPECT_EQ(back.problem.h.lipschitz, inst.problem.h.lipschitz);
    EXPECT_EQ(back.problem.f.parameter, inst.problem.f.parameter);
  }
}

TEST(Io, TraceColumns) {
  const auto cols = trace_columns();
  EXPECT_EQ(cols.size(), 14 + 2 * cert::kAll.size());
  EXPECT_EQ(cols.front(), "k");
  std::ostringstream os;
  const auto prob = toy();
  auto cfg = plain_config(prob, 8, 1, 4.0);
  cfg.max_iter = 2;
  write_trace_csv(os, solve(prob, cfg).trace);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), static_cast<long>(cols.size()) - 1);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}
