#include "vmpladmm/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vmpladmm::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) fail(where + "." + key, "expected a number");
  return j.at(key).get<double>();
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key, "wrong type");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(where, "unknown key '" + k + "'");
  }
}

ScheduleKind parse_kind(const std::string& s) {
  if (s == "fixed-scaled-identity") return ScheduleKind::FixedScaledIdentity;
  if (s == "fixed-diagonal") return ScheduleKind::FixedDiagonal;
  if (s == "adaptive-scaled-identity") return ScheduleKind::AdaptiveScaledIdentity;
  fail("solver.schedule.kind", "unknown kind '" + s + "'");
}

ProblemConfig parse_problem(const json& j, const fs::path& base) {
  const std::string where = "problem";
  if (!j.is_object() || !j.contains("generator")) fail(where, "missing 'generator'");
  ProblemConfig pc;
  pc.generator = get_or<std::string>(j, "generator", "", where);
  if (pc.generator == "sparse_regression") {
    check_keys(j, {"generator", "n", "m_rows", "sparsity", "noise_sigma", "penalty", "lambda", "lambda_scale", "seed"},
               where);
    auto& p = pc.sparse;
    p.n = get_or<Index>(j, "n", p.n, where);
    p.m_rows = get_or<Index>(j, "m_rows", p.m_rows, where);
    p.sparsity = get_or<Index>(j, "sparsity", p.sparsity, where);
    p.noise_sigma = get_or<double>(j, "noise_sigma", 0.0, where);
    p.penalty = penalty_from_string(get_or<std::string>(j, "penalty", "l1", where));
    if (j.contains("lambda") == j.contains("lambda_scale")) {
      fail(where, "give exactly one of 'lambda' and 'lambda_scale'");
    }
    if (j.contains("lambda")) p.lambda = get_number(j, "lambda", where);
    if (j.contains("lambda_scale")) p.lambda_scale = get_number(j, "lambda_scale", where);
    p.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  } else if (pc.generator == "nonconvex_qp") {
    check_keys(j, {"generator", "n", "negative_curvature", "box", "seed"}, where);
    pc.n = get_or<Index>(j, "n", pc.n, where);
    pc.negative_curvature = get_or<double>(j, "negative_curvature", 0.0, where);
    pc.box = get_or<double>(j, "box", 1.0, where);
    pc.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  } else if (pc.generator == "consensus_toy") {
    check_keys(j, {"generator", "target"}, where);
    pc.target = get_or<std::vector<double>>(j, "target", {1.0}, where);
  } else if (pc.generator == "replay") {
    check_keys(j, {"generator", "path"}, where);
    fs::path p = get_or<std::string>(j, "path", "", where);
    if (p.empty()) fail(where, "replay needs 'path'");
    pc.replay_dir = p.is_relative() ? base / p : p;
  } else {
    fail(where + ".generator", "unknown generator '" + pc.generator + "'");
  }
  return pc;
}

ScheduleSpec parse_schedule(const json& j) {
  const std::string where = "solver.schedule";
  check_keys(j, {"kind", "q1", "q2", "q1_inf", "q1_sup"}, where);
  ScheduleSpec s;
  s.kind = parse_kind(get_or<std::string>(j, "kind", "fixed-scaled-identity", where));
  auto metric = [&](const char* key, std::optional<double>& scalar, std::vector<double>& diag,
                    const char* keyword) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number()) {
      scalar = v.get<double>();
    } else if (v.is_array()) {
      diag = get_or<std::vector<double>>(j, key, {}, where);
    } else if (!(v.is_string() && v.get<std::string>() == keyword)) {
      fail(where + "." + key, std::string("expected a number, an array or \"") + keyword + "\"");
    }
  };
  metric("q1", s.q1, s.q1_diag, "auto");
  metric("q2", s.q2, s.q2_diag, "lipschitz");
  if (j.contains("q1_inf")) s.q1_inf = get_number(j, "q1_inf", where);
  if (j.contains("q1_sup")) s.q1_sup = get_number(j, "q1_sup", where);
  if (s.kind == ScheduleKind::FixedDiagonal && (s.q1_diag.empty() || s.q2_diag.empty())) {
    fail(where, "fixed-diagonal needs array-valued q1 and q2");
  }
  if (s.kind != ScheduleKind::FixedDiagonal && (!s.q1_diag.empty() || !s.q2_diag.empty())) {
    fail(where, "array-valued metrics need kind fixed-diagonal");
  }
  if (s.kind == ScheduleKind::AdaptiveScaledIdentity && (!s.q1_inf || !s.q1_sup)) {
    fail(where, "adaptive-scaled-identity needs q1_inf and q1_sup");
  }
  return s;
}

SolverSpec parse_solver(const json& j) {
  const std::string where = "solver";
  check_keys(j, {"alpha", "alpha_policy", "alpha_init", "beta", "beta_sweep", "r", "schedule", "max_iter",
                 "tol_delta", "tol_residual", "beta_guard", "init"},
             where);
  SolverSpec s;
  const std::string policy = get_or<std::string>(j, "alpha_policy", j.contains("alpha") ? "fixed" : "audit", where);
  if (policy == "fixed") {
    if (!j.contains("alpha")) fail(where, "alpha_policy \"fixed\" needs 'alpha'");
    s.alpha = get_number(j, "alpha", where);
  } else if (policy == "audit") {
    if (j.contains("alpha")) fail(where, "give 'alpha_init' rather than 'alpha' with alpha_policy \"audit\"");
  } else {
    fail(where + ".alpha_policy", "expected \"fixed\" or \"audit\"");
  }
  s.alpha_init = get_or<double>(j, "alpha_init", 1.0, where);
  if (j.contains("beta") && j.contains("beta_sweep")) fail(where, "give either 'beta' or 'beta_sweep'");
  if (j.contains("beta")) s.betas = {get_number(j, "beta", where)};
  if (j.contains("beta_sweep")) s.betas = get_or<std::vector<double>>(j, "beta_sweep", {}, where);
  if (s.betas.empty()) fail(where + ".beta_sweep", "empty");
  s.r = get_or<double>(j, "r", s.r, where);
  if (j.contains("schedule")) s.schedule = parse_schedule(j.at("schedule"));
  s.max_iter = get_or<long>(j, "max_iter", s.max_iter, where);
  s.tol_delta = get_or<double>(j, "tol_delta", s.tol_delta, where);
  s.tol_residual = get_or<double>(j, "tol_residual", s.tol_residual, where);
  s.beta_guard = get_or<double>(j, "beta_guard", s.beta_guard, where);
  s.init = get_or<double>(j, "init", s.init, where);
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(j, {"problem", "solver", "output_dir", "deterministic"}, "top level");
  if (!j.contains("problem")) fail("top level", "missing 'problem'");
  ExperimentConfig cfg;
  try {
    cfg.problem = parse_problem(j.at("problem"), base_dir);
    if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  fs::path out = get_or<std::string>(j, "output_dir", "out", "top level");
  cfg.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
  cfg.deterministic = get_or<bool>(j, "deterministic", true, "top level");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

BenchmarkInstance<double> build_instance(const ProblemConfig& pc) {
  if (pc.generator == "sparse_regression") return make_sparse_regression(pc.sparse);
  if (pc.generator == "nonconvex_qp") return make_nonconvex_qp<double>(pc.n, pc.negative_curvature, pc.box, pc.seed);
  if (pc.generator == "consensus_toy") {
    return make_consensus_toy<double>(Eigen::Map<const Vector<double>>(pc.target.data(), static_cast<Index>(pc.target.size())));
  }
  if (pc.generator == "replay") {
    throw ConfigError("config: replay instances are loaded with load_instance");
  }
  throw ConfigError("config: unknown generator '" + pc.generator + "'");
}

SolverConfig<double> make_solver_config(const SolverSpec& spec, const ProblemSpec<double>& prob, double beta,
                                        double alpha) {
  SolverConfig<double> cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.r = spec.r;
  cfg.max_iter = spec.max_iter;
  cfg.tol_delta = spec.tol_delta;
  cfg.tol_residual = spec.tol_residual;
  cfg.beta_guard = spec.beta_guard;
  const auto& s = spec.schedule;
  double q1 = s.q1 ? *s.q1 : 2 * alpha * std::pow(op_norm(prob.A), 2) + prob.g.lipschitz;
  if (!s.q1 && s.kind == ScheduleKind::AdaptiveScaledIdentity) q1 = std::clamp(q1, *s.q1_inf, *s.q1_sup);
  const double q2 = s.q2 ? *s.q2 : std::max(prob.h.lipschitz, 1.0);
  switch (s.kind) {
    case ScheduleKind::FixedScaledIdentity:
      cfg.schedule = MetricSchedule<double>::fixed_scaled_identity(prob.n(), prob.m(), q1, q2);
      break;
    case ScheduleKind::FixedDiagonal: {
      if (static_cast<Index>(s.q1_diag.size()) != prob.n() || static_cast<Index>(s.q2_diag.size()) != prob.m()) {
        throw ConfigError("config: fixed-diagonal metric lengths must be n and m");
      }
      cfg.schedule = MetricSchedule<double>::fixed_diagonal(
          Eigen::Map<const Vector<double>>(s.q1_diag.data(), prob.n()),
          Eigen::Map<const Vector<double>>(s.q2_diag.data(), prob.m()));
      break;
    }
    case ScheduleKind::AdaptiveScaledIdentity:
      cfg.schedule = MetricSchedule<double>::adaptive_scaled_identity(prob.n(), prob.m(), q1, q2, *s.q1_inf, *s.q1_sup);
      break;
  }
  validate(cfg);
  return cfg;
}

ResolvedRun resolve_run(const SolverSpec& spec, const ProblemSpec<double>& prob, double beta) {
  ResolvedRun run;
  const double start = spec.alpha ? *spec.alpha : spec.alpha_init;
  auto cfg = make_solver_config(spec, prob, beta, start);
  run.initial_audit = check_sufficient_decrease(compute_constants(prob, cfg));
  if (!spec.alpha && !run.initial_audit.pass) {
    if (!run.initial_audit.suggested_alpha) {
      throw ConfigError("config: audit found no passing alpha on the doubling grid from " + std::to_string(start));
    }
    cfg = make_solver_config(spec, prob, beta, *run.initial_audit.suggested_alpha);
    run.alpha_from_audit = true;
  }
  run.config = std::move(cfg);
  return run;
}

}  // namespace vmpladmm::app
