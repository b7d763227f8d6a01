#include "vmpladmm/app/runner.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "vmpladmm/app/io.hpp"
#include "vmpladmm/rate_fit.hpp"

namespace vmpladmm::app {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string beta_label(double beta) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "beta_%g", beta);
  return buf;
}

namespace {

ordered_json constants_json(const TheoryConstants<double>& c) {
  return ordered_json{{"L_g", c.L_g},         {"L_h", c.L_h},
                      {"q1_inf", c.q1_inf},   {"q1_sup", c.q1_sup},
                      {"q2_inf", c.q2_inf},   {"q2_sup", c.q2_sup},
                      {"alpha", c.alpha},     {"beta", c.beta},
                      {"r", c.r},             {"norm_A", c.norm_A},
                      {"norm_B", c.norm_B},   {"lam_min_AtA", c.lam_min_AtA},
                      {"lam_min_BtB", c.lam_min_BtB}, {"lam_min_BBt", c.lam_min_BBt},
                      {"theta0", c.theta0},   {"gamma0", c.gamma0},
                      {"theta1", c.theta1},   {"rho", c.rho},
                      {"rho_tilde", c.rho_tilde}, {"sigma1", c.sigma1},
                      {"sigma2", c.sigma2},   {"sigma", c.sigma}};
}

ordered_json audit_json(const AuditReport<double>& a) {
  ordered_json j{{"sigma1", a.sigma1},
                 {"sigma1_pass", a.sigma1_pass},
                 {"sigma1_unconditional", a.sigma1_unconditional},
                 {"sigma2", a.sigma2},
                 {"sigma2_pass", a.sigma2_pass},
                 {"sigma", a.sigma},
                 {"sigma_pass", a.sigma_pass},
                 {"pass", a.pass},
                 {"interpretation", a.interpretation}};
  if (a.suggested_alpha) {
    j["suggested_alpha"] = *a.suggested_alpha;
  } else {
    j["suggested_alpha"] = a.pass ? json(nullptr) : json("none found");
  }
  return j;
}

void print_audit(std::ostream& out, const TheoryConstants<double>& c, const AuditReport<double>& a) {
  auto line = [&](const char* name, double v) { out << "  " << name << " = " << format_real(v) << '\n'; };
  line("alpha", c.alpha);
  line("beta", c.beta);
  line("r", c.r);
  line("L_g", c.L_g);
  line("L_h", c.L_h);
  line("q1_inf", c.q1_inf);
  line("q1_sup", c.q1_sup);
  line("q2_inf", c.q2_inf);
  line("q2_sup", c.q2_sup);
  line("||A||", c.norm_A);
  line("||B||", c.norm_B);
  line("lambda_min(A*A)", c.lam_min_AtA);
  line("lambda_min(B*B)", c.lam_min_BtB);
  line("lambda_min(BB*)", c.lam_min_BBt);
  line("theta0", c.theta0);
  line("gamma0", c.gamma0);
  line("theta1", c.theta1);
  line("rho", c.rho);
  line("rho_tilde", c.rho_tilde);
  out << "  sigma1 = " << format_real(a.sigma1) << (a.sigma1_pass ? "  pass" : "  FAIL")
      << (a.sigma1_unconditional ? "  (L_g = 0: unconditional pass)" : "") << '\n';
  out << "  sigma2 = " << format_real(a.sigma2) << (a.sigma2_pass ? "  pass" : "  FAIL") << '\n';
  out << "  sigma  = " << format_real(a.sigma) << (a.sigma_pass ? "  pass" : "  FAIL") << '\n';
  if (!a.pass) {
    if (a.suggested_alpha) {
      out << "  suggested alpha = " << format_real(*a.suggested_alpha) << '\n';
    } else {
      out << "  suggested alpha: none found\n";
    }
  }
  out << "  audit: " << (a.pass ? "pass" : "fail") << '\n';
}

struct MemberRun {
  double beta = 0;
  bool ok = false;
  std::string error;
  std::string status;
  int violations = 0;
  long iterations = 0;
  double alpha = 0;
  fs::path dir;
};

MemberRun run_member(const BenchmarkInstance<double>& inst, const SolverSpec& spec, double beta,
                     const fs::path& out_dir) {
  MemberRun m;
  m.beta = beta;
  try {
    const auto resolved = resolve_run(spec, inst.problem, beta);
    const auto& prob = inst.problem;
    const auto result = solve(prob, resolved.config, Vector<double>::Constant(prob.n(), spec.init).eval(),
                              Vector<double>::Constant(prob.m(), spec.init).eval(), Vector<double>::Zero(prob.p()).eval());
    m.dir = out_dir / beta_label(beta);
    fs::create_directories(m.dir);
    write_trace_csv(m.dir / "trace.csv", result.trace);
    std::ofstream(m.dir / "summary.json") << make_summary(inst, resolved.config, result, resolved.alpha_from_audit)
                                          << '\n';
    m.ok = true;
    m.status = to_string(result.status);
    m.violations = result.violations();
    m.iterations = static_cast<long>(result.trace.size());
    m.alpha = resolved.config.alpha;
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  return m;
}

BenchmarkInstance<double> instance_for(const ExperimentConfig& cfg) {
  if (cfg.problem.generator == "replay") return load_instance(cfg.problem.replay_dir);
  return build_instance(cfg.problem);
}

}  // namespace

std::string make_summary(const BenchmarkInstance<double>& inst, const SolverConfig<double>& cfg,
                         const SolveResult<double>& result, bool alpha_from_audit) {
  const auto& fin = result.final_state;
  const auto& prob = inst.problem;
  ordered_json j;
  j["generator"] = inst.generator;
  j["seed"] = inst.seed;
  j["status"] = to_string(result.status);
  j["iterations"] = result.trace.size();
  j["alpha"] = cfg.alpha;
  j["alpha_from_audit"] = alpha_from_audit;
  j["beta"] = cfg.beta;
  j["r"] = cfg.r;
  j["schedule"] = to_string(cfg.schedule.kind);
  j["final"] = {{"norm_x", fin.x.norm()},
                {"norm_y", fin.y.norm()},
                {"norm_z", fin.z.norm()},
                {"residual_norm", fin.residual.norm()},
                {"delta_sum", result.trace.empty() ? 0.0 : result.trace.back().delta_sum()},
                {"objective", prob.objective(fin.x, fin.y)},
                {"lagrangian", aug_lagrangian(prob, cfg.alpha, fin.x, fin.y, fin.z)}};
  const auto st = stationarity_residual(prob, fin.x, fin.y, fin.z);
  j["stationarity"] = {{"r_x", st.r_x}, {"r_y", st.r_y}, {"r_z", st.r_z}};

  const double res = fin.residual.norm();
  const double gap = std::abs(prob.objective(fin.x, fin.y) - aug_lagrangian(prob, cfg.alpha, fin.x, fin.y, fin.z));
  const double allowed = fin.z.norm() * res + 0.5 * cfg.alpha * res * res;
  j["limit_consistency"] = {{"gap", gap}, {"bound", allowed}, {"pass", gap <= allowed + 1e-8 * (1 + allowed)}};

  ordered_json certs = ordered_json::object();
  int total = 0;
  for (auto name : cert::kAll) {
    int fails = 0;
    double worst = 0;
    for (const auto& rec : result.trace) {
      auto it = rec.certificates.find(name);
      if (it != rec.certificates.end() && it->second.status == CertStatus::Fail) {
        ++fails;
        worst = std::min(worst, it->second.slack);
      }
    }
    total += fails;
    certs[std::string(name)] = {{"violations", fails}, {"worst_slack", worst}};
  }
  j["certificates"] = certs;
  j["violations"] = total;

  std::vector<double> errs;
  errs.reserve(result.trace.size());
  for (const auto& rec : result.trace) errs.push_back(rec.delta_sum());
  try {
    const auto fit = fit_kl_rate<double>(errs);
    j["rate_fit"] = {{"error_sequence", "delta_sum"},
                     {"regime", to_string(fit.regime)},
                     {"theta_hat", fit.theta_hat},
                     {"fit_quality", fit.fit_quality},
                     {"ratio", fit.ratio},
                     {"power", fit.power},
                     {"linear_quality", fit.linear_quality},
                     {"sublinear_quality", fit.sublinear_quality},
                     {"points", fit.points}};
  } catch (const Error& e) {
    j["rate_fit"] = {{"error", e.what()}};
  }
  j["constants"] = constants_json(result.constants);
  j["audit"] = audit_json(result.audit);
  return j.dump(2);
}

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  const BenchmarkInstance<double> inst = instance_for(cfg);
  SolverSpec spec = cfg.solver;
  if (opts.max_iter) spec.max_iter = *opts.max_iter;
  const fs::path out_dir = opts.output_dir ? *opts.output_dir : cfg.output_dir;
  fs::create_directories(out_dir);
  save_instance(out_dir / "instance", inst);

  std::vector<MemberRun> runs;
  if (cfg.deterministic || spec.betas.size() == 1) {
    for (double beta : spec.betas) runs.push_back(run_member(inst, spec, beta, out_dir));
  } else {
    std::vector<std::future<MemberRun>> futures;
    for (double beta : spec.betas) {
      futures.push_back(std::async(std::launch::async, run_member, std::cref(inst), std::cref(spec), beta, out_dir));
    }
    for (auto& f : futures) runs.push_back(f.get());
  }

  int code = kExitOk;
  ordered_json report = ordered_json::array();
  for (const auto& m : runs) {
    if (!m.ok) {
      err << "error: " << beta_label(m.beta) << ": " << m.error << '\n';
      report.push_back({{"beta", m.beta}, {"error", m.error}});
      code = kExitError;
      continue;
    }
    report.push_back({{"beta", m.beta},
                      {"alpha", m.alpha},
                      {"status", m.status},
                      {"iterations", m.iterations},
                      {"violations", m.violations},
                      {"dir", m.dir.filename().string()}});
    if (!opts.quiet) {
      out << beta_label(m.beta) << ": " << m.status << " after " << m.iterations << " iterations, alpha="
          << format_real(m.alpha) << ", " << m.violations << " certificate violations\n";
    }
    if (code != kExitError && (m.violations > 0 || m.status != "converged")) code = kExitViolations;
  }
  std::ofstream(out_dir / "report.json") << report.dump(2) << '\n';
  return code;
}

int run_command(const fs::path& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    return run_experiment(load_config(config_path), opts, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

int audit_command(const fs::path& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = load_config(config_path);
    const auto inst = instance_for(cfg);
    bool pass = true;
    for (double beta : cfg.solver.betas) {
      const double alpha = cfg.solver.alpha ? *cfg.solver.alpha : cfg.solver.alpha_init;
      const auto scfg = make_solver_config(cfg.solver, inst.problem, beta, alpha);
      const auto consts = compute_constants(inst.problem, scfg);
      const auto rep = check_sufficient_decrease(consts);
      if (!opts.quiet) {
        out << beta_label(beta) << ":\n";
        print_audit(out, consts, rep);
      }
      pass = pass && rep.pass;
    }
    return pass ? kExitOk : kExitAuditFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace vmpladmm::app
