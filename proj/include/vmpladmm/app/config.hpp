#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vmpladmm/diagnostics.hpp"
#include "vmpladmm/problems.hpp"

namespace vmpladmm::app {

struct ProblemConfig {
  /// sparse_regression | nonconvex_qp | consensus_toy | replay
  std::string generator;
  SparseRegressionParams<double> sparse;
  Index n = 2;
  double negative_curvature = 0;
  double box = 1;
  std::uint64_t seed = 0;
  std::vector<double> target;
  std::filesystem::path replay_dir;
};

/// Metric specification before alpha is known. An empty q1 means "auto"
/// (2 alpha ||A||^2 + L_g, clamped into [q1_inf, q1_sup] for the adaptive
/// kind); an empty q2 means "lipschitz" (max(L_h, 1)).
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::FixedScaledIdentity;
  std::optional<double> q1;
  std::optional<double> q2;
  std::vector<double> q1_diag;
  std::vector<double> q2_diag;
  std::optional<double> q1_inf;
  std::optional<double> q1_sup;
};

struct SolverSpec {
  /// Empty: alpha is taken from the sufficient-decrease audit started at alpha_init.
  std::optional<double> alpha;
  double alpha_init = 1;
  std::vector<double> betas{1.0};
  double r = 2;
  ScheduleSpec schedule;
  long max_iter = 10000;
  double tol_delta = 1e-8;
  double tol_residual = 1e-8;
  double beta_guard = 0.05;
  /// x0 = y0 = init * ones, z0 = 0.
  double init = 0;
};

struct ExperimentConfig {
  ProblemConfig problem;
  SolverSpec solver;
  std::filesystem::path output_dir = "out";
  bool deterministic = true;
};

/// Parses the JSON config; relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

BenchmarkInstance<double> build_instance(const ProblemConfig& pc);

/// Solver configuration for one beta with the metric resolved for `alpha`.
SolverConfig<double> make_solver_config(const SolverSpec& spec, const ProblemSpec<double>& prob, double beta,
                                        double alpha);

struct ResolvedRun {
  SolverConfig<double> config;
  /// Audit at the starting alpha (alpha_init or the fixed alpha).
  AuditReport<double> initial_audit;
  bool alpha_from_audit = false;
};

/// Picks alpha (fixed, or the audit suggestion) and resolves the metric.
ResolvedRun resolve_run(const SolverSpec& spec, const ProblemSpec<double>& prob, double beta);

}  // namespace vmpladmm::app
