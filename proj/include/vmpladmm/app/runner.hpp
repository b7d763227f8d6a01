#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "vmpladmm/app/config.hpp"
#include "vmpladmm/solve.hpp"

namespace vmpladmm::app {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitViolations = 2, kExitAuditFail = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<long> max_iter;
  bool quiet = false;
};

/// Directory name for one member of a beta sweep, e.g. "beta_1.5".
std::string beta_label(double beta);

/// summary.json contents for one finished solve.
std::string make_summary(const BenchmarkInstance<double>& inst, const SolverConfig<double>& cfg,
                         const SolveResult<double>& result, bool alpha_from_audit);

/// Runs every (problem, beta) pair of the config and writes
///   <out>/beta_<v>/trace.csv, <out>/beta_<v>/summary.json, <out>/report.json.
/// Exit 0 iff every run converged with zero certificate violations, 2 when a
/// run had violations or did not converge, 1 on errors.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err);
int run_command(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& out,
                std::ostream& err);

/// Prints the constants and the sufficient-decrease report for every beta at
/// the configured alpha (alpha_init under the audit policy). Exit 0 on pass,
/// 3 on fail, 1 on errors.
int audit_command(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& out,
                  std::ostream& err);

}  // namespace vmpladmm::app
