#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vmpladmm/app/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Variable-metric proximal linearized ADMM experiment runner"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  long max_iter = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--max-iter", max_iter, "override solver.max_iter")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  auto* run = app.add_subcommand("run", "solve every (problem, beta) pair and write traces");
  add_common(run);
  auto* audit = app.add_subcommand("audit", "print theory constants and the sufficient-decrease audit");
  add_common(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vmpladmm::app::kExitError;
  }

  vmpladmm::app::RunOptions opts;
  if (!out_dir.empty()) opts.output_dir = out_dir;
  if (max_iter > 0) opts.max_iter = max_iter;
  opts.quiet = quiet;

  if (*run) return vmpladmm::app::run_command(config, opts, std::cout, std::cerr);
  return vmpladmm::app::audit_command(config, opts, std::cout, std::cerr);
}
