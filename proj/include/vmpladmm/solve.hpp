#pragma once

#include <span>
#include <string>
#include <vector>

#include "vmpladmm/diagnostics.hpp"

namespace vmpladmm {

enum class SolveStatus { Converged, MaxIter, Diverged };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

template <typename Scalar = double>
struct SolveResult {
  IterateState<Scalar> final_state;
  std::vector<TraceRecord<Scalar>> trace;
  SolveStatus status = SolveStatus::MaxIter;
  TheoryConstants<Scalar> constants;
  AuditReport<Scalar> audit;

  int violations() const {
    int n = 0;
    for (const auto& rec : trace) n += rec.violations();
    return n;
  }
};

namespace detail {

template <typename Scalar>
Scalar max_iterate_norm(const IterateState<Scalar>& s) {
  return std::max({s.x.norm(), s.y.norm(), s.z.norm()});
}

template <typename Scalar>
TraceRecord<Scalar> light_record(const IterateState<Scalar>& prev, const IterateState<Scalar>& cur,
                                 const ProblemSpec<Scalar>& prob, const Metrics<Scalar>& metrics) {
  TraceRecord<Scalar> rec;
  rec.k = cur.k;
  rec.delta_x = (cur.x - prev.x).norm();
  rec.delta_y = (cur.y - prev.y).norm();
  rec.delta_z = (cur.z - prev.z).norm();
  rec.residual_norm = cur.residual.norm();
  rec.objective = prob.objective(cur.x, cur.y);
  rec.q1_scale = metrics.q1.maxCoeff();
  rec.q2_scale = metrics.q2.maxCoeff();
  return rec;
}

}  // namespace detail

/// Iterates `step` from (x0, y0, z0) until the joint stopping test, max_iter
/// or divergence. One TraceRecord per iteration. The adaptive schedule reads
/// the descent certificate, so diagnostics are always recorded for it.
template <typename Scalar>
SolveResult<Scalar> solve(const ProblemSpec<Scalar>& prob, const SolverConfig<Scalar>& cfg,
                          Vector<Scalar> x0, Vector<Scalar> y0, Vector<Scalar> z0) {
  validate(prob);
  validate(cfg);
  SolveResult<Scalar> out;
  out.constants = compute_constants(prob, cfg);
  out.audit = check_sufficient_decrease(out.constants);
  const bool diagnostics =
      cfg.record_diagnostics || cfg.schedule.kind == ScheduleKind::AdaptiveScaledIdentity;

  YStepSolver<Scalar> ysolver(prob.B);
  IterateState<Scalar> state = initial_state(prob, std::move(x0), std::move(y0), std::move(z0));
  out.trace.reserve(static_cast<std::size_t>(std::min<long>(cfg.max_iter, 100000)));

  for (long it = 0; it < cfg.max_iter; ++it) {
    const auto metrics =
        metric_next(cfg.schedule, state.k, std::span<const TraceRecord<Scalar>>(out.trace));
    IterateState<Scalar> next = step(state, prob, cfg, metrics, ysolver);
    if (!detail::all_finite(next.x) || !detail::all_finite(next.y) || !detail::all_finite(next.z)) {
      throw NumericalError(next.k, "solve: non-finite iterate at iteration " + std::to_string(next.k));
    }
    if (diagnostics) {
      out.trace.push_back(evaluate_step(state, next, prob, cfg, out.constants, out.audit.pass, metrics));
    } else {
      out.trace.push_back(detail::light_record(state, next, prob, metrics));
    }
    state = std::move(next);
    const auto& rec = out.trace.back();
    if (detail::max_iterate_norm(state) > cfg.divergence_threshold) {
      out.status = SolveStatus::Diverged;
      break;
    }
    if (rec.delta_sum() < cfg.tol_delta && rec.residual_norm < cfg.tol_residual) {
      out.status = SolveStatus::Converged;
      break;
    }
  }
  out.final_state = std::move(state);
  return out;
}

template <typename Scalar>
SolveResult<Scalar> solve(const ProblemSpec<Scalar>& prob, const SolverConfig<Scalar>& cfg) {
  return solve(prob, cfg, Vector<Scalar>::Zero(prob.n()).eval(), Vector<Scalar>::Zero(prob.m()).eval(),
               Vector<Scalar>::Zero(prob.p()).eval());
}

}  // namespace vmpladmm
