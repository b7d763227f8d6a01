#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "vmpladmm/trace.hpp"
#include "vmpladmm/types.hpp"

namespace vmpladmm {

enum class ScheduleKind { FixedScaledIdentity, FixedDiagonal, AdaptiveScaledIdentity };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::FixedScaledIdentity: return "fixed-scaled-identity";
    case ScheduleKind::FixedDiagonal: return "fixed-diagonal";
    case ScheduleKind::AdaptiveScaledIdentity: return "adaptive-scaled-identity";
  }
  return "unknown";
}

/// Diagonal proximal metrics for one iteration.
template <typename Scalar = double>
struct Metrics {
  Vector<Scalar> q1;
  Vector<Scalar> q2;
};

/// Rule producing the diagonal metrics Q1^k (n x n) and Q2^k (m x m).
///
/// Every produced metric has eigenvalues in [q_inf, q_sup]. The adaptive kind
/// moves only Q1 (halving after a streak of passed x-descent certificates,
/// doubling on a failure) and keeps Q2 fixed.
template <typename Scalar = double>
struct MetricSchedule {
  ScheduleKind kind = ScheduleKind::FixedScaledIdentity;
  /// Initial (or fixed) metric diagonals.
  Vector<Scalar> q1;
  Vector<Scalar> q2;
  Scalar q1_inf{1}, q1_sup{1};
  Scalar q2_inf{1}, q2_sup{1};
  int pass_streak = 5;

  static MetricSchedule fixed_scaled_identity(Index n, Index m, Scalar q1, Scalar q2) {
    MetricSchedule s;
    s.kind = ScheduleKind::FixedScaledIdentity;
    s.q1 = Vector<Scalar>::Constant(n, q1);
    s.q2 = Vector<Scalar>::Constant(m, q2);
    s.q1_inf = s.q1_sup = q1;
    s.q2_inf = s.q2_sup = q2;
    s.validate();
    return s;
  }

  static MetricSchedule fixed_diagonal(Vector<Scalar> q1, Vector<Scalar> q2) {
    MetricSchedule s;
    s.kind = ScheduleKind::FixedDiagonal;
    if (q1.size() == 0 || q2.size() == 0) throw ParameterError("fixed_diagonal: empty metric");
    s.q1_inf = q1.minCoeff();
    s.q1_sup = q1.maxCoeff();
    s.q2_inf = q2.minCoeff();
    s.q2_sup = q2.maxCoeff();
    s.q1 = std::move(q1);
    s.q2 = std::move(q2);
    s.validate();
    return s;
  }

  static MetricSchedule adaptive_scaled_identity(Index n, Index m, Scalar q1_init, Scalar q2,
                                                 Scalar q1_inf, Scalar q1_sup) {
    MetricSchedule s;
    s.kind = ScheduleKind::AdaptiveScaledIdentity;
    s.q1 = Vector<Scalar>::Constant(n, q1_init);
    s.q2 = Vector<Scalar>::Constant(m, q2);
    s.q1_inf = q1_inf;
    s.q1_sup = q1_sup;
    s.q2_inf = s.q2_sup = q2;
    s.validate();
    if (q1_init < q1_inf || q1_init > q1_sup) {
      throw ScheduleContractError("adaptive schedule: initial q1 outside [q1_inf, q1_sup]");
    }
    return s;
  }

  void validate() const {
    if (!(q1_inf > 0) || !(q2_inf > 0) || !(q1_inf <= q1_sup) || !(q2_inf <= q2_sup) ||
        !std::isfinite(q1_sup) || !std::isfinite(q2_sup)) {
      throw ScheduleContractError("metric schedule: need 0 < q_inf <= q_sup < inf");
    }
  }
};

namespace detail {

template <typename Scalar>
void check_metric_bounds(const Vector<Scalar>& q, Scalar lo, Scalar hi, const char* which) {
  if (q.size() == 0 || q.minCoeff() < lo || q.maxCoeff() > hi) {
    throw ScheduleContractError(std::string("metric_next: ") + which +
                                " outside declared [q_inf, q_sup]");
  }
}

}  // namespace detail

/// Metrics for iteration k given the diagnostics recorded so far.
template <typename Scalar>
Metrics<Scalar> metric_next(const MetricSchedule<Scalar>& schedule, long k,
                            std::span<const TraceRecord<Scalar>> history) {
  if (k < 0) throw ParameterError("metric_next: k must be nonnegative");
  Metrics<Scalar> out{schedule.q1, schedule.q2};

  if (schedule.kind == ScheduleKind::AdaptiveScaledIdentity && !history.empty()) {
    Scalar current = history.back().q1_scale;
    if (!history.back().passed(cert::kDescentX)) {
      current = std::min(Scalar(2) * current, schedule.q1_sup);
    } else {
      int streak = 0;
      for (auto it = history.rbegin(); it != history.rend() && streak < schedule.pass_streak; ++it) {
        if (it->q1_scale != current || !it->passed(cert::kDescentX)) break;
        ++streak;
      }
      if (streak >= schedule.pass_streak) current = std::max(current / Scalar(2), schedule.q1_inf);
    }
    out.q1.setConstant(current);
  }

  detail::check_metric_bounds(out.q1, schedule.q1_inf, schedule.q1_sup, "Q1");
  detail::check_metric_bounds(out.q2, schedule.q2_inf, schedule.q2_sup, "Q2");
  return out;
}

}  // namespace vmpladmm
