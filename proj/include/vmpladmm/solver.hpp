#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "vmpladmm/metric.hpp"
#include "vmpladmm/problem.hpp"

namespace vmpladmm {

template <typename Scalar = double>
struct SolverConfig {
  Scalar alpha{1};
  Scalar beta{1};
  Scalar r{2};
  MetricSchedule<Scalar> schedule;
  long max_iter = 10000;
  /// Stop when ||dx|| + ||dy|| + ||dz|| < tol_delta and ||Ax+By+c|| < tol_residual.
  /// A zero tolerance disables early stopping.
  Scalar tol_delta{1e-8};
  Scalar tol_residual{1e-8};
  /// Admissible beta range is [beta_guard, 2 - beta_guard].
  Scalar beta_guard{0.05};
  Scalar divergence_threshold{1e12};
  bool record_diagnostics = true;
};

template <typename Scalar>
void validate(const SolverConfig<Scalar>& cfg) {
  if (!(cfg.alpha > 0) || !std::isfinite(cfg.alpha)) throw ConfigError("config: alpha must be > 0");
  if (!(cfg.beta_guard > 0) || !(cfg.beta_guard < 1)) {
    throw ConfigError("config: beta_guard must lie in (0, 1)");
  }
  if (!(cfg.beta > 0 && cfg.beta < 2)) throw BetaGuardError("config: beta must lie in (0, 2)");
  if (cfg.beta < cfg.beta_guard || cfg.beta > 2 - cfg.beta_guard) {
    throw BetaGuardError("config: beta=" + std::to_string(cfg.beta) + " outside guard [" +
                         std::to_string(cfg.beta_guard) + ", " +
                         std::to_string(2 - cfg.beta_guard) + "]");
  }
  if (!(cfg.r > 1)) throw ConfigError("config: r must be > 1");
  if (cfg.max_iter <= 0) throw ConfigError("config: max_iter must be positive");
  if (!(cfg.tol_delta >= 0) || !(cfg.tol_residual >= 0)) {
    throw ConfigError("config: tolerances must be nonnegative");
  }
  cfg.schedule.validate();
}

/// (x^k, y^k, z^k) together with the lagged y^{k-1}, z^{k-1} and the cached
/// constraint residual A x^k + B y^k + c.
template <typename Scalar = double>
struct IterateState {
  long k = 0;
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> z;
  Vector<Scalar> y_prev;
  Vector<Scalar> z_prev;
  Vector<Scalar> residual;
};

template <typename Scalar>
IterateState<Scalar> initial_state(const ProblemSpec<Scalar>& prob, Vector<Scalar> x0,
                                   Vector<Scalar> y0, Vector<Scalar> z0) {
  detail::require_size(x0.size(), prob.n(), "initial x");
  detail::require_size(y0.size(), prob.m(), "initial y");
  detail::require_size(z0.size(), prob.p(), "initial z");
  IterateState<Scalar> s;
  s.residual = prob.residual(x0, y0);
  s.y_prev = y0;
  s.z_prev = z0;
  s.x = std::move(x0);
  s.y = std::move(y0);
  s.z = std::move(z0);
  return s;
}

template <typename Scalar>
IterateState<Scalar> initial_state(const ProblemSpec<Scalar>& prob) {
  return initial_state<Scalar>(prob, Vector<Scalar>::Zero(prob.n()), Vector<Scalar>::Zero(prob.m()),
                               Vector<Scalar>::Zero(prob.p()));
}

/// p^k = grad g(x^k) + alpha A^*(A x^k + B y^k + c + z^k / alpha).
template <typename Scalar>
Vector<Scalar> x_linear_coefficient(const IterateState<Scalar>& state, const ProblemSpec<Scalar>& prob,
                                    Scalar alpha) {
  return prob.g.grad(state.x) + prob.A.adjoint(state.z + alpha * state.residual);
}

/// Prox-linear x-step: prox of f at x^k - Q1^{-1} p^k in the Q1 metric.
template <typename Scalar>
Vector<Scalar> x_update(const IterateState<Scalar>& state, const ProblemSpec<Scalar>& prob,
                        const Vector<Scalar>& q1, const SolverConfig<Scalar>& cfg) {
  detail::require_size(q1.size(), prob.n(), "x_update: Q1");
  const Vector<Scalar> p = x_linear_coefficient(state, prob, cfg.alpha);
  const Vector<Scalar> v = state.x - p.cwiseQuotient(q1);
  return prox(prob.f, v, q1);
}

/// Solves (alpha B^*B + Q2) y = rhs.
///
/// Materializable B uses a dense Cholesky factor, cached while alpha and Q2
/// are unchanged. Matrix-free B falls back to conjugate gradients.
template <typename Scalar = double>
class YStepSolver {
 public:
  explicit YStepSolver(const LinearOperator<Scalar>& B) : B_(&B) {
    if (B.materializable()) btb_ = B.gram();
  }

  Vector<Scalar> solve(Scalar alpha, const Vector<Scalar>& q2, const Vector<Scalar>& rhs) {
    detail::require_size(q2.size(), B_->cols(), "y-step: Q2");
    detail::require_size(rhs.size(), B_->cols(), "y-step: rhs");
    if (!B_->materializable()) return solve_cg(alpha, q2, rhs);
    if (!cached_alpha_ || *cached_alpha_ != alpha || cached_q2_ != q2) {
      Matrix<Scalar> system = alpha * btb_;
      system.diagonal() += q2;
      llt_.compute(system);
      if (llt_.info() != Eigen::Success) {
        cached_alpha_.reset();
        throw LinearSolveError("y-step: alpha B^*B + Q2 is not positive definite");
      }
      cached_alpha_ = alpha;
      cached_q2_ = q2;
      ++factorizations_;
    }
    return llt_.solve(rhs);
  }

  int factorizations() const noexcept { return factorizations_; }

  Scalar cg_tolerance{1e-10};

 private:
  Vector<Scalar> solve_cg(Scalar alpha, const Vector<Scalar>& q2, const Vector<Scalar>& rhs) const {
    auto op = [&](const Vector<Scalar>& v) -> Vector<Scalar> {
      return alpha * B_->adjoint(*B_ * v) + q2.cwiseProduct(v);
    };
    Vector<Scalar> y = Vector<Scalar>::Zero(rhs.size());
    Vector<Scalar> r = rhs;
    Vector<Scalar> d = r;
    Scalar rr = r.squaredNorm();
    const Scalar stop = cg_tolerance * cg_tolerance * std::max(rr, Scalar(1e-300));
    const long max_it = 10 * rhs.size() + 100;
    for (long it = 0; it < max_it && rr > stop; ++it) {
      const Vector<Scalar> Ad = op(d);
      const Scalar dAd = d.dot(Ad);
      if (!(dAd > 0)) throw LinearSolveError("y-step CG: system is not positive definite");
      const Scalar step = rr / dAd;
      y += step * d;
      r -= step * Ad;
      const Scalar rr_new = r.squaredNorm();
      d = r + (rr_new / rr) * d;
      rr = rr_new;
    }
    if (rr > stop) throw LinearSolveError("y-step CG: no convergence");
    return y;
  }

  const LinearOperator<Scalar>* B_;
  Matrix<Scalar> btb_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  std::optional<Scalar> cached_alpha_;
  Vector<Scalar> cached_q2_;
  int factorizations_ = 0;
};

/// Right-hand side Q2 y^k - grad h(y^k) - B^* z^k - alpha B^*(A x^{k+1} + c).
template <typename Scalar>
Vector<Scalar> y_rhs(const IterateState<Scalar>& state, const Vector<Scalar>& x_new,
                     const ProblemSpec<Scalar>& prob, const Vector<Scalar>& q2, Scalar alpha) {
  const Vector<Scalar> ax_c = prob.A * x_new + prob.c;
  return q2.cwiseProduct(state.y) - prob.h.grad(state.y) - prob.B.adjoint(state.z + alpha * ax_c);
}

template <typename Scalar>
Vector<Scalar> y_update(const IterateState<Scalar>& state, const Vector<Scalar>& x_new,
                        const ProblemSpec<Scalar>& prob, const Vector<Scalar>& q2,
                        const SolverConfig<Scalar>& cfg, YStepSolver<Scalar>& solver) {
  return solver.solve(cfg.alpha, q2, y_rhs(state, x_new, prob, q2, cfg.alpha));
}

template <typename Scalar>
Vector<Scalar> y_update(const IterateState<Scalar>& state, const Vector<Scalar>& x_new,
                        const ProblemSpec<Scalar>& prob, const Vector<Scalar>& q2,
                        const SolverConfig<Scalar>& cfg) {
  YStepSolver<Scalar> solver(prob.B);
  return y_update(state, x_new, prob, q2, cfg, solver);
}

/// z + alpha * beta * residual. Diagnostics recompute this exact expression.
template <typename Scalar>
Vector<Scalar> z_update(const Vector<Scalar>& z, const Vector<Scalar>& residual, Scalar alpha,
                        Scalar beta) {
  detail::require_size(residual.size(), z.size(), "z_update");
  const Scalar ab = alpha * beta;
  return z + ab * residual;
}

/// One sweep: x-step, y-step with the new x, over-relaxed multiplier step.
template <typename Scalar>
IterateState<Scalar> step(const IterateState<Scalar>& state, const ProblemSpec<Scalar>& prob,
                          const SolverConfig<Scalar>& cfg, const Metrics<Scalar>& metrics,
                          YStepSolver<Scalar>& ysolver) {
  detail::require_size(state.x.size(), prob.n(), "step: x");
  detail::require_size(state.y.size(), prob.m(), "step: y");
  detail::require_size(state.z.size(), prob.p(), "step: z");
  IterateState<Scalar> next;
  next.k = state.k + 1;
  next.x = x_update(state, prob, metrics.q1, cfg);
  next.y = y_update(state, next.x, prob, metrics.q2, cfg, ysolver);
  next.residual = prob.residual(next.x, next.y);
  next.z = z_update(state.z, next.residual, cfg.alpha, cfg.beta);
  next.y_prev = state.y;
  next.z_prev = state.z;
  return next;
}

/// Convenience sweep using the schedule's metrics for iteration state.k with
/// no recorded history.
template <typename Scalar>
IterateState<Scalar> step(const IterateState<Scalar>& state, const ProblemSpec<Scalar>& prob,
                          const SolverConfig<Scalar>& cfg) {
  YStepSolver<Scalar> ysolver(prob.B);
  const auto metrics = metric_next<Scalar>(cfg.schedule, state.k, {});
  return step(state, prob, cfg, metrics, ysolver);
}

}  // namespace vmpladmm
