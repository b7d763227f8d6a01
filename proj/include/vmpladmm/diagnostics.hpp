#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vmpladmm/solver.hpp"
#include "vmpladmm/trace.hpp"

namespace vmpladmm {

/// Every constant the convergence certificates are stated in, together with
/// the raw inputs they are derived from. Derived fields are pure functions of
/// the inputs (see `derive`).
template <typename Scalar = double>
struct TheoryConstants {
  // inputs
  Scalar L_g{0}, L_h{0};
  Scalar q1_inf{0}, q1_sup{0}, q2_inf{0}, q2_sup{0};
  Scalar alpha{0}, beta{0}, r{0};
  Scalar norm_A{0}, norm_B{0};
  Scalar lam_min_AtA{0}, lam_min_BtB{0}, lam_min_BBt{0};
  // derived
  Scalar theta0{0}, gamma0{0}, theta1{0};
  Scalar rho{0}, rho_tilde{0};
  Scalar sigma1{0}, sigma2{0}, sigma{0};

  /// Recomputes every derived field from the inputs, as printed:
  ///   den    = alpha beta lambda_min(BB^*) (1 - |1 - beta|)
  ///   theta0 = 2 beta (L_h + q2)^2 / den,  gamma0 = |1 - beta| / den,
  ///   theta1 = 2 beta q2^2 / den.
  void derive() {
    const Scalar ab = alpha * beta;
    const Scalar relax = Scalar(1) - std::abs(Scalar(1) - beta);
    const Scalar den = ab * lam_min_BBt * relax;
    theta0 = Scalar(2) * beta * (L_h + q2_sup) * (L_h + q2_sup) / den;
    gamma0 = std::abs(Scalar(1) - beta) / den;
    theta1 = Scalar(2) * beta * q2_sup * q2_sup / den;
    rho = std::max({q1_sup + L_g, alpha * norm_A * norm_B + L_h + q2_sup,
                    norm_A + norm_B + Scalar(1) / ab});
    rho_tilde = std::sqrt(Scalar(3)) * rho + Scalar(4) * r * std::max(theta0, gamma0);
    sigma1 = q1_inf + alpha * lam_min_AtA - L_g;
    sigma2 = q2_inf + alpha * lam_min_BtB - (L_h + theta0 + theta1);
    sigma = std::min({sigma1, sigma2, (r - Scalar(1)) / ab});
  }

  TheoryConstants with_alpha(Scalar new_alpha) const {
    TheoryConstants c = *this;
    c.alpha = new_alpha;
    c.derive();
    return c;
  }
};

template <typename Scalar>
void check_beta_guard(Scalar beta, Scalar guard) {
  if (!(beta > 0 && beta < 2) || beta < guard || beta > 2 - guard) {
    throw BetaGuardError("beta=" + std::to_string(beta) + " outside guard [" +
                         std::to_string(guard) + ", " + std::to_string(2 - guard) + "]");
  }
}

template <typename Scalar>
TheoryConstants<Scalar> compute_constants(const ProblemSpec<Scalar>& prob,
                                          const SolverConfig<Scalar>& cfg) {
  check_beta_guard(cfg.beta, cfg.beta_guard);
  TheoryConstants<Scalar> c;
  c.L_g = prob.g.lipschitz;
  c.L_h = prob.h.lipschitz;
  c.q1_inf = cfg.schedule.q1_inf;
  c.q1_sup = cfg.schedule.q1_sup;
  c.q2_inf = cfg.schedule.q2_inf;
  c.q2_sup = cfg.schedule.q2_sup;
  c.alpha = cfg.alpha;
  c.beta = cfg.beta;
  c.r = cfg.r;
  c.norm_A = op_norm(prob.A);
  c.norm_B = op_norm(prob.B);
  c.lam_min_AtA = gram_min_eig(prob.A, GramSide::Gram);
  c.lam_min_BtB = gram_min_eig(prob.B, GramSide::Gram);
  c.lam_min_BBt = gram_min_eig(prob.B, GramSide::Cogram);
  c.derive();
  return c;
}

template <typename Scalar = double>
struct AuditReport {
  Scalar sigma1{0}, sigma2{0}, sigma{0};
  bool sigma1_pass = false;
  bool sigma2_pass = false;
  bool sigma_pass = false;
  bool pass = false;
  /// True when L_g = 0, so sigma1 = q1_inf + alpha lambda_min(A^*A) > 0 always.
  bool sigma1_unconditional = false;
  /// Smallest alpha * 2^j (j = 0..16) whose recomputed constants pass.
  std::optional<Scalar> suggested_alpha;
  std::string interpretation;
};

template <typename Scalar>
AuditReport<Scalar> check_sufficient_decrease(const TheoryConstants<Scalar>& consts) {
  AuditReport<Scalar> rep;
  rep.sigma1 = consts.sigma1;
  rep.sigma2 = consts.sigma2;
  rep.sigma = consts.sigma;
  rep.sigma1_pass = consts.sigma1 > 0;
  rep.sigma2_pass = consts.sigma2 > 0;
  rep.sigma_pass = consts.sigma > 0;
  rep.pass = rep.sigma1_pass && rep.sigma2_pass && rep.sigma_pass;
  rep.sigma1_unconditional = consts.L_g == Scalar(0);
  rep.interpretation =
      "metric norms in the relaxed condition are read as the lower bounds q_inf; "
      "theta0, gamma0, theta1 evaluated as printed";
  if (!rep.pass) {
    for (int j = 0; j <= 16; ++j) {
      const Scalar a = consts.alpha * std::ldexp(Scalar(1), j);
      const auto c = consts.with_alpha(a);
      if (c.sigma1 > 0 && c.sigma2 > 0 && c.sigma > 0) {
        rep.suggested_alpha = a;
        break;
      }
    }
  }
  return rep;
}

/// L^alpha(x, y, z) = f(x) + g(x) + h(y) + <z, Ax+By+c> + alpha/2 ||Ax+By+c||^2.
template <typename Scalar>
Scalar aug_lagrangian(const ProblemSpec<Scalar>& prob, Scalar alpha, const Vector<Scalar>& x,
                      const Vector<Scalar>& y, const Vector<Scalar>& z) {
  detail::require_size(z.size(), prob.p(), "aug_lagrangian: z");
  const Scalar fx = prob.f.eval(x);
  if (fx == std::numeric_limits<Scalar>::infinity()) return fx;
  const Vector<Scalar> res = prob.residual(x, y);
  return fx + prob.g.eval(x) + prob.h.eval(y) + z.dot(res) + Scalar(0.5) * alpha * res.squaredNorm();
}

/// R_k = L^alpha(x^k, y^k, z^k) + r gamma0 ||B^*(z^k - z^{k-1})||^2 + r theta0 ||y^k - y^{k-1}||^2.
template <typename Scalar>
Scalar reg_lagrangian(const ProblemSpec<Scalar>& prob, const TheoryConstants<Scalar>& consts,
                      const IterateState<Scalar>& state) {
  const Scalar lag = aug_lagrangian(prob, consts.alpha, state.x, state.y, state.z);
  const Scalar dz = prob.B.adjoint(state.z - state.z_prev).squaredNorm();
  const Scalar dy = (state.y - state.y_prev).squaredNorm();
  return lag + consts.r * consts.gamma0 * dz + consts.r * consts.theta0 * dy;
}

template <typename Scalar>
Scalar reg_lagrangian(const ProblemSpec<Scalar>& prob, const SolverConfig<Scalar>& cfg,
                      const IterateState<Scalar>& state) {
  return reg_lagrangian(prob, compute_constants(prob, cfg), state);
}

template <typename Scalar = double>
struct SubgradientWitness {
  Vector<Scalar> dx, dy, dz;
  Scalar d_norm{0};
  Scalar bound{0};
  bool within_bound = true;
};

namespace detail {

template <typename Scalar>
void check_successor(const IterateState<Scalar>& prev, const IterateState<Scalar>& cur) {
  if (cur.k != prev.k + 1 || cur.y_prev.size() != prev.y.size() || cur.z_prev.size() != prev.z.size() ||
      cur.y_prev != prev.y || cur.z_prev != prev.z) {
    throw StaleMetricError("witness: current state was not produced from the given previous state");
  }
}

template <typename Scalar>
Scalar bound_tolerance(Scalar bound) {
  return Scalar(1e-8) * (Scalar(1) + bound);
}

}  // namespace detail

/// Explicit element d^{k+1} of the subdifferential of L^alpha at the new
/// iterate and the bound rho (||dx|| + ||dy|| + ||dz||).
template <typename Scalar>
SubgradientWitness<Scalar> subgradient_witness(const IterateState<Scalar>& prev,
                                               const IterateState<Scalar>& cur,
                                               const ProblemSpec<Scalar>& prob,
                                               const SolverConfig<Scalar>& cfg,
                                               const TheoryConstants<Scalar>& consts,
                                               const Metrics<Scalar>& metrics) {
  detail::check_successor(prev, cur);
  if (metrics.q1.size() != prob.n() || metrics.q2.size() != prob.m() ||
      x_update(prev, prob, metrics.q1, cfg) != cur.x) {
    throw StaleMetricError("witness: Q1 does not reproduce the x-step of the producing iteration");
  }
  const Vector<Scalar> dx = cur.x - prev.x;
  const Vector<Scalar> dy = cur.y - prev.y;
  const Vector<Scalar> dz = cur.z - prev.z;
  const Scalar ab = cfg.alpha * cfg.beta;

  SubgradientWitness<Scalar> w;
  w.dx = prob.g.grad(cur.x) - prob.g.grad(prev.x) + prob.A.adjoint(dz) +
         cfg.alpha * prob.A.adjoint(prob.B * dy) - metrics.q1.cwiseProduct(dx);
  w.dy = prob.h.grad(cur.y) - prob.h.grad(prev.y) + prob.B.adjoint(dz) - metrics.q2.cwiseProduct(dy);
  w.dz = dz / ab;
  w.d_norm = std::sqrt(w.dx.squaredNorm() + w.dy.squaredNorm() + w.dz.squaredNorm());
  w.bound = consts.rho * (dx.norm() + dy.norm() + dz.norm());
  w.within_bound = w.d_norm <= w.bound + detail::bound_tolerance(w.bound);
  return w;
}

template <typename Scalar>
SubgradientWitness<Scalar> subgradient_witness(const IterateState<Scalar>& prev,
                                               const IterateState<Scalar>& cur,
                                               const ProblemSpec<Scalar>& prob,
                                               const SolverConfig<Scalar>& cfg,
                                               const Metrics<Scalar>& metrics) {
  return subgradient_witness(prev, cur, prob, cfg, compute_constants(prob, cfg), metrics);
}

/// Norm of s^k in the subdifferential of R (five blocks) for the iterate k
/// produced from prev.
template <typename Scalar>
Scalar reg_subgradient_norm(const SubgradientWitness<Scalar>& d, const IterateState<Scalar>& cur,
                            const ProblemSpec<Scalar>& prob, const TheoryConstants<Scalar>& consts) {
  const Vector<Scalar> dy = cur.y - cur.y_prev;
  const Vector<Scalar> dz = cur.z - cur.z_prev;
  const Vector<Scalar> corr_y = Scalar(2) * consts.r * consts.theta0 * dy;
  const Vector<Scalar> corr_z = Scalar(2) * consts.r * consts.gamma0 * (prob.B * prob.B.adjoint(dz));
  const Scalar norm2 = d.dx.squaredNorm() + (d.dy + corr_y).squaredNorm() +
                       (d.dz + corr_z).squaredNorm() + corr_y.squaredNorm() + corr_z.squaredNorm();
  return std::sqrt(norm2);
}

/// Residuals of the three stationarity conditions
///   0 in ∂f(x) + grad g(x) + A^* z,  0 = grad h(y) + B^* z,  0 = Ax + By + c.
/// r_x is dist(-grad g(x) - A^* z, ∂f(x)) when f exposes its subdifferential,
/// otherwise the unit-weight prox-gradient surrogate.
template <typename Scalar = double>
struct StationarityResidual {
  Scalar r_x{0}, r_y{0}, r_z{0};
  Scalar max() const { return std::max({r_x, r_y, r_z}); }
};

template <typename Scalar>
StationarityResidual<Scalar> stationarity_residual(const ProblemSpec<Scalar>& prob,
                                                   const Vector<Scalar>& x, const Vector<Scalar>& y,
                                                   const Vector<Scalar>& z) {
  StationarityResidual<Scalar> out;
  const Vector<Scalar> grad_x = prob.g.grad(x) + prob.A.adjoint(z);
  if (prob.f.subdiff_distance) {
    out.r_x = prob.f.subdiff_distance(x, Vector<Scalar>(-grad_x));
  } else {
    const Vector<Scalar> ones = Vector<Scalar>::Ones(x.size());
    out.r_x = (x - prox(prob.f, Vector<Scalar>(x - grad_x), ones)).norm();
  }
  out.r_y = (prob.h.grad(y) + prob.B.adjoint(z)).norm();
  out.r_z = prob.residual(x, y).norm();
  return out;
}

namespace detail {

template <typename Scalar>
Certificate<Scalar> make_cert(Scalar slack, Scalar tol) {
  Certificate<Scalar> c;
  c.slack = slack;
  c.tolerance = tol;
  c.status = (slack >= -tol) ? CertStatus::Pass : CertStatus::Fail;
  return c;
}

template <typename Scalar>
Scalar rel_tol(Scalar value) {
  return Scalar(1e-8) * (Scalar(1) + std::abs(value));
}

}  // namespace detail

/// Evaluates the full diagnostics row for the step prev -> cur taken with
/// `metrics`. `audit_pass` gates the regularized-Lagrangian decrease check.
template <typename Scalar>
TraceRecord<Scalar> evaluate_step(const IterateState<Scalar>& prev, const IterateState<Scalar>& cur,
                                  const ProblemSpec<Scalar>& prob, const SolverConfig<Scalar>& cfg,
                                  const TheoryConstants<Scalar>& consts, bool audit_pass,
                                  const Metrics<Scalar>& metrics) {
  using detail::make_cert;
  using detail::rel_tol;
  const Scalar alpha = cfg.alpha;
  const Scalar ab = alpha * cfg.beta;
  const Vector<Scalar> dx = cur.x - prev.x;
  const Vector<Scalar> dy = cur.y - prev.y;
  const Vector<Scalar> dz = cur.z - prev.z;

  TraceRecord<Scalar> rec;
  rec.k = cur.k;
  rec.delta_x = dx.norm();
  rec.delta_y = dy.norm();
  rec.delta_z = dz.norm();
  rec.residual_norm = cur.residual.norm();
  rec.objective = prob.objective(cur.x, cur.y);
  rec.q1_scale = metrics.q1.maxCoeff();
  rec.q2_scale = metrics.q2.maxCoeff();

  const Scalar lag_prev = aug_lagrangian(prob, alpha, prev.x, prev.y, prev.z);
  const Scalar lag_x = aug_lagrangian(prob, alpha, cur.x, prev.y, prev.z);
  const Scalar lag_y = aug_lagrangian(prob, alpha, cur.x, cur.y, prev.z);
  const Scalar lag_cur = aug_lagrangian(prob, alpha, cur.x, cur.y, cur.z);
  rec.lagrangian = lag_cur;
  const Scalar reg_prev = reg_lagrangian(prob, consts, prev);
  rec.reg_lagrangian = reg_lagrangian(prob, consts, cur);

  auto& certs = rec.certificates;

  // Bit-level identity of the multiplier update and of the cached residual.
  {
    const Vector<Scalar> z_re = z_update(prev.z, cur.residual, alpha, cfg.beta);
    const Vector<Scalar> res_re = prob.residual(cur.x, cur.y);
    const bool exact = z_re == cur.z && res_re == cur.residual;
    const Scalar diff = std::max((z_re - cur.z).cwiseAbs().maxCoeff(),
                                 (res_re - cur.residual).cwiseAbs().maxCoeff());
    Certificate<Scalar> c;
    c.status = exact ? CertStatus::Pass : CertStatus::Fail;
    c.slack = exact ? Scalar(0) : -std::max(diff, std::numeric_limits<Scalar>::min());
    certs.emplace(cert::kZUpdateIdentity, c);
  }

  // y-step optimality: (alpha B^*B + Q2) y^{k+1} = rhs.
  {
    const Vector<Scalar> rhs = y_rhs(prev, cur.x, prob, metrics.q2, alpha);
    const Vector<Scalar> lhs = alpha * prob.B.adjoint(prob.B * cur.y) + metrics.q2.cwiseProduct(cur.y);
    certs.emplace(cert::kYOptimality, make_cert(-(lhs - rhs).norm(), Scalar(1e-8) * (1 + rhs.norm())));
  }

  // Surrogate decrease of the prox-linear x-step.
  const Scalar f_prev = prob.f.eval(prev.x);
  {
    const Vector<Scalar> p = x_linear_coefficient(prev, prob, alpha);
    const Scalar surrogate = prob.f.eval(cur.x) + p.dot(dx) + Scalar(0.5) * dx.dot(metrics.q1.cwiseProduct(dx));
    certs.emplace(cert::kXSurrogateDecrease,
                  make_cert(f_prev - surrogate, Scalar(1e-10) * (1 + std::abs(f_prev))));
  }

  // Descent of L^alpha across the x- and y-steps. Expanding the penalty
  // around x^k leaves -(alpha/2)||A dx||^2 in the x-step bound.
  const Scalar dx2 = dx.squaredNorm();
  const Scalar dy2 = dy.squaredNorm();
  const Scalar dz2 = dz.squaredNorm();
  const Scalar cert_x = Scalar(0.5) * dx.dot(metrics.q1.cwiseProduct(dx)) -
                        Scalar(0.5) * alpha * (prob.A * dx).squaredNorm() - Scalar(0.5) * consts.L_g * dx2;
  const Scalar cert_y = Scalar(0.5) * dy.dot(metrics.q2.cwiseProduct(dy)) +
                        Scalar(0.5) * alpha * (prob.B * dy).squaredNorm() - Scalar(0.5) * consts.L_h * dy2;
  certs.emplace(cert::kDescentX, make_cert((lag_prev - lag_x) - cert_x, rel_tol(lag_prev)));
  certs.emplace(cert::kDescentY, make_cert((lag_x - lag_y) - cert_y, rel_tol(lag_x)));
  certs.emplace(cert::kLagrangianMonotone,
                make_cert(lag_prev + dz2 / ab - cert_x - cert_y - lag_cur, rel_tol(lag_prev)));

  // Multiplier-step bound; needs the previous differences, so k >= 1.
  if (prev.k >= 1) {
    const Scalar dy_prev2 = (prev.y - prev.y_prev).squaredNorm();
    const Scalar btdz_prev2 = prob.B.adjoint(prev.z - prev.z_prev).squaredNorm();
    const Scalar btdz2 = prob.B.adjoint(dz).squaredNorm();
    const Scalar lhs = dz2 / ab;
    const Scalar t1 = consts.theta0 * dy_prev2;
    const Scalar t2 = consts.theta0 * dy2;
    const Scalar t3 = consts.gamma0 * btdz_prev2;
    const Scalar t4 = consts.gamma0 * btdz2;
    const Scalar scale = Scalar(1) + lhs + t1 + t2 + t3 + t4;
    certs.emplace(cert::kDualStepBound, make_cert(t1 + t2 + t3 - t4 - lhs, Scalar(1e-8) * scale));
  } else {
    certs.emplace(cert::kDualStepBound, Certificate<Scalar>{});
  }

  // Sufficient decrease of R_k with margin sigma.
  if (audit_pass && prev.k >= 1) {
    certs.emplace(cert::kRegLagrangianDecrease,
                  make_cert(reg_prev - rec.reg_lagrangian - consts.sigma * (dx2 + dy2 + dz2),
                            rel_tol(reg_prev)));
  } else {
    certs.emplace(cert::kRegLagrangianDecrease, Certificate<Scalar>{});
  }

  // Subgradient bounds for L^alpha and R.
  const auto wit = subgradient_witness(prev, cur, prob, cfg, consts, metrics);
  rec.d_norm = wit.d_norm;
  rec.d_bound = wit.bound;
  certs.emplace(cert::kSubgradientBound,
                make_cert(wit.bound - wit.d_norm, detail::bound_tolerance(wit.bound)));
  rec.s_norm = reg_subgradient_norm(wit, cur, prob, consts);
  rec.s_bound = consts.rho_tilde * (rec.delta_x + rec.delta_y + rec.delta_z);
  certs.emplace(cert::kRegSubgradientBound,
                make_cert(rec.s_bound - rec.s_norm, detail::bound_tolerance(rec.s_bound)));
  return rec;
}

}  // namespace vmpladmm
