#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vmpladmm/problems.hpp"

namespace vmpladmm {

template <typename Scalar = double>
struct OracleResult {
  Scalar value{0};
  Vector<Scalar> argmin;
  std::string method;
  /// Grid step, enumeration size, or final prox-gradient residual.
  Scalar resolution{0};
  long iterations = 0;
};

/// Exhaustive minimization of f(u) + w/2 (u - v)^2 over lo, lo+step, ..., hi
/// plus the explicit candidates 0 and v.
template <typename Scalar>
OracleResult<Scalar> prox_grid_oracle(const std::function<Scalar(Scalar)>& f_1d, Scalar v, Scalar w,
                                      Scalar lo, Scalar hi, Scalar step) {
  if (!(lo < hi) || !(step > 0) || !(w > 0)) {
    throw ParameterError("prox_grid_oracle: need lo < hi, step > 0, w > 0");
  }
  Scalar best_u = lo;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  auto consider = [&](Scalar u) {
    const Scalar val = f_1d(u) + Scalar(0.5) * w * (u - v) * (u - v);
    if (val < best) {
      best = val;
      best_u = u;
    }
  };
  const auto count = static_cast<long>(std::floor((hi - lo) / step));
  for (long i = 0; i <= count; ++i) consider(lo + static_cast<Scalar>(i) * step);
  if (lo <= 0 && 0 <= hi) consider(Scalar(0));
  if (lo <= v && v <= hi) consider(v);

  OracleResult<Scalar> out;
  out.value = best;
  out.argmin = Vector<Scalar>::Constant(1, best_u);
  out.method = "grid";
  out.resolution = step;
  return out;
}

/// Default window [-2|v|-1, 2|v|+1] with step 1e-5.
template <typename Scalar>
OracleResult<Scalar> prox_grid_oracle(const std::function<Scalar(Scalar)>& f_1d, Scalar v, Scalar w) {
  const Scalar half = Scalar(2) * std::abs(v) + Scalar(1);
  return prox_grid_oracle(f_1d, v, w, -half, half, Scalar(1e-5));
}

/// Global minimizer of 1/2 ||D x - b||^2 + lambda ||x||_0 by enumerating all
/// 2^n supports. Ties keep the support enumerated first (smaller mask).
template <typename Scalar>
OracleResult<Scalar> best_subset_oracle(const Matrix<Scalar>& D, const Vector<Scalar>& b, Scalar lambda,
                                        int max_n = 12) {
  const Index n = D.cols();
  if (n > max_n) {
    throw ScaleError("best_subset_oracle: n=" + std::to_string(n) + " exceeds max_n=" + std::to_string(max_n));
  }
  if (b.size() != D.rows()) throw DimensionError("best_subset_oracle: b must have D.rows() entries");

  OracleResult<Scalar> out;
  out.value = std::numeric_limits<Scalar>::infinity();
  out.argmin = Vector<Scalar>::Zero(n);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask & (std::uint64_t{1} << j)) cols.push_back(j);
    Vector<Scalar> x = Vector<Scalar>::Zero(n);
    if (!cols.empty()) {
      Matrix<Scalar> Ds(D.rows(), static_cast<Index>(cols.size()));
      for (std::size_t t = 0; t < cols.size(); ++t) Ds.col(static_cast<Index>(t)) = D.col(cols[t]);
      const Vector<Scalar> xs = Ds.colPivHouseholderQr().solve(b);
      for (std::size_t t = 0; t < cols.size(); ++t) x[cols[t]] = xs[static_cast<Index>(t)];
    }
    const auto nnz = static_cast<Scalar>((x.array() != Scalar(0)).count());
    const Scalar val = Scalar(0.5) * (D * x - b).squaredNorm() + lambda * nnz;
    if (val < out.value) {
      out.value = val;
      out.argmin = x;
    }
  }
  out.method = "best_subset";
  out.resolution = static_cast<Scalar>(total);
  out.iterations = static_cast<long>(total);
  return out;
}

/// min_x f(x) + 1/2 ||D x - b||^2 with f one of zero, lambda ||.||_1, or the
/// indicator of [-parameter, parameter]^n.
template <typename Scalar = double>
struct MergedProblem {
  Matrix<Scalar> D;
  Vector<Scalar> b;
  PenaltyFamily family = PenaltyFamily::L1;
  Scalar parameter{0};
};

/// Proximal gradient with step 1/L, L = lambda_max(D^T D), stopped when
/// L ||x - T(x)|| < tol.
template <typename Scalar>
OracleResult<Scalar> prox_gradient_reference(const MergedProblem<Scalar>& mp, Scalar tol,
                                             long max_iter = 10000000) {
  if (mp.family != PenaltyFamily::L1 && mp.family != PenaltyFamily::Box && mp.family != PenaltyFamily::Zero) {
    throw UnsupportedError("prox_gradient_reference: f must be zero, l1 or a box indicator");
  }
  if (mp.b.size() != mp.D.rows()) throw DimensionError("prox_gradient_reference: b must have D.rows() entries");
  const Matrix<Scalar> DtD = mp.D.transpose() * mp.D;
  const Vector<Scalar> Dtb = mp.D.transpose() * mp.b;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(DtD, Eigen::EigenvaluesOnly);
  const Scalar L = es.eigenvalues().maxCoeff();
  if (!(L > 0)) throw ParameterError("prox_gradient_reference: D must be nonzero");
  const Scalar t = Scalar(1) / L;
  const Scalar par = mp.parameter;

  auto prox_step = [&](const Vector<Scalar>& u) {
    Vector<Scalar> out(u.size());
    for (Index i = 0; i < u.size(); ++i) {
      const Scalar ui = u[i];
      if (mp.family == PenaltyFamily::L1) {
        const Scalar thr = par * t;
        out[i] = ui > thr ? ui - thr : (ui < -thr ? ui + thr : Scalar(0));
      } else if (mp.family == PenaltyFamily::Box) {
        out[i] = ui > par ? par : (ui < -par ? -par : ui);
      } else {
        out[i] = ui;
      }
    }
    return out;
  };

  Vector<Scalar> x = Vector<Scalar>::Zero(mp.D.cols());
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  long it = 0;
  for (; it < max_iter; ++it) {
    const Vector<Scalar> grad = DtD * x - Dtb;
    const Vector<Scalar> next = prox_step(x - t * grad);
    gap = L * (next - x).norm();
    x = next;
    if (gap < tol) {
      ++it;
      break;
    }
  }
  if (!(gap < tol)) throw ConvergenceError("prox_gradient_reference: tolerance not reached");

  OracleResult<Scalar> out;
  Scalar fx = 0;
  if (mp.family == PenaltyFamily::L1) fx = par * x.template lpNorm<1>();
  out.value = fx + Scalar(0.5) * (mp.D * x - mp.b).squaredNorm();
  out.argmin = std::move(x);
  out.method = "prox_gradient";
  out.resolution = gap;
  out.iterations = it;
  return out;
}

/// Reference for a consensus-split least-squares instance (A = I, B = -I,
/// c = 0, g = 0) carrying its D and b.
template <typename Scalar>
OracleResult<Scalar> prox_gradient_reference(const BenchmarkInstance<Scalar>& inst, Scalar tol) {
  const auto& prob = inst.problem;
  const bool consensus = is_scaled_identity(prob.A, Scalar(1)) && is_scaled_identity(prob.B, Scalar(-1)) &&
                         prob.c.size() == prob.A.rows() && (prob.c.array() == Scalar(0)).all() &&
                         prob.g.lipschitz == Scalar(0);
  if (!consensus) throw UnsupportedError("prox_gradient_reference: needs the consensus split A=I, B=-I, c=0, g=0");
  const auto D = inst.data.find("D");
  const auto b = inst.data.find("b");
  if (D == inst.data.end() || b == inst.data.end()) {
    throw UnsupportedError("prox_gradient_reference: h must be a least-squares term with stored D, b");
  }
  MergedProblem<Scalar> mp;
  mp.D = D->second;
  mp.b = b->second.col(0);
  mp.family = prob.f.family;
  mp.parameter = prob.f.parameter;
  return prox_gradient_reference(mp, tol);
}

}  // namespace vmpladmm
