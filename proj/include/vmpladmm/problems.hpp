#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vmpladmm/problem.hpp"

namespace vmpladmm {

enum class Penalty { L1, L0, LHalf };

inline const char* to_string(Penalty p) {
  switch (p) {
    case Penalty::L1: return "l1";
    case Penalty::L0: return "l0";
    case Penalty::LHalf: return "l_half";
  }
  return "unknown";
}

inline Penalty penalty_from_string(const std::string& s) {
  if (s == "l1") return Penalty::L1;
  if (s == "l0") return Penalty::L0;
  if (s == "l_half" || s == "lhalf") return Penalty::LHalf;
  throw ParameterError("unknown penalty '" + s + "'");
}

template <typename Scalar = double>
struct GroundTruth {
  Vector<Scalar> x;
  Vector<Scalar> y;
  Scalar objective{0};
  std::string kind;
};

template <typename Scalar = double>
struct BenchmarkInstance {
  ProblemSpec<Scalar> problem;
  std::optional<GroundTruth<Scalar>> ground_truth;
  std::uint64_t seed = 0;
  std::string generator;
  /// Scalar parameters the instance was built from, for the replay descriptor.
  std::map<std::string, std::string> descriptor;
  /// Named matrices needed to rebuild the instance (D, b, M, x_true, ...).
  std::map<std::string, Matrix<Scalar>> data;
};

template <typename Scalar>
ProxOracle<Scalar> make_penalty(Penalty p, Scalar lambda) {
  switch (p) {
    case Penalty::L1: return l1_norm(lambda);
    case Penalty::L0: return l0_norm(lambda);
    case Penalty::LHalf: return l_half(lambda);
  }
  throw ParameterError("unknown penalty");
}

/// ||D^T b||_inf, the smallest lambda for which x = 0 solves the l1 problem.
template <typename Scalar>
Scalar lambda_max(const Matrix<Scalar>& D, const Vector<Scalar>& b) {
  return (D.transpose() * b).cwiseAbs().maxCoeff();
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Scalar>
ProblemSpec<Scalar> consensus(ProxOracle<Scalar> f, SmoothOracle<Scalar> h, Index n) {
  return ProblemSpec<Scalar>{std::move(f), zero_smooth<Scalar>(n), std::move(h),
                             LinearOperator<Scalar>::identity(n),
                             LinearOperator<Scalar>::scaled_identity(n, Scalar(-1)),
                             Vector<Scalar>::Zero(n)};
}

template <typename Scalar>
BenchmarkInstance<Scalar> make_instance(ProblemSpec<Scalar> problem) {
  return BenchmarkInstance<Scalar>{std::move(problem), std::nullopt, 0, {}, {}, {}};
}

}  // namespace detail

/// Consensus split of min lambda*penalty(x) + 1/2 ||D x - b||^2:
/// f = lambda*penalty, g = 0, h = 1/2 ||D y - b||^2, A = I, B = -I, c = 0.
template <typename Scalar = double>
BenchmarkInstance<Scalar> sparse_regression_from(Matrix<Scalar> D, Vector<Scalar> b, Penalty penalty,
                                                 Scalar lambda) {
  if (D.rows() == 0 || D.cols() == 0) throw ParameterError("sparse_regression: empty D");
  if (b.size() != D.rows()) throw ParameterError("sparse_regression: b must have D.rows() entries");
  if (!(lambda > 0)) throw ParameterError("sparse_regression: lambda must be > 0");
  const Index n = D.cols();
  auto inst = detail::make_instance(
      detail::consensus(make_penalty(penalty, lambda), least_squares<Scalar>(D, b), n));
  inst.generator = "sparse_regression";
  inst.descriptor["penalty"] = to_string(penalty);
  inst.descriptor["lambda"] = detail::fmt(static_cast<double>(lambda));
  inst.descriptor["n"] = std::to_string(n);
  inst.descriptor["m_rows"] = std::to_string(D.rows());
  inst.data["D"] = std::move(D);
  inst.data["b"] = std::move(b);
  return inst;
}

template <typename Scalar = double>
struct SparseRegressionParams {
  Index n = 20;
  Index m_rows = 30;
  Index sparsity = 3;
  Scalar noise_sigma{0};
  Penalty penalty = Penalty::L1;
  /// Absolute lambda, or lambda_scale * ||D^T b||_inf when lambda_scale is set.
  Scalar lambda{0.1};
  std::optional<Scalar> lambda_scale;
  std::uint64_t seed = 0;
};

/// D is m_rows x n standard normal; x_true has `sparsity` entries of magnitude
/// U[1, 2] with random signs on a random support; b = D x_true + noise.
template <typename Scalar = double>
BenchmarkInstance<Scalar> make_sparse_regression(const SparseRegressionParams<Scalar>& p) {
  if (p.n <= 0 || p.m_rows <= 0) throw ParameterError("sparse_regression: n and m_rows must be positive");
  if (p.sparsity < 0 || p.sparsity > p.n) throw ParameterError("sparse_regression: need 0 <= sparsity <= n");
  if (p.noise_sigma < 0) throw ParameterError("sparse_regression: noise_sigma must be nonnegative");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution sign(0.5);

  Matrix<Scalar> D(p.m_rows, p.n);
  for (Index j = 0; j < p.n; ++j)
    for (Index i = 0; i < p.m_rows; ++i) D(i, j) = static_cast<Scalar>(normal(rng));

  std::vector<Index> idx(static_cast<std::size_t>(p.n));
  for (Index i = 0; i < p.n; ++i) idx[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates
  for (Index i = 0; i < p.sparsity; ++i) {
    const auto span = static_cast<std::uint64_t>(p.n - i);
    const auto j = i + static_cast<Index>(rng() % span);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Vector<Scalar> x_true = Vector<Scalar>::Zero(p.n);
  for (Index i = 0; i < p.sparsity; ++i) {
    const double v = mag(rng);
    x_true[idx[static_cast<std::size_t>(i)]] = static_cast<Scalar>(sign(rng) ? v : -v);
  }
  Vector<Scalar> b = D * x_true;
  if (p.noise_sigma > 0) {
    for (Index i = 0; i < p.m_rows; ++i) b[i] += p.noise_sigma * static_cast<Scalar>(normal(rng));
  }

  Scalar lambda = p.lambda;
  if (p.lambda_scale) lambda = *p.lambda_scale * lambda_max<Scalar>(D, b);

  auto inst = sparse_regression_from<Scalar>(D, b, p.penalty, lambda);
  inst.seed = p.seed;
  inst.descriptor["sparsity"] = std::to_string(p.sparsity);
  inst.descriptor["noise_sigma"] = detail::fmt(static_cast<double>(p.noise_sigma));
  inst.descriptor["seed"] = std::to_string(p.seed);
  GroundTruth<Scalar> gt;
  gt.x = x_true;
  gt.y = x_true;
  gt.objective = inst.problem.objective(x_true, x_true);
  gt.kind = "planted";
  inst.ground_truth = std::move(gt);
  inst.data["x_true"] = x_true;
  return inst;
}

/// f = indicator of [-box, box]^n, g = 0, h = 1/2 y^T M y, A = I, B = -I, c = 0.
template <typename Scalar = double>
BenchmarkInstance<Scalar> make_box_qp(Matrix<Scalar> M, Scalar box) {
  if (!(box > 0)) throw ParameterError("box_qp: box must be positive");
  if (M.rows() != M.cols() || M.rows() == 0) throw ParameterError("box_qp: M must be square");
  const Index n = M.rows();
  auto inst = detail::make_instance(detail::consensus(box_indicator(box), quadratic_form<Scalar>(M), n));
  inst.generator = "box_qp";
  inst.descriptor["n"] = std::to_string(n);
  inst.descriptor["box"] = detail::fmt(static_cast<double>(box));
  inst.data["M"] = std::move(M);
  return inst;
}

/// M = Q diag(linspace(-negative_curvature, 1, n)) Q^T with Q a seeded random
/// orthogonal matrix; L_h = max(1, negative_curvature).
template <typename Scalar = double>
BenchmarkInstance<Scalar> make_nonconvex_qp(Index n, Scalar negative_curvature, Scalar box,
                                            std::uint64_t seed) {
  if (n <= 0) throw ParameterError("nonconvex_qp: n must be positive");
  if (negative_curvature < 0) throw ParameterError("nonconvex_qp: negative_curvature must be >= 0");
  if (!(box > 0)) throw ParameterError("nonconvex_qp: box must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> G(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = static_cast<Scalar>(normal(rng));
  Eigen::HouseholderQR<Matrix<Scalar>> qr(G);
  const Matrix<Scalar> Q = qr.householderQ();
  Vector<Scalar> eig(n);
  for (Index i = 0; i < n; ++i) {
    eig[i] = n == 1 ? Scalar(1)
                    : -negative_curvature + (Scalar(1) + negative_curvature) * static_cast<Scalar>(i) /
                                                static_cast<Scalar>(n - 1);
  }
  Matrix<Scalar> M = Q * eig.asDiagonal() * Q.transpose();
  M = (Scalar(0.5) * (M + M.transpose())).eval();

  auto inst = detail::make_instance(detail::consensus(
      box_indicator(box), quadratic_form<Scalar>(M, Vector<Scalar>{}, std::max(Scalar(1), negative_curvature)),
      n));
  inst.generator = "nonconvex_qp";
  inst.seed = seed;
  inst.descriptor["n"] = std::to_string(n);
  inst.descriptor["negative_curvature"] = detail::fmt(static_cast<double>(negative_curvature));
  inst.descriptor["box"] = detail::fmt(static_cast<double>(box));
  inst.descriptor["seed"] = std::to_string(seed);
  inst.data["M"] = std::move(M);
  return inst;
}

/// f = 0, g = 0, h = 1/2 ||y - target||^2, A = I, B = -I, c = 0. The unique
/// stationary point is x = y = target, z = 0.
template <typename Scalar = double>
BenchmarkInstance<Scalar> make_consensus_toy(Vector<Scalar> target) {
  const Index n = target.size();
  if (n == 0) throw ParameterError("consensus_toy: empty target");
  auto h = least_squares<Scalar>(Matrix<Scalar>::Identity(n, n), target);
  auto inst = detail::make_instance(detail::consensus(zero_function<Scalar>(), std::move(h), n));
  inst.generator = "consensus_toy";
  inst.descriptor["n"] = std::to_string(n);
  GroundTruth<Scalar> gt;
  gt.x = target;
  gt.y = target;
  gt.objective = 0;
  gt.kind = "exact";
  inst.ground_truth = std::move(gt);
  inst.data["target"] = std::move(target);
  return inst;
}

}  // namespace vmpladmm
