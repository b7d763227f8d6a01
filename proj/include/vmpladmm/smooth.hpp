#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "vmpladmm/types.hpp"

namespace vmpladmm {

/// Value/gradient oracle of a Lipschitz-differentiable function with a
/// declared gradient Lipschitz constant.
template <typename Scalar = double>
struct SmoothOracle {
  using VectorType = Vector<Scalar>;

  Index dim = 0;
  std::function<Scalar(const VectorType&)> eval;
  std::function<VectorType(const VectorType&)> grad;
  Scalar lipschitz{0};
  std::string description;
};

template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> smooth_eval(const SmoothOracle<Scalar>& h, const Vector<Scalar>& v) {
  detail::require_size(v.size(), h.dim, "smooth_eval");
  return {h.eval(v), h.grad(v)};
}

template <typename Scalar = double>
SmoothOracle<Scalar> zero_smooth(Index dim) {
  SmoothOracle<Scalar> h;
  h.dim = dim;
  h.eval = [](const Vector<Scalar>&) { return Scalar(0); };
  h.grad = [dim](const Vector<Scalar>&) { return Vector<Scalar>::Zero(dim).eval(); };
  h.lipschitz = 0;
  h.description = "zero";
  return h;
}

namespace detail {

template <typename Scalar>
Scalar max_abs_eigenvalue(const Matrix<Scalar>& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// 1/2 ||D y - b||^2 with L = ||D||^2 (largest eigenvalue of D^T D).
template <typename Scalar = double>
SmoothOracle<Scalar> least_squares(Matrix<Scalar> D, Vector<Scalar> b) {
  detail::require_size(b.size(), D.rows(), "least_squares: b");
  SmoothOracle<Scalar> h;
  h.dim = D.cols();
  h.lipschitz = detail::max_abs_eigenvalue<Scalar>(D.transpose() * D);
  h.description = "least_squares";
  h.eval = [D, b](const Vector<Scalar>& y) { return Scalar(0.5) * (D * y - b).squaredNorm(); };
  h.grad = [D, b](const Vector<Scalar>& y) { return Vector<Scalar>(D.transpose() * (D * y - b)); };
  return h;
}

/// 1/2 y^T M y + q^T y for symmetric M. The declared Lipschitz constant
/// defaults to the spectral radius of M.
template <typename Scalar = double>
SmoothOracle<Scalar> quadratic_form(Matrix<Scalar> M, Vector<Scalar> q = {},
                                    std::optional<Scalar> lipschitz = std::nullopt) {
  if (M.rows() != M.cols()) throw DimensionError("quadratic_form: M must be square");
  if (q.size() == 0) q = Vector<Scalar>::Zero(M.rows());
  detail::require_size(q.size(), M.rows(), "quadratic_form: q");
  SmoothOracle<Scalar> h;
  h.dim = M.rows();
  h.lipschitz = lipschitz ? *lipschitz : detail::max_abs_eigenvalue(M);
  h.description = "quadratic_form";
  h.eval = [M, q](const Vector<Scalar>& y) { return Scalar(0.5) * y.dot(M * y) + q.dot(y); };
  h.grad = [M, q](const Vector<Scalar>& y) { return Vector<Scalar>(M * y + q); };
  return h;
}

}  // namespace vmpladmm
