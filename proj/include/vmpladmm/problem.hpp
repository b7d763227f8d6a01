#pragma once

#include <string>
#include <utility>

#include "vmpladmm/linear_operator.hpp"
#include "vmpladmm/prox.hpp"
#include "vmpladmm/smooth.hpp"

namespace vmpladmm {

/// min f(x) + g(x) + h(y)  s.t.  A x + B y + c = 0.
template <typename Scalar = double>
struct ProblemSpec {
  ProxOracle<Scalar> f;
  SmoothOracle<Scalar> g;
  SmoothOracle<Scalar> h;
  LinearOperator<Scalar> A;
  LinearOperator<Scalar> B;
  Vector<Scalar> c;

  Index n() const { return A.cols(); }
  Index m() const { return B.cols(); }
  Index p() const { return A.rows(); }

  /// F(x, y) = f(x) + g(x) + h(y).
  Scalar objective(const Vector<Scalar>& x, const Vector<Scalar>& y) const {
    return f.eval(x) + g.eval(x) + h.eval(y);
  }

  Vector<Scalar> residual(const Vector<Scalar>& x, const Vector<Scalar>& y) const {
    return A * x + B * y + c;
  }
};

/// Checks dimensions and the positivity of both Gram eigenvalues of B.
template <typename Scalar>
void validate(const ProblemSpec<Scalar>& prob) {
  if (prob.B.rows() != prob.A.rows()) {
    throw DimensionError("problem: A and B must have the same number of rows");
  }
  detail::require_size(prob.c.size(), prob.A.rows(), "problem: c");
  detail::require_size(prob.g.dim, prob.A.cols(), "problem: g");
  detail::require_size(prob.h.dim, prob.B.cols(), "problem: h");
  if (!prob.f.eval || !prob.f.prox) throw ParameterError("problem: f oracle is incomplete");
  if (!prob.g.eval || !prob.g.grad || !prob.h.eval || !prob.h.grad) {
    throw ParameterError("problem: smooth oracle is incomplete");
  }
  if (prob.g.lipschitz < 0 || prob.h.lipschitz < 0) {
    throw ParameterError("problem: Lipschitz constants must be nonnegative");
  }
  if (!(gram_min_eig(prob.B, GramSide::Gram) > 0) || !(gram_min_eig(prob.B, GramSide::Cogram) > 0)) {
    throw ParameterError("problem: B^*B and BB^* must be positive definite");
  }
}

}  // namespace vmpladmm
