#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "vmpladmm/types.hpp"

namespace vmpladmm {

enum class ApplyMode { Forward, Adjoint };
enum class GramSide { Gram, Cogram };

/// Linear map R^cols -> R^rows together with its adjoint.
///
/// Dense, scaled-identity and diagonal operators are materializable and answer
/// spectral queries exactly. Matrix-free operators are opaque callbacks and
/// must carry declared spectral bounds; nothing is estimated for them.
template <typename Scalar = double>
class LinearOperator {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;
  using Callback = std::function<VectorType(const VectorType&)>;

  enum class Kind { Dense, ScaledIdentity, Diagonal, MatrixFree };

  static LinearOperator dense(MatrixType m) {
    LinearOperator op(Kind::Dense, m.rows(), m.cols());
    op.dense_ = std::move(m);
    return op;
  }

  static LinearOperator scaled_identity(Index n, Scalar scale) {
    if (n <= 0) throw DimensionError("scaled_identity: dimension must be positive");
    LinearOperator op(Kind::ScaledIdentity, n, n);
    op.scale_ = scale;
    return op;
  }

  static LinearOperator identity(Index n) { return scaled_identity(n, Scalar(1)); }

  static LinearOperator diagonal(VectorType d) {
    LinearOperator op(Kind::Diagonal, d.size(), d.size());
    op.diag_ = std::move(d);
    return op;
  }

  static LinearOperator matrix_free(Index rows, Index cols, Callback forward, Callback adjoint,
                                    std::optional<Scalar> declared_norm = std::nullopt,
                                    std::optional<Scalar> declared_gram_min_eig = std::nullopt,
                                    std::optional<Scalar> declared_cogram_min_eig = std::nullopt) {
    LinearOperator op(Kind::MatrixFree, rows, cols);
    op.forward_ = std::move(forward);
    op.adjoint_ = std::move(adjoint);
    op.declared_norm_ = declared_norm;
    op.declared_gram_ = declared_gram_min_eig;
    op.declared_cogram_ = declared_cogram_min_eig;
    return op;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Kind kind() const noexcept { return kind_; }
  bool materializable() const noexcept { return kind_ != Kind::MatrixFree; }

  const std::optional<Scalar>& declared_norm() const noexcept { return declared_norm_; }
  const std::optional<Scalar>& declared_gram_min_eig() const noexcept { return declared_gram_; }
  const std::optional<Scalar>& declared_cogram_min_eig() const noexcept { return declared_cogram_; }

  /// Scale of a scaled-identity operator.
  Scalar scale() const noexcept { return scale_; }
  const VectorType& diagonal_entries() const noexcept { return diag_; }
  const MatrixType& dense_matrix() const noexcept { return dense_; }

  VectorType apply(const VectorType& v, ApplyMode mode = ApplyMode::Forward) const {
    const bool fwd = mode == ApplyMode::Forward;
    detail::require_size(v.size(), fwd ? cols_ : rows_, fwd ? "apply" : "adjoint_apply");
    switch (kind_) {
      case Kind::Dense:
        return fwd ? VectorType(dense_ * v) : VectorType(dense_.transpose() * v);
      case Kind::ScaledIdentity:
        return scale_ * v;
      case Kind::Diagonal:
        return diag_.cwiseProduct(v);
      case Kind::MatrixFree: {
        VectorType out = fwd ? forward_(v) : adjoint_(v);
        detail::require_size(out.size(), fwd ? rows_ : cols_, "matrix-free callback output");
        return out;
      }
    }
    return {};
  }

  VectorType operator*(const VectorType& v) const { return apply(v, ApplyMode::Forward); }
  VectorType adjoint(const VectorType& v) const { return apply(v, ApplyMode::Adjoint); }

  MatrixType to_dense() const {
    switch (kind_) {
      case Kind::Dense:
        return dense_;
      case Kind::ScaledIdentity:
        return scale_ * MatrixType::Identity(rows_, cols_);
      case Kind::Diagonal:
        return diag_.asDiagonal();
      case Kind::MatrixFree:
        break;
    }
    throw UnsupportedError("to_dense: matrix-free operator cannot be materialized");
  }

  /// Gram matrix op^* op (cols x cols), materializable operators only.
  MatrixType gram() const {
    switch (kind_) {
      case Kind::Dense:
        return dense_.transpose() * dense_;
      case Kind::ScaledIdentity:
        return (scale_ * scale_) * MatrixType::Identity(cols_, cols_);
      case Kind::Diagonal:
        return diag_.cwiseAbs2().asDiagonal();
      case Kind::MatrixFree:
        break;
    }
    throw UnsupportedError("gram: matrix-free operator cannot be materialized");
  }

 private:
  LinearOperator(Kind kind, Index rows, Index cols) : kind_(kind), rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw DimensionError("LinearOperator: dimensions must be positive");
  }

  Kind kind_;
  Index rows_;
  Index cols_;
  MatrixType dense_;
  Scalar scale_{1};
  VectorType diag_;
  Callback forward_;
  Callback adjoint_;
  std::optional<Scalar> declared_norm_;
  std::optional<Scalar> declared_gram_;
  std::optional<Scalar> declared_cogram_;
};

template <typename Scalar>
struct SpectralBounds {
  Scalar op_norm{0};
  Scalar gram_min_eig{0};
  Scalar cogram_min_eig{0};
};

template <typename Scalar>
Vector<Scalar> apply(const LinearOperator<Scalar>& op, const Vector<Scalar>& v,
                     ApplyMode mode = ApplyMode::Forward) {
  return op.apply(v, mode);
}

inline constexpr double kDefaultPowerTol = 1e-8;
inline constexpr int kDefaultPowerMaxIter = 5000;

/// Spectral norm. Closed form for identity/diagonal, power iteration on
/// op^* op for dense operators, declared value for matrix-free operators.
template <typename Scalar>
Scalar op_norm(const LinearOperator<Scalar>& op, Scalar tol = Scalar(kDefaultPowerTol),
               int max_iter = kDefaultPowerMaxIter) {
  using Kind = typename LinearOperator<Scalar>::Kind;
  if (!(tol > 0)) throw ParameterError("op_norm: tol must be positive");
  switch (op.kind()) {
    case Kind::ScaledIdentity:
      return std::abs(op.scale());
    case Kind::Diagonal:
      return op.diagonal_entries().cwiseAbs().maxCoeff();
    case Kind::MatrixFree:
      if (!op.declared_norm()) {
        throw MissingBoundError("op_norm: matrix-free operator has no declared norm");
      }
      return *op.declared_norm();
    case Kind::Dense:
      break;
  }

  // Start from normalized ones plus a small deterministic perturbation so the
  // start vector is not orthogonal to the dominant singular vector by symmetry.
  const Index n = op.cols();
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = Scalar(1) / std::sqrt(Scalar(n)) + Scalar(1e-3) * Scalar(i + 1) / Scalar(n);
  }
  v.normalize();

  Scalar lambda = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vector<Scalar> w = op.adjoint(op * v);
    const Scalar rayleigh = v.dot(w);
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) return Scalar(0);
    v = w / wn;
    if (it > 0 && std::abs(rayleigh - lambda) <= tol * std::abs(rayleigh)) {
      return std::sqrt(std::max(rayleigh, Scalar(0)));
    }
    lambda = rayleigh;
  }
  throw ConvergenceError("op_norm: power iteration stagnated after " + std::to_string(max_iter) +
                         " iterations");
}

/// Smallest eigenvalue of op^* op (Gram) or op op^* (Cogram).
template <typename Scalar>
Scalar gram_min_eig(const LinearOperator<Scalar>& op, GramSide side = GramSide::Gram) {
  using Kind = typename LinearOperator<Scalar>::Kind;
  switch (op.kind()) {
    case Kind::ScaledIdentity:
      return op.scale() * op.scale();
    case Kind::Diagonal:
      return op.diagonal_entries().cwiseAbs2().minCoeff();
    case Kind::MatrixFree: {
      const auto& declared =
          side == GramSide::Gram ? op.declared_gram_min_eig() : op.declared_cogram_min_eig();
      if (!declared) {
        throw MissingBoundError("gram_min_eig: matrix-free operator has no declared value");
      }
      return *declared;
    }
    case Kind::Dense:
      break;
  }
  const auto& m = op.dense_matrix();
  Matrix<Scalar> g = side == GramSide::Gram ? Matrix<Scalar>(m.transpose() * m)
                                            : Matrix<Scalar>(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("gram_min_eig: eigensolver failed");
  return std::max(es.eigenvalues().minCoeff(), Scalar(0));
}

template <typename Scalar>
SpectralBounds<Scalar> spectral_bounds(const LinearOperator<Scalar>& op) {
  return {op_norm(op), gram_min_eig(op, GramSide::Gram), gram_min_eig(op, GramSide::Cogram)};
}

/// True when op is exactly s * I for the given s (any representation).
template <typename Scalar>
bool is_scaled_identity(const LinearOperator<Scalar>& op, Scalar s) {
  using Kind = typename LinearOperator<Scalar>::Kind;
  if (op.rows() != op.cols()) return false;
  switch (op.kind()) {
    case Kind::ScaledIdentity:
      return op.scale() == s;
    case Kind::Diagonal:
      return (op.diagonal_entries().array() == s).all();
    case Kind::Dense:
      return op.dense_matrix() == s * Matrix<Scalar>::Identity(op.rows(), op.cols());
    case Kind::MatrixFree:
      return false;
  }
  return false;
}

}  // namespace vmpladmm
