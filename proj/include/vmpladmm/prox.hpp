#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "vmpladmm/types.hpp"

namespace vmpladmm {

/// Family tag of a nonsmooth term. Custom covers user-supplied oracles.
enum class PenaltyFamily { Zero, L1, L0, LHalf, Box, Custom };

inline const char* to_string(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::Zero: return "zero";
    case PenaltyFamily::L1: return "l1";
    case PenaltyFamily::L0: return "l0";
    case PenaltyFamily::LHalf: return "l_half";
    case PenaltyFamily::Box: return "box";
    case PenaltyFamily::Custom: return "custom";
  }
  return "unknown";
}

/// Oracle for a proper lsc function f: value (possibly +inf) and the weighted
/// proximal map  argmin_u f(u) + 1/2 sum_i w_i (u_i - v_i)^2.
///
/// `subdiff_distance(x, s)` optionally returns dist(s, ∂f(x)) for the limiting
/// subdifferential; built-ins provide it exactly.
template <typename Scalar = double>
struct ProxOracle {
  using VectorType = Vector<Scalar>;
  using EvalFn = std::function<Scalar(const VectorType&)>;
  using ProxFn = std::function<VectorType(const VectorType&, const VectorType&)>;
  using SubdiffDistFn = std::function<Scalar(const VectorType&, const VectorType&)>;

  EvalFn eval;
  ProxFn prox;
  SubdiffDistFn subdiff_distance;
  bool is_separable = true;
  bool coercive = false;
  PenaltyFamily family = PenaltyFamily::Custom;
  /// lambda for penalties, half-width for the box.
  Scalar parameter{0};
  std::string lsc_witness;
};

namespace scalar_prox {

template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return Scalar(0);
}

/// Keeps v iff v^2 > 2 lambda / w; the tie goes to zero.
template <typename Scalar>
Scalar hard_threshold(Scalar v, Scalar lambda, Scalar w) {
  return v * v > Scalar(2) * lambda / w ? v : Scalar(0);
}

/// Global minimizer of mu |u|^{1/2} + 1/2 (u - v)^2.
///
/// Nonzero stationary points satisfy s^3 - |v| s + mu/2 = 0 with s = sqrt|u|;
/// the largest root comes from the trigonometric form of the depressed cubic
/// and is compared against u = 0 (ties go to zero).
template <typename Scalar>
Scalar half_threshold(Scalar v, Scalar mu) {
  const Scalar a = std::abs(v);
  if (a == Scalar(0) || mu <= Scalar(0)) return mu <= Scalar(0) ? v : Scalar(0);
  // Three real roots iff 4 a^3 >= 27 (mu/2)^2.
  if (Scalar(4) * a * a * a < Scalar(27) * mu * mu / Scalar(4)) return Scalar(0);
  const Scalar arg = -(Scalar(3) * mu / (Scalar(4) * a)) * std::sqrt(Scalar(3) / a);
  const Scalar phi = std::acos(std::clamp(arg, Scalar(-1), Scalar(1)));
  const Scalar s = Scalar(2) * std::sqrt(a / Scalar(3)) * std::cos(phi / Scalar(3));
  const Scalar u = s * s;
  const Scalar obj_u = mu * s + Scalar(0.5) * (u - a) * (u - a);
  const Scalar obj_0 = Scalar(0.5) * a * a;
  if (!(obj_u < obj_0)) return Scalar(0);
  return v > 0 ? u : -u;
}

}  // namespace scalar_prox

namespace detail {

template <typename Scalar>
void check_weights(const Vector<Scalar>& v, const Vector<Scalar>& w) {
  require_size(w.size(), v.size(), "prox weights");
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w[i] > Scalar(0))) throw WeightError("prox: weights must be strictly positive");
  }
}

template <typename Scalar, typename F>
Vector<Scalar> coordinatewise(const Vector<Scalar>& v, const Vector<Scalar>& w, F&& f) {
  Vector<Scalar> out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = f(v[i], w[i]);
  return out;
}

}  // namespace detail

/// Weighted proximal map of f. Rejects non-separable f under a non-scalar metric.
template <typename Scalar>
Vector<Scalar> prox(const ProxOracle<Scalar>& f, const Vector<Scalar>& v, const Vector<Scalar>& w) {
  detail::check_weights(v, w);
  if (!f.is_separable && w.size() > 0 && (w.array() != w[0]).any()) {
    throw UnsupportedMetricError("prox: non-separable f requires a scalar metric");
  }
  Vector<Scalar> out = f.prox(v, w);
  detail::require_size(out.size(), v.size(), "prox output");
  return out;
}

template <typename Scalar = double>
ProxOracle<Scalar> zero_function() {
  ProxOracle<Scalar> f;
  f.family = PenaltyFamily::Zero;
  f.lsc_witness = "zero";
  f.eval = [](const Vector<Scalar>&) { return Scalar(0); };
  f.prox = [](const Vector<Scalar>& v, const Vector<Scalar>&) { return v; };
  f.subdiff_distance = [](const Vector<Scalar>&, const Vector<Scalar>& s) { return s.norm(); };
  return f;
}

/// lambda * ||x||_1.
template <typename Scalar = double>
ProxOracle<Scalar> l1_norm(Scalar lambda) {
  if (lambda < 0) throw ParameterError("l1_norm: lambda must be nonnegative");
  ProxOracle<Scalar> f;
  f.family = PenaltyFamily::L1;
  f.parameter = lambda;
  f.coercive = lambda > 0;
  f.lsc_witness = "l1 (convex, semi-algebraic)";
  f.eval = [lambda](const Vector<Scalar>& x) { return lambda * x.template lpNorm<1>(); };
  f.prox = [lambda](const Vector<Scalar>& v, const Vector<Scalar>& w) {
    return detail::coordinatewise(v, w, [lambda](Scalar vi, Scalar wi) {
      return scalar_prox::soft_threshold(vi, lambda / wi);
    });
  };
  f.subdiff_distance = [lambda](const Vector<Scalar>& x, const Vector<Scalar>& s) {
    Scalar acc = 0;
    for (Index i = 0; i < x.size(); ++i) {
      Scalar d;
      if (x[i] > 0) d = s[i] - lambda;
      else if (x[i] < 0) d = s[i] + lambda;
      else d = std::max(std::abs(s[i]) - lambda, Scalar(0));
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  return f;
}

/// lambda * ||x||_0.
template <typename Scalar = double>
ProxOracle<Scalar> l0_norm(Scalar lambda) {
  if (lambda < 0) throw ParameterError("l0_norm: lambda must be nonnegative");
  ProxOracle<Scalar> f;
  f.family = PenaltyFamily::L0;
  f.parameter = lambda;
  f.lsc_witness = "l0 (nonconvex, semi-algebraic)";
  f.eval = [lambda](const Vector<Scalar>& x) {
    return lambda * static_cast<Scalar>((x.array() != Scalar(0)).count());
  };
  f.prox = [lambda](const Vector<Scalar>& v, const Vector<Scalar>& w) {
    return detail::coordinatewise(v, w, [lambda](Scalar vi, Scalar wi) {
      return scalar_prox::hard_threshold(vi, lambda, wi);
    });
  };
  // Limiting subdifferential: {0} off zero, all of R at zero.
  f.subdiff_distance = [](const Vector<Scalar>& x, const Vector<Scalar>& s) {
    Scalar acc = 0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] != Scalar(0)) acc += s[i] * s[i];
    }
    return std::sqrt(acc);
  };
  return f;
}

/// lambda * sum_i |x_i|^{1/2}.
template <typename Scalar = double>
ProxOracle<Scalar> l_half(Scalar lambda) {
  if (lambda < 0) throw ParameterError("l_half: lambda must be nonnegative");
  ProxOracle<Scalar> f;
  f.family = PenaltyFamily::LHalf;
  f.parameter = lambda;
  f.coercive = lambda > 0;
  f.lsc_witness = "l_1/2 quasi-norm (nonconvex, semi-algebraic)";
  f.eval = [lambda](const Vector<Scalar>& x) { return lambda * x.cwiseAbs().cwiseSqrt().sum(); };
  f.prox = [lambda](const Vector<Scalar>& v, const Vector<Scalar>& w) {
    return detail::coordinatewise(v, w, [lambda](Scalar vi, Scalar wi) {
      return scalar_prox::half_threshold(vi, lambda / wi);
    });
  };
  f.subdiff_distance = [lambda](const Vector<Scalar>& x, const Vector<Scalar>& s) {
    Scalar acc = 0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] == Scalar(0)) continue;
      const Scalar g = lambda / (Scalar(2) * std::sqrt(std::abs(x[i])));
      const Scalar d = s[i] - (x[i] > 0 ? g : -g);
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  return f;
}

/// Indicator of the box [-half_width, half_width]^n.
template <typename Scalar = double>
ProxOracle<Scalar> box_indicator(Scalar half_width) {
  if (!(half_width > 0)) throw ParameterError("box_indicator: half-width must be positive");
  const Scalar b = half_width;
  ProxOracle<Scalar> f;
  f.family = PenaltyFamily::Box;
  f.parameter = b;
  f.coercive = true;
  f.lsc_witness = "indicator of a box (semi-algebraic set)";
  f.eval = [b](const Vector<Scalar>& x) {
    return x.cwiseAbs().maxCoeff() <= b ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  };
  f.prox = [b](const Vector<Scalar>& v, const Vector<Scalar>&) {
    return Vector<Scalar>(v.cwiseMax(-b).cwiseMin(b));
  };
  // Normal cone of the box.
  f.subdiff_distance = [b](const Vector<Scalar>& x, const Vector<Scalar>& s) {
    Scalar acc = 0;
    for (Index i = 0; i < x.size(); ++i) {
      Scalar d = s[i];
      if (std::abs(x[i]) > b) return std::numeric_limits<Scalar>::infinity();
      if (x[i] == b) d = std::min(s[i], Scalar(0));
      else if (x[i] == -b) d = std::max(s[i], Scalar(0));
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  return f;
}

}  // namespace vmpladmm
