#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vmpladmm/errors.hpp"

namespace vmpladmm {

enum class RateRegime { Finite, Linear, Sublinear };

inline const char* to_string(RateRegime r) {
  switch (r) {
    case RateRegime::Finite: return "finite";
    case RateRegime::Linear: return "linear";
    case RateRegime::Sublinear: return "sublinear";
  }
  return "unknown";
}

/// Empirical KL exponent estimate from an error sequence E_1, E_2, ...
///
/// finite:    E hits exactly zero; theta_hat = 0.
/// linear:    log E_k ~ k log(ratio); theta_hat reported as 1/2.
/// sublinear: log E_k ~ -power log k with power = 1/(2 theta - 1).
template <typename Scalar = double>
struct RateFit {
  Scalar theta_hat{0};
  RateRegime regime = RateRegime::Finite;
  Scalar fit_quality{0};
  Scalar ratio{0};
  Scalar power{0};
  Scalar linear_quality{0};
  Scalar sublinear_quality{0};
  std::size_t points = 0;
};

namespace detail {

template <typename Scalar>
struct LineFit {
  Scalar slope{0};
  Scalar intercept{0};
  Scalar r2{0};
};

template <typename Scalar>
LineFit<Scalar> least_squares_line(const std::vector<Scalar>& t, const std::vector<Scalar>& u) {
  const auto n = static_cast<Scalar>(t.size());
  Scalar mt = 0, mu = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mu += u[i];
  }
  mt /= n;
  mu /= n;
  Scalar stt = 0, stu = 0, suu = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stu += (t[i] - mt) * (u[i] - mu);
    suu += (u[i] - mu) * (u[i] - mu);
  }
  LineFit<Scalar> fit;
  fit.slope = stu / stt;
  fit.intercept = mu - fit.slope * mt;
  Scalar ss_res = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Scalar e = u[i] - (fit.intercept + fit.slope * t[i]);
    ss_res += e * e;
  }
  if (suu > 0) {
    fit.r2 = Scalar(1) - ss_res / suu;
  } else {
    fit.r2 = ss_res == 0 ? Scalar(1) : Scalar(0);
  }
  return fit;
}

}  // namespace detail

inline constexpr std::size_t kMinRatePoints = 10;

/// errors[i] is E_{i+1}. Fits on the last ceil(tail_fraction * N) entries.
template <typename Scalar>
RateFit<Scalar> fit_kl_rate(std::span<const Scalar> errors, Scalar tail_fraction = Scalar(0.5)) {
  if (!(tail_fraction > 0) || tail_fraction > 1) {
    throw ParameterError("fit_kl_rate: tail_fraction must lie in (0, 1]");
  }
  const std::size_t n = errors.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errors[i] >= 0) || !std::isfinite(errors[i])) {
      throw ParameterError("fit_kl_rate: errors must be finite and nonnegative");
    }
  }

  std::size_t first_zero = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i] == 0) {
      first_zero = i;
      break;
    }
  }
  for (std::size_t i = first_zero; i < n; ++i) {
    if (errors[i] != 0) throw ParameterError("fit_kl_rate: zero error followed by a positive one");
  }
  if (first_zero < n) {
    if (n < kMinRatePoints) throw InsufficientDataError("fit_kl_rate: fewer than 10 points");
    RateFit<Scalar> fit;
    fit.regime = RateRegime::Finite;
    fit.theta_hat = 0;
    fit.fit_quality = 1;
    fit.points = n;
    return fit;
  }

  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<Scalar>(n)));
  if (tail < kMinRatePoints) throw InsufficientDataError("fit_kl_rate: fewer than 10 usable points");
  const std::size_t start = n - tail;

  std::vector<Scalar> k, logk, loge;
  k.reserve(tail);
  logk.reserve(tail);
  loge.reserve(tail);
  for (std::size_t i = start; i < n; ++i) {
    const auto kk = static_cast<Scalar>(i + 1);
    k.push_back(kk);
    logk.push_back(std::log(kk));
    loge.push_back(std::log(errors[i]));
  }
  const auto lin = detail::least_squares_line(k, loge);
  const auto sub = detail::least_squares_line(logk, loge);

  RateFit<Scalar> fit;
  fit.points = tail;
  fit.linear_quality = lin.r2;
  fit.sublinear_quality = sub.r2;
  fit.ratio = std::exp(lin.slope);
  fit.power = -sub.slope;
  if (lin.r2 >= sub.r2) {
    fit.regime = RateRegime::Linear;
    fit.fit_quality = lin.r2;
    fit.theta_hat = Scalar(0.5);
  } else {
    fit.regime = RateRegime::Sublinear;
    fit.fit_quality = sub.r2;
    // power <= 1 would put theta at or above 1; clamp into [1/2, 1).
    const Scalar theta = fit.power > 0 ? (Scalar(1) + Scalar(1) / fit.power) / Scalar(2) : Scalar(0.5);
    fit.theta_hat = std::min(std::max(theta, Scalar(0.5)), std::nextafter(Scalar(1), Scalar(0)));
  }
  return fit;
}

template <typename Scalar>
RateFit<Scalar> fit_kl_rate(const std::vector<Scalar>& errors, Scalar tail_fraction = Scalar(0.5)) {
  return fit_kl_rate(std::span<const Scalar>(errors), tail_fraction);
}

}  // namespace vmpladmm
