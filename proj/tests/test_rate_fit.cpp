#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "vmpladmm/rate_fit.hpp"

using namespace vmpladmm;

namespace {

std::vector<double> sequence(int n, double (*e)(int)) {
  std::vector<double> out;
  for (int k = 1; k <= n; ++k) out.push_back(e(k));
  return out;
}

}  // namespace

TEST(FitKlRate, GeometricIsLinear) {
  const auto fit = fit_kl_rate(sequence(100, [](int k) { return std::pow(0.5, k); }));
  EXPECT_EQ(fit.regime, RateRegime::Linear);
  EXPECT_NEAR(fit.ratio, 0.5, 1e-3);
  EXPECT_GT(fit.theta_hat, 0.0);
  EXPECT_LE(fit.theta_hat, 0.5);
  EXPECT_NEAR(fit.fit_quality, 1.0, 1e-12);
}

TEST(FitKlRate, InverseSquareIsSublinear) {
  const auto fit = fit_kl_rate(sequence(100, [](int k) { return 1.0 / (double(k) * k); }));
  EXPECT_EQ(fit.regime, RateRegime::Sublinear);
  EXPECT_NEAR(fit.power, 2.0, 1e-9);
  EXPECT_NEAR(fit.theta_hat, 0.75, 0.02);
}

TEST(FitKlRate, TrailingZerosAreFinite) {
  const auto fit = fit_kl_rate(sequence(20, [](int k) { return k >= 7 ? 0.0 : 1.0 / k; }));
  EXPECT_EQ(fit.regime, RateRegime::Finite);
  EXPECT_EQ(fit.theta_hat, 0.0);
}

TEST(FitKlRate, TooFewPoints) {
  EXPECT_THROW(fit_kl_rate(sequence(9, [](int k) { return 1.0 / k; }), 1.0), InsufficientDataError);
  // 30 points with tail 0.3 leaves 9.
  EXPECT_THROW(fit_kl_rate(sequence(30, [](int k) { return 1.0 / k; }), 0.3), InsufficientDataError);
  EXPECT_NO_THROW(fit_kl_rate(sequence(20, [](int k) { return 1.0 / k; })));
}

TEST(FitKlRate, RejectsMalformedInput) {
  EXPECT_THROW(fit_kl_rate(std::vector<double>(20, -1.0)), ParameterError);
  auto v = sequence(20, [](int k) { return 1.0 / k; });
  v[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit_kl_rate(v), ParameterError);
  auto w = sequence(20, [](int k) { return k == 10 ? 0.0 : 1.0 / k; });
  EXPECT_THROW(fit_kl_rate(w), ParameterError);
  EXPECT_THROW(fit_kl_rate(sequence(20, [](int k) { return 1.0 / k; }), 0.0), ParameterError);
  EXPECT_THROW(fit_kl_rate(sequence(20, [](int k) { return 1.0 / k; }), 1.5), ParameterError);
}

TEST(FitKlRate, SlowPowerClampsThetaBelowOne) {
  const auto fit = fit_kl_rate(sequence(200, [](int k) { return std::pow(double(k), -0.5); }));
  EXPECT_EQ(fit.regime, RateRegime::Sublinear);
  EXPECT_GE(fit.theta_hat, 0.5);
  EXPECT_LT(fit.theta_hat, 1.0);
}

TEST(FitKlRateProperty, RecoversRandomRatesAndPowers) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ur(0.1, 0.95), up(1.2, 4.0), uc(0.5, 5.0);
  for (int t = 0; t < 200; ++t) {
    const double q = ur(rng), c = uc(rng);
    std::vector<double> geo, poly;
    const double pw = up(rng);
    for (int k = 1; k <= 120; ++k) {
      geo.push_back(c * std::pow(q, k));
      poly.push_back(c * std::pow(double(k), -pw));
    }
    const auto g = fit_kl_rate(geo);
    EXPECT_EQ(g.regime, RateRegime::Linear);
    EXPECT_NEAR(g.ratio, q, 1e-9);
    const auto p = fit_kl_rate(poly);
    EXPECT_EQ(p.regime, RateRegime::Sublinear);
    EXPECT_NEAR(p.theta_hat, (1 + 1 / pw) / 2, 1e-9);
  }
}
