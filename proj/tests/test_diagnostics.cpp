#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"

using namespace vmpladmm;
using namespace testing_support;

namespace {

ProblemSpec<double> zero_split(Vec c) {
  const Index p = c.size();
  return ProblemSpec<double>{zero_function<double>(), zero_smooth<double>(p), zero_smooth<double>(p),
                             LinearOperator<double>::identity(p), LinearOperator<double>::scaled_identity(p, -1.0),
                             std::move(c)};
}

TheoryConstants<double> unit_constants() {
  TheoryConstants<double> c;
  c.L_g = 0;
  c.L_h = 1;
  c.q1_inf = c.q1_sup = 1;
  c.q2_inf = c.q2_sup = 1;
  c.alpha = 1;
  c.beta = 1;
  c.r = 2;
  c.norm_A = c.norm_B = 1;
  c.lam_min_AtA = c.lam_min_BtB = c.lam_min_BBt = 1;
  c.derive();
  return c;
}

}  // namespace

TEST(AugLagrangian, AllZero) {
  EXPECT_EQ(aug_lagrangian(zero_split(vec({0})), 1.0, vec({0}), vec({0}), vec({0})), 0.0);
}

TEST(AugLagrangian, MultiplierAndPenaltyTerms) {
  // Residual Ax + By + c = c = 2.
  EXPECT_EQ(aug_lagrangian(zero_split(vec({2})), 1.0, vec({0}), vec({0}), vec({1})), 4.0);
}

TEST(AugLagrangian, ConsensusToyAfterOneStep) {
  const double x = 0, y = 0.5, z = -0.5, alpha = 1;
  const double res = x - y;
  const double expected = 0.5 * (y - 1) * (y - 1) + z * res + 0.5 * alpha * res * res;
  EXPECT_EQ(expected, 0.5);
  EXPECT_DOUBLE_EQ(aug_lagrangian(toy(), alpha, vec({x}), vec({y}), vec({z})), expected);
}

TEST(AugLagrangian, InfiniteOutsideDomain) {
  auto prob = zero_split(vec({0}));
  prob.f = box_indicator(1.0);
  EXPECT_EQ(aug_lagrangian(prob, 1.0, vec({2}), vec({0}), vec({0})), std::numeric_limits<double>::infinity());
}

TEST(ComputeConstants, ThetaAtBetaOne) {
  const auto prob = toy();
  const auto c = compute_constants(prob, plain_config(prob, 1, 1));
  EXPECT_EQ(c.theta0, 8.0);
  EXPECT_EQ(c.gamma0, 0.0);
  EXPECT_EQ(c.theta1, 2.0);
}

TEST(ComputeConstants, RhoAndRhoTilde) {
  // g = 1/2 ||x||^2 gives L_g = 1.
  auto prob = toy();
  prob.g = least_squares<double>(Mat::Identity(1, 1), vec({0}));
  const auto c = compute_constants(prob, plain_config(prob, 2, 1));
  EXPECT_EQ(c.L_g, 1.0);
  EXPECT_EQ(c.rho, 3.0);
  EXPECT_DOUBLE_EQ(c.rho_tilde, 3 * std::sqrt(3.0) + 64);
}

TEST(ComputeConstants, BetaGuard) {
  const auto prob = toy();
  auto cfg = plain_config(prob, 1, 1);
  cfg.beta = 1.97;
  EXPECT_THROW(compute_constants(prob, cfg), BetaGuardError);
  cfg.beta = 0.01;
  EXPECT_THROW(compute_constants(prob, cfg), BetaGuardError);
}

TEST(ComputeConstants, OverRelaxedAsPrinted) {
  const auto prob = toy();
  auto cfg = plain_config(prob, 1, 1, 2.0, 1.5);
  const auto c = compute_constants(prob, cfg);
  const double den = 2.0 * 1.5 * 1.0 * (1 - 0.5);
  EXPECT_DOUBLE_EQ(c.theta0, 2 * 1.5 * 4 / den);
  EXPECT_DOUBLE_EQ(c.gamma0, 0.5 / den);
  EXPECT_DOUBLE_EQ(c.theta1, 2 * 1.5 / den);
  EXPECT_GT(c.gamma0, 0.0);
}

TEST(ComputeConstants, RecomputationIsBitIdentical) {
  const auto inst = lasso_n20();
  const auto cfg = audited(inst.problem, 0.8);
  const auto a = compute_constants(inst.problem, cfg);
  auto b = a;
  b.derive();
  EXPECT_EQ(a.theta0, b.theta0);
  EXPECT_EQ(a.gamma0, b.gamma0);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.rho_tilde, b.rho_tilde);
  EXPECT_EQ(a.sigma, b.sigma);
}

TEST(Audit, FailsAtAlphaOneAndSuggestsFour) {
  const auto rep = check_sufficient_decrease(unit_constants());
  EXPECT_EQ(rep.sigma2, -9.0);
  EXPECT_FALSE(rep.sigma2_pass);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.suggested_alpha.has_value());
  EXPECT_EQ(*rep.suggested_alpha, 4.0);
}

TEST(Audit, PassesAtAlphaFour) {
  const auto c = unit_constants().with_alpha(4);
  EXPECT_EQ(c.theta0, 2.0);
  EXPECT_EQ(c.theta1, 0.5);
  EXPECT_EQ(c.sigma2, 1.5);
  const auto rep = check_sufficient_decrease(c);
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.suggested_alpha.has_value());
}

TEST(Audit, ZeroLgIsUnconditionalForSigma1) {
  auto c = unit_constants();
  c.lam_min_AtA = 0;
  c.derive();
  const auto rep = check_sufficient_decrease(c);
  EXPECT_TRUE(rep.sigma1_unconditional);
  EXPECT_TRUE(rep.sigma1_pass);
  EXPECT_EQ(rep.sigma1, c.q1_inf);
}

TEST(Audit, NoneFoundWhenSigma1CannotRecover) {
  auto c = unit_constants();
  c.L_g = 5;
  c.lam_min_AtA = 0;
  c.derive();
  const auto rep = check_sufficient_decrease(c);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.suggested_alpha.has_value());
  EXPECT_FALSE(rep.sigma1_unconditional);
}

TEST(RegLagrangian, EqualsAugLagrangianWithoutLag) {
  const auto inst = lasso_n20();
  const auto cfg = audited(inst.problem, 0.8);
  std::mt19937_64 rng(4);
  const auto s = initial_state(inst.problem, random_vector(20, rng), random_vector(20, rng), random_vector(20, rng));
  EXPECT_EQ(reg_lagrangian(inst.problem, cfg, s), aug_lagrangian(inst.problem, cfg.alpha, s.x, s.y, s.z));
}

TEST(RegLagrangian, BetaOneKeepsOnlyTheYCorrection) {
  const auto prob = toy();
  const auto cfg = plain_config(prob, 1, 1);
  auto s = initial_state(prob, vec({0.2}), vec({0.7}), vec({0.4}));
  s.y_prev = vec({0.1});
  s.z_prev = vec({-3});
  const auto c = compute_constants(prob, cfg);
  const double lag = aug_lagrangian(prob, 1.0, s.x, s.y, s.z);
  EXPECT_DOUBLE_EQ(reg_lagrangian(prob, cfg, s), lag + 2 * 8 * 0.36);
  EXPECT_EQ(c.gamma0, 0.0);
}

TEST(RegLagrangian, RandomStateMatchesStraightLineRecomputation) {
  std::mt19937_64 rng(5);
  const Index n = 4, m = 3, p = 3;
  const Mat A = random_matrix(p, n, 51);
  const Mat B = random_matrix(p, m, 52);
  const Mat Dg = random_matrix(5, n, 53);
  const Mat Dh = random_matrix(6, m, 54);
  const Vec bg = random_vector(5, rng), bh = random_vector(6, rng), c = random_vector(p, rng);
  const double lambda = 0.3;
  ProblemSpec<double> prob{l1_norm(lambda), least_squares<double>(Dg, bg), least_squares<double>(Dh, bh),
                           LinearOperator<double>::dense(A), LinearOperator<double>::dense(B), c};
  auto cfg = plain_config(prob, 2.0, 1.5, 3.0, 0.8);
  IterateState<double> s;
  s.x = random_vector(n, rng);
  s.y = random_vector(m, rng);
  s.z = random_vector(p, rng);
  s.y_prev = random_vector(m, rng);
  s.z_prev = random_vector(p, rng);
  s.residual = A * s.x + B * s.y + c;

  // Straight-line evaluation from the raw fields.
  const double alpha = 3.0, beta = 0.8, r = 2.0, q2 = 1.5;
  const Vec res = A * s.x + B * s.y + c;
  const double lag = lambda * s.x.cwiseAbs().sum() + 0.5 * (Dg * s.x - bg).squaredNorm() +
                     0.5 * (Dh * s.y - bh).squaredNorm() + s.z.dot(res) + 0.5 * alpha * res.squaredNorm();
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(B * B.transpose()).eigenvalues()(0);
  const double Lh = Eigen::SelfAdjointEigenSolver<Mat>(Dh.transpose() * Dh).eigenvalues()(m - 1);
  const double den = alpha * beta * lmin * (1 - std::abs(1 - beta));
  const double theta0 = 2 * beta * (Lh + q2) * (Lh + q2) / den;
  const double gamma0 = std::abs(1 - beta) / den;
  const double expected = lag + r * gamma0 * (B.transpose() * (s.z - s.z_prev)).squaredNorm() +
                          r * theta0 * (s.y - s.y_prev).squaredNorm();
  EXPECT_NEAR(reg_lagrangian(prob, cfg, s), expected, 1e-12 * (1 + std::abs(expected)));
}

TEST(SubgradientWitness, FixedPointIsZero) {
  const auto prob = toy();
  const auto cfg = plain_config(prob, 1, 1);
  const auto s = initial_state(prob, vec({1}), vec({1}), vec({0}));
  const auto metrics = metric_next<double>(cfg.schedule, 0, {});
  YStepSolver<double> ys(prob.B);
  const auto next = step(s, prob, cfg, metrics, ys);
  const auto w = subgradient_witness(s, next, prob, cfg, metrics);
  EXPECT_NEAR(w.d_norm, 0.0, 1e-14);
  EXPECT_NEAR(w.bound, 0.0, 1e-14);
  EXPECT_TRUE(w.within_bound);
}

TEST(SubgradientWitness, MultiplierOnlyStep) {
  // A = B = -I, g = h = 0, alpha = beta = 1, only z moves by v = 1.
  ProblemSpec<double> prob{zero_function<double>(), zero_smooth<double>(1), zero_smooth<double>(1),
                           LinearOperator<double>::scaled_identity(1, -1.0),
                           LinearOperator<double>::scaled_identity(1, -1.0), vec({0})};
  const auto cfg = plain_config(prob, 1, 1);
  const auto prev = initial_state(prob, vec({0}), vec({0}), vec({0}));
  IterateState<double> cur;
  cur.k = 1;
  cur.x = x_update(prev, prob, vec({1}), cfg);
  ASSERT_EQ(cur.x, vec({0}));
  cur.y = vec({0});
  cur.z = vec({1});
  cur.y_prev = prev.y;
  cur.z_prev = prev.z;
  cur.residual = prob.residual(cur.x, cur.y);
  const Metrics<double> metrics{vec({1}), vec({1})};
  const auto w = subgradient_witness(prev, cur, prob, cfg, metrics);
  EXPECT_EQ(w.dx, vec({-1}));
  EXPECT_EQ(w.dy, vec({-1}));
  EXPECT_EQ(w.dz, vec({1}));
  EXPECT_DOUBLE_EQ(w.d_norm, std::sqrt(3.0));
  EXPECT_EQ(w.bound, 3.0);
  EXPECT_TRUE(w.within_bound);
}

TEST(SubgradientWitness, StaleMetricDetected) {
  // Start off the constraint so the x-step depends on Q1.
  const auto prob = toy();
  const auto cfg = plain_config(prob, 1, 1);
  const auto s = initial_state(prob, vec({0}), vec({1}), vec({0}));
  const Metrics<double> used{vec({1}), vec({1})};
  YStepSolver<double> ys(prob.B);
  const auto next = step(s, prob, cfg, used, ys);
  EXPECT_NO_THROW(subgradient_witness(s, next, prob, cfg, used));
  EXPECT_THROW(subgradient_witness(s, next, prob, cfg, Metrics<double>{vec({2}), vec({1})}), StaleMetricError);
  // Not the successor of s.
  const auto after = step(next, prob, cfg, used, ys);
  EXPECT_THROW(subgradient_witness(s, after, prob, cfg, used), StaleMetricError);
}

TEST(Stationarity, ToyStationaryPoint) {
  const auto r = stationarity_residual(toy(), vec({1}), vec({1}), vec({0}));
  EXPECT_EQ(r.r_x, 0.0);
  EXPECT_EQ(r.r_y, 0.0);
  EXPECT_EQ(r.r_z, 0.0);
}

TEST(Stationarity, FeasibleButNotStationary) {
  const auto r = stationarity_residual(toy(), vec({0}), vec({0}), vec({0}));
  EXPECT_EQ(r.r_z, 0.0);
  EXPECT_GT(r.r_y, 0.0);
}

TEST(Stationarity, ProxSurrogateWithoutSubdifferential) {
  auto prob = toy();
  prob.f = l1_norm(1.0);
  prob.f.subdiff_distance = nullptr;
  // -A^* z = 0.5 lies inside the l1 subdifferential at zero.
  const auto r = stationarity_residual(prob, vec({0}), vec({0}), vec({-0.5}));
  EXPECT_EQ(r.r_x, 0.0);
  const auto r2 = stationarity_residual(prob, vec({0}), vec({0}), vec({-3}));
  EXPECT_EQ(r2.r_x, 2.0);
}

TEST(EvaluateStep, ToyRunPassesEveryCertificate) {
  const auto prob = toy();
  const auto cfg = plain_config(prob, 8, 1, 4.0);
  const auto res = solve(prob, cfg);
  ASSERT_TRUE(res.audit.pass);
  ASSERT_FALSE(res.trace.empty());
  for (const auto& rec : res.trace) {
    EXPECT_EQ(rec.certificates.size(), cert::kAll.size());
    EXPECT_EQ(rec.violations(), 0) << "k=" << rec.k;
  }
  EXPECT_EQ(res.trace.front().certificates.at(std::string(cert::kDualStepBound)).status, CertStatus::Skip);
  EXPECT_EQ(res.trace.front().certificates.at(std::string(cert::kRegLagrangianDecrease)).status, CertStatus::Skip);
}

TEST(EvaluateStep, ViolationsCarryNegativeSlack) {
  const auto prob = toy();
  const auto cfg = plain_config(prob, 1, 1);
  const auto consts = compute_constants(prob, cfg);
  const auto s = initial_state(prob);
  const auto metrics = metric_next<double>(cfg.schedule, 0, {});
  YStepSolver<double> ys(prob.B);
  auto next = step(s, prob, cfg, metrics, ys);
  next.y[0] += 1e-3;
  const auto rec = evaluate_step(s, next, prob, cfg, consts, false, metrics);
  const auto& yopt = rec.certificates.at(std::string(cert::kYOptimality));
  EXPECT_EQ(yopt.status, CertStatus::Fail);
  EXPECT_LT(yopt.slack, -yopt.tolerance);
  EXPECT_EQ(rec.certificates.at(std::string(cert::kZUpdateIdentity)).status, CertStatus::Fail);
  EXPECT_GE(rec.violations(), 2);
}

TEST(EvaluateStep, AuditFailureSkipsRegularizedDecrease) {
  const auto inst = lasso_n20();
  auto cfg = plain_config(inst.problem, 1, 1);
  cfg.max_iter = 5;
  const auto res = solve(inst.problem, cfg);
  ASSERT_FALSE(res.audit.pass);
  for (const auto& rec : res.trace) {
    EXPECT_EQ(rec.certificates.at(std::string(cert::kRegLagrangianDecrease)).status, CertStatus::Skip);
  }
}

class DescentProperty : public ::testing::TestWithParam<int> {};

// The x-step descent certificate must survive support changes of a
// nonconvex penalty.
TEST_P(DescentProperty, L0RunsHaveNoViolations) {
  SparseRegressionParams<double> p;
  p.n = 8;
  p.m_rows = 20;
  p.sparsity = 2;
  p.noise_sigma = 0.05;
  p.penalty = GetParam() % 2 == 0 ? Penalty::L0 : Penalty::LHalf;
  p.lambda = 0.5;
  p.seed = 300 + static_cast<std::uint64_t>(GetParam());
  const auto inst = make_sparse_regression(p);
  const auto res = solve(inst.problem, audited(inst.problem, 1.0, 3000));
  EXPECT_EQ(res.violations(), 0);
  for (const auto& rec : res.trace) {
    EXPECT_LE(rec.d_norm, rec.d_bound + 1e-8 * (1 + rec.d_bound));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, DescentProperty, ::testing::Range(0, 8));

TEST(LimitConsistency, ConvergedRunsSatisfyGapBound) {
  const auto inst = lasso_n20();
  const auto cfg = audited(inst.problem, 1.0);
  const auto res = solve(inst.problem, cfg);
  ASSERT_EQ(res.status, SolveStatus::Converged);
  const auto& s = res.final_state;
  const double gap = std::abs(inst.problem.objective(s.x, s.y) - aug_lagrangian(inst.problem, cfg.alpha, s.x, s.y, s.z));
  const double res_norm = s.residual.norm();
  EXPECT_LE(gap, s.z.norm() * res_norm + 0.5 * cfg.alpha * res_norm * res_norm + 1e-12);
}
