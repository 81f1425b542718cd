#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "psgdwa/bounds.hpp"

namespace psgdwa {
namespace {

MomentEstimates moments(double exx, double ex) {
  MomentEstimates m;
  m.exx_norm2 = exx;
  m.ex_norm2 = ex;
  return m;
}

TEST(CSquared, HandEvaluated) {
  EXPECT_DOUBLE_EQ(c_squared(1.0, 1, moments(1, 0), 0.0), 4.0);
  EXPECT_DOUBLE_EQ(c_squared(0.0, 1, moments(1, 1), 1.0), 4.0);
  EXPECT_DOUBLE_EQ(c_squared(2.0, 2, moments(3, 2), 0.5), 52.0);
  EXPECT_THROW((void)c_squared(std::numeric_limits<double>::infinity(), 1,
                               moments(1, 1), 1.0),
               std::invalid_argument);
}

TEST(FiniteSampleBound, FirstStep) {
  EXPECT_DOUBLE_EQ(theorem1_bound(0, 2.0, 1.0, moments(1, 1), 4.0, 0.0), 4.0);
  EXPECT_THROW((void)theorem1_bound(0, 1.5, 1.0, moments(1, 1), 4.0, 0.0),
               std::invalid_argument);
}

TEST(FiniteSampleBound, NoiselessDecaysFasterThanOneOverK) {
  const auto m = moments(3, 2);
  const double ratio = theorem1_bound(10000, 2.0, 1.0, m, 52.0, 0.0) /
                       theorem1_bound(100, 2.0, 1.0, m, 52.0, 0.0);
  EXPECT_LT(ratio, 1e-3);
}

TEST(FiniteSampleBound, NoiseTermLimitIsFourDSigma2) {
  // Identity correlation: mu = 1, E||x||^2 = d. With the transient term
  // removed (C^2 = 0), k * bound -> gamma^2 d sigma^2, i.e. 4 d sigma^2 at
  // gamma = 2.
  const double d = 25, sigma2 = 0.7;
  const auto m = moments(d * d + 2 * d, d);
  const std::uint64_t k = 100000000;
  const double kd = static_cast<double>(k);
  EXPECT_NEAR(kd * theorem1_bound(k, 2.0, 1.0, m, 0.0, sigma2), 4 * d * sigma2,
              1e-6 * 4 * d * sigma2);
  EXPECT_NEAR(kd * theorem1_bound(k, 10.0, 1.0, m, 0.0, sigma2), 100 * d * sigma2,
              1e-5 * 100 * d * sigma2);
}

TEST(IterateErrorBound, HandEvaluated) {
  EXPECT_DOUBLE_EQ(iterate_error_bound(0, 4.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(iterate_error_bound(3, 4.0, 2.0), 0.5);
}

TEST(ScalarLimitBound, HandEvaluated) {
  EXPECT_DOUBLE_EQ(theorem2_bound(3, 1.0, 1.0, 1.0, 1.0), 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(1000 * theorem2_bound(1000, 1.0, 1.0, 1.0, 1.0), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(theorem2_bound(7, 1.0, 0.0, 1.0, 1.0), 0.0);
  EXPECT_THROW((void)theorem2_bound(0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Moments, AnalyticGaussianIdentity) {
  SyntheticSpec spec;
  spec.d = 25;
  spec.omega_star = ramp(25);
  const auto m = analytic_moments(spec);
  EXPECT_DOUBLE_EQ(m.ex_norm2, 25.0);
  EXPECT_DOUBLE_EQ(m.exx_norm2, 675.0);
  const auto s = analytic_moments(spec, MatrixNorm::Spectral);
  EXPECT_DOUBLE_EQ(s.exx_norm2, 675.0);
}

TEST(Moments, EmpiricalAgreesWithAnalytic) {
  SyntheticSpec spec;
  spec.d = 3;
  spec.omega_star = ramp(3);
  spec.design = DiagonalCovariance{{1.0, 2.0, 0.5}};
  const auto a = analytic_moments(spec);
  const auto e = empirical_moments(spec, 400000, 17);
  EXPECT_NEAR(e.ex_norm2, a.ex_norm2, 0.01 * a.ex_norm2);
  EXPECT_NEAR(e.exx_norm2, a.exx_norm2, 0.03 * a.exx_norm2);
  ASSERT_TRUE(std::holds_alternative<EmpiricalMoments>(e.source));
  EXPECT_EQ(std::get<EmpiricalMoments>(e.source).n_samples, 400000u);
}

TEST(Moments, RankOneFrobeniusEqualsSpectral) {
  // Direct matrix norms of x x^T for one explicit x.
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  const Matrix xx = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(xx);
  const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(xx.norm(), spectral, 1e-12);
  const std::vector<Sample> one{Sample(x, 0.0)};
  EXPECT_NEAR(empirical_moments(one, MatrixNorm::Frobenius).exx_norm2,
              xx.squaredNorm(), 1e-12);
  EXPECT_NEAR(empirical_moments(one, MatrixNorm::Spectral).exx_norm2,
              spectral * spectral, 1e-12);
}

// Independent long-double evaluation of the weight-sum inequality using
// prod_{r=i+1}^{j-1} (1 - alpha_r) = prod r / (gamma + r).
long double lemma3_lhs(long double gamma, std::uint64_t i, std::uint64_t k) {
  long double sum = 0, prod = 1;
  for (std::uint64_t j = i + 1; j <= k; ++j) {
    if (j >= i + 2) {
      const auto r = static_cast<long double>(j - 1);
      prod *= r / (gamma + r);
    }
    const auto jd = static_cast<long double>(j);
    sum += (j == 0 ? 1.0L : (gamma + jd - 1) / gamma) * prod;
  }
  return sum;
}

TEST(WeightSumInequality, HoldsForGammaOneAndTwo) {
  for (double gamma : {1.0, 2.0}) {
    const auto report = scan_lemma3(gamma, 200);
    EXPECT_TRUE(report.holds) << gamma;
    EXPECT_FALSE(report.first_violation.has_value());
    // Tight at i = k - 1, where both sides equal (gamma + k - 1) / gamma.
    EXPECT_NEAR(report.max_ratio, 1.0, 1e-12);
    for (std::uint64_t i : {0ull, 17ull, 199ull}) {
      const long double rhs = (i + static_cast<long double>(gamma)) * (200 - i) / gamma;
      EXPECT_LE(lemma3_lhs(gamma, i, 200), rhs * (1 + 1e-15L)) << gamma << " " << i;
    }
  }
}

TEST(WeightSumInequality, ExactRationalCheck) {
  EXPECT_TRUE(check_lemma3_exact(1, 1, 50));
  EXPECT_TRUE(check_lemma3_exact(2, 1, 50));
  EXPECT_TRUE(check_lemma3_exact(5, 2, 30));
}

TEST(WeightSumInequality, PreconditionOnGamma) {
  EXPECT_THROW((void)scan_lemma3(0.5, 10), std::invalid_argument);
  EXPECT_THROW((void)check_lemma3_exact(1, 2, 10), std::invalid_argument);
}

TEST(Rho, ConstantRatios) {
  const std::vector<double> erm{1.0, 0.5, 0.25, 0.125, 0.0625};
  EXPECT_DOUBLE_EQ(rho_estimate(erm, erm), 1.0);
  std::vector<double> four;
  for (double e : erm) four.push_back(4 * e);
  EXPECT_DOUBLE_EQ(rho_estimate(four, erm), 4.0);
}

TEST(Rho, UsesOnlyTheTail) {
  // ceil(0.2 * 10) = 2 trailing checkpoints.
  const std::vector<double> erm(10, 1.0);
  std::vector<double> m{9, 9, 9, 9, 9, 9, 9, 9, 2, 4};
  EXPECT_DOUBLE_EQ(rho_estimate(m, erm), 3.0);
}

TEST(Rho, MissingTailErmIsAnError) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> erm{nan, 1.0, 0.0};
  const std::vector<double> m{1.0, 1.0, 1.0};
  EXPECT_THROW((void)rho_estimate(m, erm), std::invalid_argument);
  // A missing head is fine.
  const std::vector<double> erm_ok{nan, nan, nan, nan, 1.0};
  const std::vector<double> m5{1, 1, 1, 1, 2};
  EXPECT_DOUBLE_EQ(rho_estimate(m5, erm_ok), 2.0);
}

}  // namespace
}  // namespace psgdwa
