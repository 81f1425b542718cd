#include <gtest/gtest.h>

#include <vector>

#include "psgdwa/data.hpp"
#include "psgdwa/optimizer.hpp"

namespace psgdwa {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector scalar(double v) { return vec({v}); }

TEST(Gradient, HandEvaluated) {
  EXPECT_TRUE(gradient_estimate(vec({1, 1}), Sample(vec({1, 0}), 2.0)).isApprox(vec({-2, 0})));
  EXPECT_TRUE(gradient_estimate(vec({3, -4}), Sample(vec({0, 0}), 7.0)).isZero());
  EXPECT_TRUE(gradient_estimate(vec({1, 1}), Sample(vec({1, 2}), 0.0)).isApprox(vec({6, 12})));
  EXPECT_THROW((void)gradient_estimate(vec({1}), Sample(vec({1, 2}), 0.0)),
               DimensionMismatch);
}

TEST(Projection, BoxBallUnbounded) {
  const auto box = ConstraintSet::box(vec({-1, -1}), vec({1, 1}));
  EXPECT_TRUE(project(vec({2, 0.5}), box).isApprox(vec({1, 0.5})));
  const auto ball = ConstraintSet::ball(vec({0, 0}), 1.0);
  EXPECT_TRUE(project(vec({3, 4}), ball).isApprox(vec({0.6, 0.8})));
  EXPECT_EQ(project(vec({3, 4}), ConstraintSet::unbounded()), vec({3, 4}));
  for (const auto& set : {box, ball}) {
    EXPECT_EQ(project(vec({0.1, -0.2}), set), vec({0.1, -0.2}));
  }
}

TEST(Projection, IdempotentAndNonExpansive) {
  NormalRng rng(7);
  const auto box = ConstraintSet::box(vec({-1, 0, 2}), vec({1, 3, 2.5}));
  const auto ball = ConstraintSet::ball(vec({1, -1, 0}), 2.0);
  for (int t = 0; t < 200; ++t) {
    Vector p(3), q(3);
    for (int i = 0; i < 3; ++i) {
      p[i] = 5 * rng.normal();
      q[i] = 5 * rng.normal();
    }
    for (const auto& set : {box, ball}) {
      const Vector pp = project(p, set);
      EXPECT_TRUE(set.contains(pp, 1e-12));
      EXPECT_LE((project(pp, set) - pp).norm(), 1e-12);
      EXPECT_LE((pp - project(q, set)).norm(), (p - q).norm() + 1e-12);
    }
  }
}

TEST(Step, HandTracedFirstStep) {
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 1);
  s = step(s, Sample(scalar(1), 1.0), sched, set);
  EXPECT_DOUBLE_EQ(s.omega[0], 1.0);
  EXPECT_DOUBLE_EQ(s.omega_bar[0], 0.6);
  EXPECT_EQ(s.k, 1u);
}

TEST(Step, WeightedAverageOfThreeIterates) {
  // omega_0 = 0, omega_1 = 1, omega_2 = 2 with weights 1 : 1.5 : 2.
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 1);
  s = step(s, Sample(scalar(1), 1.0), sched, set);  // lambda_0 = 0.5: 0 -> 1
  // lambda_1 = 1/3; choose y so that omega moves from 1 to 2: 1 - (2/3)(1 - y) = 2.
  s = step(s, Sample(scalar(1), 2.5), sched, set);
  ASSERT_NEAR(s.omega[0], 2.0, 1e-15);
  EXPECT_NEAR(s.omega_bar[0], 11.0 / 9.0, 1e-15);
}

TEST(Step, ZeroFeatureKeepsIterateButAdvancesAverage) {
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 2, vec({1, 1}));
  const auto before = s.weights.normalizer;
  s = step(s, Sample(vec({0, 0}), 5.0), sched, set);
  EXPECT_EQ(s.omega, vec({1, 1}));
  EXPECT_EQ(s.omega_bar, vec({1, 1}));
  EXPECT_GT(s.weights.normalizer, before);
  EXPECT_EQ(s.k, 1u);
}

TEST(Step, IteratesStayFeasible) {
  SyntheticSpec spec;
  spec.d = 4;
  spec.omega_star = ramp(4);
  spec.sigma2 = 1.0;
  spec.seed = 3;
  SyntheticStream stream(spec);
  const auto set = ConstraintSet::box_around(spec.omega_star, 1.0);
  const auto sched = StepSchedule::constrained(10.0, 1.0);
  for (auto m : {MethodSpec::psgd(), MethodSpec::psgd_a(0.01), MethodSpec::psgd_wa()}) {
    auto s = OptimizerState::initial(m, sched, set, 4);
    for (int k = 0; k < 500; ++k) {
      s = step(s, stream.draw(), sched, set);
      ASSERT_TRUE(set.contains(s.omega, 1e-12));
      ASSERT_TRUE(set.contains(s.estimate(), 1e-9));
    }
  }
}

TEST(Step, PsgdEstimateIsLastIterate) {
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  auto s = OptimizerState::initial(MethodSpec::psgd(), sched, set, 1);
  s = step(s, Sample(scalar(1), 1.0), sched, set);
  EXPECT_EQ(s.estimate(), s.omega);
}

TEST(Step, PsgdAUsesConstantStepAndUniformAverage) {
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  auto s = OptimizerState::initial(MethodSpec::psgd_a(0.25), sched, set, 1);
  // omega_1 = 0 - 0.25 * 2 * (0 - 2) = 1; omega_2 = 1 - 0.5 * (1 - 2) = 1.5
  s = step(s, Sample(scalar(1), 2.0), sched, set);
  s = step(s, Sample(scalar(1), 2.0), sched, set);
  EXPECT_DOUBLE_EQ(s.omega[0], 1.5);
  EXPECT_DOUBLE_EQ(s.omega_bar[0], (0.0 + 1.0 + 1.5) / 3.0);
}

TEST(ScalarStep, HandTraced) {
  const auto sched = StepSchedule::scalar_unconstrained(1.0);
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched,
                                   ConstraintSet::unbounded(), 1);
  s = step_scalar_unconstrained(s, Sample(scalar(1), 1.0), sched);
  EXPECT_DOUBLE_EQ(s.omega[0], 1.0);
  s = step_scalar_unconstrained(s, Sample(scalar(1), 3.0), sched);
  EXPECT_DOUBLE_EQ(s.omega[0], 2.0);
  const auto fixed = step_scalar_unconstrained(s, Sample(scalar(1), 2.0), sched);
  EXPECT_DOUBLE_EQ(fixed.omega[0], 2.0);
}

TEST(ScalarStep, ZeroFeatureIsSkipped) {
  const auto sched = StepSchedule::scalar_unconstrained(1.0);
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched,
                                   ConstraintSet::unbounded(), 1);
  s = step_scalar_unconstrained(s, Sample(scalar(0), 1.0), sched);
  EXPECT_EQ(s.k, 0u);
  EXPECT_EQ(s.skipped, 1u);
}

TEST(ScalarStep, RequiresScalarSetup) {
  const auto scalar_sched = StepSchedule::scalar_unconstrained(1.0);
  auto s2 = OptimizerState::initial(MethodSpec::psgd_wa(), scalar_sched,
                                    ConstraintSet::unbounded(), 2);
  EXPECT_THROW((void)step_scalar_unconstrained(s2, Sample(vec({1, 1}), 0.0), scalar_sched),
               std::invalid_argument);
  const auto constrained = StepSchedule::constrained(2.0, 1.0);
  auto s1 = OptimizerState::initial(MethodSpec::psgd_wa(), constrained,
                                    ConstraintSet::unbounded(), 1);
  EXPECT_THROW((void)step_scalar_unconstrained(s1, Sample(scalar(1), 0.0), constrained),
               std::logic_error);
}

// Weighted sum with independently written weights.
Vector direct_average(const std::vector<Vector>& iterates, bool scalar_weights,
                      double gamma) {
  Vector num = Vector::Zero(iterates.front().size());
  double den = 0.0;
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const double r = static_cast<double>(i);
    const double w = scalar_weights ? (i == 0 ? 1.0 : (gamma + r - 1.0) / gamma)
                                    : (gamma + r) / gamma;
    num += w * iterates[i];
    den += w;
  }
  return num / den;
}

TEST(Averaging, RecursionMatchesDirectSumConstrained) {
  SyntheticSpec spec;
  spec.d = 5;
  spec.omega_star = ramp(5);
  spec.sigma2 = 1.0;
  spec.seed = 11;
  SyntheticStream stream(spec);
  const auto set = ConstraintSet::box_around(spec.omega_star, 3.0);
  const auto sched = StepSchedule::constrained(3.0, 1.0);
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 5);
  std::vector<Vector> iterates{s.omega};
  for (int k = 0; k < 50; ++k) {
    s = step(s, stream.draw(), sched, set);
    iterates.push_back(s.omega);
    const Vector want = direct_average(iterates, false, 3.0);
    ASSERT_LE((s.omega_bar - want).norm(), 1e-10 * want.norm());
  }
}

TEST(Averaging, RecursionMatchesDirectSumScalar) {
  SyntheticSpec spec;
  spec.d = 1;
  spec.omega_star = scalar(2.0);
  spec.sigma2 = 1.0;
  spec.seed = 12;
  SyntheticStream stream(spec);
  const auto sched = StepSchedule::scalar_unconstrained(1.5);
  auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched,
                                   ConstraintSet::unbounded(), 1);
  std::vector<Vector> iterates{s.omega};
  for (int k = 0; k < 50; ++k) {
    s = step_scalar_unconstrained(s, stream.draw(), sched);
    iterates.push_back(s.omega);
    const Vector want = direct_average(iterates, true, 1.5);
    ASSERT_NEAR(s.omega_bar[0], want[0], 1e-10 * std::abs(want[0]));
  }
}

TEST(Run, CheckpointsAndExhaustion) {
  const auto sched = StepSchedule::constrained(2.0, 1.0);
  const auto set = ConstraintSet::unbounded();
  const std::vector<Sample> data{Sample(scalar(1), 1.0), Sample(scalar(1), 2.5)};
  const auto init = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 1);

  VectorStream one(data);
  const std::vector<std::uint64_t> cp1{1};
  const auto t1 = run(init, one, sched, set, 1, cp1);
  ASSERT_EQ(t1.size(), 1u);
  EXPECT_EQ(t1[0].estimate, step(init, data[0], sched, set).omega_bar);

  VectorStream none(data);
  EXPECT_TRUE(run(init, none, sched, set, 2, {}).empty());

  VectorStream all(data);
  const std::vector<std::uint64_t> cp{0, 2};
  const auto t = run(init, all, sched, set, 2, cp);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].k, 0u);
  EXPECT_NEAR(t[1].estimate[0], 11.0 / 9.0, 1e-15);

  VectorStream short_stream(data);
  EXPECT_THROW((void)run(init, short_stream, sched, set, 3, cp), std::runtime_error);

  VectorStream bad(data);
  const std::vector<std::uint64_t> unordered{2, 1};
  EXPECT_THROW((void)run(init, bad, sched, set, 2, unordered), std::invalid_argument);
}

}  // namespace
}  // namespace psgdwa
