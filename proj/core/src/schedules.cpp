#include "psgdwa/schedules.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace psgdwa {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constrained:
      return "constrained";
    case ScheduleKind::ScalarUnconstrained:
      return "scalar";
  }
  return "?";
}

StepSchedule StepSchedule::constrained(double gamma, double mu) {
  if (!std::isfinite(gamma) || gamma < 2.0) {
    throw std::invalid_argument("gamma must be >= 2 for the constrained schedule");
  }
  if (!std::isfinite(mu) || !(mu > 0.0)) {
    throw std::invalid_argument("mu must be > 0");
  }
  return StepSchedule(ScheduleKind::Constrained, gamma, mu);
}

StepSchedule StepSchedule::scalar_unconstrained(double gamma) {
  if (!std::isfinite(gamma) || gamma < 1.0) {
    throw std::invalid_argument("gamma must be >= 1 for the scalar schedule");
  }
  return StepSchedule(ScheduleKind::ScalarUnconstrained, gamma, 1.0);
}

double StepSchedule::alpha(std::uint64_t k) const {
  return gamma_ / (gamma_ + static_cast<double>(k));
}

double StepSchedule::lambda_constrained(std::uint64_t k) const {
  if (kind_ != ScheduleKind::Constrained) {
    throw std::logic_error("lambda_constrained called on a scalar schedule");
  }
  return alpha(k) / (2.0 * mu_);
}

double StepSchedule::lambda_scalar(std::uint64_t k, double xk) const {
  if (kind_ != ScheduleKind::ScalarUnconstrained) {
    throw std::logic_error("lambda_scalar called on a constrained schedule");
  }
  if (xk == 0.0) throw std::invalid_argument("lambda_scalar: x_k must be nonzero");
  return alpha(k) / (2.0 * xk * xk);
}

double StepSchedule::weight(std::uint64_t k) const {
  const double kd = static_cast<double>(k);
  if (kind_ == ScheduleKind::Constrained) return (gamma_ + kd) / gamma_;
  // beta_0 = 1, beta_k = 1/alpha_{k-1}
  if (k == 0) return 1.0;
  return (gamma_ + kd - 1.0) / gamma_;
}

AverageWeights AverageWeights::initial(const StepSchedule& schedule) {
  return AverageWeights{schedule.weight(0), 0};
}

WeightAdvance advance_weights(const AverageWeights& weights,
                              const StepSchedule& schedule) {
  const std::uint64_t k = weights.k + 1;
  const double w = schedule.weight(k);
  const double s = weights.normalizer + w;
  return WeightAdvance{AverageWeights{s, k}, w / s};
}

std::optional<std::uint64_t> find_lemma2_violation(double gamma,
                                                   std::uint64_t k_max) {
  double s = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const double a = gamma / (gamma + static_cast<double>(k));
    s += 1.0 / a;
    if (a * a < 1.0 / s) return k;
  }
  return std::nullopt;
}

bool check_lemma2(double gamma, std::uint64_t k_max) {
  if (!(gamma >= 2.0)) {
    throw std::invalid_argument("check_lemma2: gamma must be >= 2 (got " +
                                std::to_string(gamma) + ")");
  }
  return !find_lemma2_violation(gamma, k_max).has_value();
}

}  // namespace psgdwa
