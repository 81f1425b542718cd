#pragma once

#include <cstdint>
#include <optional>

namespace psgdwa {

/// Which step/weight family a schedule produces.
///
///  - Constrained: lambda_k = alpha_k / (2 mu), averaging weights 1/alpha_i.
///    Requires gamma >= 2.
///  - ScalarUnconstrained: lambda_k = alpha_k / (2 x_k^2), averaging weights
///    beta_0 = 1, beta_k = 1/alpha_{k-1}. Requires gamma >= 1.
enum class ScheduleKind { Constrained, ScalarUnconstrained };

const char* to_string(ScheduleKind kind);

/// Base step alpha_k = gamma / (gamma + k) together with the scaling that
/// turns it into the actual step lambda_k.
class StepSchedule {
 public:
  static StepSchedule constrained(double gamma, double mu);
  static StepSchedule scalar_unconstrained(double gamma);

  [[nodiscard]] ScheduleKind kind() const { return kind_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double mu() const { return mu_; }

  [[nodiscard]] double alpha(std::uint64_t k) const;
  /// alpha_k / (2 mu). Throws std::logic_error for ScalarUnconstrained.
  [[nodiscard]] double lambda_constrained(std::uint64_t k) const;
  /// alpha_k / (2 x_k^2). Throws std::logic_error for Constrained and
  /// std::invalid_argument for x_k == 0.
  [[nodiscard]] double lambda_scalar(std::uint64_t k, double xk) const;

  /// Unnormalized averaging weight of iterate k.
  [[nodiscard]] double weight(std::uint64_t k) const;

 private:
  StepSchedule(ScheduleKind kind, double gamma, double mu)
      : kind_(kind), gamma_(gamma), mu_(mu) {}

  ScheduleKind kind_;
  double gamma_;
  double mu_;
};

/// Running normalizer S_k of the averaging weights, at iteration index k.
struct AverageWeights {
  double normalizer = 1.0;
  std::uint64_t k = 0;

  /// S_0 for the given schedule (the weight of iterate 0).
  static AverageWeights initial(const StepSchedule& schedule);
};

struct WeightAdvance {
  AverageWeights weights;
  /// Coefficient of the newest iterate: 1 - S_{k-1} / S_k.
  double mix;
};

/// S_k = S_{k-1} + weight(k).
WeightAdvance advance_weights(const AverageWeights& weights,
                              const StepSchedule& schedule);

/// First k in [0, k_max] with alpha_k^2 < 1 / sum_{r<=k} 1/alpha_r, if any.
/// No precondition on gamma so that failing schedules can be scanned.
std::optional<std::uint64_t> find_lemma2_violation(double gamma,
                                                   std::uint64_t k_max);

/// True iff the step inequality holds for every k <= k_max. Throws
/// std::invalid_argument when gamma < 2.
bool check_lemma2(double gamma, std::uint64_t k_max);

}  // namespace psgdwa
