#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psgdwa/schedules.hpp"
#include "psgdwa/types.hpp"

namespace psgdwa {

/// Streaming estimators.
///
///  - Psgd: projected SGD with step lambda_k, reports the last iterate.
///  - PsgdA: projected SGD with a constant step, reports the uniform average
///    of omega_0..omega_k.
///  - PsgdWa: projected SGD with step lambda_k, reports the weighted average
///    with weights from the schedule.
enum class Method { Psgd, PsgdA, PsgdWa };

std::string_view to_string(Method m);

struct MethodSpec {
  Method method = Method::PsgdWa;
  /// Only used by PsgdA.
  double constant_step = 0.0;

  static MethodSpec psgd() { return {Method::Psgd, 0.0}; }
  static MethodSpec psgd_a(double step);
  static MethodSpec psgd_wa() { return {Method::PsgdWa, 0.0}; }
};

struct OptimizerState {
  Vector omega;
  Vector omega_bar;
  AverageWeights weights;
  std::uint64_t k = 0;
  /// Samples dropped by the scalar path because x_k == 0.
  std::uint64_t skipped = 0;
  MethodSpec method;

  /// State at k = 0. omega_0 defaults to the projection of the origin.
  static OptimizerState initial(MethodSpec method, const StepSchedule& schedule,
                                const ConstraintSet& set, Eigen::Index dim,
                                std::optional<Vector> omega0 = std::nullopt);

  /// omega_bar for the averaging methods, omega for Psgd.
  [[nodiscard]] const Vector& estimate() const;
};

/// g = 2 x (x^T w - y).
Vector gradient_estimate(const Vector& omega, const Sample& sample);

/// Euclidean projection onto `set`.
Vector project(const Vector& point, const ConstraintSet& set);
void project_in_place(Vector& point, const ConstraintSet& set);

/// One projected step plus the method's averaging update.
OptimizerState step(const OptimizerState& state, const Sample& sample,
                    const StepSchedule& schedule, const ConstraintSet& set);
void step_in_place(OptimizerState& state, const Sample& sample,
                   const StepSchedule& schedule, const ConstraintSet& set);

/// d = 1, unbounded: omega_{k+1} = omega_k - alpha_k (omega_k - y_k / x_k),
/// with the beta-weighted average. A sample with x_k == 0 is skipped and
/// counted in `skipped`; neither the iterate nor the weights move.
OptimizerState step_scalar_unconstrained(const OptimizerState& state,
                                         const Sample& sample,
                                         const StepSchedule& schedule);
void step_scalar_unconstrained_in_place(OptimizerState& state,
                                        const Sample& sample,
                                        const StepSchedule& schedule);

struct Checkpoint {
  std::uint64_t k;
  Vector estimate;
};

/// Drives `n_steps` updates from `stream`, recording the reported estimate
/// after k updates for every k in `checkpoints` (sorted, each <= n_steps;
/// k = 0 records the initial state). Uses the scalar path when the schedule
/// is ScalarUnconstrained. Throws std::runtime_error if the stream runs dry.
std::vector<Checkpoint> run(OptimizerState state, SampleStream& stream,
                            const StepSchedule& schedule,
                            const ConstraintSet& set, std::uint64_t n_steps,
                            std::span<const std::uint64_t> checkpoints);

}  // namespace psgdwa
