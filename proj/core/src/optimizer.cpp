#include "psgdwa/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace psgdwa {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Psgd:
      return "PSGD";
    case Method::PsgdA:
      return "PSGD-A";
    case Method::PsgdWa:
      return "PSGD-WA";
  }
  return "?";
}

MethodSpec MethodSpec::psgd_a(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("PSGD-A constant step must be > 0");
  }
  return {Method::PsgdA, step};
}

OptimizerState OptimizerState::initial(MethodSpec method,
                                       const StepSchedule& schedule,
                                       const ConstraintSet& set,
                                       Eigen::Index dim,
                                       std::optional<Vector> omega0) {
  if (method.method == Method::PsgdA && !(method.constant_step > 0.0)) {
    throw std::invalid_argument("PSGD-A constant step must be > 0");
  }
  OptimizerState s;
  s.method = method;
  if (omega0) {
    require_same_dim(*omega0, dim, "OptimizerState::initial omega0");
    require_finite(*omega0, "omega0");
    if (!set.contains(*omega0)) {
      throw std::invalid_argument("omega0 must lie in the constraint set");
    }
    s.omega = std::move(*omega0);
  } else {
    s.omega = project(Vector::Zero(dim), set);
  }
  s.omega_bar = s.omega;
  s.weights = method.method == Method::PsgdA ? AverageWeights{1.0, 0}
                                             : AverageWeights::initial(schedule);
  return s;
}

const Vector& OptimizerState::estimate() const {
  return method.method == Method::Psgd ? omega : omega_bar;
}

Vector gradient_estimate(const Vector& omega, const Sample& sample) {
  require_same_dim(sample.x, omega.size(), "gradient_estimate");
  return 2.0 * (sample.x.dot(omega) - sample.y) * sample.x;
}

void project_in_place(Vector& point, const ConstraintSet& set) {
  const auto& v = set.variant();
  if (const auto* box = std::get_if<ConstraintSet::Box>(&v)) {
    require_same_dim(point, box->lower.size(), "project");
    point = point.cwiseMax(box->lower).cwiseMin(box->upper);
  } else if (const auto* ball = std::get_if<ConstraintSet::Ball>(&v)) {
    require_same_dim(point, ball->center.size(), "project");
    const double dist = (point - ball->center).norm();
    if (dist > ball->radius) {
      point = ball->center + (ball->radius / dist) * (point - ball->center);
    }
  }
}

Vector project(const Vector& point, const ConstraintSet& set) {
  Vector p = point;
  project_in_place(p, set);
  return p;
}

namespace {

void advance_average(OptimizerState& state, const StepSchedule& schedule) {
  switch (state.method.method) {
    case Method::Psgd:
      state.weights.k += 1;
      break;
    case Method::PsgdA: {
      // Uniform average over omega_0..omega_{k+1}.
      state.weights.normalizer += 1.0;
      state.weights.k += 1;
      const double mix = 1.0 / state.weights.normalizer;
      state.omega_bar += mix * (state.omega - state.omega_bar);
      break;
    }
    case Method::PsgdWa: {
      const auto adv = advance_weights(state.weights, schedule);
      state.weights = adv.weights;
      state.omega_bar += adv.mix * (state.omega - state.omega_bar);
      break;
    }
  }
}

double step_size(const OptimizerState& state, const StepSchedule& schedule) {
  if (state.method.method == Method::PsgdA) return state.method.constant_step;
  return schedule.lambda_constrained(state.k);
}

}  // namespace

void step_in_place(OptimizerState& state, const Sample& sample,
                   const StepSchedule& schedule, const ConstraintSet& set) {
  require_same_dim(sample.x, state.omega.size(), "step");
  const double lambda = step_size(state, schedule);
  const double residual = sample.x.dot(state.omega) - sample.y;
  state.omega.noalias() -= (2.0 * lambda * residual) * sample.x;
  project_in_place(state.omega, set);
  state.k += 1;
  advance_average(state, schedule);
  if (state.method.method == Method::Psgd) state.omega_bar = state.omega;
}

OptimizerState step(const OptimizerState& state, const Sample& sample,
                    const StepSchedule& schedule, const ConstraintSet& set) {
  OptimizerState next = state;
  step_in_place(next, sample, schedule, set);
  return next;
}

void step_scalar_unconstrained_in_place(OptimizerState& state,
                                        const Sample& sample,
                                        const StepSchedule& schedule) {
  if (state.omega.size() != 1 || sample.x.size() != 1) {
    throw std::invalid_argument("step_scalar_unconstrained requires d = 1");
  }
  if (schedule.kind() != ScheduleKind::ScalarUnconstrained) {
    throw std::logic_error(
        "step_scalar_unconstrained requires a scalar schedule");
  }
  const double x = sample.x[0];
  if (state.method.method == Method::PsgdA) {
    state.omega[0] -= 2.0 * state.method.constant_step *
                      (x * state.omega[0] - sample.y) * x;
  } else {
    if (x == 0.0) {
      state.skipped += 1;
      return;
    }
    const double a = schedule.alpha(state.k);
    state.omega[0] -= a * (state.omega[0] - sample.y / x);
  }
  state.k += 1;
  advance_average(state, schedule);
  if (state.method.method == Method::Psgd) state.omega_bar = state.omega;
}

OptimizerState step_scalar_unconstrained(const OptimizerState& state,
                                         const Sample& sample,
                                         const StepSchedule& schedule) {
  OptimizerState next = state;
  step_scalar_unconstrained_in_place(next, sample, schedule);
  return next;
}

std::vector<Checkpoint> run(OptimizerState state, SampleStream& stream,
                            const StepSchedule& schedule,
                            const ConstraintSet& set, std::uint64_t n_steps,
                            std::span<const std::uint64_t> checkpoints) {
  if (n_steps < 1) throw std::invalid_argument("run: n_steps must be >= 1");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > n_steps) {
      throw std::invalid_argument("run: checkpoint beyond n_steps");
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("run: checkpoints must be strictly increasing");
    }
  }
  const bool scalar = schedule.kind() == ScheduleKind::ScalarUnconstrained;

  std::vector<Checkpoint> out;
  out.reserve(checkpoints.size());
  auto next_cp = checkpoints.begin();
  std::uint64_t done = 0;
  auto record = [&] {
    while (next_cp != checkpoints.end() && *next_cp == done) {
      out.push_back({done, state.estimate()});
      ++next_cp;
    }
  };
  record();
  while (done < n_steps) {
    auto sample = stream.next();
    if (!sample) {
      throw std::runtime_error("run: sample stream exhausted after " +
                               std::to_string(done) + " of " +
                               std::to_string(n_steps) + " steps");
    }
    if (scalar) {
      step_scalar_unconstrained_in_place(state, *sample, schedule);
    } else {
      step_in_place(state, *sample, schedule, set);
    }
    ++done;
    record();
  }
  return out;
}

}  // namespace psgdwa
