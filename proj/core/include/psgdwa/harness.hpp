#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psgdwa/data.hpp"
#include "psgdwa/optimizer.hpp"
#include "psgdwa/schedules.hpp"
#include "psgdwa/types.hpp"

namespace psgdwa {

/// Estimators compared by the harness: the three streaming methods plus the
/// exact least-squares fit over all samples seen so far.
enum class MethodId { Psgd, PsgdA, PsgdWa, Erm };

std::string_view to_string(MethodId id);
std::optional<MethodId> parse_method(std::string_view name);

struct ConstraintConfig {
  enum class Kind { Unbounded, Box, Ball };
  Kind kind = Kind::Unbounded;
  /// Box: half width around the center (omega_star for synthetic problems,
  /// the origin for datasets). Ignored when lower/upper are given.
  double half_width = 100.0;
  std::vector<double> lower;
  std::vector<double> upper;
  double radius = 1.0;
  /// Ball center; defaults to the same center rule as the box.
  std::vector<double> center;

  [[nodiscard]] ConstraintSet build(const Vector& default_center) const;
};

struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::Constrained;
  double gamma = 10.0;
  double mu = 1.0;
  /// Step of PSGD-A.
  double constant_step = 0.002;

  [[nodiscard]] StepSchedule build() const;
};

struct LogSpacedCheckpoints {
  std::uint64_t count = 50;
};
using CheckpointSpec =
    std::variant<LogSpacedCheckpoints, std::vector<std::uint64_t>>;

/// Up to `count` distinct, roughly log-uniform indices in [1, n_steps],
/// always ending at n_steps.
std::vector<std::uint64_t> log_spaced_checkpoints(std::uint64_t count,
                                                  std::uint64_t n_steps);

struct ExperimentConfig {
  std::variant<SyntheticSpec, DatasetConfig> problem = SyntheticSpec{};
  ConstraintConfig constraint;
  std::vector<MethodId> methods;
  ScheduleParams schedule;
  std::uint64_t n_steps = 1;
  CheckpointSpec checkpoints = LogSpacedCheckpoints{};
  std::uint64_t replications = 1;
  std::uint64_t base_seed = 0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
  std::filesystem::path output = "results.csv";
  double rho_tail_fraction = 0.2;

  /// Throws ConfigError (see config.hpp) naming the offending field.
  void validate() const;
  [[nodiscard]] std::vector<std::uint64_t> resolved_checkpoints() const;
  [[nodiscard]] bool synthetic() const {
    return std::holds_alternative<SyntheticSpec>(problem);
  }
};

/// Aggregate of one (method, checkpoint) cell across replications.
/// n_reps == 0 marks an absent cell (e.g. ERM before identifiability).
struct CellStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_reps = 0;

  [[nodiscard]] bool present() const { return n_reps > 0; }
};

struct RunResult {
  ExperimentConfig config;
  std::vector<std::uint64_t> checkpoints;
  /// "excess_risk" for synthetic problems, "holdout_mse" for datasets.
  std::string primary_metric;
  /// "param_dist2" (||w - w*||^2) or "holdout_mae".
  std::string secondary_metric;
  /// [method index in config.methods][checkpoint index]
  std::vector<std::vector<CellStats>> primary;
  std::vector<std::vector<CellStats>> secondary;
  std::vector<std::uint64_t> seeds;
  /// PSGD-WA over ERM on the tail of the primary metric, when both ran and
  /// the tail ERM cells are present.
  std::optional<double> rho;
  double wall_seconds = 0.0;

  [[nodiscard]] const std::vector<CellStats>& primary_of(MethodId id) const;
  [[nodiscard]] const std::vector<CellStats>& secondary_of(MethodId id) const;
};

/// Per-replication errors: [method][checkpoint], NaN when absent.
struct ReplicationErrors {
  std::vector<std::vector<double>> primary;
  std::vector<std::vector<double>> secondary;
};

/// Everything a replication needs besides its sample stream. Built once per
/// experiment and shared read-only by the workers.
class ExperimentPlan {
 public:
  explicit ExperimentPlan(const ExperimentConfig& config);

  [[nodiscard]] const ExperimentConfig& config() const { return config_; }
  [[nodiscard]] const std::vector<std::uint64_t>& checkpoints() const {
    return checkpoints_;
  }
  [[nodiscard]] const ConstraintSet& constraint() const { return constraint_; }
  [[nodiscard]] const StepSchedule& schedule() const { return schedule_; }
  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  /// Synthetic problems only.
  [[nodiscard]] const std::optional<RegressionProblem>& problem() const {
    return problem_;
  }

  /// Stream of replication r: synthetic draws seeded with
  /// derive_seed(base_seed, r), or the training split of the dataset.
  [[nodiscard]] std::unique_ptr<SampleStream> stream_for(std::uint64_t r) const;
  [[nodiscard]] std::uint64_t seed_for(std::uint64_t r) const;

  /// Runs every configured method on one shared stream: each sample drawn
  /// is fed to all methods before the next is drawn.
  [[nodiscard]] ReplicationErrors run_replication(SampleStream& stream) const;

 private:
  ExperimentConfig config_;
  std::vector<std::uint64_t> checkpoints_;
  ConstraintSet constraint_;
  StepSchedule schedule_;
  Eigen::Index dim_ = 0;
  std::optional<RegressionProblem> problem_;
  Dataset dataset_;
};

/// Runs all replications (in parallel over config.workers threads) and
/// aggregates them in replication order, so results do not depend on the
/// worker count.
RunResult run_experiment(const ExperimentConfig& config);

struct BoundCheck {
  std::uint64_t k;
  double simulated;
  double bound;
};

struct DominanceReport {
  bool holds = true;
  std::vector<BoundCheck> checks;
};

/// Compares the PSGD-WA mean excess risk at every checkpoint with the
/// finite-sample bound evaluated from the design's analytic moments.
/// Requires a synthetic problem, a bounded constraint and the constrained
/// schedule.
DominanceReport theorem1_dominance(const RunResult& result);

/// Writes `path` (k,method,mean_error,stderr,n_reps sorted by method name
/// then k), the secondary metric next to it as <stem>.secondary.csv, and the
/// metadata sidecar <stem>.meta.json.
void emit_results(const RunResult& result, const std::filesystem::path& path);

std::filesystem::path secondary_path(const std::filesystem::path& path);
std::filesystem::path metadata_path(const std::filesystem::path& path);

/// CSV text of the primary (or secondary) metric table.
std::string results_csv(const RunResult& result, bool secondary = false);

}  // namespace psgdwa
