#include "psgdwa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "psgdwa/bounds.hpp"
#include "psgdwa/config.hpp"
#include "psgdwa/erm.hpp"

namespace psgdwa {

std::string_view to_string(MethodId id) {
  switch (id) {
    case MethodId::Psgd:
      return "PSGD";
    case MethodId::PsgdA:
      return "PSGD-A";
    case MethodId::PsgdWa:
      return "PSGD-WA";
    case MethodId::Erm:
      return "ERM";
  }
  return "?";
}

std::optional<MethodId> parse_method(std::string_view name) {
  for (auto id : {MethodId::Psgd, MethodId::PsgdA, MethodId::PsgdWa,
                  MethodId::Erm}) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ConstraintSet ConstraintConfig::build(const Vector& default_center) const {
  switch (kind) {
    case Kind::Unbounded:
      return ConstraintSet::unbounded();
    case Kind::Box:
      if (!lower.empty() || !upper.empty()) {
        return ConstraintSet::box(to_vector(lower), to_vector(upper));
      }
      return ConstraintSet::box_around(default_center, half_width);
    case Kind::Ball:
      return ConstraintSet::ball(
          center.empty() ? default_center : to_vector(center), radius);
  }
  return ConstraintSet::unbounded();
}

StepSchedule ScheduleParams::build() const {
  return kind == ScheduleKind::Constrained
             ? StepSchedule::constrained(gamma, mu)
             : StepSchedule::scalar_unconstrained(gamma);
}

std::vector<std::uint64_t> log_spaced_checkpoints(std::uint64_t count,
                                                  std::uint64_t n_steps) {
  std::vector<std::uint64_t> out;
  if (count == 0 || n_steps == 0) return out;
  if (count == 1) return {n_steps};
  const double top = std::log(static_cast<double>(n_steps));
  for (std::uint64_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    auto k = static_cast<std::uint64_t>(std::llround(std::exp(t * top)));
    k = std::clamp<std::uint64_t>(k, 1, n_steps);
    if (out.empty() || k > out.back()) out.push_back(k);
  }
  if (out.back() != n_steps) out.push_back(n_steps);
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::resolved_checkpoints() const {
  if (const auto* log = std::get_if<LogSpacedCheckpoints>(&checkpoints)) {
    return log_spaced_checkpoints(log->count, n_steps);
  }
  return std::get<std::vector<std::uint64_t>>(checkpoints);
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("methods", "at least one method is required");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) {
        throw ConfigError("methods", "duplicate method " +
                                         std::string(to_string(methods[i])));
      }
    }
  }
  if (n_steps < 1) throw ConfigError("n_steps", "must be >= 1");
  if (replications < 1) throw ConfigError("replications", "must be >= 1");
  if (!(rho_tail_fraction > 0.0 && rho_tail_fraction < 1.0)) {
    throw ConfigError("rho_tail_fraction", "must be in (0, 1)");
  }

  if (const auto* list = std::get_if<std::vector<std::uint64_t>>(&checkpoints)) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      if ((*list)[i] > n_steps) {
        throw ConfigError("checkpoints.list", "checkpoint " +
                                                  std::to_string((*list)[i]) +
                                                  " exceeds n_steps");
      }
      if (i > 0 && (*list)[i] <= (*list)[i - 1]) {
        throw ConfigError("checkpoints.list", "must be strictly increasing");
      }
    }
  }

  if (schedule.kind == ScheduleKind::Constrained) {
    if (!(schedule.gamma >= 2.0)) {
      throw ConfigError("schedule.gamma",
                        "gamma must be ≥ 2 for the constrained schedule");
    }
    if (!(schedule.mu > 0.0)) throw ConfigError("schedule.mu", "mu must be > 0");
  } else {
    if (!(schedule.gamma >= 1.0)) {
      throw ConfigError("schedule.gamma",
                        "gamma must be ≥ 1 for the scalar schedule");
    }
    const auto* syn = std::get_if<SyntheticSpec>(&problem);
    if (syn == nullptr || syn->d != 1) {
      throw ConfigError("schedule.variant",
                        "the scalar schedule requires a synthetic problem with d = 1");
    }
    if (constraint.kind != ConstraintConfig::Kind::Unbounded) {
      throw ConfigError("schedule.variant",
                        "the scalar schedule requires an unbounded constraint");
    }
  }
  if (std::find(methods.begin(), methods.end(), MethodId::PsgdA) !=
          methods.end() &&
      !(schedule.constant_step > 0.0)) {
    throw ConfigError("schedule.constant_step", "must be > 0");
  }

  if (const auto* syn = std::get_if<SyntheticSpec>(&problem)) {
    try {
      syn->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("problem", e.what());
    }
  } else {
    const auto& ds = std::get<DatasetConfig>(problem);
    if (replications != 1) {
      throw ConfigError("replications",
                        "dataset experiments are deterministic; use 1");
    }
    if (!(ds.holdout_fraction > 0.0 && ds.holdout_fraction < 1.0)) {
      throw ConfigError("problem.holdout_fraction",
                        "dataset experiments need a holdout in (0, 1)");
    }
  }
}

// ---------------------------------------------------------------------------

const std::vector<CellStats>& RunResult::primary_of(MethodId id) const {
  const auto it = std::find(config.methods.begin(), config.methods.end(), id);
  if (it == config.methods.end()) {
    throw std::out_of_range("method not in result: " + std::string(to_string(id)));
  }
  return primary[static_cast<std::size_t>(it - config.methods.begin())];
}

const std::vector<CellStats>& RunResult::secondary_of(MethodId id) const {
  const auto it = std::find(config.methods.begin(), config.methods.end(), id);
  if (it == config.methods.end()) {
    throw std::out_of_range("method not in result: " + std::string(to_string(id)));
  }
  return secondary[static_cast<std::size_t>(it - config.methods.begin())];
}

namespace {

ExperimentConfig validated(const ExperimentConfig& config) {
  config.validate();
  return config;
}

Dataset load_if_dataset(const ExperimentConfig& config) {
  if (const auto* ds = std::get_if<DatasetConfig>(&config.problem)) {
    return load_csv(*ds);
  }
  return {};
}

Vector default_center(const ExperimentConfig& config, Eigen::Index dim) {
  if (const auto* syn = std::get_if<SyntheticSpec>(&config.problem)) {
    return syn->omega_star;
  }
  return Vector::Zero(dim);
}

Eigen::Index problem_dim(const ExperimentConfig& config) {
  if (const auto* syn = std::get_if<SyntheticSpec>(&config.problem)) return syn->d;
  return static_cast<Eigen::Index>(std::get<DatasetConfig>(config.problem).n_features);
}

}  // namespace

ExperimentPlan::ExperimentPlan(const ExperimentConfig& config)
    : config_(validated(config)),
      checkpoints_(config_.resolved_checkpoints()),
      constraint_(config_.constraint.build(
          default_center(config_, problem_dim(config_)))),
      schedule_(config_.schedule.build()),
      dim_(problem_dim(config_)),
      dataset_(load_if_dataset(config_)) {
  if (const auto* syn = std::get_if<SyntheticSpec>(&config_.problem)) {
    try {
      problem_.emplace(make_problem(*syn, config_.schedule.kind ==
                                                  ScheduleKind::Constrained
                                              ? config_.schedule.mu
                                              : syn->correlation()(0, 0),
                                    constraint_));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("problem", e.what());
    }
  } else if (dataset_.train.size() < config_.n_steps) {
    throw ConfigError("n_steps", "dataset has only " +
                                     std::to_string(dataset_.train.size()) +
                                     " training rows");
  } else if (dataset_.holdout.empty()) {
    throw ConfigError("problem.holdout_fraction", "holdout split is empty");
  }
}

std::uint64_t ExperimentPlan::seed_for(std::uint64_t r) const {
  return derive_seed(config_.base_seed, r);
}

std::unique_ptr<SampleStream> ExperimentPlan::stream_for(std::uint64_t r) const {
  if (const auto* syn = std::get_if<SyntheticSpec>(&config_.problem)) {
    SyntheticSpec spec = *syn;
    spec.seed = seed_for(r);
    return std::make_unique<SyntheticStream>(std::move(spec));
  }
  return std::make_unique<VectorStream>(dataset_.train);
}

ReplicationErrors ExperimentPlan::run_replication(SampleStream& stream) const {
  constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
  const auto& methods = config_.methods;
  const std::size_t n_cp = checkpoints_.size();
  const bool scalar = schedule_.kind() == ScheduleKind::ScalarUnconstrained;

  ReplicationErrors out;
  out.primary.assign(methods.size(), std::vector<double>(n_cp, kAbsent));
  out.secondary.assign(methods.size(), std::vector<double>(n_cp, kAbsent));

  // Streaming states, one per non-ERM method, in config order.
  std::vector<std::optional<OptimizerState>> states(methods.size());
  std::optional<SufficientStats> stats;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    switch (methods[m]) {
      case MethodId::Psgd:
        states[m] = OptimizerState::initial(MethodSpec::psgd(), schedule_,
                                            constraint_, dim_);
        break;
      case MethodId::PsgdA:
        states[m] = OptimizerState::initial(
            MethodSpec::psgd_a(config_.schedule.constant_step), schedule_,
            constraint_, dim_);
        break;
      case MethodId::PsgdWa:
        states[m] = OptimizerState::initial(MethodSpec::psgd_wa(), schedule_,
                                            constraint_, dim_);
        break;
      case MethodId::Erm:
        stats.emplace(dim_);
        break;
    }
  }

  const auto evaluate = [&](const Vector& w, double& primary, double& secondary) {
    if (problem_) {
      primary = excess_risk(*problem_, w);
      secondary = (w - problem_->omega_star()).squaredNorm();
    } else {
      primary = empirical_risk(dataset_.holdout, w);
      secondary = mean_absolute_error(dataset_.holdout, w);
    }
  };

  std::size_t next_cp = 0;
  std::uint64_t done = 0;
  const auto record = [&] {
    while (next_cp < n_cp && checkpoints_[next_cp] == done) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        if (methods[m] == MethodId::Erm) {
          try {
            const Vector w = solve(*stats, constraint_);
            evaluate(w, out.primary[m][next_cp], out.secondary[m][next_cp]);
          } catch (const NotYetIdentifiable&) {
            // absent cell
          }
        } else {
          evaluate(states[m]->estimate(), out.primary[m][next_cp],
                   out.secondary[m][next_cp]);
        }
      }
      ++next_cp;
    }
  };

  record();
  Sample sample;
  while (done < config_.n_steps) {
    if (!stream.next_into(sample)) {
      throw std::runtime_error("sample stream exhausted after " +
                               std::to_string(done) + " of " +
                               std::to_string(config_.n_steps) + " steps");
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (methods[m] == MethodId::Erm) {
        stats->absorb(sample);
      } else if (scalar) {
        step_scalar_unconstrained_in_place(*states[m], sample, schedule_);
      } else {
        step_in_place(*states[m], sample, schedule_, constraint_);
      }
    }
    ++done;
    record();
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<CellStats>> aggregate(
    const std::vector<ReplicationErrors>& reps, bool secondary,
    std::size_t n_methods, std::size_t n_cp) {
  std::vector<std::vector<CellStats>> out(n_methods, std::vector<CellStats>(n_cp));
  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t c = 0; c < n_cp; ++c) {
      double sum = 0.0;
      std::uint64_t n = 0;
      for (const auto& r : reps) {
        const double v = secondary ? r.secondary[m][c] : r.primary[m][c];
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
      }
      CellStats cell;
      cell.n_reps = n;
      if (n == 0) {
        cell.mean = std::numeric_limits<double>::quiet_NaN();
        cell.stderr_ = std::numeric_limits<double>::quiet_NaN();
      } else {
        cell.mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : reps) {
          const double v = secondary ? r.secondary[m][c] : r.primary[m][c];
          if (std::isnan(v)) continue;
          ss += (v - cell.mean) * (v - cell.mean);
        }
        cell.stderr_ =
            n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) /
                              static_cast<double>(n))
                  : 0.0;
      }
      out[m][c] = cell;
    }
  }
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const ExperimentPlan plan(config);
  const auto& cfg = plan.config();
  const auto n_reps = cfg.replications;

  std::vector<ReplicationErrors> reps(n_reps);
  unsigned workers = cfg.workers == 0 ? std::thread::hardware_concurrency()
                                      : cfg.workers;
  workers = std::max(1u, workers);
  workers = static_cast<unsigned>(
      std::min<std::uint64_t>(workers, n_reps));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (;;) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= n_reps || failed.load()) return;
      try {
        auto stream = plan.stream_for(r);
        reps[r] = plan.run_replication(*stream);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  RunResult result;
  result.config = cfg;
  result.checkpoints = plan.checkpoints();
  result.primary_metric = cfg.synthetic() ? "excess_risk" : "holdout_mse";
  result.secondary_metric = cfg.synthetic() ? "param_dist2" : "holdout_mae";
  const auto n_cp = result.checkpoints.size();
  result.primary = aggregate(reps, false, cfg.methods.size(), n_cp);
  result.secondary = aggregate(reps, true, cfg.methods.size(), n_cp);
  if (cfg.synthetic()) {
    for (std::uint64_t r = 0; r < n_reps; ++r) result.seeds.push_back(plan.seed_for(r));
  }

  const auto has = [&](MethodId id) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), id) !=
           cfg.methods.end();
  };
  if (has(MethodId::PsgdWa) && has(MethodId::Erm) && n_cp > 0) {
    std::vector<double> wa, erm;
    for (const auto& c : result.primary_of(MethodId::PsgdWa)) wa.push_back(c.mean);
    for (const auto& c : result.primary_of(MethodId::Erm)) erm.push_back(c.mean);
    try {
      result.rho = rho_estimate(wa, erm, cfg.rho_tail_fraction);
    } catch (const std::invalid_argument&) {
      result.rho.reset();
    }
  }
  result.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return result;
}

DominanceReport theorem1_dominance(const RunResult& result) {
  const auto& cfg = result.config;
  const auto* syn = std::get_if<SyntheticSpec>(&cfg.problem);
  if (syn == nullptr) {
    throw std::invalid_argument("theorem1_dominance: synthetic problems only");
  }
  if (cfg.schedule.kind != ScheduleKind::Constrained) {
    throw std::invalid_argument("theorem1_dominance: constrained schedule only");
  }
  const ConstraintSet set = cfg.constraint.build(syn->omega_star);
  const double e_max = set.e_max(syn->omega_star);
  const MomentEstimates moments = analytic_moments(*syn);
  const double c2 = c_squared(e_max, syn->d, moments, syn->sigma2);

  DominanceReport report;
  const auto& cells = result.primary_of(MethodId::PsgdWa);
  for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
    const auto k = result.checkpoints[c];
    const double bound = theorem1_bound(k, cfg.schedule.gamma, cfg.schedule.mu,
                                        moments, c2, syn->sigma2);
    report.checks.push_back({k, cells[c].mean, bound});
    if (!(cells[c].mean <= bound)) report.holds = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

std::filesystem::path secondary_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_filename(path.stem().string() + ".secondary.csv");
  return p;
}

std::filesystem::path metadata_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_filename(path.stem().string() + ".meta.json");
  return p;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string results_csv(const RunResult& result, bool secondary) {
  const auto& table = secondary ? result.secondary : result.primary;
  std::vector<std::size_t> order(result.config.methods.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return to_string(result.config.methods[a]) < to_string(result.config.methods[b]);
  });

  std::ostringstream os;
  os << "k,method,mean_error,stderr,n_reps\n";
  for (const std::size_t m : order) {
    const auto name = to_string(result.config.methods[m]);
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
      const auto& cell = table[m][c];
      os << result.checkpoints[c] << ',' << name << ',';
      if (cell.present()) {
        os << format_double(cell.mean) << ',' << format_double(cell.stderr_);
      } else {
        os << ',';
      }
      os << ',' << cell.n_reps << '\n';
    }
  }
  return os.str();
}

void emit_results(const RunResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  write_file(path, results_csv(result, false));
  write_file(secondary_path(path), results_csv(result, true));

  nlohmann::ordered_json meta;
  meta["config"] = nlohmann::ordered_json::parse(config_to_json(result.config));
  meta["primary_metric"] = result.primary_metric;
  meta["secondary_metric"] = result.secondary_metric;
  meta["checkpoints"] = result.checkpoints;
  meta["seeds"] = result.seeds;
  meta["rho"] = result.rho ? nlohmann::ordered_json(*result.rho)
                           : nlohmann::ordered_json(nullptr);
  meta["wall_seconds"] = result.wall_seconds;
  write_file(metadata_path(path), meta.dump(2) + "\n");
}

}  // namespace psgdwa
