#include "cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "psgdwa/bounds.hpp"
#include "psgdwa/config.hpp"
#include "psgdwa/data.hpp"
#include "psgdwa/harness.hpp"
#include "psgdwa/schedules.hpp"

namespace psgdwa::cli {
namespace {

struct RunOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<unsigned> workers;
  std::optional<std::string> output;
};

struct TheoryOptions {
  std::vector<double> gammas{2.0, 2.5, 3.0, 10.0};
  std::uint64_t kmax = 10000;
  bool allow_invalid = false;
  std::vector<double> lemma3_gammas{1.0, 2.0};
  std::uint64_t lemma3_k = 200;
  std::uint64_t lemma3_exact_k = 50;
  bool sweep = true;
  std::uint64_t sweep_reps = 50;
  std::uint64_t sweep_steps = 2000;
};

struct IngestOptions {
  std::optional<std::string> config;
  std::optional<std::string> path;
  std::size_t n_features = 90;
  std::size_t target_column = 0;
  std::vector<double> target_range;
  double holdout = 0.0;
  bool header = false;
};

void print_summary(const RunResult& result, std::ostream& out) {
  fmt::print(out, "{:<9} {:>10} {:>14} {:>12} {:>7}\n", "method", "k",
             result.primary_metric, "stderr", "n_reps");
  if (result.checkpoints.empty()) {
    fmt::print(out, "(no checkpoints)\n");
    return;
  }
  const std::size_t last = result.checkpoints.size() - 1;
  for (std::size_t m = 0; m < result.config.methods.size(); ++m) {
    const auto& cell = result.primary[m][last];
    const auto name = to_string(result.config.methods[m]);
    if (cell.present()) {
      fmt::print(out, "{:<9} {:>10} {:>14.6e} {:>12.3e} {:>7}\n", name,
                 result.checkpoints[last], cell.mean, cell.stderr_, cell.n_reps);
    } else {
      fmt::print(out, "{:<9} {:>10} {:>14} {:>12} {:>7}\n", name,
                 result.checkpoints[last], "absent", "-", 0);
    }
  }
  if (result.rho) {
    fmt::print(out, "rho (PSGD-WA / ERM, last {:.0f}% of checkpoints): {:.4f}\n",
               100.0 * result.config.rho_tail_fraction, *result.rho);
  }
}

int do_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<std::string> overrides = opts.sets;
  if (opts.workers) overrides.push_back("workers=" + std::to_string(*opts.workers));
  if (opts.output) overrides.push_back("output=\"" + *opts.output + "\"");
  try {
    const ExperimentConfig cfg = load_config(opts.config, overrides);
    const RunResult result = run_experiment(cfg);
    emit_results(result, cfg.output);
    print_summary(result, out);
    fmt::print(out, "wrote {} ({} replications, {:.2f} s)\n", cfg.output.string(),
               cfg.replications, result.wall_seconds);
    return kOk;
  } catch (const ConfigError& e) {
    fmt::print(err, "error: invalid config: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kCheckFailed;
  }
}

void report(std::ostream& out, bool pass, const std::string& name,
            const std::string& detail) {
  fmt::print(out, "{} {}{}{}\n", pass ? "PASS" : "FAIL", name,
             detail.empty() ? "" : ": ", detail);
}

int do_check_theory(const TheoryOptions& opts, std::ostream& out,
                    std::ostream& err) {
  bool all = true;

  for (const double gamma : opts.gammas) {
    if (gamma < 2.0 && !opts.allow_invalid) {
      fmt::print(err,
                 "error: gamma {} is below 2; pass --allow-invalid to scan it "
                 "anyway\n",
                 gamma);
      return kUsageError;
    }
    const auto bad = find_lemma2_violation(gamma, opts.kmax);
    const auto name = fmt::format("step inequality gamma={} k<={}", gamma, opts.kmax);
    report(out, !bad, name,
           bad ? fmt::format("first violation at k={}", *bad) : "");
    all = all && !bad;
  }

  for (const double gamma : opts.lemma3_gammas) {
    const auto scan = scan_lemma3(gamma, opts.lemma3_k);
    report(out, scan.holds, fmt::format("weight-sum inequality gamma={} k={}", gamma, opts.lemma3_k),
           scan.first_violation
               ? fmt::format("first violation at i={}", *scan.first_violation)
               : fmt::format("max lhs/rhs {:.12f}", scan.max_ratio));
    all = all && scan.holds;

    // Exact cross-check for gammas representable as n / 1000.
    const auto num = static_cast<std::int64_t>(std::llround(gamma * 1000.0));
    if (static_cast<double>(num) == gamma * 1000.0 && opts.lemma3_exact_k > 0) {
      const bool ok = check_lemma3_exact(num, 1000, opts.lemma3_exact_k);
      report(out, ok,
             fmt::format("weight-sum inequality (exact) gamma={} k={}", gamma, opts.lemma3_exact_k),
             "");
      all = all && ok;
    }
  }

  if (opts.sweep) {
    for (const double gamma : opts.gammas) {
      const auto name = fmt::format("bound sweep gamma={}", gamma);
      if (gamma < 2.0) {
        fmt::print(out, "SKIP {}: bound needs gamma >= 2\n", name);
        continue;
      }
      ExperimentConfig cfg;
      SyntheticSpec spec;
      spec.d = 5;
      spec.omega_star = ramp(5);
      spec.sigma2 = 1.0;
      cfg.problem = spec;
      cfg.constraint.kind = ConstraintConfig::Kind::Box;
      cfg.constraint.half_width = 10.0;
      cfg.methods = {MethodId::PsgdWa};
      cfg.schedule.gamma = gamma;
      cfg.schedule.mu = 1.0;
      cfg.n_steps = opts.sweep_steps;
      cfg.checkpoints = LogSpacedCheckpoints{12};
      cfg.replications = opts.sweep_reps;
      cfg.base_seed = 20160320;
      cfg.workers = 1;
      const auto dom = theorem1_dominance(run_experiment(cfg));
      double worst = 0.0;
      for (const auto& c : dom.checks) worst = std::max(worst, c.simulated / c.bound);
      report(out, dom.holds, name,
             fmt::format("max simulated/bound {:.3e}", worst));
      all = all && dom.holds;
    }
  }
  return all ? kOk : kCheckFailed;
}

int do_ingest(const IngestOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    DatasetConfig ds;
    if (opts.config) {
      const auto cfg = load_config(*opts.config);
      const auto* p = std::get_if<DatasetConfig>(&cfg.problem);
      if (p == nullptr) {
        fmt::print(err, "error: {} does not describe a dataset\n", *opts.config);
        return kUsageError;
      }
      ds = *p;
    } else if (opts.path) {
      ds.path = *opts.path;
      ds.n_features = opts.n_features;
      ds.target_column = opts.target_column;
      ds.holdout_fraction = opts.holdout;
      ds.header = opts.header;
      if (!opts.target_range.empty()) {
        ds.target_range = TargetRange{opts.target_range.at(0), opts.target_range.at(1)};
      }
    } else {
      fmt::print(err, "error: ingest-info needs --config or --path\n");
      return kUsageError;
    }

    const Dataset data = load_csv(ds);
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    double y_sum = 0.0;
    for (const auto* part : {&data.train, &data.holdout}) {
      for (const auto& s : *part) {
        y_min = std::min(y_min, s.y);
        y_max = std::max(y_max, s.y);
        y_sum += s.y;
      }
    }
    const auto rows = data.train.size() + data.holdout.size();
    const auto moments = empirical_moments(data.train);
    fmt::print(out, "file:          {}\n", ds.path.string());
    fmt::print(out, "rows:          {}\n", rows);
    fmt::print(out, "features:      {}\n", ds.n_features);
    fmt::print(out, "train/holdout: {}/{}\n", data.train.size(), data.holdout.size());
    fmt::print(out, "target:        min {:.6g} max {:.6g} mean {:.6g}{}\n", y_min,
               y_max, y_sum / static_cast<double>(rows),
               ds.target_range ? " (normalized)" : "");
    fmt::print(out, "E||x||^2:      {:.6g}\n", moments.ex_norm2);
    fmt::print(out, "E||x||^4:      {:.6g}\n", moments.exx_norm2);
    return kOk;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsageError;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Streaming least-squares with weighted-average projected SGD",
               "psgdwa"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment from a config file");
  run->add_option("--config", run_opts.config, "JSON experiment config")->required();
  run->add_option("--set", run_opts.sets, "Override a config field: key.path=value")
      ->take_all()
      ->expected(1);
  run->add_option("--workers", run_opts.workers, "Cap on parallel replications");
  run->add_option("--output", run_opts.output, "Results CSV path");

  TheoryOptions th;
  auto* theory = app.add_subcommand("check-theory",
                                    "Numerically verify the step-size and weight inequalities");
  theory->add_option("--gamma", th.gammas, "Gammas for the step inequality scan");
  theory->add_option("--kmax", th.kmax, "Largest k in the step inequality scan");
  theory->add_flag("--allow-invalid", th.allow_invalid,
                   "Scan gammas below 2 (expected to fail)");
  theory->add_option("--lemma3-gamma", th.lemma3_gammas, "Gammas for the weight-sum scan");
  theory->add_option("--lemma3-k", th.lemma3_k, "k of the weight-sum scan");
  theory->add_option("--lemma3-exact-k", th.lemma3_exact_k,
                     "k of the exact rational cross-check (0 disables)");
  theory->add_flag("!--no-sweep", th.sweep, "Skip the bound-dominance simulation");
  theory->add_option("--sweep-reps", th.sweep_reps, "Replications per sweep");
  theory->add_option("--sweep-steps", th.sweep_steps, "Steps per sweep replication");

  IngestOptions ing;
  auto* ingest = app.add_subcommand("ingest-info", "Summarize a CSV dataset");
  ingest->add_option("--config", ing.config, "Experiment config with a dataset problem");
  ingest->add_option("--path", ing.path, "CSV file");
  ingest->add_option("--n-features", ing.n_features, "Feature columns per row");
  ingest->add_option("--target-column", ing.target_column, "Index of the target column");
  ingest->add_option("--target-range", ing.target_range, "lo hi mapped to [0, 1]")
      ->expected(2);
  ingest->add_option("--holdout", ing.holdout, "Trailing fraction held out");
  ingest->add_flag("--header", ing.header, "Skip the first line");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  if (run->parsed()) return do_run(run_opts, out, err);
  if (theory->parsed()) return do_check_theory(th, out, err);
  if (ingest->parsed()) return do_ingest(ing, out, err);
  return kUsageError;
}

}  // namespace psgdwa::cli
