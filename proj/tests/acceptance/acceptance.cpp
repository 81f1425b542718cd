// Acceptance suite: one PASS/FAIL line per criterion, each with its pinned
// tolerance and wall-clock limit. Exit status is nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "psgdwa/bounds.hpp"
#include "psgdwa/data.hpp"
#include "psgdwa/erm.hpp"
#include "psgdwa/harness.hpp"
#include "psgdwa/optimizer.hpp"
#include "psgdwa/schedules.hpp"

namespace {

using namespace psgdwa;

constexpr std::uint64_t kSeed = 20160320;

struct Verdict {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* title, double limit_s,
               const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = v.pass && in_time;
  if (!ok) ++g_failures;
  std::printf("%s [%d] %s: %s%s (%.2f s, limit %.0f s)\n", ok ? "PASS" : "FAIL", id,
              title, v.detail.c_str(), in_time ? "" : " [over time limit]", secs,
              limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Synthetic benchmark problem: d = 25, identity covariance, omega* = 1..25,
// box omega* +- 100, gamma = 10, mu = 1, 200 replications, 20 log-spaced
// checkpoints up to 2e4.
ExperimentConfig synthetic_setup(double sigma2) {
  ExperimentConfig cfg;
  SyntheticSpec spec;
  spec.d = 25;
  spec.omega_star = ramp(25);
  spec.sigma2 = sigma2;
  cfg.problem = spec;
  cfg.constraint.kind = ConstraintConfig::Kind::Box;
  cfg.constraint.half_width = 100.0;
  cfg.methods = {MethodId::Psgd, MethodId::PsgdWa, MethodId::Erm};
  cfg.schedule.gamma = 10.0;
  cfg.schedule.mu = 1.0;
  cfg.n_steps = 20000;
  cfg.checkpoints = LogSpacedCheckpoints{20};
  cfg.replications = 200;
  cfg.base_seed = kSeed;
  cfg.workers = 0;
  return cfg;
}

Vector weighted_sum(const std::vector<Vector>& it, bool scalar, double gamma) {
  Vector num = Vector::Zero(it.front().size());
  double den = 0.0;
  for (std::size_t i = 0; i < it.size(); ++i) {
    const double r = static_cast<double>(i);
    const double w =
        scalar ? (i == 0 ? 1.0 : (gamma + r - 1.0) / gamma) : (gamma + r) / gamma;
    num += w * it[i];
    den += w;
  }
  return num / den;
}

}  // namespace

int main() {
  criterion(1, "Step-size inequality", 1.0, [] {
    for (double g : {2.0, 2.5, 3.0, 10.0}) {
      if (!check_lemma2(g, 10000)) return Verdict{false, fmt("violation at gamma=%g", g)};
    }
    const auto bad = find_lemma2_violation(1.9, 10000);
    if (!bad) return Verdict{false, "gamma=1.9 scan found no violation"};
    return Verdict{true, "no violations for gamma in {2,2.5,3,10}, k<=1e4; gamma=1.9 fails at k=" +
                             std::to_string(*bad)};
  });

  criterion(2, "Weight-sum inequality", 5.0, [] {
    for (double g : {1.0, 2.0}) {
      if (!check_lemma3(g, 200)) return Verdict{false, fmt("float scan fails at gamma=%g", g)};
    }
    for (std::int64_t g : {1, 2}) {
      for (std::uint64_t k = 1; k <= 50; ++k) {
        if (!check_lemma3_exact(g, 1, k)) {
          return Verdict{false, "exact check fails at gamma=" + std::to_string(g) +
                                    " k=" + std::to_string(k)};
        }
      }
    }
    return Verdict{true, "gamma in {1,2}: k=200 all i, exact rational for every k<=50"};
  });

  criterion(3, "Recursive average equals direct weighted sum", 1.0, [] {
    double worst = 0.0;
    {
      SyntheticSpec spec{5, ramp(5), 1.0, IdentityCovariance{}, kSeed};
      SyntheticStream stream(spec);
      const auto set = ConstraintSet::box_around(spec.omega_star, 2.0);
      const auto sched = StepSchedule::constrained(10.0, 1.0);
      auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched, set, 5);
      std::vector<Vector> it{s.omega};
      for (int k = 0; k < 50; ++k) {
        step_in_place(s, stream.draw(), sched, set);
        it.push_back(s.omega);
      }
      const Vector want = weighted_sum(it, false, 10.0);
      worst = std::max(worst, (s.omega_bar - want).norm() / want.norm());
    }
    {
      SyntheticSpec spec{1, ramp(1), 1.0, IdentityCovariance{}, kSeed + 1};
      SyntheticStream stream(spec);
      const auto sched = StepSchedule::scalar_unconstrained(1.0);
      auto s = OptimizerState::initial(MethodSpec::psgd_wa(), sched,
                                       ConstraintSet::unbounded(), 1);
      std::vector<Vector> it{s.omega};
      for (int k = 0; k < 50; ++k) {
        step_scalar_unconstrained_in_place(s, stream.draw(), sched);
        it.push_back(s.omega);
      }
      const Vector want = weighted_sum(it, true, 1.0);
      worst = std::max(worst, (s.omega_bar - want).norm() / want.norm());
    }
    return Verdict{worst <= 1e-10, fmt("max relative difference %.3e (tol 1e-10)", worst)};
  });

  criterion(4, "Streaming ERM equals batch least squares", 1.0, [] {
    SyntheticSpec spec{25, ramp(25), 1.0, IdentityCovariance{}, kSeed};
    SyntheticStream stream(spec);
    Matrix x(1000, 25);
    Vector y(1000);
    SufficientStats stats(25);
    for (int i = 0; i < 1000; ++i) {
      const Sample s = stream.draw();
      x.row(i) = s.x.transpose();
      y[i] = s.y;
      stats.absorb(s);
    }
    const Vector batch = x.colPivHouseholderQr().solve(y);
    const double rel =
        (solve(stats, ConstraintSet::unbounded()) - batch).norm() / batch.norm();
    return Verdict{rel <= 1e-8, fmt("relative difference %.3e (tol 1e-8)", rel)};
  });

  std::vector<RunResult> runs;
  criterion(5, "Finite-sample bound dominates simulated excess risk", 120.0, [&] {
    std::string detail;
    bool ok = true;
    for (double sigma2 : {0.1, 1.0}) {
      runs.push_back(run_experiment(synthetic_setup(sigma2)));
      const auto dom = theorem1_dominance(runs.back());
      double worst = 0.0;
      for (const auto& c : dom.checks) worst = std::max(worst, c.simulated / c.bound);
      ok = ok && dom.holds && dom.checks.size() == runs.back().checkpoints.size();
      detail += fmt("sigma2=%g: ", sigma2) + fmt("max simulated/bound %.3e; ", worst);
    }
    return Verdict{ok, detail + "20 checkpoints, 200 reps"};
  });

  criterion(6, "PSGD-WA / ERM ratio over the last 20% of checkpoints in [1.0, 1.5]",
            180.0, [&] {
    if (runs.size() != 2) return Verdict{false, "criterion 5 runs unavailable"};
    std::string detail;
    bool ok = true;
    for (const auto& r : runs) {
      const double sigma2 = std::get<SyntheticSpec>(r.config.problem).sigma2;
      if (!r.rho) return Verdict{false, "rho unavailable"};
      const double rho = *r.rho;
      ok = ok && rho >= 1.0 && rho <= 1.5;
      const double final_ratio =
          r.primary_of(MethodId::PsgdWa).back().mean / r.primary_of(MethodId::Erm).back().mean;
      detail += fmt("sigma2=%g: ", sigma2) + fmt("rho %.4f", rho) +
                fmt(" (ratio at k=2e4 %.4f); ", final_ratio);
    }
    return Verdict{ok, detail};
  });

  criterion(7, "Scalar limit k * excess risk in [0.8, 4/3 * 1.15]", 120.0, [] {
    ExperimentConfig cfg;
    SyntheticSpec spec{1, ramp(1), 1.0, FixedFeatures{{1.0}}, 0};
    cfg.problem = spec;
    cfg.methods = {MethodId::PsgdWa};
    cfg.schedule.kind = ScheduleKind::ScalarUnconstrained;
    cfg.schedule.gamma = 1.0;
    cfg.n_steps = 100000;
    cfg.checkpoints = std::vector<std::uint64_t>{100000};
    cfg.replications = 500;
    cfg.base_seed = kSeed;
    const auto r = run_experiment(cfg);
    const auto& cell = r.primary[0].back();
    const double scaled = 1e5 * cell.mean;
    const double hi = 4.0 / 3.0 * 1.15;
    return Verdict{scaled >= 0.8 && scaled <= hi,
                   fmt("k*mean = %.4f", scaled) + fmt(" +- %.4f (1 s.e.)", 1e5 * cell.stderr_) +
                       fmt(", upper %.4f", hi)};
  });

  criterion(8, "Ordering ERM <= PSGD-WA < PSGD at k=2e4, sigma2=1, gaps > 2 s.e.", 1.0, [&] {
    if (runs.size() != 2) return Verdict{false, "criterion 5 runs unavailable"};
    const auto& r = runs[1];
    const auto erm = r.primary_of(MethodId::Erm).back();
    const auto wa = r.primary_of(MethodId::PsgdWa).back();
    const auto sgd = r.primary_of(MethodId::Psgd).back();
    const double se1 = std::hypot(erm.stderr_, wa.stderr_);
    const double se2 = std::hypot(wa.stderr_, sgd.stderr_);
    const double z1 = (wa.mean - erm.mean) / se1;
    const double z2 = (sgd.mean - wa.mean) / se2;
    return Verdict{z1 > 2.0 && z2 > 2.0,
                   fmt("ERM %.4e", erm.mean) + fmt(", PSGD-WA %.4e", wa.mean) +
                       fmt(", PSGD %.4e", sgd.mean) + fmt("; gaps %.1f", z1) +
                       fmt(" and %.1f s.e.", z2)};
  });

  criterion(9, "Byte-identical results CSV across reruns and worker counts", 120.0, [&] {
    if (runs.empty()) return Verdict{false, "criterion 5 runs unavailable"};
    const std::string reference = results_csv(runs[0]);
    for (unsigned workers : {1u, 3u}) {
      auto cfg = synthetic_setup(0.1);
      cfg.workers = workers;
      if (results_csv(run_experiment(cfg)) != reference) {
        return Verdict{false, "CSV differs with workers=" + std::to_string(workers)};
      }
    }
    return Verdict{true, "sigma2=0.1 experiment identical for workers in {default,1,3}"};
  });

  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
