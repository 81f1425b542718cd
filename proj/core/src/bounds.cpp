#include "psgdwa/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace psgdwa {

MomentEstimates analytic_moments(const SyntheticSpec& spec, MatrixNorm norm) {
  spec.validate();
  MomentEstimates m;
  m.norm = norm;
  m.source = AnalyticMoments{};
  if (const auto* fixed = std::get_if<FixedFeatures>(&spec.design)) {
    double sq = 0.0;
    for (double x : fixed->x) sq += x * x;
    m.ex_norm2 = sq;
    m.exx_norm2 = sq * sq;
    return m;
  }
  // Independent zero-mean Gaussian coordinates with variances c_i:
  // E x_i^4 = 3 c_i^2, E x_i^2 x_j^2 = c_i c_j.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double c : spec.diagonal()) {
    sum += c;
    sum_sq += c * c;
  }
  m.ex_norm2 = sum;
  m.exx_norm2 = sum * sum + 2.0 * sum_sq;
  return m;
}

namespace {

double outer_norm2(double x_norm2, MatrixNorm norm) {
  // ||x x^T||_F = ||x x^T||_2 = ||x||^2 for rank-one outer products.
  switch (norm) {
    case MatrixNorm::Frobenius:
    case MatrixNorm::Spectral:
      return x_norm2 * x_norm2;
  }
  return x_norm2 * x_norm2;
}

}  // namespace

MomentEstimates empirical_moments(const SyntheticSpec& spec,
                                  std::uint64_t n_samples, std::uint64_t seed,
                                  MatrixNorm norm) {
  if (n_samples == 0) throw std::invalid_argument("empirical_moments: n = 0");
  SyntheticSpec s = spec;
  s.seed = seed;
  SyntheticStream stream(std::move(s));
  Sample sample;
  double acc2 = 0.0;
  double acc4 = 0.0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    stream.draw_into(sample);
    const double n2 = sample.x.squaredNorm();
    acc2 += n2;
    acc4 += outer_norm2(n2, norm);
  }
  MomentEstimates m;
  m.norm = norm;
  m.ex_norm2 = acc2 / static_cast<double>(n_samples);
  m.exx_norm2 = acc4 / static_cast<double>(n_samples);
  m.source = EmpiricalMoments{n_samples, seed};
  return m;
}

MomentEstimates empirical_moments(std::span<const Sample> samples,
                                  MatrixNorm norm) {
  if (samples.empty()) throw std::invalid_argument("empirical_moments: no samples");
  double acc2 = 0.0;
  double acc4 = 0.0;
  for (const auto& s : samples) {
    const double n2 = s.x.squaredNorm();
    acc2 += n2;
    acc4 += outer_norm2(n2, norm);
  }
  MomentEstimates m;
  m.norm = norm;
  m.ex_norm2 = acc2 / static_cast<double>(samples.size());
  m.exx_norm2 = acc4 / static_cast<double>(samples.size());
  m.source = EmpiricalMoments{samples.size(), 0};
  return m;
}

double c_squared(double e_max, Eigen::Index d, const MomentEstimates& moments,
                 double sigma2) {
  if (!std::isfinite(e_max)) {
    throw std::invalid_argument(
        "c_squared: constraint set is unbounded, e_max is undefined");
  }
  if (e_max < 0.0) throw std::invalid_argument("c_squared: e_max must be >= 0");
  if (d < 1) throw std::invalid_argument("c_squared: d must be >= 1");
  return 4.0 * e_max * static_cast<double>(d) * moments.exx_norm2 +
         4.0 * sigma2 * moments.ex_norm2;
}

double theorem1_bound(std::uint64_t k, double gamma, double mu,
                      const MomentEstimates& moments, double c2, double sigma2) {
  if (!(gamma >= 2.0)) {
    throw std::invalid_argument("theorem1_bound: gamma must be >= 2");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("theorem1_bound: mu must be > 0");
  const double kd = static_cast<double>(k);
  const double denom = (gamma + kd) * (gamma + kd);
  const double transient = (std::log(kd + 1.0) + 1.0) * gamma * gamma *
                           moments.exx_norm2 * c2 / (mu * mu * denom);
  const double noise =
      (kd + 1.0) * gamma * gamma * moments.ex_norm2 * sigma2 / (mu * denom);
  return transient + noise;
}

double iterate_error_bound(std::uint64_t k, double c2, double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("iterate_error_bound: mu must be > 0");
  }
  return c2 / ((static_cast<double>(k) + 1.0) * mu);
}

double theorem2_bound(std::uint64_t k, double gamma, double sigma2, double ex2,
                      double einv_x2) {
  if (k < 1) throw std::invalid_argument("theorem2_bound: k must be >= 1");
  return 4.0 * gamma * gamma * sigma2 * ex2 * einv_x2 /
         (3.0 * static_cast<double>(k));
}

Lemma3Report scan_lemma3(double gamma, std::uint64_t k) {
  if (!(gamma >= 1.0)) {
    throw std::invalid_argument("check_lemma3: gamma must be >= 1");
  }
  if (k < 1) throw std::invalid_argument("check_lemma3: k must be >= 1");
  const auto alpha = [gamma](std::uint64_t r) {
    return gamma / (gamma + static_cast<double>(r));
  };
  const auto beta = [gamma](std::uint64_t j) {
    return j == 0 ? 1.0 : (gamma + static_cast<double>(j) - 1.0) / gamma;
  };

  Lemma3Report report;
  for (std::uint64_t i = 0; i < k; ++i) {
    double product = 1.0;  // empty product at j = i + 1
    double lhs = 0.0;
    for (std::uint64_t j = i + 1; j <= k; ++j) {
      if (j >= i + 2) product *= 1.0 - alpha(j - 1);
      lhs += beta(j) * product;
    }
    const double rhs =
        (static_cast<double>(i) + gamma) * static_cast<double>(k - i) / gamma;
    report.max_ratio = std::max(report.max_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + kLemma3Slack) && !report.first_violation) {
      report.holds = false;
      report.first_violation = i;
    }
  }
  return report;
}

bool check_lemma3(double gamma, std::uint64_t k) {
  return scan_lemma3(gamma, k).holds;
}

bool check_lemma3_exact(std::int64_t gamma_num, std::int64_t gamma_den,
                        std::uint64_t k) {
  using boost::multiprecision::cpp_rational;
  if (gamma_den <= 0) {
    throw std::invalid_argument("check_lemma3_exact: denominator must be > 0");
  }
  const cpp_rational gamma(gamma_num, gamma_den);
  if (gamma < 1) throw std::invalid_argument("check_lemma3_exact: gamma < 1");
  if (k < 1) throw std::invalid_argument("check_lemma3_exact: k must be >= 1");

  const auto alpha = [&](std::uint64_t r) {
    return cpp_rational(gamma / (gamma + r));
  };
  const auto beta = [&](std::uint64_t j) {
    return j == 0 ? cpp_rational(1) : cpp_rational((gamma + j - 1) / gamma);
  };
  for (std::uint64_t i = 0; i < k; ++i) {
    cpp_rational product = 1;
    cpp_rational lhs = 0;
    for (std::uint64_t j = i + 1; j <= k; ++j) {
      if (j >= i + 2) product *= 1 - alpha(j - 1);
      lhs += beta(j) * product;
    }
    const cpp_rational rhs = (i + gamma) * (k - i) / gamma;
    if (lhs > rhs) return false;
  }
  return true;
}

double rho_estimate(std::span<const double> method, std::span<const double> erm,
                    double tail_fraction) {
  if (method.size() != erm.size()) {
    throw std::invalid_argument("rho_estimate: trajectories not aligned");
  }
  if (method.empty()) throw std::invalid_argument("rho_estimate: empty trajectory");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw std::invalid_argument("rho_estimate: tail_fraction must be in (0, 1)");
  }
  const std::size_t n = method.size();
  auto tail = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(n) - 1e-9));
  tail = std::clamp<std::size_t>(tail, 1, n);

  double acc = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    if (!std::isfinite(erm[i]) || !(erm[i] > 0.0)) {
      throw std::invalid_argument(
          "rho_estimate: ERM error missing or zero at tail checkpoint " +
          std::to_string(i));
    }
    acc += method[i] / erm[i];
  }
  return acc / static_cast<double>(tail);
}

}  // namespace psgdwa
