#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "psgdwa/data.hpp"
#include "psgdwa/types.hpp"

namespace psgdwa {

/// Norm used for E[||x x^T||^2]. For the rank-one matrix x x^T both give
/// ||x||^4; the choice is kept explicit so results record which was used.
enum class MatrixNorm { Frobenius, Spectral };

struct AnalyticMoments {};
struct EmpiricalMoments {
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct MomentEstimates {
  double exx_norm2 = 0.0;  ///< E[||x x^T||^2]
  double ex_norm2 = 0.0;   ///< E[||x||^2]
  MatrixNorm norm = MatrixNorm::Frobenius;
  std::variant<AnalyticMoments, EmpiricalMoments> source = AnalyticMoments{};
};

/// Closed-form moments of the design: Gaussian with the given diagonal
/// covariance (E||x||^4 = (sum c)^2 + 2 sum c^2) or a fixed feature vector.
MomentEstimates analytic_moments(const SyntheticSpec& spec,
                                 MatrixNorm norm = MatrixNorm::Frobenius);

/// Monte-Carlo moments from `n_samples` draws of the design under `seed`.
MomentEstimates empirical_moments(const SyntheticSpec& spec,
                                  std::uint64_t n_samples, std::uint64_t seed,
                                  MatrixNorm norm = MatrixNorm::Frobenius);

/// Sample moments of a finite data set.
MomentEstimates empirical_moments(std::span<const Sample> samples,
                                  MatrixNorm norm = MatrixNorm::Frobenius);

/// C^2 = 4 e_max d E[||x x^T||^2] + 4 sigma2 E[||x||^2].
/// Throws std::invalid_argument for an unbounded set (e_max = inf).
double c_squared(double e_max, Eigen::Index d, const MomentEstimates& moments,
                 double sigma2);

/// Finite-sample bound on E[f(omega_bar_k)] - f* for the weighted average
/// under the constrained schedule. Natural logarithm.
double theorem1_bound(std::uint64_t k, double gamma, double mu,
                      const MomentEstimates& moments, double c2, double sigma2);

/// E||omega_k - omega*||^2 <= C^2 / ((k + 1) mu).
double iterate_error_bound(std::uint64_t k, double c2, double mu);

/// Leading term 4 gamma^2 sigma2 E[x^2] E[1/x^2] / (3k) of the scalar bound.
/// The O(k^-2) remainder is not included.
double theorem2_bound(std::uint64_t k, double gamma, double sigma2, double ex2,
                      double einv_x2);

struct Lemma3Report {
  bool holds = true;
  /// Smallest i whose partial sum exceeds the bound.
  std::optional<std::uint64_t> first_violation;
  /// max over i of lhs / rhs.
  double max_ratio = 0.0;
};

/// Floating-point scan of
///   sum_{j=i+1..k} beta_j prod_{r=i+2..j} (1 - alpha_{r-1}) <= (i+gamma)(k-i)/gamma
/// for every 0 <= i < k, with beta from the scalar schedule. The inequality
/// is tight (equality at i = k - 1, and everywhere for gamma = 1), so a
/// relative slack of kLemma3Slack absorbs rounding.
inline constexpr double kLemma3Slack = 1e-11;
Lemma3Report scan_lemma3(double gamma, std::uint64_t k);
bool check_lemma3(double gamma, std::uint64_t k);

/// Same inequality in exact rational arithmetic for gamma = num / den.
bool check_lemma3_exact(std::int64_t gamma_num, std::int64_t gamma_den,
                        std::uint64_t k);

/// Mean of method/erm over the last ceil(tail_fraction * n) checkpoints.
/// NaN marks a missing ERM value. Throws if any tail ERM value is missing or
/// not positive.
double rho_estimate(std::span<const double> method, std::span<const double> erm,
                    double tail_fraction = 0.2);

}  // namespace psgdwa
