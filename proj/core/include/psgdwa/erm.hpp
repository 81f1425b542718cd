#pragma once

#include <cstdint>
#include <stdexcept>

#include "psgdwa/types.hpp"

namespace psgdwa {

/// The normal equations are not yet solvable (too few or collinear samples).
class NotYetIdentifiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normal-equation sufficient statistics A = sum x x^T, b = sum x y.
class SufficientStats {
 public:
  explicit SufficientStats(Eigen::Index dim);

  void absorb(const Sample& sample);
  [[nodiscard]] SufficientStats absorbed(const Sample& sample) const;
  /// Field-wise sum, for combining statistics absorbed in parallel.
  void merge(const SufficientStats& other);

  [[nodiscard]] Eigen::Index dim() const { return b_.size(); }
  [[nodiscard]] const Matrix& a() const { return a_; }
  [[nodiscard]] const Vector& b() const { return b_; }
  [[nodiscard]] std::uint64_t n() const { return n_; }

 private:
  Matrix a_;
  Vector b_;
  std::uint64_t n_ = 0;
};

/// Reciprocal condition bound below which A is treated as singular.
inline constexpr double kErmMaxCondition = 1e12;

/// Unconstrained least-squares solution A^{-1} b via a pivoted LDL^T
/// factorization, projected onto `set`. Throws NotYetIdentifiable when the
/// pivot ratio exceeds kErmMaxCondition or n == 0.
Vector solve(const SufficientStats& stats, const ConstraintSet& set);

}  // namespace psgdwa
