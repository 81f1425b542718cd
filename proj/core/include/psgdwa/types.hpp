#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace psgdwa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when two operands disagree on the problem dimension d.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& what, Eigen::Index expected,
                    Eigen::Index actual);
};

/// Throws std::invalid_argument naming `what` if any entry is NaN or Inf.
void require_finite(const Vector& v, const char* what);
void require_same_dim(const Vector& v, Eigen::Index d, const char* what);

/// One (x, y) observation.
struct Sample {
  Vector x;
  double y = 0.0;

  Sample() = default;
  Sample(Vector features, double response);

  [[nodiscard]] Eigen::Index dim() const { return x.size(); }
};

/// Pull-based sample source. Returns std::nullopt when exhausted.
class SampleStream {
 public:
  virtual ~SampleStream() = default;
  virtual std::optional<Sample> next() = 0;
  /// Writes the next sample into `out`, reusing its storage where the
  /// stream can. Returns false when exhausted.
  virtual bool next_into(Sample& out);
};

/// Convex constraint set Omega. Box and Ball are validated on construction.
class ConstraintSet {
 public:
  struct Unbounded {};
  struct Box {
    Vector lower;
    Vector upper;
  };
  struct Ball {
    Vector center;
    double radius = 1.0;
  };
  using Variant = std::variant<Unbounded, Box, Ball>;

  ConstraintSet() = default;

  static ConstraintSet unbounded();
  static ConstraintSet box(Vector lower, Vector upper);
  /// Box omega_star +/- half_width in every coordinate.
  static ConstraintSet box_around(const Vector& center, double half_width);
  static ConstraintSet ball(Vector center, double radius);

  [[nodiscard]] bool bounded() const;
  [[nodiscard]] const Variant& variant() const { return set_; }

  /// Membership with an absolute slack `tol` (per coordinate for Box, on the
  /// norm for Ball).
  [[nodiscard]] bool contains(const Vector& p, double tol = 0.0) const;
  /// Strict interior test.
  [[nodiscard]] bool interior(const Vector& p) const;

  /// sup over the set of ||w - reference||^2. +inf for Unbounded.
  [[nodiscard]] double e_max(const Vector& reference) const;

  /// Dimension of a bounded set, nullopt for Unbounded.
  [[nodiscard]] std::optional<Eigen::Index> dim() const;

 private:
  explicit ConstraintSet(Variant v) : set_(std::move(v)) {}
  Variant set_ = Unbounded{};
};

/// Least-squares problem with known second-order statistics.
///
/// `correlation` is R_x = E[x x^T]; `mu` is a user-supplied lower bound on its
/// spectrum (the step schedule depends on it). The constructor checks that
/// R_x is symmetric positive definite, that mu does not exceed its smallest
/// eigenvalue, and that omega_star is strictly inside a bounded constraint.
class RegressionProblem {
 public:
  RegressionProblem(Vector omega_star, double sigma2, Matrix correlation,
                    double mu, ConstraintSet constraint);

  [[nodiscard]] Eigen::Index dim() const { return omega_star_.size(); }
  [[nodiscard]] const Vector& omega_star() const { return omega_star_; }
  [[nodiscard]] double sigma2() const { return sigma2_; }
  [[nodiscard]] const Matrix& correlation() const { return correlation_; }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double min_eigenvalue() const { return min_eigenvalue_; }
  [[nodiscard]] const ConstraintSet& constraint() const { return constraint_; }

 private:
  Vector omega_star_;
  double sigma2_;
  Matrix correlation_;
  double mu_;
  double min_eigenvalue_;
  ConstraintSet constraint_;
};

/// f(w) - f(w*) = (w - w*)^T R_x (w - w*).
double excess_risk(const RegressionProblem& problem, const Vector& omega);

/// (1/n) sum (x_i^T w - y_i)^2. Throws on an empty span.
double empirical_risk(std::span<const Sample> samples, const Vector& omega);

/// (1/n) sum |x_i^T w - y_i|.
double mean_absolute_error(std::span<const Sample> samples,
                           const Vector& omega);

}  // namespace psgdwa
