#include "psgdwa/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace psgdwa {

DimensionMismatch::DimensionMismatch(const std::string& what,
                                     Eigen::Index expected,
                                     Eigen::Index actual)
    : std::invalid_argument(what + ": dimension mismatch (expected " +
                            std::to_string(expected) + ", got " +
                            std::to_string(actual) + ")") {}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) +
                                ": entries must be finite");
  }
}

void require_same_dim(const Vector& v, Eigen::Index d, const char* what) {
  if (v.size() != d) throw DimensionMismatch(what, d, v.size());
}

Sample::Sample(Vector features, double response)
    : x(std::move(features)), y(response) {
  if (x.size() < 1) throw std::invalid_argument("Sample: empty feature vector");
  require_finite(x, "Sample.x");
  if (!std::isfinite(y)) throw std::invalid_argument("Sample.y must be finite");
}

bool SampleStream::next_into(Sample& out) {
  auto s = next();
  if (!s) return false;
  out = std::move(*s);
  return true;
}

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet ConstraintSet::unbounded() { return ConstraintSet(Unbounded{}); }

ConstraintSet ConstraintSet::box(Vector lower, Vector upper) {
  if (lower.size() < 1) throw std::invalid_argument("Box: empty bounds");
  require_same_dim(upper, lower.size(), "Box upper");
  require_finite(lower, "Box lower");
  require_finite(upper, "Box upper");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument("Box: lower[" + std::to_string(i) +
                                  "] must be < upper[" + std::to_string(i) +
                                  "]");
    }
  }
  return ConstraintSet(Box{std::move(lower), std::move(upper)});
}

ConstraintSet ConstraintSet::box_around(const Vector& center,
                                        double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("Box: half_width must be positive and finite");
  }
  return box(center.array() - half_width, center.array() + half_width);
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
  if (center.size() < 1) throw std::invalid_argument("Ball: empty center");
  require_finite(center, "Ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("Ball: radius must be positive and finite");
  }
  return ConstraintSet(Ball{std::move(center), radius});
}

bool ConstraintSet::bounded() const {
  return !std::holds_alternative<Unbounded>(set_);
}

std::optional<Eigen::Index> ConstraintSet::dim() const {
  if (const auto* b = std::get_if<Box>(&set_)) return b->lower.size();
  if (const auto* b = std::get_if<Ball>(&set_)) return b->center.size();
  return std::nullopt;
}

bool ConstraintSet::contains(const Vector& p, double tol) const {
  if (const auto* b = std::get_if<Box>(&set_)) {
    require_same_dim(p, b->lower.size(), "ConstraintSet::contains");
    return ((p - b->lower).array() >= -tol).all() &&
           ((b->upper - p).array() >= -tol).all();
  }
  if (const auto* b = std::get_if<Ball>(&set_)) {
    require_same_dim(p, b->center.size(), "ConstraintSet::contains");
    return (p - b->center).norm() <= b->radius + tol;
  }
  return true;
}

bool ConstraintSet::interior(const Vector& p) const {
  if (const auto* b = std::get_if<Box>(&set_)) {
    require_same_dim(p, b->lower.size(), "ConstraintSet::interior");
    return (p.array() > b->lower.array()).all() &&
           (p.array() < b->upper.array()).all();
  }
  if (const auto* b = std::get_if<Ball>(&set_)) {
    require_same_dim(p, b->center.size(), "ConstraintSet::interior");
    return (p - b->center).norm() < b->radius;
  }
  return true;
}

double ConstraintSet::e_max(const Vector& reference) const {
  if (const auto* b = std::get_if<Box>(&set_)) {
    require_same_dim(reference, b->lower.size(), "ConstraintSet::e_max");
    // The farthest corner picks the farther bound in each coordinate.
    const auto lo = (b->lower - reference).array().square();
    const auto hi = (b->upper - reference).array().square();
    return lo.max(hi).sum();
  }
  if (const auto* b = std::get_if<Ball>(&set_)) {
    require_same_dim(reference, b->center.size(), "ConstraintSet::e_max");
    const double r = b->radius + (b->center - reference).norm();
    return r * r;
  }
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// RegressionProblem

RegressionProblem::RegressionProblem(Vector omega_star, double sigma2,
                                     Matrix correlation, double mu,
                                     ConstraintSet constraint)
    : omega_star_(std::move(omega_star)),
      sigma2_(sigma2),
      correlation_(std::move(correlation)),
      mu_(mu),
      min_eigenvalue_(0.0),
      constraint_(std::move(constraint)) {
  const Eigen::Index d = omega_star_.size();
  if (d < 1) throw std::invalid_argument("RegressionProblem: d must be >= 1");
  require_finite(omega_star_, "omega_star");
  if (!(sigma2_ >= 0.0) || !std::isfinite(sigma2_)) {
    throw std::invalid_argument("RegressionProblem: sigma2 must be >= 0");
  }
  if (correlation_.rows() != d || correlation_.cols() != d) {
    throw DimensionMismatch("RegressionProblem correlation", d,
                            correlation_.rows());
  }
  if (!correlation_.allFinite()) {
    throw std::invalid_argument("RegressionProblem: correlation not finite");
  }
  const double scale = std::max(1.0, correlation_.cwiseAbs().maxCoeff());
  if ((correlation_ - correlation_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * scale) {
    throw std::invalid_argument("RegressionProblem: correlation not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(correlation_,
                                            Eigen::EigenvaluesOnly);
  min_eigenvalue_ = eig.eigenvalues().minCoeff();
  if (!(min_eigenvalue_ > 0.0)) {
    throw std::invalid_argument(
        "RegressionProblem: correlation must be positive definite");
  }
  if (!(mu_ > 0.0)) {
    throw std::invalid_argument("RegressionProblem: mu must be > 0");
  }
  if (mu_ > min_eigenvalue_ * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "RegressionProblem: mu exceeds the smallest eigenvalue of the "
        "correlation matrix (" +
        std::to_string(min_eigenvalue_) + ")");
  }
  if (const auto cd = constraint_.dim(); cd && *cd != d) {
    throw DimensionMismatch("RegressionProblem constraint", d, *cd);
  }
  if (constraint_.bounded() && !constraint_.interior(omega_star_)) {
    throw std::invalid_argument(
        "RegressionProblem: omega_star must lie strictly inside the "
        "constraint set");
  }
}

double excess_risk(const RegressionProblem& problem, const Vector& omega) {
  require_same_dim(omega, problem.dim(), "excess_risk");
  const Vector e = omega - problem.omega_star();
  // R_x is PD so the form is >= 0 up to rounding; clamp the rounding.
  return std::max(0.0, e.dot(problem.correlation() * e));
}

double empirical_risk(std::span<const Sample> samples, const Vector& omega) {
  if (samples.empty()) throw std::invalid_argument("empirical_risk: no samples");
  double acc = 0.0;
  for (const auto& s : samples) {
    require_same_dim(s.x, omega.size(), "empirical_risk");
    const double r = s.x.dot(omega) - s.y;
    acc += r * r;
  }
  return acc / static_cast<double>(samples.size());
}

double mean_absolute_error(std::span<const Sample> samples,
                           const Vector& omega) {
  if (samples.empty()) {
    throw std::invalid_argument("mean_absolute_error: no samples");
  }
  double acc = 0.0;
  for (const auto& s : samples) {
    require_same_dim(s.x, omega.size(), "mean_absolute_error");
    acc += std::abs(s.x.dot(omega) - s.y);
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace psgdwa
