#include "psgdwa/erm.hpp"

#include <string>

#include "psgdwa/optimizer.hpp"

namespace psgdwa {

SufficientStats::SufficientStats(Eigen::Index dim)
    : a_(Matrix::Zero(dim, dim)), b_(Vector::Zero(dim)) {
  if (dim < 1) throw std::invalid_argument("SufficientStats: dim must be >= 1");
}

void SufficientStats::absorb(const Sample& sample) {
  require_same_dim(sample.x, dim(), "SufficientStats::absorb");
  a_.noalias() += sample.x * sample.x.transpose();
  b_.noalias() += sample.y * sample.x;
  ++n_;
}

SufficientStats SufficientStats::absorbed(const Sample& sample) const {
  SufficientStats next = *this;
  next.absorb(sample);
  return next;
}

void SufficientStats::merge(const SufficientStats& other) {
  if (other.dim() != dim()) {
    throw DimensionMismatch("SufficientStats::merge", dim(), other.dim());
  }
  a_ += other.a_;
  b_ += other.b_;
  n_ += other.n_;
}

Vector solve(const SufficientStats& stats, const ConstraintSet& set) {
  if (stats.n() == 0) throw NotYetIdentifiable("ERM: no samples absorbed");
  Eigen::LDLT<Matrix> ldlt(stats.a());
  const Vector pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.maxCoeff();
  const double smallest = pivots.minCoeff();
  if (ldlt.info() != Eigen::Success || !(largest > 0.0) ||
      smallest * kErmMaxCondition < largest) {
    throw NotYetIdentifiable("ERM: normal equations are singular after " +
                             std::to_string(stats.n()) + " samples");
  }
  Vector w = ldlt.solve(stats.b());
  project_in_place(w, set);
  return w;
}

}  // namespace psgdwa
