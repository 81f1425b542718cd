#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "psgdwa/types.hpp"

namespace psgdwa {

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t z);

/// Seed of replication `index` under `base_seed`. Distinct indices give
/// decorrelated engine seeds.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Portable Gaussian source: mt19937_64 bits, 53-bit uniforms, Marsaglia
/// polar method. Output depends only on the seed, not on the standard
/// library's distribution implementations.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Feature design of a synthetic stream.
struct IdentityCovariance {};
struct DiagonalCovariance {
  std::vector<double> variances;
};
/// Every sample uses the same feature vector (deterministic design).
struct FixedFeatures {
  std::vector<double> x;
};
using FeatureDesign =
    std::variant<IdentityCovariance, DiagonalCovariance, FixedFeatures>;

struct SyntheticSpec {
  Eigen::Index d = 1;
  Vector omega_star;
  double sigma2 = 0.0;
  FeatureDesign design = IdentityCovariance{};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  /// R_x = E[x x^T] of the design.
  [[nodiscard]] Matrix correlation() const;
  /// Per-coordinate variances of a Gaussian design (ones for identity).
  [[nodiscard]] std::vector<double> diagonal() const;
};

/// omega_star = (1, 2, ..., d).
Vector ramp(Eigen::Index d);

/// Infinite i.i.d. stream: x ~ N(0, diag) (or fixed), y = x^T w* + v,
/// v ~ N(0, sigma2).
class SyntheticStream final : public SampleStream {
 public:
  explicit SyntheticStream(SyntheticSpec spec);

  std::optional<Sample> next() override { return draw(); }
  bool next_into(Sample& out) override {
    draw_into(out);
    return true;
  }
  Sample draw();
  /// Overwrites `out` without reallocating when its dimension matches.
  void draw_into(Sample& out);

  [[nodiscard]] const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
  NormalRng rng_;
  Vector stddev_;
  Vector fixed_;
  double noise_sd_;
  bool fixed_design_;
};

/// Finite stream over an in-memory sample list.
class VectorStream final : public SampleStream {
 public:
  explicit VectorStream(std::span<const Sample> samples) : samples_(samples) {}
  std::optional<Sample> next() override;

 private:
  std::span<const Sample> samples_;
  std::size_t pos_ = 0;
};

/// Synthetic regression problem with the design's R_x and the given mu
/// and constraint.
RegressionProblem make_problem(const SyntheticSpec& spec, double mu,
                               ConstraintSet constraint);

struct TargetRange {
  double lo;
  double hi;
};

double normalize_target(double y, const TargetRange& range);
double denormalize_target(double t, const TargetRange& range);

struct DatasetConfig {
  std::filesystem::path path;
  std::size_t target_column = 0;
  std::size_t n_features = 90;
  std::optional<TargetRange> target_range;
  double holdout_fraction = 0.0;
  bool header = false;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> holdout;
};

/// Malformed input in a CSV file; the message names the line.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Comma-separated, one sample per row, 1 + n_features numeric fields.
/// Features keep file order with the target column removed. The last
/// floor(holdout_fraction * rows) rows form the holdout.
Dataset load_csv(const DatasetConfig& config);

}  // namespace psgdwa
