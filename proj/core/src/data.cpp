#include "psgdwa/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

namespace psgdwa {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

double NormalRng::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double NormalRng::normal() {
  if (spare_) {
    const double s = *spare_;
    spare_.reset();
    return s;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

// ---------------------------------------------------------------------------

Vector ramp(Eigen::Index d) {
  return Vector::LinSpaced(d, 1.0, static_cast<double>(d));
}

void SyntheticSpec::validate() const {
  if (d < 1) throw std::invalid_argument("synthetic: d must be >= 1");
  require_same_dim(omega_star, d, "synthetic omega_star");
  require_finite(omega_star, "synthetic omega_star");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("synthetic: sigma2 must be >= 0");
  }
  if (const auto* diag = std::get_if<DiagonalCovariance>(&design)) {
    if (diag->variances.size() != static_cast<std::size_t>(d)) {
      throw DimensionMismatch("synthetic diagonal covariance", d,
                              static_cast<Eigen::Index>(diag->variances.size()));
    }
    for (double v : diag->variances) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(
            "synthetic: diagonal covariance values must be > 0");
      }
    }
  } else if (const auto* fixed = std::get_if<FixedFeatures>(&design)) {
    if (fixed->x.size() != static_cast<std::size_t>(d)) {
      throw DimensionMismatch("synthetic fixed features", d,
                              static_cast<Eigen::Index>(fixed->x.size()));
    }
    if (d != 1) {
      // x x^T has rank one, so R_x is singular for d > 1.
      throw std::invalid_argument("synthetic: fixed features require d = 1");
    }
    if (fixed->x[0] == 0.0 || !std::isfinite(fixed->x[0])) {
      throw std::invalid_argument("synthetic: fixed feature must be nonzero");
    }
  }
}

std::vector<double> SyntheticSpec::diagonal() const {
  if (const auto* diag = std::get_if<DiagonalCovariance>(&design)) {
    return diag->variances;
  }
  if (const auto* fixed = std::get_if<FixedFeatures>(&design)) {
    std::vector<double> out;
    for (double x : fixed->x) out.push_back(x * x);
    return out;
  }
  return std::vector<double>(static_cast<std::size_t>(d), 1.0);
}

Matrix SyntheticSpec::correlation() const {
  if (const auto* fixed = std::get_if<FixedFeatures>(&design)) {
    const Eigen::Map<const Vector> x(fixed->x.data(),
                                     static_cast<Eigen::Index>(fixed->x.size()));
    return x * x.transpose();
  }
  const auto diag = diagonal();
  return Eigen::Map<const Vector>(diag.data(), d).asDiagonal();
}

SyntheticStream::SyntheticStream(SyntheticSpec spec)
    : spec_(std::move(spec)),
      rng_(spec_.seed),
      noise_sd_(0.0),
      fixed_design_(false) {
  spec_.validate();
  noise_sd_ = std::sqrt(spec_.sigma2);
  if (const auto* fixed = std::get_if<FixedFeatures>(&spec_.design)) {
    fixed_design_ = true;
    fixed_ = Eigen::Map<const Vector>(fixed->x.data(), spec_.d);
  } else {
    const auto diag = spec_.diagonal();
    stddev_ = Eigen::Map<const Vector>(diag.data(), spec_.d).cwiseSqrt();
  }
}

void SyntheticStream::draw_into(Sample& out) {
  if (out.x.size() != spec_.d) out.x.resize(spec_.d);
  if (fixed_design_) {
    out.x = fixed_;
  } else {
    for (Eigen::Index i = 0; i < spec_.d; ++i) {
      out.x[i] = stddev_[i] * rng_.normal();
    }
  }
  const double noise = spec_.sigma2 > 0.0 ? noise_sd_ * rng_.normal() : 0.0;
  out.y = out.x.dot(spec_.omega_star) + noise;
}

Sample SyntheticStream::draw() {
  Sample s;
  draw_into(s);
  return s;
}

std::optional<Sample> VectorStream::next() {
  if (pos_ >= samples_.size()) return std::nullopt;
  return samples_[pos_++];
}

RegressionProblem make_problem(const SyntheticSpec& spec, double mu,
                               ConstraintSet constraint) {
  spec.validate();
  return RegressionProblem(spec.omega_star, spec.sigma2, spec.correlation(), mu,
                           std::move(constraint));
}

// ---------------------------------------------------------------------------

double normalize_target(double y, const TargetRange& range) {
  return (y - range.lo) / (range.hi - range.lo);
}

double denormalize_target(double t, const TargetRange& range) {
  return range.lo + t * (range.hi - range.lo);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset load_csv(const DatasetConfig& config) {
  if (config.n_features < 1) {
    throw std::invalid_argument("dataset: n_features must be >= 1");
  }
  if (config.target_column > config.n_features) {
    throw std::invalid_argument("dataset: target_column out of range");
  }
  if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
    throw std::invalid_argument("dataset: holdout_fraction must be in [0, 1)");
  }
  if (config.target_range && !(config.target_range->hi > config.target_range->lo)) {
    throw std::invalid_argument("dataset: target_range requires lo < hi");
  }
  std::ifstream in(config.path);
  if (!in) {
    throw std::runtime_error("dataset: cannot open " + config.path.string());
  }

  const std::size_t n_fields = config.n_features + 1;
  std::vector<Sample> rows;
  std::vector<double> fields;
  fields.reserve(n_fields);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && config.header) continue;
    const std::string_view row = trim(line);
    if (row.empty()) continue;

    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = row.find(',', start);
      const std::string_view tok = trim(row.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start));
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || res.ec != std::errc() ||
          res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw CsvError(config.path.string() + ":" + std::to_string(line_no) +
                       ": field " + std::to_string(fields.size() + 1) +
                       " is not a finite number");
      }
      fields.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != n_fields) {
      throw CsvError(config.path.string() + ":" + std::to_string(line_no) +
                     ": expected " + std::to_string(n_fields) +
                     " fields, found " + std::to_string(fields.size()));
    }

    Vector x(static_cast<Eigen::Index>(config.n_features));
    Eigen::Index j = 0;
    for (std::size_t i = 0; i < n_fields; ++i) {
      if (i != config.target_column) x[j++] = fields[i];
    }
    double y = fields[config.target_column];
    if (config.target_range) y = normalize_target(y, *config.target_range);
    rows.emplace_back(std::move(x), y);
  }
  if (rows.empty()) {
    throw CsvError(config.path.string() + ": no data rows");
  }

  const auto n_holdout = static_cast<std::size_t>(
      std::floor(config.holdout_fraction * static_cast<double>(rows.size())));
  Dataset out;
  const auto split = rows.size() - n_holdout;
  out.train.assign(std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(split)));
  out.holdout.assign(std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(split)),
                     std::make_move_iterator(rows.end()));
  return out;
}

}  // namespace psgdwa
