#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pseudoproc/rng.hpp"

namespace pseudoproc {

enum class ModelKind { independence, clayton, regression };

/// Immutable matrix of observations, one row per draw. Copula samples live
/// in the unit cube; regression samples are (x, y) pairs.
class Sample {
 public:
  Sample(std::vector<double> data, int dim, std::string provenance);

  std::int64_t size() const { return n_; }
  int dim() const { return dim_; }
  std::span<const double> row(std::int64_t i) const {
    return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double at(std::int64_t i, int j) const { return data_[i * dim_ + j]; }
  const std::vector<double>& data() const { return data_; }
  const std::string& provenance() const { return provenance_; }

 private:
  std::vector<double> data_;
  std::int64_t n_;
  int dim_;
  std::string provenance_;
};

/// Generative ground-truth model. Copula kinds expose the joint CDF, its
/// gradient, and the distribution K of the CDF-transformed variable
/// eta0(X); the regression kind exposes the true curve and the noise law.
/// Instances are immutable and safe to share across threads.
class DataModel {
 public:
  static DataModel independence(int dim);
  static DataModel clayton(double alpha);  // bivariate only
  static DataModel regression(std::vector<double> coeffs, double noise_sd);

  ModelKind kind() const { return kind_; }
  bool is_copula() const { return kind_ != ModelKind::regression; }
  /// Width of a sample row (copula: d, regression: 2 for (x, y)).
  int dim() const { return dim_; }

  double cdf(std::span<const double> u) const;
  std::vector<double> grad_cdf(std::span<const double> u) const;
  /// eta0(x): the population joint CDF evaluated at x (copula kinds).
  double eta0(std::span<const double> x) const { return cdf(x); }

  double kendall_cdf(double t) const;
  double kendall_density(double t) const;

  Sample sample(std::int64_t n, std::uint64_t seed) const;
  /// Appends one draw to `out` (dim() values). Used by pooled oracles.
  void draw(Rng& rng, std::vector<double>& out) const;

  double regression_truth(double x) const;
  double noise_cdf(double e) const;
  double noise_sd() const;
  const std::vector<double>& coeffs() const;
  double alpha() const;

  /// Short stable description, e.g. "clayton(alpha=1)"; used in labels,
  /// provenance strings and cache keys.
  std::string describe() const;

  /// Step used by the finite-difference gradient fallback.
  static constexpr double kGradStep = 1e-5;
  /// Step used by the finite-difference Kendall density fallback.
  static constexpr double kDensityStep = 1e-4;

 private:
  DataModel() = default;

  ModelKind kind_ = ModelKind::independence;
  int dim_ = 2;
  double alpha_ = 1.0;
  std::vector<double> coeffs_;
  double noise_sd_ = 1.0;
};

struct BandOptions {
  double h = 1e-3;                  // band half-width around the level
  std::int64_t draws = 1'000'000;   // pool size
  std::uint64_t seed = 0;           // 0 means the shared library default
};

/// Monte Carlo band-conditioning oracle for expectations conditional on
/// eta0(X) = theta. Holds the draws falling in |eta0(X) - theta| <= h.
class BandConditioner {
 public:
  BandConditioner(const DataModel& model, double theta, const BandOptions& opt);

  /// E[ 1{x <= X componentwise} | eta0(X) = theta ].
  double expectation_geq(std::span<const double> x) const;
  /// E[ f(X) | eta0(X) = theta ] for a caller-supplied integrand.
  template <typename F>
  double conditional_mean(F&& f) const {
    double s = 0.0;
    const std::size_t n = kept();
    for (std::size_t i = 0; i < n; ++i) s += f(point(i));
    return s / static_cast<double>(n);
  }

  std::size_t kept() const { return points_.size() / dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double theta() const { return theta_; }
  int dim() const { return static_cast<int>(dim_); }

 private:
  friend class BandPool;
  BandConditioner() = default;

  std::vector<double> points_;
  std::size_t dim_ = 0;
  double theta_ = 0.0;
};

/// One-shot convenience over BandConditioner; deterministic given opt.seed.
double conditional_indicator_expectation(const DataModel& model,
                                         std::span<const double> x,
                                         double theta,
                                         const BandOptions& opt = {});

/// A pool of model draws from which several band conditioners are carved;
/// avoids re-drawing the pool per level.
class BandPool {
 public:
  BandPool(const DataModel& model, std::int64_t draws, std::uint64_t seed);
  BandConditioner conditioner(double theta, double h) const;
  const DataModel& model() const { return model_; }

 private:
  DataModel model_;
  std::vector<double> points_;
  std::vector<double> levels_;
};

}  // namespace pseudoproc
