#include "pseudoproc/models.hpp"

#include <cmath>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

namespace {

constexpr std::uint64_t kBandOracleSeedLabel = 0x62616e64u;  // "band"

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Sample::Sample(std::vector<double> data, int dim, std::string provenance)
    : data_(std::move(data)), dim_(dim), provenance_(std::move(provenance)) {
  require(dim_ >= 1, Errc::invalid_argument, "Sample: dimension must be >= 1");
  require(!data_.empty() && data_.size() % static_cast<std::size_t>(dim_) == 0,
          Errc::invalid_argument, "Sample: data length not a multiple of dim");
  n_ = static_cast<std::int64_t>(data_.size()) / dim_;
}

DataModel DataModel::independence(int dim) {
  require(dim >= 1, Errc::invalid_argument,
          "independence model: dimension must be >= 1");
  DataModel m;
  m.kind_ = ModelKind::independence;
  m.dim_ = dim;
  return m;
}

DataModel DataModel::clayton(double alpha) {
  require(alpha > 0.0, Errc::invalid_argument,
          "clayton model: alpha must be > 0");
  DataModel m;
  m.kind_ = ModelKind::clayton;
  m.dim_ = 2;
  m.alpha_ = alpha;
  return m;
}

DataModel DataModel::regression(std::vector<double> coeffs, double noise_sd) {
  require(!coeffs.empty(), Errc::invalid_argument,
          "regression model: need at least one coefficient");
  require(noise_sd >= 0.0, Errc::invalid_argument,
          "regression model: noise sd must be >= 0");
  DataModel m;
  m.kind_ = ModelKind::regression;
  m.dim_ = 2;
  m.coeffs_ = std::move(coeffs);
  m.noise_sd_ = noise_sd;
  return m;
}

double DataModel::cdf(std::span<const double> u) const {
  require(is_copula(), Errc::unsupported,
          "cdf: not defined for the regression model");
  require(static_cast<int>(u.size()) == dim_, Errc::invalid_argument,
          "cdf: point dimension mismatch");
  for (double v : u) {
    require(v >= 0.0 && v <= 1.0, Errc::domain,
            "cdf: point outside the unit cube");
  }
  if (kind_ == ModelKind::independence) {
    double p = 1.0;
    for (double v : u) p *= v;
    return p;
  }
  // Clayton: (u1^-a + u2^-a - 1)^(-1/a), zero on the axes.
  if (u[0] == 0.0 || u[1] == 0.0) return 0.0;
  const double s =
      std::pow(u[0], -alpha_) + std::pow(u[1], -alpha_) - 1.0;
  return std::pow(s, -1.0 / alpha_);
}

std::vector<double> DataModel::grad_cdf(std::span<const double> u) const {
  require(is_copula(), Errc::unsupported,
          "grad_cdf: not defined for the regression model");
  require(static_cast<int>(u.size()) == dim_, Errc::invalid_argument,
          "grad_cdf: point dimension mismatch");
  for (double v : u) {
    require(v > 0.0 && v < 1.0, Errc::domain,
            "grad_cdf: point must be strictly inside the unit cube");
  }
  std::vector<double> g(u.size());
  if (kind_ == ModelKind::independence) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      double p = 1.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (k != j) p *= u[k];
      }
      g[j] = p;
    }
    return g;
  }
  const double s = std::pow(u[0], -alpha_) + std::pow(u[1], -alpha_) - 1.0;
  const double outer = std::pow(s, -1.0 / alpha_ - 1.0);
  g[0] = outer * std::pow(u[0], -alpha_ - 1.0);
  g[1] = outer * std::pow(u[1], -alpha_ - 1.0);
  return g;
}

double DataModel::kendall_cdf(double t) const {
  require(is_copula(), Errc::unsupported,
          "kendall_cdf: not defined for the regression model");
  require(t >= 0.0 && t <= 1.0, Errc::domain, "kendall_cdf: t outside [0,1]");
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  if (kind_ == ModelKind::independence) {
    // P(prod U_j <= t) = t * sum_{k<d} (-ln t)^k / k!
    const double l = -std::log(t);
    double s = 0.0;
    double term = 1.0;
    for (int k = 0; k < dim_; ++k) {
      s += term;
      term *= l / (k + 1);
    }
    return t * s;
  }
  // Archimedean form: K(t) = t - phi(t)/phi'(t) = t + (t - t^(a+1))/a.
  return t + (t - std::pow(t, alpha_ + 1.0)) / alpha_;
}

double DataModel::kendall_density(double t) const {
  require(is_copula(), Errc::unsupported,
          "kendall_density: not defined for the regression model");
  require(t > 0.0 && t < 1.0, Errc::domain, "kendall_density: t outside (0,1)");
  if (kind_ == ModelKind::independence) {
    return std::pow(-std::log(t), dim_ - 1) / factorial(dim_ - 1);
  }
  return (1.0 + 1.0 / alpha_) * (1.0 - std::pow(t, alpha_));
}

void DataModel::draw(Rng& rng, std::vector<double>& out) const {
  switch (kind_) {
    case ModelKind::independence:
      for (int j = 0; j < dim_; ++j) out.push_back(rng.uniform());
      return;
    case ModelKind::clayton: {
      // Conditional distribution method: invert C(u2 | u1) at a uniform.
      const double u1 = rng.uniform();
      const double w = rng.uniform();
      const double u2 = std::pow(
          (std::pow(w, -alpha_ / (alpha_ + 1.0)) - 1.0) *
                  std::pow(u1, -alpha_) +
              1.0,
          -1.0 / alpha_);
      out.push_back(u1);
      out.push_back(u2);
      return;
    }
    case ModelKind::regression: {
      const double x = rng.uniform();
      const double y = regression_truth(x) + noise_sd_ * rng.normal();
      out.push_back(x);
      out.push_back(y);
      return;
    }
  }
}

Sample DataModel::sample(std::int64_t n, std::uint64_t seed) const {
  require(n >= 1, Errc::invalid_argument, "sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(n) * dim_);
  for (std::int64_t i = 0; i < n; ++i) draw(rng, data);
  std::ostringstream prov;
  prov << describe() << " seed=" << seed;
  return Sample(std::move(data), dim_, prov.str());
}

double DataModel::regression_truth(double x) const {
  require(kind_ == ModelKind::regression, Errc::unsupported,
          "regression_truth: copula model");
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

double DataModel::noise_cdf(double e) const {
  require(kind_ == ModelKind::regression, Errc::unsupported,
          "noise_cdf: copula model");
  if (noise_sd_ == 0.0) return e >= 0.0 ? 1.0 : 0.0;
  return normal_cdf(e / noise_sd_);
}

double DataModel::noise_sd() const {
  require(kind_ == ModelKind::regression, Errc::unsupported,
          "noise_sd: copula model");
  return noise_sd_;
}

const std::vector<double>& DataModel::coeffs() const {
  require(kind_ == ModelKind::regression, Errc::unsupported,
          "coeffs: copula model");
  return coeffs_;
}

double DataModel::alpha() const {
  require(kind_ == ModelKind::clayton, Errc::unsupported,
          "alpha: not a clayton model");
  return alpha_;
}

std::string DataModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::independence:
      os << "independence(d=" << dim_ << ")";
      break;
    case ModelKind::clayton:
      os << "clayton(alpha=" << format_double(alpha_) << ")";
      break;
    case ModelKind::regression:
      os << "regression(deg=" << coeffs_.size() - 1
         << ",sd=" << format_double(noise_sd_) << ")";
      break;
  }
  return os.str();
}

BandPool::BandPool(const DataModel& model, std::int64_t draws,
                   std::uint64_t seed)
    : model_(model) {
  require(model.is_copula(), Errc::unsupported,
          "BandPool: copula model required");
  require(draws >= 1, Errc::invalid_argument, "BandPool: draws must be >= 1");
  Rng rng(seed);
  points_.reserve(static_cast<std::size_t>(draws) * model.dim());
  levels_.reserve(static_cast<std::size_t>(draws));
  std::vector<double> buf;
  for (std::int64_t i = 0; i < draws; ++i) {
    buf.clear();
    model.draw(rng, buf);
    points_.insert(points_.end(), buf.begin(), buf.end());
    levels_.push_back(model.eta0(buf));
  }
}

BandConditioner BandPool::conditioner(double theta, double h) const {
  require(theta > 0.0 && theta < 1.0, Errc::domain,
          "band conditioner: theta must lie in (0,1)");
  require(h > 0.0, Errc::invalid_argument, "band conditioner: h must be > 0");
  const int d = model_.dim();
  std::vector<double> kept;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (std::abs(levels_[i] - theta) <= h) {
      kept.insert(kept.end(), points_.begin() + static_cast<std::ptrdiff_t>(i) * d,
                  points_.begin() + static_cast<std::ptrdiff_t>(i + 1) * d);
    }
  }
  if (kept.empty()) {
    std::ostringstream os;
    os << "band conditioner: empty band at theta=" << theta << ", h=" << h
       << " after " << levels_.size() << " draws of " << model_.describe();
    fail(Errc::estimation, os.str());
  }
  BandConditioner bc;
  bc.points_ = std::move(kept);
  bc.dim_ = static_cast<std::size_t>(d);
  bc.theta_ = theta;
  return bc;
}

BandConditioner::BandConditioner(const DataModel& model, double theta,
                                 const BandOptions& opt) {
  const std::uint64_t seed =
      opt.seed != 0 ? opt.seed : derive_seed(kBandOracleSeedLabel, "band-oracle");
  BandPool pool(model, opt.draws, seed);
  *this = pool.conditioner(theta, opt.h);
}

double BandConditioner::expectation_geq(std::span<const double> x) const {
  require(x.size() == dim_, Errc::invalid_argument,
          "expectation_geq: dimension mismatch");
  std::int64_t hits = 0;
  const std::size_t n = kept();
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = points_.data() + i * dim_;
    bool geq = true;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (z[j] < x[j]) {
        geq = false;
        break;
      }
    }
    hits += geq;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double conditional_indicator_expectation(const DataModel& model,
                                         std::span<const double> x,
                                         double theta, const BandOptions& opt) {
  require(model.is_copula() && model.dim() == 2, Errc::unsupported,
          "conditional_indicator_expectation: bivariate copula model required");
  BandConditioner bc(model, theta, opt);
  return bc.expectation_geq(x);
}

}  // namespace pseudoproc
