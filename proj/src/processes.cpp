#include "pseudoproc/processes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

namespace {

constexpr std::uint64_t kOracleSeedBase = 0x6f7261636cu;  // "oracl"

std::uint64_t oracle_seed(const OracleOptions& opt) {
  return opt.seed != 0 ? opt.seed
                       : derive_seed(kOracleSeedBase, "population-oracle");
}

std::vector<std::vector<double>> level_index(const std::vector<double>& grid) {
  std::vector<std::vector<double>> index;
  index.reserve(grid.size());
  for (double t : grid) index.push_back({t});
  return index;
}

}  // namespace

ProcessPath kendall_empirical(const Sample& sample,
                              const std::vector<double>& theta_grid) {
  require(!theta_grid.empty(), Errc::invalid_argument,
          "kendall_empirical: empty grid");
  const auto pseudo = kendall_pseudo_obs(sample);
  ProcessPath path;
  path.kind = "kendall-empirical";
  path.n = sample.size();
  path.index = level_index(theta_grid);
  path.values.reserve(theta_grid.size());
  const double n = static_cast<double>(sample.size());
  for (double theta : theta_grid) {
    std::int64_t count = 0;
    for (double w : pseudo.values) count += (w <= theta);
    path.values.push_back(static_cast<double>(count) / n);
  }
  return path;
}

ProcessPath kendall_process(const Sample& sample, const DataModel& model,
                            const std::vector<double>& theta_grid, double lo,
                            double hi) {
  require(lo > 0.0 && hi < 1.0 && lo < hi, Errc::invalid_argument,
          "kendall_process: window must satisfy 0 < lo < hi < 1");
  for (double t : theta_grid) {
    require(t >= lo && t <= hi, Errc::domain,
            "kendall_process: grid point outside the level window");
  }
  ProcessPath path = kendall_empirical(sample, theta_grid);
  path.kind = "kendall-process";
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    path.values[i] = root_n * (path.values[i] - model.kendall_cdf(theta_grid[i]));
  }
  return path;
}

ProcessPath copula_empirical(const Sample& sample,
                             const std::vector<std::vector<double>>& u_grid) {
  require(!u_grid.empty(), Errc::invalid_argument,
          "copula_empirical: empty grid");
  const int d = sample.dim();
  const auto pseudo = copula_pseudo_obs(sample);
  ProcessPath path;
  path.kind = "copula-empirical";
  path.n = sample.size();
  path.index = u_grid;
  path.values.reserve(u_grid.size());
  const double n = static_cast<double>(sample.size());
  for (const auto& u : u_grid) {
    require(static_cast<int>(u.size()) == d, Errc::invalid_argument,
            "copula_empirical: grid point dimension mismatch");
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < sample.size(); ++i) {
      bool leq = true;
      for (int j = 0; j < d; ++j) {
        if (pseudo.at(i, j) > u[j]) {
          leq = false;
          break;
        }
      }
      count += leq;
    }
    path.values.push_back(static_cast<double>(count) / n);
  }
  return path;
}

ProcessPath copula_process(const Sample& sample, const DataModel& model,
                           const std::vector<std::vector<double>>& u_grid) {
  ProcessPath path = copula_empirical(sample, u_grid);
  path.kind = "copula-process";
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    path.values[i] = root_n * (path.values[i] - model.cdf(u_grid[i]));
  }
  return path;
}

ProcessPath residual_process(const Sample& xy, const DataModel& model,
                             int degree,
                             const std::vector<double>& theta_grid) {
  require(model.kind() == ModelKind::regression, Errc::unsupported,
          "residual_process: regression model required");
  require(!theta_grid.empty(), Errc::invalid_argument,
          "residual_process: empty grid");
  const PolyFit fit = ls_polyfit(xy, degree);
  ProcessPath path;
  path.kind = "residual-process";
  path.n = xy.size();
  path.index = level_index(theta_grid);
  path.values.reserve(theta_grid.size());
  const double n = static_cast<double>(xy.size());
  const double root_n = std::sqrt(n);
  for (double theta : theta_grid) {
    std::int64_t count = 0;
    for (double e : fit.residuals) count += (e <= theta);
    path.values.push_back(
        root_n * (static_cast<double>(count) / n - model.noise_cdf(theta)));
  }
  return path;
}

namespace {

double kendall_level_mean(const DataModel& model, const Member& theta) {
  // E theta(W) for W = eta0(X); exact for monotone step members,
  // quadrature against the analytic Kendall density otherwise.
  if (auto exact = theta.step_mean_1d(
          [&model](double t) { return model.kendall_cdf(t); })) {
    return *exact;
  }
  auto eval1 = [&theta](double w) {
    return theta(std::span<const double>{&w, 1});
  };
  if (model.kind() == ModelKind::independence) {
    const int d = model.dim();
    double fact = 1.0;
    for (int i = 2; i < d; ++i) fact *= i;
    // t = exp(-s): integral of theta(e^-s) s^{d-1} e^-s / (d-1)!
    return simpson(
        [&](double s) {
          return eval1(std::exp(-s)) * std::pow(s, d - 1) * std::exp(-s) / fact;
        },
        0.0, 60.0, 12000);
  }
  return simpson(
      [&](double t) { return eval1(t) * model.kendall_density(t); }, 1e-12,
      1.0 - 1e-12, 20000);
}

}  // namespace

std::vector<double> smooth_population_means(const DataModel& model,
                                            const FunctionClass& cls,
                                            PseudoKind kind,
                                            const OracleOptions& opt) {
  require(model.is_copula(), Errc::unsupported,
          "smooth_population_means: copula model required");
  std::vector<double> means(cls.size(), 0.0);
  if (kind == PseudoKind::kendall) {
    require(cls.dim() == 1, Errc::invalid_argument,
            "smooth_population_means: kendall classes are one-dimensional");
    for (std::size_t m = 0; m < cls.size(); ++m) {
      means[m] = kendall_level_mean(model, cls.member(m));
    }
    return means;
  }
  require(cls.dim() == model.dim(), Errc::invalid_argument,
          "smooth_population_means: class dimension must match the model");
  Rng rng(oracle_seed(opt));
  std::vector<double> buf;
  for (std::int64_t i = 0; i < opt.draws; ++i) {
    buf.clear();
    model.draw(rng, buf);
    for (std::size_t m = 0; m < cls.size(); ++m) {
      means[m] += cls.member(m)(buf);
    }
  }
  for (double& v : means) v /= static_cast<double>(opt.draws);
  return means;
}

ProcessPath smooth_indexed_process(const Sample& sample,
                                   const FunctionClass& cls, PseudoKind kind,
                                   const std::vector<double>& population_means) {
  require(population_means.size() == cls.size(), Errc::invalid_argument,
          "smooth_indexed_process: one population mean per member required");
  const PseudoObservations pseudo = kind == PseudoKind::kendall
                                        ? kendall_pseudo_obs(sample)
                                        : copula_pseudo_obs(sample);
  require(cls.dim() == pseudo.width, Errc::invalid_argument,
          "smooth_indexed_process: class dimension mismatch");
  ProcessPath path;
  path.kind = kind == PseudoKind::kendall ? "kendall-smooth" : "copula-smooth";
  path.n = sample.size();
  const double n = static_cast<double>(sample.size());
  const double root_n = std::sqrt(n);
  for (std::size_t m = 0; m < cls.size(); ++m) {
    double s = 0.0;
    for (std::int64_t i = 0; i < sample.size(); ++i) {
      s += cls.member(m)(pseudo.row(i));
    }
    path.index.push_back({static_cast<double>(m)});
    path.values.push_back(root_n * (s / n - population_means[m]));
  }
  return path;
}

ProcessPath smooth_indexed_process(const Sample& sample, const DataModel& model,
                                   const FunctionClass& cls, PseudoKind kind,
                                   const OracleOptions& opt) {
  return smooth_indexed_process(
      sample, cls, kind, smooth_population_means(model, cls, kind, opt));
}

// ---------------------------------------------------------------------------
// Influence functions
// ---------------------------------------------------------------------------

struct InfluenceFunction::Impl {
  enum class Kind {
    kendall_indicator,
    copula_indicator,
    kendall_smooth,
    copula_smooth
  } kind;
  DataModel model = DataModel::independence(2);

  // kendall_indicator
  double theta = 0.0;
  double density = 0.0;
  std::shared_ptr<const BandConditioner> band;

  // copula_indicator
  std::vector<double> u;
  std::vector<double> grad;

  // smooth kinds
  Member member = Member::indicator({1.0});
  std::vector<double> cache_points;   // kendall-smooth: draws, row-major
  std::vector<double> cache_factors;  // kendall-smooth: theta_dot(eta0(Z_j))
  // copula-smooth: per coordinate, sorted draw values with suffix means of
  // the matching partial derivative.
  std::vector<std::vector<double>> sorted_coord;
  std::vector<std::vector<double>> suffix_mean;
};

InfluenceFunction InfluenceFunction::kendall_indicator(const DataModel& model,
                                                       double theta,
                                                       const BandOptions& band,
                                                       double lo, double hi) {
  require(theta >= lo && theta <= hi, Errc::domain,
          "kendall_indicator influence: theta outside the level window");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::kendall_indicator;
  impl->model = model;
  impl->theta = theta;
  impl->density = model.kendall_density(theta);
  impl->band = std::make_shared<BandConditioner>(model, theta, band);
  InfluenceFunction f;
  f.impl_ = std::move(impl);
  std::ostringstream os;
  os << "f_kendall(" << format_double(theta) << ")";
  f.label_ = os.str();
  return f;
}

InfluenceFunction InfluenceFunction::kendall_indicator(const DataModel& model,
                                                       double theta,
                                                       const BandPool& pool,
                                                       double band_h, double lo,
                                                       double hi) {
  require(theta >= lo && theta <= hi, Errc::domain,
          "kendall_indicator influence: theta outside the level window");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::kendall_indicator;
  impl->model = model;
  impl->theta = theta;
  impl->density = model.kendall_density(theta);
  impl->band =
      std::make_shared<BandConditioner>(pool.conditioner(theta, band_h));
  InfluenceFunction f;
  f.impl_ = std::move(impl);
  std::ostringstream os;
  os << "f_kendall(" << format_double(theta) << ")";
  f.label_ = os.str();
  return f;
}

InfluenceFunction InfluenceFunction::copula_indicator(const DataModel& model,
                                                      std::vector<double> u) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::copula_indicator;
  impl->model = model;
  impl->grad = model.grad_cdf(u);
  impl->u = std::move(u);
  std::ostringstream os;
  os << "f_copula(";
  for (std::size_t j = 0; j < impl->u.size(); ++j) {
    os << (j ? "," : "") << format_double(impl->u[j]);
  }
  os << ")";
  InfluenceFunction f;
  f.label_ = os.str();
  f.impl_ = std::move(impl);
  return f;
}

InfluenceFunction InfluenceFunction::kendall_smooth(const DataModel& model,
                                                    Member theta,
                                                    const OracleOptions& opt) {
  require(theta.dim() == 1, Errc::invalid_argument,
          "kendall_smooth influence: member must be one-dimensional");
  require(theta.has_gradient(), Errc::unsupported,
          "kendall_smooth influence: member must be differentiable");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::kendall_smooth;
  impl->model = model;
  impl->member = std::move(theta);
  Rng rng(oracle_seed(opt));
  const int d = model.dim();
  impl->cache_points.reserve(static_cast<std::size_t>(opt.draws) * d);
  impl->cache_factors.reserve(static_cast<std::size_t>(opt.draws));
  std::vector<double> buf;
  for (std::int64_t i = 0; i < opt.draws; ++i) {
    buf.clear();
    model.draw(rng, buf);
    const double w = model.eta0(buf);
    impl->cache_points.insert(impl->cache_points.end(), buf.begin(), buf.end());
    impl->cache_factors.push_back(
        impl->member.gradient(std::span<const double>{&w, 1})[0]);
  }
  InfluenceFunction f;
  f.impl_ = std::move(impl);
  f.label_ = "f_kendall_smooth";
  return f;
}

InfluenceFunction InfluenceFunction::copula_smooth(const DataModel& model,
                                                   Member theta,
                                                   const OracleOptions& opt) {
  require(theta.dim() == model.dim(), Errc::invalid_argument,
          "copula_smooth influence: member dimension must match the model");
  require(theta.has_gradient(), Errc::unsupported,
          "copula_smooth influence: member must be differentiable");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::copula_smooth;
  impl->model = model;
  impl->member = std::move(theta);
  const int d = model.dim();
  Rng rng(oracle_seed(opt));
  std::vector<std::vector<std::pair<double, double>>> per_coord(
      static_cast<std::size_t>(d));
  std::vector<double> buf;
  for (std::int64_t i = 0; i < opt.draws; ++i) {
    buf.clear();
    impl->model.draw(rng, buf);
    const auto g = impl->member.gradient(buf);
    for (int j = 0; j < d; ++j) {
      per_coord[static_cast<std::size_t>(j)].push_back({buf[j], g[j]});
    }
  }
  impl->sorted_coord.resize(static_cast<std::size_t>(d));
  impl->suffix_mean.resize(static_cast<std::size_t>(d));
  const double m = static_cast<double>(opt.draws);
  for (int j = 0; j < d; ++j) {
    auto& pairs = per_coord[static_cast<std::size_t>(j)];
    std::sort(pairs.begin(), pairs.end());
    auto& coords = impl->sorted_coord[static_cast<std::size_t>(j)];
    auto& suffix = impl->suffix_mean[static_cast<std::size_t>(j)];
    coords.resize(pairs.size());
    suffix.resize(pairs.size() + 1);
    suffix[pairs.size()] = 0.0;
    for (std::size_t i = pairs.size(); i-- > 0;) {
      coords[i] = pairs[i].first;
      suffix[i] = suffix[i + 1] + pairs[i].second / m;
    }
  }
  InfluenceFunction f;
  f.impl_ = std::move(impl);
  f.label_ = "f_copula_smooth";
  return f;
}

double InfluenceFunction::operator()(std::span<const double> x) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case Impl::Kind::kendall_indicator: {
      const double level = im.model.eta0(x);
      return (level <= im.theta ? 1.0 : 0.0) -
             im.density * im.band->expectation_geq(x);
    }
    case Impl::Kind::copula_indicator: {
      require(x.size() == im.u.size(), Errc::invalid_argument,
              "influence evaluation: dimension mismatch");
      bool leq = true;
      double correction = 0.0;
      for (std::size_t j = 0; j < im.u.size(); ++j) {
        if (x[j] > im.u[j]) leq = false;
        correction += im.grad[j] * (x[j] <= im.u[j] ? 1.0 : 0.0);
      }
      return (leq ? 1.0 : 0.0) - correction;
    }
    case Impl::Kind::kendall_smooth: {
      const double w = im.model.eta0(x);
      double tail = 0.0;
      const std::size_t n = im.cache_factors.size();
      const std::size_t d = x.size();
      for (std::size_t i = 0; i < n; ++i) {
        const double* z = im.cache_points.data() + i * d;
        bool geq = true;
        for (std::size_t j = 0; j < d; ++j) {
          if (z[j] < x[j]) {
            geq = false;
            break;
          }
        }
        if (geq) tail += im.cache_factors[i];
      }
      return im.member(std::span<const double>{&w, 1}) +
             tail / static_cast<double>(n);
    }
    case Impl::Kind::copula_smooth: {
      double tail = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& coords = im.sorted_coord[j];
        const auto& suffix = im.suffix_mean[j];
        const std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(coords.begin(), coords.end(), x[j]) -
            coords.begin());
        tail += suffix[idx];
      }
      return im.member(x) + tail;
    }
  }
  fail(Errc::internal, "influence evaluation: unknown kind");
}

CovarianceEstimate limit_covariance(const DataModel& model,
                                    const std::vector<InfluenceFunction>& family,
                                    std::int64_t mc_size, std::uint64_t seed) {
  require(!family.empty(), Errc::invalid_argument,
          "limit_covariance: empty influence family");
  require(mc_size >= 2, Errc::invalid_argument,
          "limit_covariance: need at least two draws");
  const std::size_t m = family.size();
  require(static_cast<double>(mc_size) * static_cast<double>(m) <= 1.5e8,
          Errc::invalid_argument,
          "limit_covariance: draw count times family size too large");
  Eigen::MatrixXd evals(mc_size, static_cast<Eigen::Index>(m));
  Rng rng(seed);
  std::vector<double> buf;
  for (std::int64_t i = 0; i < mc_size; ++i) {
    buf.clear();
    model.draw(rng, buf);
    for (std::size_t k = 0; k < m; ++k) {
      evals(i, static_cast<Eigen::Index>(k)) = family[k](buf);
    }
  }
  const auto stats = covariance_with_se(evals);
  CovarianceEstimate est;
  est.cov = stats.cov;
  est.se = stats.se;
  est.labels.reserve(m);
  for (const auto& f : family) est.labels.push_back(f.label());
  return est;
}

std::vector<std::vector<double>> simulate_limit(const Eigen::MatrixXd& cov,
                                                std::int64_t reps,
                                                std::uint64_t seed) {
  require(cov.rows() == cov.cols() && cov.rows() >= 1, Errc::invalid_argument,
          "simulate_limit: covariance must be square");
  require(cov.isApprox(cov.transpose(), 1e-10), Errc::invalid_argument,
          "simulate_limit: covariance must be symmetric");
  require(reps >= 1, Errc::invalid_argument, "simulate_limit: reps must be >= 1");
  const Eigen::Index d = cov.rows();

  Eigen::MatrixXd factor;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    // Spectral clamp handles semidefinite inputs (zero rows, replicated
    // grid points) exactly; jitter is reserved for indefinite inputs.
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    require(eig.info() == Eigen::Success, Errc::numeric,
            "simulate_limit: eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() >= -1e-10 * scale) {
      Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
      factor = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
    } else {
      bool done = false;
      for (double jitter = 1e-10; jitter <= 1e-6 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd bumped = cov;
        bumped.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> retry(bumped);
        if (retry.info() == Eigen::Success) {
          factor = retry.matrixL();
          done = true;
          break;
        }
      }
      require(done, Errc::numeric,
              "simulate_limit: covariance is not positive semidefinite "
              "(jitter up to 1e-6 exhausted)");
    }
  }

  Rng rng(seed);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(reps));
  Eigen::VectorXd z(d);
  for (std::int64_t r = 0; r < reps; ++r) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    Eigen::VectorXd v = factor * z;
    out[static_cast<std::size_t>(r)].assign(v.data(), v.data() + d);
  }
  return out;
}

}  // namespace pseudoproc
