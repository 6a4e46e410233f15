#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pseudoproc/empirical.hpp"
#include "pseudoproc/fclasses.hpp"
#include "pseudoproc/models.hpp"

namespace pseudoproc {

/// A realization of an empirical or simulated limit process: one value per
/// index-grid point. Grid points are stored as small coordinate vectors
/// (a level, a cube point, or a member id).
struct ProcessPath {
  std::vector<std::vector<double>> index;
  std::vector<double> values;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string kind;
};

enum class PseudoKind { kendall, copula };

/// Default level window honoring the boundary restriction of the Kendall
/// limit theory (the Kendall density may blow up at 0).
inline constexpr double kKendallWindowLo = 0.1;
inline constexpr double kKendallWindowHi = 0.9;

/// K_n on the grid: the ECDF of the Kendall pseudo-observations.
ProcessPath kendall_empirical(const Sample& sample,
                              const std::vector<double>& theta_grid);

/// sqrt(n) (K_n(theta) - K(theta)) on a grid inside [lo, hi] subset (0,1).
ProcessPath kendall_process(const Sample& sample, const DataModel& model,
                            const std::vector<double>& theta_grid,
                            double lo = kKendallWindowLo,
                            double hi = kKendallWindowHi);

/// C_n on the grid: the ECDF of the copula pseudo-observations.
ProcessPath copula_empirical(const Sample& sample,
                             const std::vector<std::vector<double>>& u_grid);

/// sqrt(n) (C_n(u) - C(u)) on the grid.
ProcessPath copula_process(const Sample& sample, const DataModel& model,
                           const std::vector<std::vector<double>>& u_grid);

/// Residual empirical process of a degree-`degree` least-squares fit:
/// theta -> sqrt(n) (ECDF of residuals at theta - noise CDF at theta).
ProcessPath residual_process(const Sample& xy, const DataModel& model,
                             int degree, const std::vector<double>& theta_grid);

struct OracleOptions {
  std::int64_t draws = 1'000'000;
  std::uint64_t seed = 0;  // 0 means the shared library default
};

/// Population means P theta(eta0) per class member. Kendall-kind means are
/// computed by quadrature against the analytic Kendall density (exactly for
/// indicator and survival members); copula-kind means by a fixed-seed
/// Monte Carlo oracle pass.
std::vector<double> smooth_population_means(const DataModel& model,
                                            const FunctionClass& cls,
                                            PseudoKind kind,
                                            const OracleOptions& opt = {});

/// n^{-1/2} sum_i theta(pseudo_i) - sqrt(n) P theta(eta0), one value per
/// member, with the population means supplied by the caller.
ProcessPath smooth_indexed_process(const Sample& sample,
                                   const FunctionClass& cls, PseudoKind kind,
                                   const std::vector<double>& population_means);
ProcessPath smooth_indexed_process(const Sample& sample, const DataModel& model,
                                   const FunctionClass& cls, PseudoKind kind,
                                   const OracleOptions& opt = {});

/// Influence functions of the four limit representations. Evaluation is
/// pure; construction may run a fixed-seed oracle pass (band conditioning
/// for the Kendall indicator kind, a draw cache for the smooth kinds).
class InfluenceFunction {
 public:
  static InfluenceFunction kendall_indicator(const DataModel& model,
                                             double theta,
                                             const BandOptions& band = {},
                                             double lo = kKendallWindowLo,
                                             double hi = kKendallWindowHi);
  /// Same, with the conditioner carved from a shared pool of draws.
  static InfluenceFunction kendall_indicator(const DataModel& model,
                                             double theta, const BandPool& pool,
                                             double band_h,
                                             double lo = kKendallWindowLo,
                                             double hi = kKendallWindowHi);
  static InfluenceFunction copula_indicator(const DataModel& model,
                                            std::vector<double> u);
  static InfluenceFunction kendall_smooth(const DataModel& model, Member theta,
                                          const OracleOptions& opt = {});
  static InfluenceFunction copula_smooth(const DataModel& model, Member theta,
                                         const OracleOptions& opt = {});

  double operator()(std::span<const double> x) const;
  const std::string& label() const { return label_; }

 private:
  InfluenceFunction() = default;
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::string label_;
};

struct CovarianceEstimate {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
  std::vector<std::string> labels;
};

/// Monte Carlo estimate of the P-Brownian-bridge covariance
/// Cov(G f_a, G f_b) = P f_a f_b - P f_a P f_b over the influence family.
CovarianceEstimate limit_covariance(const DataModel& model,
                                    const std::vector<InfluenceFunction>& family,
                                    std::int64_t mc_size, std::uint64_t seed);

/// Draws from the centered Gaussian with the given covariance. Positive
/// semidefinite inputs are handled exactly (spectral clamp of round-off
/// negatives); otherwise a diagonal jitter escalating from 1e-10 to 1e-6
/// is tried before giving up.
std::vector<std::vector<double>> simulate_limit(const Eigen::MatrixXd& cov,
                                                std::int64_t reps,
                                                std::uint64_t seed);

}  // namespace pseudoproc
