#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pseudoproc {

double normal_cdf(double z);

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `values` and the continuous CDF `cdf`.
double ks_statistic(std::vector<double> values,
                    const std::function<double(double)>& cdf);

/// Asymptotic KS critical value c(alpha)/sqrt(n) for alpha in {0.01, 0.05}.
double ks_critical_value(std::size_t n, double alpha);

double mean_of(std::span<const double> xs);
double median_of(std::vector<double> xs);  // takes a copy by design
double stddev_of(std::span<const double> xs);

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               int intervals);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

/// `points` equispaced values from lo to hi inclusive.
std::vector<double> equispaced_grid(double lo, double hi, int points);

struct Fenwick {
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t index_1based);
  std::int64_t prefix(std::size_t index_1based) const;  // sum of [1, index]

 private:
  std::vector<std::int64_t> tree_;
};

/// For each query point q (2-d), the number of data points p with
/// p <= q componentwise. O((n + m) log) sweep; ties count as dominated.
std::vector<std::int64_t> dominance_counts_2d(std::span<const double> data_xy,
                                              std::span<const double> query_xy);

/// Sample covariance across replications with entrywise standard errors.
/// `rows` holds one replication per row.
struct CovarianceStats {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
};
CovarianceStats covariance_with_se(const Eigen::MatrixXd& rows);

std::uint64_t fnv1a64(std::string_view text);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace pseudoproc
