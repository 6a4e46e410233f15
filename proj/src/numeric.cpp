#include "pseudoproc/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "pseudoproc/errors.hpp"

namespace pseudoproc {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> values,
                    const std::function<double(double)>& cdf) {
  require(!values.empty(), Errc::invalid_argument, "ks_statistic: empty input");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  // c(alpha) = sqrt(-ln(alpha/2)/2), the asymptotic Kolmogorov quantile.
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

double mean_of(std::span<const double> xs) {
  require(!xs.empty(), Errc::invalid_argument, "mean_of: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  require(!xs.empty(), Errc::invalid_argument, "median_of: empty input");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid),
                   xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  double lo = *std::max_element(
      xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double stddev_of(std::span<const double> xs) {
  require(xs.size() >= 2, Errc::invalid_argument, "stddev_of: need >= 2 values");
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(xs.size()) - 1.0));
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               int intervals) {
  require(intervals >= 2, Errc::invalid_argument, "simpson: need >= 2 intervals");
  if (intervals % 2 == 1) ++intervals;
  const double h = (hi - lo) / intervals;
  double s = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) {
    s += f(lo + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, Errc::invalid_argument,
          "ls_slope: mismatched or short inputs");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0.0, Errc::numeric, "ls_slope: degenerate abscissae");
  return sxy / sxx;
}

std::vector<double> equispaced_grid(double lo, double hi, int points) {
  require(points >= 1, Errc::invalid_argument, "equispaced_grid: points >= 1");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = 0.5 * (lo + hi);
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  }
  return grid;
}

void Fenwick::add(std::size_t i) {
  for (; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
}

std::int64_t Fenwick::prefix(std::size_t i) const {
  std::int64_t s = 0;
  i = std::min(i, tree_.size() - 1);
  for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
  return s;
}

std::vector<std::int64_t> dominance_counts_2d(std::span<const double> data_xy,
                                              std::span<const double> query_xy) {
  require(data_xy.size() % 2 == 0 && query_xy.size() % 2 == 0,
          Errc::invalid_argument, "dominance_counts_2d: odd-length input");
  const std::size_t n = data_xy.size() / 2;
  const std::size_t m = query_xy.size() / 2;

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = data_xy[2 * i + 1];
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto y_rank_le = [&ys](double y) {
    // number of distinct data-y values <= y
    return static_cast<std::size_t>(
        std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
  };

  std::vector<std::size_t> data_order(n);
  std::vector<std::size_t> query_order(m);
  for (std::size_t i = 0; i < n; ++i) data_order[i] = i;
  for (std::size_t i = 0; i < m; ++i) query_order[i] = i;
  std::sort(data_order.begin(), data_order.end(),
            [&](std::size_t a, std::size_t b) {
              return data_xy[2 * a] < data_xy[2 * b];
            });
  std::sort(query_order.begin(), query_order.end(),
            [&](std::size_t a, std::size_t b) {
              return query_xy[2 * a] < query_xy[2 * b];
            });

  Fenwick fen(ys.size());
  std::vector<std::int64_t> counts(m, 0);
  std::size_t k = 0;
  for (std::size_t qi : query_order) {
    const double qx = query_xy[2 * qi];
    while (k < n && data_xy[2 * data_order[k]] <= qx) {
      fen.add(y_rank_le(data_xy[2 * data_order[k] + 1]));
      ++k;
    }
    counts[qi] = fen.prefix(y_rank_le(query_xy[2 * qi + 1]));
  }
  return counts;
}

CovarianceStats covariance_with_se(const Eigen::MatrixXd& rows) {
  const auto r = rows.rows();
  const auto d = rows.cols();
  require(r >= 2, Errc::invalid_argument, "covariance_with_se: need >= 2 rows");
  const Eigen::RowVectorXd mu = rows.colwise().mean();
  Eigen::MatrixXd centered = rows.rowwise() - mu;
  CovarianceStats out;
  out.cov = (centered.transpose() * centered) / static_cast<double>(r - 1);
  out.se.resize(d, d);
  const double rd = static_cast<double>(r);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      // moment-based SE of a covariance entry
      double m4 = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) {
        const double p = centered(i, a) * centered(i, b);
        m4 += p * p;
      }
      m4 /= rd;
      const double c = out.cov(a, b);
      const double var = std::max(0.0, m4 - c * c) / rd;
      out.se(a, b) = out.se(b, a) = std::sqrt(var);
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace pseudoproc
