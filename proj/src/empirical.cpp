#include "pseudoproc/empirical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

double joint_ecdf(const Sample& sample, std::span<const double> x) {
  require(static_cast<int>(x.size()) == sample.dim(), Errc::invalid_argument,
          "joint_ecdf: dimension mismatch");
  std::int64_t count = 0;
  for (std::int64_t i = 0; i < sample.size(); ++i) {
    const auto row = sample.row(i);
    bool dominated = true;
    for (int j = 0; j < sample.dim(); ++j) {
      if (row[j] > x[j]) {
        dominated = false;
        break;
      }
    }
    count += dominated;
  }
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

std::vector<double> joint_ecdf_many(const Sample& sample,
                                    std::span<const double> queries, int dim) {
  require(dim == sample.dim(), Errc::invalid_argument,
          "joint_ecdf_many: dimension mismatch");
  require(queries.size() % static_cast<std::size_t>(dim) == 0,
          Errc::invalid_argument, "joint_ecdf_many: ragged query block");
  const std::size_t m = queries.size() / dim;
  std::vector<double> out(m);
  const double n = static_cast<double>(sample.size());
  if (dim == 2) {
    const auto counts = dominance_counts_2d(sample.data(), queries);
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = static_cast<double>(counts[i]) / n;
    }
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = joint_ecdf(sample, queries.subspan(i * dim, dim));
  }
  return out;
}

PseudoObservations kendall_pseudo_obs(const Sample& sample) {
  PseudoObservations po;
  po.n = sample.size();
  po.width = 1;
  po.values = joint_ecdf_many(sample, sample.data(), sample.dim());
  return po;
}

PseudoObservations copula_pseudo_obs(const Sample& sample) {
  const std::int64_t n = sample.size();
  const int d = sample.dim();
  PseudoObservations po;
  po.n = n;
  po.width = d;
  po.values.assign(static_cast<std::size_t>(n) * d, 0.0);
  std::vector<double> column(n);
  for (int j = 0; j < d; ++j) {
    for (std::int64_t i = 0; i < n; ++i) column[i] = sample.at(i, j);
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (std::int64_t i = 0; i < n; ++i) {
      // max-rank: number of column values <= this one
      const auto rank = std::upper_bound(sorted.begin(), sorted.end(),
                                         column[i]) -
                        sorted.begin();
      po.values[i * d + j] =
          static_cast<double>(rank) / static_cast<double>(n);
    }
  }
  return po;
}

double empirical_process(
    const Sample& sample,
    const std::function<double(std::span<const double>)>& f, double pf) {
  double s = 0.0;
  for (std::int64_t i = 0; i < sample.size(); ++i) {
    const double v = f(sample.row(i));
    require(std::isfinite(v), Errc::numeric,
            "empirical_process: non-finite index-function value");
    s += v;
  }
  const double n = static_cast<double>(sample.size());
  return std::sqrt(n) * (s / n - pf);
}

double PolyFit::eval(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

PolyFit ls_polyfit(const Sample& xy, int degree) {
  require(xy.dim() == 2, Errc::invalid_argument,
          "ls_polyfit: expected (x, y) pairs");
  require(degree >= 0, Errc::invalid_argument, "ls_polyfit: negative degree");
  const std::int64_t n = xy.size();
  require(n > degree, Errc::invalid_argument,
          "ls_polyfit: need more points than the degree");
  const int p = degree + 1;

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = xy.at(i, 0);
    double pw = 1.0;
    for (int j = 0; j < p; ++j) {
      design(i, j) = pw;
      pw *= x;
    }
    y(i) = xy.at(i, 1);
  }

  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd rhs = design.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  Eigen::VectorXd beta;
  if (llt.info() == Eigen::Success) {
    beta = llt.solve(rhs);
  } else {
    const double ridge = 1e-12 * std::max(1.0, gram.trace());
    Eigen::MatrixXd jittered = gram;
    jittered.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> retry(jittered);
    require(retry.info() == Eigen::Success, Errc::numeric,
            "ls_polyfit: rank-deficient design");
    beta = retry.solve(rhs);
  }

  PolyFit fit;
  fit.coeffs.assign(beta.data(), beta.data() + p);
  fit.residuals.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    fit.residuals[static_cast<std::size_t>(i)] = y(i) - fit.eval(xy.at(i, 0));
  }
  return fit;
}

}  // namespace pseudoproc
