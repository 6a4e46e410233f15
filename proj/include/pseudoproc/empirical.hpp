#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pseudoproc/models.hpp"

namespace pseudoproc {

/// Pseudo-observation values: width 1 per row for the Kendall kind
/// (joint-ECDF evaluations), width d for the copula kind (marginal ranks
/// divided by n). Ties follow the max-rank ECDF convention, self-inclusive.
struct PseudoObservations {
  std::vector<double> values;  // n * width, row-major
  std::int64_t n = 0;
  int width = 1;

  double at(std::int64_t i, int j = 0) const { return values[i * width + j]; }
  std::span<const double> row(std::int64_t i) const {
    return {values.data() + i * width, static_cast<std::size_t>(width)};
  }
};

/// (1/n) #\{i : X_i <= x componentwise\}.
double joint_ecdf(const Sample& sample, std::span<const double> x);

/// Joint ECDF of `sample` at many query points (row-major, `dim` columns).
/// Uses an O((n+m) log) sweep for d=2 and a direct scan otherwise.
std::vector<double> joint_ecdf_many(const Sample& sample,
                                    std::span<const double> queries, int dim);

PseudoObservations kendall_pseudo_obs(const Sample& sample);
PseudoObservations copula_pseudo_obs(const Sample& sample);

/// G_n f = sqrt(n) (P_n f - P f) with the population mean supplied by the
/// caller. Non-finite evaluations are an error.
double empirical_process(const Sample& sample,
                         const std::function<double(std::span<const double>)>& f,
                         double pf);

struct PolyFit {
  std::vector<double> coeffs;     // ascending powers
  std::vector<double> residuals;  // y_i - fit(x_i)
  double eval(double x) const;
};

/// Least-squares polynomial fit of y on x via normal equations, with a
/// 1e-12-scaled ridge retry when the Gram matrix is ill-conditioned.
PolyFit ls_polyfit(const Sample& xy, int degree);

}  // namespace pseudoproc
