#include "pseudoproc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pseudoproc/empirical.hpp"
#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"
#include "pseudoproc/parallel.hpp"

namespace pseudoproc {

// ---------------------------------------------------------------------------
// Perturbation library
// ---------------------------------------------------------------------------

PerturbationFunction perturb_constant(double c) {
  PerturbationFunction p;
  std::ostringstream os;
  os << "const(" << format_double(c) << ")";
  p.label = os.str();
  p.sup_norm = std::abs(c);
  p.eval = [c](std::span<const double>) { return c; };
  return p;
}

PerturbationFunction perturb_compose(const DataModel& model,
                                     const std::string& rule, double scale) {
  require(model.is_copula(), Errc::unsupported,
          "perturbation: copula model required");
  PerturbationFunction p;
  p.label = rule + "(" + format_double(scale) + ")*eta0";
  if (rule == "identity") {
    p.sup_norm = std::abs(scale);
    p.eval = [model, scale](std::span<const double> x) {
      return scale * model.eta0(x);
    };
  } else if (rule == "sin") {
    p.sup_norm = std::abs(scale);
    p.eval = [model, scale](std::span<const double> x) {
      return scale * std::sin(2.0 * std::numbers::pi * model.eta0(x));
    };
  } else if (rule == "bridge") {
    p.sup_norm = std::abs(scale) * 0.25;
    p.eval = [model, scale](std::span<const double> x) {
      const double t = model.eta0(x);
      return scale * t * (1.0 - t);
    };
  } else {
    fail(Errc::invalid_argument, "perturbation: unknown rule '" + rule + "'");
  }
  return p;
}

PerturbationFunction perturb_compose_poly(const DataModel& model,
                                          std::vector<double> coeffs) {
  require(model.is_copula(), Errc::unsupported,
          "perturbation: copula model required");
  require(!coeffs.empty(), Errc::invalid_argument,
          "perturbation: empty coefficient list");
  PerturbationFunction p;
  p.label = "poly*eta0";
  double bound = 0.0;
  for (double c : coeffs) bound += std::abs(c);
  p.sup_norm = bound;
  p.eval = [model, coeffs](std::span<const double> x) {
    const double t = model.eta0(x);
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
      acc = acc * t + *it;
    }
    return acc;
  };
  return p;
}

PerturbationFunction perturb_rough_sign(int axis, double c) {
  require(axis >= 0, Errc::invalid_argument, "perturbation: negative axis");
  PerturbationFunction p;
  std::ostringstream os;
  os << "rough-sign(axis=" << axis << "," << format_double(c) << ")";
  p.label = os.str();
  p.smooth_compose = false;
  p.sup_norm = std::abs(c);
  p.eval = [axis, c](std::span<const double> x) {
    require(axis < static_cast<int>(x.size()), Errc::invalid_argument,
            "rough perturbation: axis out of range");
    return x[static_cast<std::size_t>(axis)] >= 0.5 ? c : -c;
  };
  return p;
}

// ---------------------------------------------------------------------------
// Staircase cell machinery (bivariate copula models)
// ---------------------------------------------------------------------------

namespace {

void require_tie_free(const Sample& sample) {
  for (int j = 0; j < sample.dim(); ++j) {
    std::vector<double> col(static_cast<std::size_t>(sample.size()));
    for (std::int64_t i = 0; i < sample.size(); ++i) {
      col[static_cast<std::size_t>(i)] = sample.at(i, j);
    }
    std::sort(col.begin(), col.end());
    require(std::adjacent_find(col.begin(), col.end()) == col.end(),
            Errc::invalid_argument,
            "staircase machinery: tie-free sample required");
  }
}

/// Model mass of {x : n * eta_n(x) = j} for j = 0..n, where eta_n is the
/// joint ECDF of the (bivariate, tie-free) sample. Exact up to the model
/// CDF evaluations.
std::vector<double> ecdf_level_mass(const Sample& sample,
                                    const DataModel& model) {
  require(sample.dim() == 2, Errc::unsupported,
          "ecdf_level_mass: bivariate samples only");
  require_tie_free(sample);
  const std::size_t n = static_cast<std::size_t>(sample.size());

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = sample.at(static_cast<std::int64_t>(i), 0);
    ys[i] = sample.at(static_cast<std::int64_t>(i), 1);
  }
  std::vector<std::size_t> x_order(n);
  for (std::size_t i = 0; i < n; ++i) x_order[i] = i;
  std::sort(x_order.begin(), x_order.end(),
            [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ys_sorted = ys;
  std::sort(ys_sorted.begin(), ys_sorted.end());
  auto y_rank = [&ys_sorted](double y) {
    return static_cast<std::size_t>(
        std::lower_bound(ys_sorted.begin(), ys_sorted.end(), y) -
        ys_sorted.begin());  // 0-based rank among sorted values
  };

  // Corner ordinates: y_(0) = 0, y_(1..n), y_(n+1) = 1; same for x.
  auto x_line = [&](std::size_t i) {
    if (i == 0) return 0.0;
    if (i == n + 1) return 1.0;
    return xs[x_order[i - 1]];
  };
  std::vector<double> y_line(n + 2);
  y_line[0] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) y_line[j] = ys_sorted[j - 1];
  y_line[n + 1] = 1.0;

  std::vector<double> corner_prev(n + 2), corner_cur(n + 2);
  std::vector<double> pt(2);
  auto fill_corner = [&](std::vector<double>& col, double x) {
    for (std::size_t j = 0; j <= n + 1; ++j) {
      pt[0] = x;
      pt[1] = y_line[j];
      col[j] = model.cdf(pt);
    }
  };
  fill_corner(corner_prev, 0.0);

  std::vector<int> added(n + 1, 0);  // y-rank occupancy (1-based)
  std::vector<double> mass(n + 1, 0.0);
  std::vector<std::int64_t> count_row(n + 1, 0);

  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0) {
      // Row i spans x in [x_(i), x_(i+1)); points with smaller or equal x
      // are exactly the first i in x-order.
      added[y_rank(ys[x_order[i - 1]]) + 1] += 1;
      std::int64_t running = 0;
      for (std::size_t j = 0; j <= n; ++j) {
        running += added[j];
        count_row[j] = running;
      }
    }
    fill_corner(corner_cur, x_line(i + 1));
    for (std::size_t j = 0; j <= n; ++j) {
      const double cell =
          (corner_cur[j + 1] - corner_cur[j]) -
          (corner_prev[j + 1] - corner_prev[j]);
      mass[static_cast<std::size_t>(count_row[j])] += cell;
    }
    std::swap(corner_prev, corner_cur);
  }
  return mass;
}

/// Visits every cell of the marginal order-statistic grid with its model
/// mass; i and j are the marginal dominance counts inside the cell.
template <typename Fn>
void for_each_marginal_cell(const Sample& sample, const DataModel& model,
                            Fn&& fn) {
  require(sample.dim() == 2, Errc::unsupported,
          "marginal cells: bivariate samples only");
  require_tie_free(sample);
  const std::size_t n = static_cast<std::size_t>(sample.size());
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = sample.at(static_cast<std::int64_t>(i), 0);
    ys[i] = sample.at(static_cast<std::int64_t>(i), 1);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> y_line(n + 2);
  y_line[0] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) y_line[j] = ys[j - 1];
  y_line[n + 1] = 1.0;
  auto x_line = [&](std::size_t i) {
    if (i == 0) return 0.0;
    if (i == n + 1) return 1.0;
    return xs[i - 1];
  };

  std::vector<double> corner_prev(n + 2), corner_cur(n + 2);
  std::vector<double> pt(2);
  auto fill_corner = [&](std::vector<double>& col, double x) {
    for (std::size_t j = 0; j <= n + 1; ++j) {
      pt[0] = x;
      pt[1] = y_line[j];
      col[j] = model.cdf(pt);
    }
  };
  fill_corner(corner_prev, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    fill_corner(corner_cur, x_line(i + 1));
    for (std::size_t j = 0; j <= n; ++j) {
      const double cell = (corner_cur[j + 1] - corner_cur[j]) -
                          (corner_prev[j + 1] - corner_prev[j]);
      fn(i, j, cell);
    }
    std::swap(corner_prev, corner_cur);
  }
}

double median_se(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  // Normal-approximation SE of the sample median.
  return 1.2533 * stddev_of(values) / std::sqrt(static_cast<double>(values.size()));
}

std::vector<double> sorted_column_copy(const Sample& sample, int j) {
  std::vector<double> col(static_cast<std::size_t>(sample.size()));
  for (std::int64_t i = 0; i < sample.size(); ++i) {
    col[static_cast<std::size_t>(i)] = sample.at(i, j);
  }
  std::sort(col.begin(), col.end());
  return col;
}

void require_increasing(const std::vector<std::int64_t>& n_list) {
  require(n_list.size() >= 2, Errc::invalid_argument,
          "n_list must have at least two entries");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    require(n_list[i] > n_list[i - 1], Errc::invalid_argument,
            "n_list must be strictly increasing");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// check_negligibility
// ---------------------------------------------------------------------------

namespace {

double negligibility_sup_kendall(const DataModel& model,
                                 const FunctionClass& cls,
                                 const std::vector<double>& pop0,
                                 std::int64_t n, std::uint64_t sample_seed) {
  const Sample sample = model.sample(n, sample_seed);
  const auto pseudo = kendall_pseudo_obs(sample);
  const auto mass = ecdf_level_mass(sample, model);
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);

  std::vector<double> levels(static_cast<std::size_t>(n) + 1);
  for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) {
    levels[j] = static_cast<double>(j) / nd;
  }
  std::vector<double> true_levels(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    true_levels[static_cast<std::size_t>(i)] = model.eta0(sample.row(i));
  }

  double sup = 0.0;
  for (std::size_t m = 0; m < cls.size(); ++m) {
    const Member& theta = cls.member(m);
    double emp = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double wn = pseudo.at(i);
      const double w0 = true_levels[static_cast<std::size_t>(i)];
      emp += theta(std::span<const double>{&wn, 1}) -
             theta(std::span<const double>{&w0, 1});
    }
    emp /= nd;
    double pop_n = 0.0;
    for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) {
      if (mass[j] != 0.0) {
        pop_n += theta(std::span<const double>{&levels[j], 1}) * mass[j];
      }
    }
    const double value = root_n * (emp - (pop_n - pop0[m]));
    sup = std::max(sup, std::abs(value));
  }
  return sup;
}

double negligibility_sup_copula(const DataModel& model,
                                const FunctionClass& cls,
                                const std::vector<double>& pop0,
                                std::int64_t n, std::uint64_t sample_seed) {
  const Sample sample = model.sample(n, sample_seed);
  const auto pseudo = copula_pseudo_obs(sample);
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const auto xs = sorted_column_copy(sample, 0);
  const auto ys = sorted_column_copy(sample, 1);

  std::vector<double> emp(cls.size(), 0.0);
  for (std::size_t m = 0; m < cls.size(); ++m) {
    const Member& theta = cls.member(m);
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      s += theta(pseudo.row(i)) - theta(sample.row(i));
    }
    emp[m] = s / nd;
  }

  std::vector<double> pop_n(cls.size(), 0.0);
  std::vector<std::size_t> general_members;
  for (std::size_t m = 0; m < cls.size(); ++m) {
    const Member& theta = cls.member(m);
    if (const auto* thr = theta.indicator_thresholds()) {
      // {x : eta_{n,j}(x_j) <= u_j} = {x_j < x_(floor(u_j n)+1)}: the
      // plug-in population term is the model mass of an explicit box.
      std::vector<double> corner(2);
      const double* u = thr->data();
      for (int j = 0; j < 2; ++j) {
        const auto& col = j == 0 ? xs : ys;
        const auto mj = static_cast<std::size_t>(
            std::floor(u[j] * nd + 1e-9));
        corner[static_cast<std::size_t>(j)] =
            mj >= static_cast<std::size_t>(n) ? 1.0 : col[mj];
      }
      pop_n[m] = model.cdf(corner);
    } else {
      general_members.push_back(m);
    }
  }
  if (!general_members.empty()) {
    std::vector<double> pt(2);
    for_each_marginal_cell(
        sample, model, [&](std::size_t i, std::size_t j, double cell) {
          if (cell == 0.0) return;
          pt[0] = static_cast<double>(i) / nd;
          pt[1] = static_cast<double>(j) / nd;
          for (std::size_t m : general_members) {
            pop_n[m] += cls.member(m)(pt) * cell;
          }
        });
  }

  double sup = 0.0;
  for (std::size_t m = 0; m < cls.size(); ++m) {
    const double value = root_n * (emp[m] - (pop_n[m] - pop0[m]));
    sup = std::max(sup, std::abs(value));
  }
  return sup;
}

std::vector<double> copula_population_means(const DataModel& model,
                                            const FunctionClass& cls) {
  std::vector<double> pop0(cls.size(), 0.0);
  bool any_general = false;
  for (std::size_t m = 0; m < cls.size(); ++m) {
    if (const auto* thr = cls.member(m).indicator_thresholds()) {
      pop0[m] = model.cdf(*thr);
    } else {
      any_general = true;
    }
  }
  if (any_general) {
    const auto oracle = smooth_population_means(model, cls, PseudoKind::copula);
    for (std::size_t m = 0; m < cls.size(); ++m) {
      if (!cls.member(m).indicator_thresholds()) pop0[m] = oracle[m];
    }
  }
  return pop0;
}

}  // namespace

VerificationReport check_negligibility(const DataModel& model,
                                       const FunctionClass& cls,
                                       const NegligibilityOptions& opt) {
  require_increasing(opt.n_list);
  require(opt.reps >= 1, Errc::invalid_argument,
          "check_negligibility: reps must be >= 1");
  require(model.is_copula() && model.dim() == 2, Errc::unsupported,
          "check_negligibility: bivariate copula model required");
  if (opt.process == PseudoKind::kendall) {
    require(cls.dim() == 1, Errc::invalid_argument,
            "check_negligibility: kendall classes are one-dimensional");
  } else {
    require(cls.dim() == 2, Errc::invalid_argument,
            "check_negligibility: copula classes are two-dimensional");
  }

  const std::vector<double> pop0 =
      opt.process == PseudoKind::kendall
          ? smooth_population_means(model, cls, PseudoKind::kendall)
          : copula_population_means(model, cls);

  VerificationReport rep;
  rep.check = opt.process == PseudoKind::kendall ? "negligibility-kendall"
                                                 : "negligibility-copula";
  rep.seed = opt.seed;
  rep.trend_rule = "decreasing-and-halved-medians";
  rep.tolerance = opt.halving_ratio;
  const std::uint64_t base = derive_seed(opt.seed, "negligibility");

  std::vector<double> medians;
  std::vector<double> ses;
  for (std::size_t ni = 0; ni < opt.n_list.size(); ++ni) {
    const std::int64_t n = opt.n_list[ni];
    std::vector<double> sups(static_cast<std::size_t>(opt.reps));
    parallel_for(opt.reps, [&](std::int64_t r) {
      const std::uint64_t seed =
          derive_seed(base, static_cast<std::uint64_t>(n) * 1'000'003u +
                                static_cast<std::uint64_t>(r));
      sups[static_cast<std::size_t>(r)] =
          opt.process == PseudoKind::kendall
              ? negligibility_sup_kendall(model, cls, pop0, n, seed)
              : negligibility_sup_copula(model, cls, pop0, n, seed);
    });
    const double med = median_of(sups);
    rep.rows.push_back({"median_sup", static_cast<double>(n), med,
                        median_se(sups)});
    medians.push_back(med);
    ses.push_back(median_se(sups));
  }

  rep.trend_stat = medians.back() / std::max(medians.front(), 1e-300);
  rep.verdict = trend_to_zero_verdict(medians, ses, opt.halving_ratio);
  if (medians.front() == 0.0 && medians.back() == 0.0) {
    rep.notes.push_back("degenerate: all medians exactly zero");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// check_l2_consistency
// ---------------------------------------------------------------------------

VerificationReport check_l2_consistency(const DataModel& model,
                                        const FunctionClass& cls,
                                        const L2ConsistencyOptions& opt) {
  require_increasing(opt.n_list);
  require(opt.reps >= 1 && opt.pool >= 2, Errc::invalid_argument,
          "check_l2_consistency: bad reps/pool");
  require(model.is_copula() && model.dim() == 2, Errc::unsupported,
          "check_l2_consistency: bivariate copula model required");
  require(cls.dim() == 1, Errc::invalid_argument,
          "check_l2_consistency: kendall-level classes only");

  VerificationReport rep;
  rep.check = "l2-consistency";
  rep.seed = opt.seed;
  rep.trend_rule = "decreasing-and-halved-means";
  rep.tolerance = opt.halving_ratio;
  const std::uint64_t base = derive_seed(opt.seed, "l2-consistency");

  std::vector<double> means;
  std::vector<double> ses;
  for (const std::int64_t n : opt.n_list) {
    std::vector<double> values(static_cast<std::size_t>(opt.reps));
    parallel_for(opt.reps, [&](std::int64_t r) {
      const std::uint64_t rep_seed =
          derive_seed(base, static_cast<std::uint64_t>(n) * 1'000'003u +
                                static_cast<std::uint64_t>(r));
      const Sample sample = model.sample(n, rep_seed);
      const Sample pool =
          model.sample(opt.pool, derive_seed(rep_seed, "pool"));
      const auto wn = joint_ecdf_many(sample, pool.data(), 2);
      std::vector<double> w0(static_cast<std::size_t>(opt.pool));
      for (std::int64_t k = 0; k < opt.pool; ++k) {
        w0[static_cast<std::size_t>(k)] = model.eta0(pool.row(k));
      }
      double sup = 0.0;
      for (std::size_t m = 0; m < cls.size(); ++m) {
        const Member& theta = cls.member(m);
        double acc = 0.0;
        for (std::size_t k = 0; k < static_cast<std::size_t>(opt.pool); ++k) {
          const double diff =
              theta(std::span<const double>{&wn[k], 1}) -
              theta(std::span<const double>{&w0[k], 1});
          acc += diff * diff;
        }
        sup = std::max(sup, acc / static_cast<double>(opt.pool));
      }
      values[static_cast<std::size_t>(r)] = sup;
    });
    const double m = mean_of(values);
    const double se = values.size() >= 2
                          ? stddev_of(values) /
                                std::sqrt(static_cast<double>(values.size()))
                          : 0.0;
    rep.rows.push_back({"mean_sup_sq", static_cast<double>(n), m, se});
    means.push_back(m);
    ses.push_back(se);
  }

  // log-log slope against n, recorded for the O(n^-1/2) diagnostic
  bool positive = true;
  for (double v : means) positive = positive && v > 0.0;
  if (positive) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < means.size(); ++i) {
      lx.push_back(std::log(static_cast<double>(opt.n_list[i])));
      ly.push_back(std::log(means[i]));
    }
    rep.trend_stat = ls_slope(lx, ly);
    std::ostringstream os;
    os << "log-log slope " << format_double(rep.trend_stat);
    rep.notes.push_back(os.str());
  }
  rep.verdict = trend_to_zero_verdict(means, ses, opt.halving_ratio);
  return rep;
}

// ---------------------------------------------------------------------------
// check_condition_19
// ---------------------------------------------------------------------------

VerificationReport check_condition_19(
    const DataModel& model,
    const std::vector<PerturbationFunction>& perturbations,
    const Condition19Options& opt) {
  require_increasing(opt.n_list);
  require(!perturbations.empty(), Errc::invalid_argument,
          "check_condition_19: need at least one perturbation");
  require(model.is_copula(), Errc::unsupported,
          "check_condition_19: copula model required");
  const std::vector<double> t_grid =
      opt.t_grid.empty() ? equispaced_grid(0.1, 0.9, 17) : opt.t_grid;

  VerificationReport rep;
  rep.check = "condition-19";
  rep.seed = opt.seed;
  rep.trend_rule = "strictly-decreasing";
  rep.tolerance = 0.0;

  const std::uint64_t pool_seed = derive_seed(opt.seed, "condition19-pool");
  const Sample pool = model.sample(opt.pool, pool_seed);
  const std::size_t m = static_cast<std::size_t>(opt.pool);
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = model.eta0(pool.row(static_cast<std::int64_t>(k)));
  }
  std::vector<std::vector<double>> h_values;
  bool any_rough = false;
  for (const auto& h : perturbations) {
    std::vector<double> hv(m);
    for (std::size_t k = 0; k < m; ++k) {
      hv[k] = h.eval(pool.row(static_cast<std::int64_t>(k)));
    }
    h_values.push_back(std::move(hv));
    any_rough = any_rough || !h.smooth_compose;
  }
  if (any_rough) {
    rep.notes.push_back(
        "contains non-smooth perturbations; kernel continuity may fail");
  }

  std::vector<double> sups;
  std::vector<double> sup_ses;
  std::vector<double> perturbed(m);
  for (const std::int64_t n : opt.n_list) {
    const double root_n = std::sqrt(static_cast<double>(n));
    const double delta =
        opt.delta_zero ? 0.0
                       : std::pow(static_cast<double>(n), opt.delta_exponent);
    const double width = delta / root_n;
    double sup = 0.0;
    double sup_se = 0.0;
    for (std::size_t hi = 0; hi < perturbations.size(); ++hi) {
      for (std::size_t k = 0; k < m; ++k) {
        perturbed[k] = w[k] + h_values[hi][k] / root_n;
      }
      std::sort(perturbed.begin(), perturbed.end());
      for (const double t : t_grid) {
        const auto lo = std::upper_bound(perturbed.begin(), perturbed.end(), t);
        const auto hi_it =
            std::upper_bound(perturbed.begin(), perturbed.end(), t + width);
        const double p =
            static_cast<double>(hi_it - lo) / static_cast<double>(m);
        const double value = root_n * p;
        if (value > sup) {
          sup = value;
          sup_se = root_n *
                   std::sqrt(std::max(0.0, p * (1.0 - p)) /
                             static_cast<double>(m));
        }
      }
    }
    rep.rows.push_back({"sup", static_cast<double>(n), sup, sup_se});
    sups.push_back(sup);
    sup_ses.push_back(sup_se);
  }

  rep.trend_stat = sups.back() / std::max(sups.front(), 1e-300);
  rep.verdict = trend_decreasing_verdict(sups, sup_ses);
  return rep;
}

// ---------------------------------------------------------------------------
// Limit lemmas
// ---------------------------------------------------------------------------

VerificationReport check_lemma_limit_1d(
    const Law1d& law, const std::function<double(double, double)>& y_t,
    const std::function<double(double)>& g, double x, double a, double b,
    double target, const LemmaLimitOptions& opt) {
  require(!opt.t_grid.empty(), Errc::invalid_argument,
          "lemma limit: empty t grid");
  require(std::is_sorted(opt.t_grid.rbegin(), opt.t_grid.rend()),
          Errc::invalid_argument, "lemma limit: t grid must decrease");
  require(opt.draws >= 2, Errc::invalid_argument, "lemma limit: draws >= 2");

  VerificationReport rep;
  rep.check = "lemma-limit-1d";
  rep.seed = opt.seed;
  rep.trend_rule = "final-within-tolerance";
  rep.notes.push_back("law: " + law.label);

  double final_estimate = 0.0;
  double final_se = 0.0;
  for (std::size_t ti = 0; ti < opt.t_grid.size(); ++ti) {
    const double t = opt.t_grid[ti];
    Rng rng(derive_seed(opt.seed, "lemma1d", ti));
    double s = 0.0;
    double s2 = 0.0;
    for (std::int64_t i = 0; i < opt.draws; ++i) {
      double xv = 0.0;
      double yv = 0.0;
      law.draw(rng, xv, yv);
      const double yt = y_t(yv, t);
      const double v = xv + t * a * yt;
      const double q =
          (v > x && v <= x + t * b) ? g(yt) / t : 0.0;
      s += q;
      s2 += q * q;
    }
    const double md = static_cast<double>(opt.draws);
    const double est = s / md;
    const double se = std::sqrt(std::max(0.0, s2 / md - est * est) / md);
    rep.rows.push_back({"prelimit", t, est, se});
    final_estimate = est;
    final_se = se;
  }
  rep.rows.push_back({"target", 0.0, target, 0.0});

  rep.tolerance = std::max(3.0 * final_se, opt.rel_tol * std::abs(target));
  rep.trend_stat = std::abs(final_estimate - target);
  rep.verdict = rep.trend_stat <= rep.tolerance ? Verdict::pass : Verdict::fail;
  return rep;
}

VerificationReport check_lemma_limit_2d(
    const Law2d& law,
    const std::function<std::array<double, 2>(std::array<double, 2>, double)>&
        y_t,
    const std::function<double(std::array<double, 2>)>& g,
    std::array<double, 2> x, double a, std::array<double, 2> b, double target,
    const LemmaLimitOptions& opt) {
  require(!opt.t_grid.empty(), Errc::invalid_argument,
          "lemma limit: empty t grid");
  require(std::is_sorted(opt.t_grid.rbegin(), opt.t_grid.rend()),
          Errc::invalid_argument, "lemma limit: t grid must decrease");
  require(opt.draws >= 2, Errc::invalid_argument, "lemma limit: draws >= 2");

  VerificationReport rep;
  rep.check = "lemma-limit-2d";
  rep.seed = opt.seed;
  rep.trend_rule = "final-within-tolerance";
  rep.notes.push_back("law: " + law.label);

  double final_estimate = 0.0;
  double final_se = 0.0;
  for (std::size_t ti = 0; ti < opt.t_grid.size(); ++ti) {
    const double t = opt.t_grid[ti];
    Rng rng(derive_seed(opt.seed, "lemma2d", ti));
    double s = 0.0;
    double s2 = 0.0;
    for (std::int64_t i = 0; i < opt.draws; ++i) {
      std::array<double, 2> xv{};
      std::array<double, 2> yv{};
      law.draw(rng, xv, yv);
      const auto yt = y_t(yv, t);
      const double v0 = xv[0] + t * a * yt[0];
      const double v1 = xv[1] + t * a * yt[1];
      const bool in_shifted = v0 <= x[0] + t * b[0] && v1 <= x[1] + t * b[1];
      const bool in_base = v0 <= x[0] && v1 <= x[1];
      const double q =
          (in_shifted && !in_base) ? g(yt) / t : 0.0;
      s += q;
      s2 += q * q;
    }
    const double md = static_cast<double>(opt.draws);
    const double est = s / md;
    const double se = std::sqrt(std::max(0.0, s2 / md - est * est) / md);
    rep.rows.push_back({"prelimit", t, est, se});
    final_estimate = est;
    final_se = se;
  }
  rep.rows.push_back({"target", 0.0, target, 0.0});

  rep.tolerance = std::max(3.0 * final_se, opt.rel_tol * std::abs(target));
  rep.trend_stat = std::abs(final_estimate - target);
  rep.verdict = rep.trend_stat <= rep.tolerance ? Verdict::pass : Verdict::fail;
  return rep;
}

double lemma2d_boundary_target(
    const std::function<double(double, double)>& density,
    const std::function<double(double, double)>& g_cond_mean,
    std::array<double, 2> x, std::array<double, 2> b,
    std::array<double, 2> lower_support) {
  double total = 0.0;
  if (b[0] != 0.0) {
    total += b[0] * simpson(
                        [&](double s2) {
                          return g_cond_mean(x[0], s2) * density(x[0], s2);
                        },
                        lower_support[1], x[1], 2000);
  }
  if (b[1] != 0.0) {
    total += b[1] * simpson(
                        [&](double s1) {
                          return g_cond_mean(s1, x[1]) * density(s1, x[1]);
                        },
                        lower_support[0], x[0], 2000);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Hadamard difference quotients
// ---------------------------------------------------------------------------

VerificationReport check_hadamard_smooth(const DataModel& model,
                                         const FunctionClass& cls,
                                         const PerturbationFunction& h,
                                         const HadamardSmoothOptions& opt) {
  require(model.is_copula(), Errc::unsupported,
          "check_hadamard_smooth: copula model required");
  require(cls.dim() == 1, Errc::invalid_argument,
          "check_hadamard_smooth: one-dimensional members required");
  require(!opt.t_grid.empty() &&
              std::is_sorted(opt.t_grid.rbegin(), opt.t_grid.rend()),
          Errc::invalid_argument,
          "check_hadamard_smooth: t grid must decrease");
  for (std::size_t m = 0; m < cls.size(); ++m) {
    require(cls.member(m).has_gradient(), Errc::unsupported,
            "check_hadamard_smooth: members must be differentiable");
  }

  VerificationReport rep;
  rep.check = "hadamard-smooth";
  rep.seed = opt.seed;
  rep.trend_rule = "decreasing-and-final-below";
  rep.notes.push_back("perturbation: " + h.label);

  const Sample pool =
      model.sample(opt.pool, derive_seed(opt.seed, "hadamard-pool"));
  const std::size_t m = static_cast<std::size_t>(opt.pool);
  std::vector<double> w(m), hv(m);
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = model.eta0(pool.row(static_cast<std::int64_t>(k)));
    hv[k] = h.eval(pool.row(static_cast<std::int64_t>(k)));
  }
  std::vector<std::vector<double>> derivative_terms(cls.size(),
                                                    std::vector<double>(m));
  for (std::size_t mi = 0; mi < cls.size(); ++mi) {
    for (std::size_t k = 0; k < m; ++k) {
      derivative_terms[mi][k] =
          cls.member(mi).gradient(std::span<const double>{&w[k], 1})[0] * hv[k];
    }
  }

  std::vector<double> max_errors;
  std::vector<double> max_error_ses;
  for (const double t : opt.t_grid) {
    double worst = -1.0;
    double worst_se = 0.0;
    for (std::size_t mi = 0; mi < cls.size(); ++mi) {
      const Member& theta = cls.member(mi);
      double s = 0.0;
      double s2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double shifted = w[k] + t * hv[k];
        const double diff =
            (theta(std::span<const double>{&shifted, 1}) -
             theta(std::span<const double>{&w[k], 1})) /
                t -
            derivative_terms[mi][k];
        s += diff;
        s2 += diff * diff;
      }
      const double md = static_cast<double>(m);
      const double err = std::abs(s / md);
      const double se =
          std::sqrt(std::max(0.0, s2 / md - (s / md) * (s / md)) / md);
      if (err > worst) {
        worst = err;
        worst_se = se;
      }
    }
    rep.rows.push_back({"max_error", t, worst, worst_se});
    max_errors.push_back(worst);
    max_error_ses.push_back(worst_se);
  }

  rep.tolerance = std::max(3.0 * max_error_ses.back(), opt.tol);
  rep.trend_stat = max_errors.back();
  const Verdict trend = trend_decreasing_verdict(max_errors, max_error_ses);
  const bool final_ok = max_errors.back() <= rep.tolerance;
  rep.verdict = (trend != Verdict::fail && final_ok)
                    ? (trend == Verdict::inconclusive && !final_ok
                           ? Verdict::inconclusive
                           : Verdict::pass)
                    : Verdict::fail;
  if (trend == Verdict::inconclusive) {
    rep.notes.push_back("trend noise-dominated; verdict from final error");
  }
  return rep;
}

VerificationReport check_hadamard_bv(const DataModel& model,
                                     const PerturbationFunction& h0,
                                     const HadamardBvOptions& opt) {
  require(model.is_copula() && model.dim() == 2, Errc::unsupported,
          "check_hadamard_bv: bivariate copula model required");
  require(!opt.s_grid.empty(), Errc::invalid_argument,
          "check_hadamard_bv: empty s grid");
  require(!opt.t_grid.empty() &&
              std::is_sorted(opt.t_grid.rbegin(), opt.t_grid.rend()),
          Errc::invalid_argument, "check_hadamard_bv: t grid must decrease");

  VerificationReport rep;
  rep.check = "hadamard-bv";
  rep.seed = opt.seed;
  rep.trend_rule = "uniform-final-within-tolerance";
  rep.notes.push_back("perturbation: " + h0.label);
  if (!h0.smooth_compose) {
    rep.notes.push_back(
        "non-smooth perturbation; kernel continuity may fail");
  }

  const Sample pool =
      model.sample(opt.pool, derive_seed(opt.seed, "hadamard-bv-pool"));
  const std::size_t m = static_cast<std::size_t>(opt.pool);
  std::vector<double> w(m), hv(m);
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = model.eta0(pool.row(static_cast<std::int64_t>(k)));
    hv[k] = h0.eval(pool.row(static_cast<std::int64_t>(k)));
  }

  BandOptions band = opt.band;
  if (band.seed == 0) band.seed = derive_seed(opt.seed, "hadamard-bv-band");
  const BandPool band_pool(model, band.draws, band.seed);

  bool all_within = true;
  double worst_final = 0.0;
  for (const double s : opt.s_grid) {
    const auto conditioner = band_pool.conditioner(s, band.h);
    const double target =
        conditioner.conditional_mean(
            [&h0](std::span<const double> z) { return h0.eval(z); }) *
        model.kendall_density(s);
    rep.rows.push_back({"target", s, target, 0.0});

    double final_err = 0.0;
    double final_se = 0.0;
    for (const double t : opt.t_grid) {
      double acc = 0.0;
      double acc2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double base = (s <= w[k]) ? 1.0 : 0.0;
        const double shifted = (s <= w[k] + t * hv[k]) ? 1.0 : 0.0;
        const double q = (shifted - base) / t;
        acc += q;
        acc2 += q * q;
      }
      const double md = static_cast<double>(m);
      const double quotient = acc / md;
      const double se =
          std::sqrt(std::max(0.0, acc2 / md - quotient * quotient) / md);
      rep.rows.push_back({"quotient@s=" + format_double(s), t, quotient, se});
      final_err = std::abs(quotient - target);
      final_se = se;
    }
    const double tol = std::max(3.0 * final_se, opt.rel_tol * std::abs(target));
    if (final_err > tol) all_within = false;
    worst_final = std::max(worst_final, final_err);
    rep.rows.push_back({"final_error", s, final_err, final_se});
  }

  rep.tolerance = opt.rel_tol;
  rep.trend_stat = worst_final;
  rep.verdict = all_within ? Verdict::pass : Verdict::fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-n covariance vs influence limit
// ---------------------------------------------------------------------------

Eigen::MatrixXd replicate_kendall_paths(const DataModel& model,
                                        const std::vector<double>& theta_grid,
                                        std::int64_t n, int reps,
                                        std::uint64_t seed) {
  require(reps >= 2, Errc::invalid_argument, "replicate paths: reps >= 2");
  Eigen::MatrixXd rows(reps, static_cast<Eigen::Index>(theta_grid.size()));
  const std::uint64_t base = derive_seed(seed, "kendall-paths");
  parallel_for(reps, [&](std::int64_t r) {
    const Sample sample =
        model.sample(n, derive_seed(base, static_cast<std::uint64_t>(r)));
    const ProcessPath path = kendall_process(sample, model, theta_grid);
    for (std::size_t j = 0; j < theta_grid.size(); ++j) {
      rows(r, static_cast<Eigen::Index>(j)) = path.values[j];
    }
  });
  return rows;
}

Eigen::MatrixXd replicate_copula_paths(
    const DataModel& model, const std::vector<std::vector<double>>& u_grid,
    std::int64_t n, int reps, std::uint64_t seed) {
  require(reps >= 2, Errc::invalid_argument, "replicate paths: reps >= 2");
  Eigen::MatrixXd rows(reps, static_cast<Eigen::Index>(u_grid.size()));
  const std::uint64_t base = derive_seed(seed, "copula-paths");
  parallel_for(reps, [&](std::int64_t r) {
    const Sample sample =
        model.sample(n, derive_seed(base, static_cast<std::uint64_t>(r)));
    const ProcessPath path = copula_process(sample, model, u_grid);
    for (std::size_t j = 0; j < u_grid.size(); ++j) {
      rows(r, static_cast<Eigen::Index>(j)) = path.values[j];
    }
  });
  return rows;
}

namespace {

VerificationReport compare_covariance_impl(
    const std::string& name, const Eigen::MatrixXd& paths,
    const CovarianceEstimate& limit, const CompareCovarianceOptions& opt) {
  const auto empirical = covariance_with_se(paths);
  const Eigen::Index d = empirical.cov.rows();
  require(limit.cov.rows() == d, Errc::internal,
          "compare_covariance: dimension mismatch");

  VerificationReport rep;
  rep.check = name;
  rep.seed = opt.seed;
  rep.trend_rule = "fraction-within-combined-se";
  rep.tolerance = opt.min_fraction;

  std::int64_t within = 0;
  std::int64_t total = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double diff = empirical.cov(i, j) - limit.cov(i, j);
      const double combined =
          std::sqrt(empirical.se(i, j) * empirical.se(i, j) +
                    limit.se(i, j) * limit.se(i, j));
      const double entry_id = static_cast<double>(i * d + j);
      rep.rows.push_back({"empirical", entry_id, empirical.cov(i, j),
                          empirical.se(i, j)});
      rep.rows.push_back({"limit", entry_id, limit.cov(i, j), limit.se(i, j)});
      rep.rows.push_back({"absdiff", entry_id, std::abs(diff),
                          opt.se_mult * combined});
      ++total;
      if (std::abs(diff) <= opt.se_mult * combined) ++within;
    }
  }
  rep.trend_stat =
      static_cast<double>(within) / static_cast<double>(total);
  rep.verdict =
      rep.trend_stat >= opt.min_fraction ? Verdict::pass : Verdict::fail;
  std::ostringstream os;
  os << within << "/" << total << " entries within " << opt.se_mult
     << " combined SE";
  rep.notes.push_back(os.str());
  return rep;
}

}  // namespace

VerificationReport compare_covariance_kendall(
    const DataModel& model, const std::vector<double>& theta_grid,
    const CompareCovarianceOptions& opt) {
  const Eigen::MatrixXd paths =
      replicate_kendall_paths(model, theta_grid, opt.n, opt.reps, opt.seed);
  BandOptions band = opt.band;
  if (band.seed == 0) band.seed = derive_seed(opt.seed, "kendall-band");
  const BandPool pool(model, band.draws, band.seed);
  std::vector<InfluenceFunction> family;
  family.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    family.push_back(
        InfluenceFunction::kendall_indicator(model, theta, pool, band.h));
  }
  const auto limit = limit_covariance(model, family, opt.mc_size,
                                      derive_seed(opt.seed, "kendall-limit"));
  return compare_covariance_impl("compare-covariance-kendall", paths, limit,
                                 opt);
}

VerificationReport compare_covariance_copula(
    const DataModel& model, const std::vector<std::vector<double>>& u_grid,
    const CompareCovarianceOptions& opt) {
  const Eigen::MatrixXd paths =
      replicate_copula_paths(model, u_grid, opt.n, opt.reps, opt.seed);
  std::vector<InfluenceFunction> family;
  family.reserve(u_grid.size());
  for (const auto& u : u_grid) {
    family.push_back(InfluenceFunction::copula_indicator(model, u));
  }
  const auto limit = limit_covariance(model, family, opt.mc_size,
                                      derive_seed(opt.seed, "copula-limit"));
  return compare_covariance_impl("compare-covariance-copula", paths, limit,
                                 opt);
}

VerificationReport check_normality(const Eigen::MatrixXd& paths,
                                   Eigen::Index column, double alpha) {
  require(column >= 0 && column < paths.cols(), Errc::invalid_argument,
          "check_normality: column out of range");
  require(paths.rows() >= 10, Errc::invalid_argument,
          "check_normality: need at least 10 replications");

  VerificationReport rep;
  rep.check = "normality";
  rep.trend_rule = "ks-below-critical";

  const Eigen::Index reps = paths.rows();
  std::vector<double> values(static_cast<std::size_t>(reps));
  for (Eigen::Index i = 0; i < reps; ++i) {
    values[static_cast<std::size_t>(i)] = paths(i, column);
  }
  const double mu = mean_of(values);
  const double sd = stddev_of(values);
  if (sd == 0.0) {
    rep.verdict = Verdict::fail;
    rep.notes.push_back("degenerate column: zero variance");
    return rep;
  }
  for (double& v : values) v = (v - mu) / sd;
  const double ks = ks_statistic(values, normal_cdf);
  const double critical =
      ks_critical_value(static_cast<std::size_t>(reps), alpha);
  rep.rows.push_back({"ks", 0.0, ks, 0.0});
  rep.rows.push_back({"critical", alpha, critical, 0.0});
  rep.tolerance = critical;
  rep.trend_stat = ks;
  rep.verdict = ks < critical ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace pseudoproc
