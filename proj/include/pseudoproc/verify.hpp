#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pseudoproc/fclasses.hpp"
#include "pseudoproc/models.hpp"
#include "pseudoproc/processes.hpp"
#include "pseudoproc/report.hpp"

namespace pseudoproc {

/// Perturbation direction h0 : X -> R used in the replacement conditions.
/// The shipped library composes a continuous h with eta0; rough directions
/// are allowed but flagged, since the kernel-continuity hypothesis behind
/// the limit lemmas may fail for them.
struct PerturbationFunction {
  std::string label;
  bool smooth_compose = true;
  double sup_norm = 1.0;
  std::function<double(std::span<const double>)> eval;
};

PerturbationFunction perturb_constant(double c);
/// rule in {"identity", "sin", "bridge"}: scale*t, scale*sin(2 pi t),
/// scale*t(1-t), each applied to eta0(x).
PerturbationFunction perturb_compose(const DataModel& model,
                                     const std::string& rule, double scale);
PerturbationFunction perturb_compose_poly(const DataModel& model,
                                          std::vector<double> coeffs);
/// Non-smooth direction c * sign(x_axis - 1/2); flagged.
PerturbationFunction perturb_rough_sign(int axis, double c);

// ---------------------------------------------------------------------------
// Replacement condition (negligibility of the first decomposition term)
// ---------------------------------------------------------------------------

struct NegligibilityOptions {
  std::vector<std::int64_t> n_list;
  int reps = 200;
  std::uint64_t seed = 1;
  PseudoKind process = PseudoKind::kendall;
  double halving_ratio = 0.5;
};

/// Per replication, S_n = sup over the class of |G_n(theta(eta_n) -
/// theta(eta_0))|. Both the empirical and the population terms are computed
/// exactly: the plug-in ECDF takes finitely many values, and the model
/// supplies closed-form cell masses. Verdict: medians strictly decreasing
/// across n and the last below halving_ratio times the first.
VerificationReport check_negligibility(const DataModel& model,
                                       const FunctionClass& cls,
                                       const NegligibilityOptions& opt);

struct L2ConsistencyOptions {
  std::vector<std::int64_t> n_list;
  int reps = 50;
  std::int64_t pool = 100'000;
  std::uint64_t seed = 1;
  double halving_ratio = 0.5;
};

/// Monte Carlo estimate of sup_theta P (theta(eta_n) - theta(eta_0))^2 per
/// n, the inner P by a pooled oracle, the outer average over replications
/// of eta_n. Records the log-log slope against n.
VerificationReport check_l2_consistency(const DataModel& model,
                                        const FunctionClass& cls,
                                        const L2ConsistencyOptions& opt);

struct Condition19Options {
  std::vector<std::int64_t> n_list;
  std::vector<double> t_grid;     // defaults to 17 levels in [0.1, 0.9]
  double delta_exponent = -0.25;  // delta_n = n^exponent
  bool delta_zero = false;        // force delta_n = 0
  std::int64_t pool = 1'000'000;
  std::uint64_t seed = 1;
};

/// sup over levels and perturbations of sqrt(n) P(1{eta0 + h0/sqrt(n) <=
/// t + delta_n/sqrt(n)} - 1{eta0 + h0/sqrt(n) <= t}); verdict: strictly
/// decreasing along n_list.
VerificationReport check_condition_19(
    const DataModel& model,
    const std::vector<PerturbationFunction>& perturbations,
    const Condition19Options& opt);

// ---------------------------------------------------------------------------
// Small-interval limit lemmas
// ---------------------------------------------------------------------------

struct Law1d {
  std::string label;
  std::function<void(Rng&, double& x, double& y)> draw;
};

struct LemmaLimitOptions {
  std::vector<double> t_grid = {1e-1, 1e-2, 1e-3};
  std::int64_t draws = 10'000'000;
  std::uint64_t seed = 1;
  double rel_tol = 0.05;
};

/// Monte Carlo pre-limit of (1/t) E g(Y_t) 1{x < X + t a Y_t <= x + t b}
/// along a decreasing t grid, against the caller-supplied limit value.
/// Verdict at the smallest t: |estimate - target| <= max(3 SE, rel_tol |target|).
VerificationReport check_lemma_limit_1d(
    const Law1d& law, const std::function<double(double, double)>& y_t,
    const std::function<double(double)>& g, double x, double a, double b,
    double target, const LemmaLimitOptions& opt);

struct Law2d {
  std::string label;
  std::function<void(Rng&, std::array<double, 2>& x, std::array<double, 2>& y)>
      draw;
};

/// Bivariate analog with the componentwise slab indicator
/// 1{X + t a Y_t <= x + t b} - 1{X + t a Y_t <= x}.
VerificationReport check_lemma_limit_2d(
    const Law2d& law,
    const std::function<std::array<double, 2>(std::array<double, 2>, double)>&
        y_t,
    const std::function<double(std::array<double, 2>)>& g,
    std::array<double, 2> x, double a, std::array<double, 2> b, double target,
    const LemmaLimitOptions& opt);

/// Quadrature of the two boundary integrals of the bivariate limit:
/// b1 int_{lo2}^{x2} m(x1,s) f(x1,s) ds + b2 int_{lo1}^{x1} m(s,x2) f(s,x2) ds
/// with m(s1,s2) the conditional mean of g(Y) given X = (s1,s2).
double lemma2d_boundary_target(
    const std::function<double(double, double)>& density,
    const std::function<double(double, double)>& g_cond_mean,
    std::array<double, 2> x, std::array<double, 2> b,
    std::array<double, 2> lower_support);

// ---------------------------------------------------------------------------
// Hadamard-derivative difference quotients
// ---------------------------------------------------------------------------

struct HadamardSmoothOptions {
  std::vector<double> t_grid = {1e-1, 1e-2, 1e-3};
  std::int64_t pool = 200'000;
  std::uint64_t seed = 1;
  double tol = 1e-2;
};

/// Per member and t: |(1/t) P(theta(eta0 + t h) - theta(eta0)) -
/// P theta_dot(eta0) h| with all expectations over a common draw pool.
/// Verdict: the member-max error decreases along t and the final value is
/// <= max(3 SE, tol).
VerificationReport check_hadamard_smooth(const DataModel& model,
                                         const FunctionClass& cls,
                                         const PerturbationFunction& h,
                                         const HadamardSmoothOptions& opt);

struct HadamardBvOptions {
  std::vector<double> s_grid = {0.3, 0.5, 0.7};
  std::vector<double> t_grid = {1e-1, 1e-2, 1e-3};
  std::int64_t pool = 1'000'000;
  std::uint64_t seed = 1;
  double rel_tol = 0.05;
  BandOptions band;
};

/// Indicator-level difference quotients (1/t) P(1{s <= eta0 + t h0} -
/// 1{s <= eta0}) against E(h0(X)|eta0(X)=s) k(s) from the band oracle and
/// the analytic Kendall density, uniformly over s_grid.
VerificationReport check_hadamard_bv(const DataModel& model,
                                     const PerturbationFunction& h0,
                                     const HadamardBvOptions& opt);

// ---------------------------------------------------------------------------
// Finite-n process vs influence-function limit
// ---------------------------------------------------------------------------

/// Replicated finite-n paths, one row per replication.
Eigen::MatrixXd replicate_kendall_paths(const DataModel& model,
                                        const std::vector<double>& theta_grid,
                                        std::int64_t n, int reps,
                                        std::uint64_t seed);
Eigen::MatrixXd replicate_copula_paths(
    const DataModel& model, const std::vector<std::vector<double>>& u_grid,
    std::int64_t n, int reps, std::uint64_t seed);

struct CompareCovarianceOptions {
  std::int64_t n = 1000;
  int reps = 2000;
  std::int64_t mc_size = 200'000;
  std::uint64_t seed = 1;
  double se_mult = 4.0;
  double min_fraction = 0.9;
  BandOptions band;
};

/// Entrywise comparison of the replication covariance of the finite-n
/// process with the Monte Carlo limit covariance of the matching influence
/// family. Verdict: at least min_fraction of the upper-triangle entries
/// agree within se_mult combined standard errors.
VerificationReport compare_covariance_kendall(
    const DataModel& model, const std::vector<double>& theta_grid,
    const CompareCovarianceOptions& opt);
VerificationReport compare_covariance_copula(
    const DataModel& model, const std::vector<std::vector<double>>& u_grid,
    const CompareCovarianceOptions& opt);

/// KS test of the standardized replication values in one path column
/// against the standard normal, at level alpha.
VerificationReport check_normality(const Eigen::MatrixXd& paths,
                                   Eigen::Index column, double alpha = 0.01);

}  // namespace pseudoproc
