#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pseudoproc/models.hpp"
#include "pseudoproc/report.hpp"
#include "pseudoproc/rng.hpp"

namespace pseudoproc {

enum class ClassKind { indicator_grid, lipschitz, survival, custom };

/// One index function theta : R^d -> R. Value type; evaluation is pure.
class Member {
 public:
  double operator()(std::span<const double> r) const;
  /// Gradient for continuously differentiable members (lipschitz-cosine and
  /// custom members constructed with one); errors otherwise.
  std::vector<double> gradient(std::span<const double> r) const;
  bool has_gradient() const;
  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  double bound() const { return bound_; }  // pointwise |theta| bound

  /// For one-dimensional step members (indicator, survival): the exact mean
  /// E theta(W) under the law with the given CDF. Empty for smooth members.
  std::optional<double> step_mean_1d(
      const std::function<double(double)>& cdf) const;

  /// Threshold vector for indicator members, null otherwise.
  const std::vector<double>* indicator_thresholds() const;

  /// 1{x <= thresholds componentwise}.
  static Member indicator(std::vector<double> thresholds);
  /// clip(s * sum_k c_k cos(<w_k, r> + b_k)) with s chosen so that both
  /// |theta| <= 1 and Lip(theta) <= 1; the clip therefore never binds and
  /// the member stays C^1.
  static Member lipschitz_cosine(std::vector<double> c,
                                 std::vector<std::vector<double>> w,
                                 std::vector<double> b);
  /// Survival function of a subprobability measure with the given atoms:
  /// theta(x) = sum_j weights[j] 1{x >= atoms[j] componentwise}.
  static Member survival(std::vector<std::vector<double>> atoms,
                         std::vector<double> weights);
  static Member custom(int dim, std::string label,
                       std::function<double(std::span<const double>)> f,
                       std::function<std::vector<double>(std::span<const double>)>
                           grad = nullptr,
                       double bound = 1.0);

 private:
  struct IndicatorData {
    std::vector<double> thresholds;
  };
  struct CosineData {
    std::vector<double> c;
    std::vector<std::vector<double>> w;
    std::vector<double> b;
    double scale;
  };
  struct SurvivalData {
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
  };
  struct CustomData {
    std::function<double(std::span<const double>)> f;
    std::function<std::vector<double>(std::span<const double>)> grad;
  };

  Member() = default;
  std::variant<IndicatorData, CosineData, SurvivalData, CustomData> data_;
  int dim_ = 1;
  double bound_ = 1.0;
  std::string label_;
};

/// Finite, enumerable family of index functions with a common envelope.
class FunctionClass {
 public:
  FunctionClass(ClassKind kind, int dim, std::vector<Member> members);

  ClassKind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  const Member& member(std::size_t i) const { return members_[i]; }
  const std::vector<Member>& members() const { return members_; }

  /// Pointwise envelope; constant for all shipped kinds.
  double envelope(std::span<const double>) const { return envelope_const_; }
  double envelope_const() const { return envelope_const_; }

  std::string fingerprint() const;

 private:
  ClassKind kind_;
  int dim_;
  std::vector<Member> members_;
  double envelope_const_;
};

struct EnvelopeFunction {
  std::function<double(std::span<const double>)> eval;
};
EnvelopeFunction envelope_of(const FunctionClass& cls);

FunctionClass make_indicator_grid(const std::vector<double>& levels);
FunctionClass make_lipschitz_family(std::uint64_t seed, int count, int dim);
/// One member per weight row; rows may be empty (the zero function).
FunctionClass make_survival_family(
    const std::vector<std::vector<double>>& atoms,
    const std::vector<std::vector<double>>& weight_rows);

/// Discrete probability measure on finitely many points (row-major).
struct DiscreteMeasure {
  std::vector<double> points;  // m * dim
  int dim = 1;
  std::vector<double> weights;  // m entries, normalized on use

  std::size_t support_size() const { return weights.size(); }
};

/// Size of a greedy eps-net over the member list in L2(measure); an upper
/// bound on the true covering number (first-fit in member order).
std::size_t covering_number(const FunctionClass& cls, double eps,
                            const DiscreteMeasure& measure);

/// Uniform entropy integral J(delta) with the sup over measures Q
/// approximated by the max over the supplied family. The integrand is
/// integrated as a fixed piecewise-constant upper step function on a
/// geometric grid anchored at 1, which makes J exactly nondecreasing in
/// delta. Measures under which the envelope has zero norm are skipped
/// (recorded in `warnings` when given).
double uniform_entropy_integral(const FunctionClass& cls, double delta,
                                const std::vector<DiscreteMeasure>& measures,
                                std::vector<std::string>* warnings = nullptr);

/// Quantile cuts of a bracketing of the 1-d indicator class under the law
/// with the given CDF; each bracket has L2(P) size <= eps.
struct BracketSet {
  std::vector<double> cuts;  // increasing, first = 0, last = 1
  std::size_t count() const { return cuts.size() - 1; }
};
BracketSet bracketing_brackets(const std::function<double(double)>& cdf,
                               double eps);
std::size_t bracketing_number_indicators(const FunctionClass& indicator_grid,
                                         double eps, const DataModel& model);

/// Law of the argument fed to envelope sequences in the Lindeberg check.
struct Law {
  int dim = 1;
  std::function<void(Rng&, std::span<double>)> draw;
};
using EnvelopeSequence =
    std::function<double(std::int64_t n, std::span<const double> x)>;

struct LindebergOptions {
  std::int64_t draws = 100'000;
  std::uint64_t seed = 1;
  double bound = 1e3;   // flag: sup_n P F_n^2 <= bound
  double tol = 1e-3;    // flag: truncated moment at the last n <= max(3 SE, tol)
};

/// Monte Carlo check of the envelope Lindeberg condition: P F_n^2 bounded
/// and P F_n^2 1{F_n >= eps sqrt(n)} decreasing to zero along n_grid.
VerificationReport lindeberg_check(const EnvelopeSequence& envelopes,
                                   const Law& law,
                                   const std::vector<std::int64_t>& n_grid,
                                   double eps, const LindebergOptions& opt = {});

}  // namespace pseudoproc
