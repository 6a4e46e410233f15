#include "pseudoproc/fclasses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

double Member::operator()(std::span<const double> r) const {
  require(static_cast<int>(r.size()) == dim_, Errc::invalid_argument,
          "member evaluation: dimension mismatch");
  if (const auto* ind = std::get_if<IndicatorData>(&data_)) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] > ind->thresholds[j]) return 0.0;
    }
    return 1.0;
  }
  if (const auto* cs = std::get_if<CosineData>(&data_)) {
    double s = 0.0;
    for (std::size_t k = 0; k < cs->c.size(); ++k) {
      double arg = cs->b[k];
      for (std::size_t j = 0; j < r.size(); ++j) arg += cs->w[k][j] * r[j];
      s += cs->c[k] * std::cos(arg);
    }
    return std::clamp(cs->scale * s, -1.0, 1.0);
  }
  if (const auto* sv = std::get_if<SurvivalData>(&data_)) {
    double s = 0.0;
    for (std::size_t a = 0; a < sv->atoms.size(); ++a) {
      bool geq = true;
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] < sv->atoms[a][j]) {
          geq = false;
          break;
        }
      }
      if (geq) s += sv->weights[a];
    }
    return s;
  }
  return std::get<CustomData>(data_).f(r);
}

std::vector<double> Member::gradient(std::span<const double> r) const {
  require(static_cast<int>(r.size()) == dim_, Errc::invalid_argument,
          "member gradient: dimension mismatch");
  if (const auto* cs = std::get_if<CosineData>(&data_)) {
    std::vector<double> g(r.size(), 0.0);
    for (std::size_t k = 0; k < cs->c.size(); ++k) {
      double arg = cs->b[k];
      for (std::size_t j = 0; j < r.size(); ++j) arg += cs->w[k][j] * r[j];
      const double factor = -cs->scale * cs->c[k] * std::sin(arg);
      for (std::size_t j = 0; j < r.size(); ++j) g[j] += factor * cs->w[k][j];
    }
    return g;
  }
  if (const auto* cu = std::get_if<CustomData>(&data_)) {
    require(static_cast<bool>(cu->grad), Errc::unsupported,
            "member gradient: custom member has no gradient rule");
    return cu->grad(r);
  }
  fail(Errc::unsupported, "member gradient: member is not differentiable");
}

std::optional<double> Member::step_mean_1d(
    const std::function<double(double)>& cdf) const {
  if (dim_ != 1) return std::nullopt;
  if (const auto* ind = std::get_if<IndicatorData>(&data_)) {
    return cdf(ind->thresholds[0]);
  }
  if (const auto* sv = std::get_if<SurvivalData>(&data_)) {
    double s = 0.0;
    for (std::size_t a = 0; a < sv->atoms.size(); ++a) {
      s += sv->weights[a] * (1.0 - cdf(sv->atoms[a][0]));
    }
    return s;
  }
  return std::nullopt;
}

const std::vector<double>* Member::indicator_thresholds() const {
  if (const auto* ind = std::get_if<IndicatorData>(&data_)) {
    return &ind->thresholds;
  }
  return nullptr;
}

bool Member::has_gradient() const {
  if (std::holds_alternative<CosineData>(data_)) return true;
  if (const auto* cu = std::get_if<CustomData>(&data_)) {
    return static_cast<bool>(cu->grad);
  }
  return false;
}

Member Member::indicator(std::vector<double> thresholds) {
  require(!thresholds.empty(), Errc::invalid_argument,
          "indicator member: empty threshold vector");
  Member m;
  m.dim_ = static_cast<int>(thresholds.size());
  m.bound_ = 1.0;
  std::ostringstream os;
  os << "ind(";
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    os << (j ? "," : "") << format_double(thresholds[j]);
  }
  os << ")";
  m.label_ = os.str();
  m.data_ = IndicatorData{std::move(thresholds)};
  return m;
}

Member Member::lipschitz_cosine(std::vector<double> c,
                                std::vector<std::vector<double>> w,
                                std::vector<double> b) {
  require(!c.empty() && c.size() == w.size() && c.size() == b.size(),
          Errc::invalid_argument, "lipschitz member: ragged coefficient lists");
  const std::size_t dim = w[0].size();
  double abs_sum = 0.0;
  double lip_sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    require(w[k].size() == dim, Errc::invalid_argument,
            "lipschitz member: ragged frequency vectors");
    double norm2 = 0.0;
    for (double v : w[k]) norm2 += v * v;
    abs_sum += std::abs(c[k]);
    lip_sum += std::abs(c[k]) * std::sqrt(norm2);
  }
  const double denom = std::max({abs_sum, lip_sum, 1e-300});
  Member m;
  m.dim_ = static_cast<int>(dim);
  m.bound_ = 1.0;
  m.label_ = "lip";
  m.data_ = CosineData{std::move(c), std::move(w), std::move(b), 1.0 / denom};
  return m;
}

Member Member::survival(std::vector<std::vector<double>> atoms,
                        std::vector<double> weights) {
  require(atoms.size() == weights.size(), Errc::invalid_argument,
          "survival member: atoms/weights length mismatch");
  double total = 0.0;
  for (double wgt : weights) {
    require(wgt >= 0.0, Errc::domain, "survival member: negative weight");
    total += wgt;
  }
  require(total <= 1.0 + 1e-12, Errc::domain,
          "survival member: weights exceed a subprobability");
  int dim = atoms.empty() ? 1 : static_cast<int>(atoms[0].size());
  for (const auto& a : atoms) {
    require(static_cast<int>(a.size()) == dim, Errc::invalid_argument,
            "survival member: ragged atoms");
  }
  Member m;
  m.dim_ = dim;
  m.bound_ = total;
  m.label_ = "surv";
  m.data_ = SurvivalData{std::move(atoms), std::move(weights)};
  return m;
}

Member Member::custom(
    int dim, std::string label,
    std::function<double(std::span<const double>)> f,
    std::function<std::vector<double>(std::span<const double>)> grad,
    double bound) {
  require(dim >= 1 && static_cast<bool>(f), Errc::invalid_argument,
          "custom member: missing evaluation rule");
  Member m;
  m.dim_ = dim;
  m.bound_ = bound;
  m.label_ = std::move(label);
  m.data_ = CustomData{std::move(f), std::move(grad)};
  return m;
}

FunctionClass::FunctionClass(ClassKind kind, int dim,
                             std::vector<Member> members)
    : kind_(kind), dim_(dim), members_(std::move(members)) {
  require(!members_.empty(), Errc::invalid_argument,
          "function class: must have at least one member");
  envelope_const_ = 0.0;
  for (const auto& m : members_) {
    require(m.dim() == dim_, Errc::invalid_argument,
            "function class: member dimension mismatch");
    envelope_const_ = std::max(envelope_const_, m.bound());
  }
  if (envelope_const_ == 0.0) envelope_const_ = 1.0;
}

std::string FunctionClass::fingerprint() const {
  std::ostringstream os;
  os << static_cast<int>(kind_) << ':' << dim_ << ':' << members_.size();
  for (const auto& m : members_) os << ':' << m.label();
  return os.str();
}

EnvelopeFunction envelope_of(const FunctionClass& cls) {
  const double c = cls.envelope_const();
  return EnvelopeFunction{[c](std::span<const double>) { return c; }};
}

FunctionClass make_indicator_grid(const std::vector<double>& levels) {
  require(!levels.empty(), Errc::invalid_argument,
          "indicator grid: empty level list");
  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Member> members;
  members.reserve(sorted.size());
  for (double t : sorted) members.push_back(Member::indicator({t}));
  return FunctionClass(ClassKind::indicator_grid, 1, std::move(members));
}

FunctionClass make_lipschitz_family(std::uint64_t seed, int count, int dim) {
  require(count >= 1, Errc::invalid_argument, "lipschitz family: count >= 1");
  require(dim >= 1, Errc::invalid_argument, "lipschitz family: dim >= 1");
  Rng rng(seed);
  constexpr int kTerms = 3;
  std::vector<Member> members;
  members.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::vector<double> c(kTerms);
    std::vector<double> b(kTerms);
    std::vector<std::vector<double>> w(kTerms, std::vector<double>(dim));
    for (int k = 0; k < kTerms; ++k) {
      c[k] = rng.uniform(-1.0, 1.0);
      b[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (int j = 0; j < dim; ++j) w[k][j] = rng.uniform(-2.0, 2.0);
    }
    members.push_back(Member::lipschitz_cosine(std::move(c), std::move(w),
                                               std::move(b)));
  }
  return FunctionClass(ClassKind::lipschitz, dim, std::move(members));
}

FunctionClass make_survival_family(
    const std::vector<std::vector<double>>& atoms,
    const std::vector<std::vector<double>>& weight_rows) {
  require(!weight_rows.empty(), Errc::invalid_argument,
          "survival family: need at least one weight row");
  std::vector<Member> members;
  members.reserve(weight_rows.size());
  for (const auto& row : weight_rows) {
    if (row.empty()) {
      // The zero function, kept at the family's dimension.
      members.push_back(
          Member::survival(atoms, std::vector<double>(atoms.size(), 0.0)));
    } else {
      require(row.size() == atoms.size(), Errc::invalid_argument,
              "survival family: weight row length mismatch");
      members.push_back(Member::survival(atoms, row));
    }
  }
  const int dim = atoms.empty() ? 1 : static_cast<int>(atoms[0].size());
  return FunctionClass(ClassKind::survival, dim, std::move(members));
}

namespace {

struct MeasureEvaluation {
  std::vector<double> evals;  // member-major: member * support + point
  std::vector<double> weights;
  double envelope_norm = 0.0;
  std::size_t support = 0;
};

MeasureEvaluation evaluate_on_measure(const FunctionClass& cls,
                                      const DiscreteMeasure& q) {
  require(q.dim == cls.dim(), Errc::invalid_argument,
          "measure: dimension mismatch with the class");
  require(!q.weights.empty(), Errc::invalid_argument, "measure: empty support");
  require(q.points.size() ==
              q.weights.size() * static_cast<std::size_t>(q.dim),
          Errc::invalid_argument, "measure: points/weights mismatch");
  MeasureEvaluation ev;
  ev.support = q.weights.size();
  ev.weights = q.weights;
  double total = 0.0;
  for (double w : ev.weights) {
    require(w >= 0.0, Errc::invalid_argument, "measure: negative weight");
    total += w;
  }
  require(total > 0.0, Errc::invalid_argument, "measure: zero total mass");
  for (double& w : ev.weights) w /= total;

  ev.evals.resize(cls.size() * ev.support);
  for (std::size_t m = 0; m < cls.size(); ++m) {
    for (std::size_t p = 0; p < ev.support; ++p) {
      std::span<const double> pt{
          q.points.data() + p * static_cast<std::size_t>(q.dim),
          static_cast<std::size_t>(q.dim)};
      ev.evals[m * ev.support + p] = cls.member(m)(pt);
    }
  }
  double norm2 = 0.0;
  for (std::size_t p = 0; p < ev.support; ++p) {
    std::span<const double> pt{
        q.points.data() + p * static_cast<std::size_t>(q.dim),
        static_cast<std::size_t>(q.dim)};
    const double f = cls.envelope(pt);
    norm2 += ev.weights[p] * f * f;
  }
  ev.envelope_norm = std::sqrt(norm2);
  return ev;
}

std::vector<double> pairwise_distances(const MeasureEvaluation& ev,
                                       std::size_t members) {
  std::vector<double> dist(members * members, 0.0);
  for (std::size_t a = 0; a < members; ++a) {
    for (std::size_t b = a + 1; b < members; ++b) {
      double d2 = 0.0;
      for (std::size_t p = 0; p < ev.support; ++p) {
        const double diff =
            ev.evals[a * ev.support + p] - ev.evals[b * ev.support + p];
        d2 += ev.weights[p] * diff * diff;
      }
      dist[a * members + b] = dist[b * members + a] = std::sqrt(d2);
    }
  }
  return dist;
}

std::size_t greedy_net_size(const std::vector<double>& dist,
                            std::size_t members, double eps) {
  std::vector<std::size_t> centers;
  for (std::size_t m = 0; m < members; ++m) {
    bool covered = false;
    for (std::size_t c : centers) {
      if (dist[m * members + c] <= eps) {
        covered = true;
        break;
      }
    }
    if (!covered) centers.push_back(m);
  }
  return centers.size();
}

}  // namespace

std::size_t covering_number(const FunctionClass& cls, double eps,
                            const DiscreteMeasure& measure) {
  require(eps > 0.0, Errc::invalid_argument, "covering_number: eps must be > 0");
  const auto ev = evaluate_on_measure(cls, measure);
  const auto dist = pairwise_distances(ev, cls.size());
  return greedy_net_size(dist, cls.size(), eps);
}

double uniform_entropy_integral(const FunctionClass& cls, double delta,
                                const std::vector<DiscreteMeasure>& measures,
                                std::vector<std::string>* warnings) {
  require(delta > 0.0 && delta <= 1.0, Errc::domain,
          "uniform_entropy_integral: delta must lie in (0,1]");
  require(!measures.empty(), Errc::invalid_argument,
          "uniform_entropy_integral: need at least one measure");

  struct Prepared {
    std::vector<double> dist;
    double norm;
  };
  std::vector<Prepared> prepared;
  for (std::size_t qi = 0; qi < measures.size(); ++qi) {
    auto ev = evaluate_on_measure(cls, measures[qi]);
    if (ev.envelope_norm == 0.0) {
      if (warnings) {
        std::ostringstream os;
        os << "measure " << qi << " skipped: envelope has zero L2 norm";
        warnings->push_back(os.str());
      }
      continue;
    }
    prepared.push_back({pairwise_distances(ev, cls.size()), ev.envelope_norm});
  }
  require(!prepared.empty(), Errc::invalid_argument,
          "uniform_entropy_integral: every measure was degenerate");

  const std::size_t members = cls.size();
  auto integrand = [&](double eps) {
    double g = 0.0;
    for (const auto& pq : prepared) {
      const std::size_t n = greedy_net_size(pq.dist, members, eps * pq.norm);
      g = std::max(g, std::sqrt(std::log(static_cast<double>(n))));
    }
    return g;
  };

  // Fixed geometric grid anchored at 1; the integrand (nonincreasing in
  // eps) is replaced by its value at each interval's lower endpoint, an
  // upper step function, and integrated exactly over [0, delta].
  constexpr int kOctaves = 30;
  double grid[kOctaves + 1];
  for (int j = 0; j <= kOctaves; ++j) grid[j] = std::ldexp(1.0, -j);

  double j_values[kOctaves + 2];
  for (int j = 1; j <= kOctaves; ++j) j_values[j] = integrand(grid[j]);
  j_values[kOctaves + 1] = integrand(0.0);  // resolves to distinct members

  double total = 0.0;
  if (delta <= grid[kOctaves]) {
    return delta * j_values[kOctaves + 1];
  }
  int top = 0;
  while (top < kOctaves && grid[top] >= delta) {
    if (grid[top + 1] < delta) break;
    ++top;
  }
  // delta lies in (grid[top+1], grid[top]]
  total += (delta - grid[top + 1]) * j_values[top + 1];
  for (int j = top + 1; j < kOctaves; ++j) {
    total += (grid[j] - grid[j + 1]) * j_values[j + 1];
  }
  total += grid[kOctaves] * j_values[kOctaves + 1];
  return total;
}

BracketSet bracketing_brackets(const std::function<double(double)>& cdf,
                               double eps) {
  require(eps > 0.0, Errc::invalid_argument, "bracketing: eps must be > 0");
  BracketSet bs;
  bs.cuts.push_back(0.0);
  if (eps >= 1.0) {
    bs.cuts.push_back(1.0);
    return bs;
  }
  const double step = eps * eps;  // bracket L2 size = sqrt(prob mass)
  double target = step;
  while (target < 1.0 - 1e-12) {
    double lo = bs.cuts.back();
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    bs.cuts.push_back(0.5 * (lo + hi));
    target += step;
  }
  bs.cuts.push_back(1.0);
  return bs;
}

std::size_t bracketing_number_indicators(const FunctionClass& indicator_grid,
                                         double eps, const DataModel& model) {
  require(indicator_grid.kind() == ClassKind::indicator_grid &&
              indicator_grid.dim() == 1,
          Errc::invalid_argument,
          "bracketing_number_indicators: need a 1-d indicator grid");
  if (eps >= 1.0) return 1;
  const auto brackets = bracketing_brackets(
      [&model](double t) { return model.kendall_cdf(t); }, eps);
  return brackets.count();
}

VerificationReport lindeberg_check(const EnvelopeSequence& envelopes,
                                   const Law& law,
                                   const std::vector<std::int64_t>& n_grid,
                                   double eps, const LindebergOptions& opt) {
  require(!n_grid.empty(), Errc::invalid_argument, "lindeberg: empty n grid");
  require(std::is_sorted(n_grid.begin(), n_grid.end()) &&
              std::adjacent_find(n_grid.begin(), n_grid.end()) == n_grid.end(),
          Errc::invalid_argument, "lindeberg: n grid must be increasing");
  require(eps > 0.0, Errc::invalid_argument, "lindeberg: eps must be > 0");

  // Common draws across all n keep the two moment curves comparable.
  Rng rng(opt.seed);
  std::vector<double> pool(static_cast<std::size_t>(opt.draws) * law.dim);
  for (std::int64_t i = 0; i < opt.draws; ++i) {
    law.draw(rng, {pool.data() + i * law.dim,
                   static_cast<std::size_t>(law.dim)});
  }

  VerificationReport rep;
  rep.check = "lindeberg";
  rep.seed = opt.seed;
  rep.trend_rule = "bounded-and-truncated-to-zero";
  rep.tolerance = opt.tol;

  std::vector<double> trunc_values;
  std::vector<double> trunc_ses;
  double max_second = 0.0;
  for (std::int64_t n : n_grid) {
    const double cut = eps * std::sqrt(static_cast<double>(n));
    double s2 = 0.0, s4 = 0.0, t2 = 0.0, t4 = 0.0;
    for (std::int64_t i = 0; i < opt.draws; ++i) {
      std::span<const double> x{pool.data() + i * law.dim,
                                static_cast<std::size_t>(law.dim)};
      const double f = envelopes(n, x);
      const double f2 = f * f;
      s2 += f2;
      s4 += f2 * f2;
      if (f >= cut) {
        t2 += f2;
        t4 += f2 * f2;
      }
    }
    const double m = static_cast<double>(opt.draws);
    const double second = s2 / m;
    const double trunc = t2 / m;
    const double second_se =
        std::sqrt(std::max(0.0, s4 / m - second * second) / m);
    const double trunc_se = std::sqrt(std::max(0.0, t4 / m - trunc * trunc) / m);
    rep.rows.push_back({"PFn2", static_cast<double>(n), second, second_se});
    rep.rows.push_back({"truncated", static_cast<double>(n), trunc, trunc_se});
    trunc_values.push_back(trunc);
    trunc_ses.push_back(trunc_se);
    max_second = std::max(max_second, second);
  }

  const bool bounded = max_second <= opt.bound;
  bool nonincreasing = true;
  for (std::size_t i = 1; i < trunc_values.size(); ++i) {
    const double slack = 3.0 * std::sqrt(trunc_ses[i] * trunc_ses[i] +
                                         trunc_ses[i - 1] * trunc_ses[i - 1]);
    if (trunc_values[i] > trunc_values[i - 1] + slack) nonincreasing = false;
  }
  const double final_tol = std::max(3.0 * trunc_ses.back(), opt.tol);
  const bool vanishes = trunc_values.back() <= final_tol;
  rep.trend_stat = trunc_values.back();
  rep.notes.push_back(bounded ? "second moment bounded"
                              : "second moment exceeds bound");
  rep.notes.push_back(vanishes ? "truncated moment vanishes"
                               : "truncated moment does not vanish");
  rep.verdict =
      (bounded && nonincreasing && vanishes) ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace pseudoproc
