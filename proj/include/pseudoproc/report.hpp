#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace pseudoproc {

enum class Verdict { pass, fail, inconclusive, none };

const char* verdict_name(Verdict v);

/// One observed statistic: `group` names the quantity, `param` the grid
/// coordinate it was observed at (n, t, s, an entry id, ...).
struct ReportRow {
  std::string group;
  double param = 0.0;
  double value = 0.0;
  double se = 0.0;
};

/// Structured outcome of a numerical condition check. The verdict is a
/// pure function of the recorded rows, trend statistic and tolerance.
struct VerificationReport {
  std::string check;
  std::vector<ReportRow> rows;
  std::string trend_rule;      // e.g. "decreasing-and-halved"
  double trend_stat = 0.0;     // rule-specific scalar (ratio, slope, ...)
  double tolerance = 0.0;
  Verdict verdict = Verdict::none;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  bool passed() const {
    return verdict == Verdict::pass || verdict == Verdict::none;
  }
  nlohmann::json to_json() const;
  /// Flat per-row CSV: check,group,param,value,se
  std::string to_csv() const;

  const ReportRow* find(const std::string& group, double param) const;
  std::vector<double> values_of(const std::string& group) const;
  std::vector<double> ses_of(const std::string& group) const;
};

/// Shared trend verdicts. Values are per-n aggregates in grid order.
/// "decreasing-and-halved": strictly decreasing and last < ratio * first.
/// "decreasing": strictly decreasing only.
/// Both return inconclusive when the final SE exceeds half the final value.
Verdict trend_to_zero_verdict(const std::vector<double>& values,
                              const std::vector<double>& ses,
                              double halving_ratio);
Verdict trend_decreasing_verdict(const std::vector<double>& values,
                                 const std::vector<double>& ses);

}  // namespace pseudoproc
