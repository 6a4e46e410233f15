#include "pseudoproc/report.hpp"

#include <cmath>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
    case Verdict::none:
      return "none";
  }
  return "unknown";
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"group", r.group},
                         {"param", r.param},
                         {"value", r.value},
                         {"se", r.se}});
  }
  return nlohmann::json{{"check", check},
                        {"rows", rows_json},
                        {"trend_rule", trend_rule},
                        {"trend_stat", trend_stat},
                        {"tolerance", tolerance},
                        {"verdict", verdict_name(verdict)},
                        {"seed", seed},
                        {"notes", notes}};
}

std::string VerificationReport::to_csv() const {
  std::ostringstream os;
  os << "check,group,param,value,se\n";
  for (const auto& r : rows) {
    os << check << ',' << r.group << ',' << format_double(r.param) << ','
       << format_double(r.value) << ',' << format_double(r.se) << '\n';
  }
  return os.str();
}

const ReportRow* VerificationReport::find(const std::string& group,
                                          double param) const {
  for (const auto& r : rows) {
    if (r.group == group && r.param == param) return &r;
  }
  return nullptr;
}

std::vector<double> VerificationReport::values_of(
    const std::string& group) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.group == group) out.push_back(r.value);
  }
  return out;
}

std::vector<double> VerificationReport::ses_of(const std::string& group) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.group == group) out.push_back(r.se);
  }
  return out;
}

namespace {

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

bool noise_dominated(const std::vector<double>& values,
                     const std::vector<double>& ses) {
  if (ses.empty()) return false;
  const double last_se = ses.back();
  const double last_value = std::abs(values.back());
  return last_se > 0.0 && last_se > 0.5 * last_value;
}

}  // namespace

Verdict trend_to_zero_verdict(const std::vector<double>& values,
                              const std::vector<double>& ses,
                              double halving_ratio) {
  require(values.size() >= 2, Errc::invalid_argument,
          "trend verdict: need at least two points");
  if (values.front() == 0.0 && values.back() == 0.0) return Verdict::pass;
  if (noise_dominated(values, ses)) return Verdict::inconclusive;
  const bool halved = values.back() < halving_ratio * values.front();
  return (strictly_decreasing(values) && halved) ? Verdict::pass
                                                 : Verdict::fail;
}

Verdict trend_decreasing_verdict(const std::vector<double>& values,
                                 const std::vector<double>& ses) {
  require(values.size() >= 2, Errc::invalid_argument,
          "trend verdict: need at least two points");
  if (values.front() == 0.0 && values.back() == 0.0) return Verdict::pass;
  if (noise_dominated(values, ses)) return Verdict::inconclusive;
  return strictly_decreasing(values) ? Verdict::pass : Verdict::fail;
}

}  // namespace pseudoproc
