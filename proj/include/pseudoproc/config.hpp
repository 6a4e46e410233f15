#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pseudoproc/fclasses.hpp"
#include "pseudoproc/models.hpp"
#include "pseudoproc/verify.hpp"

namespace pseudoproc {

/// Validated experiment configuration. Parsing fills defaults, rejects
/// unknown keys (naming the offending key path) and enforces the basic
/// invariants: a seed is mandatory, n_list strictly increasing, reps >= 1.
/// The canonical JSON dump is stable and is what the run manifest hashes.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);

  const nlohmann::json& json() const { return cfg_; }
  std::string canonical_dump() const { return cfg_.dump(2); }
  std::string config_hash() const;

  std::string kind() const { return cfg_.at("kind").get<std::string>(); }
  bool is_verify_kind() const { return kind().rfind("verify:", 0) == 0; }
  std::uint64_t seed() const { return cfg_.at("seed").get<std::uint64_t>(); }
  std::string output_dir() const {
    return cfg_.at("output_dir").get<std::string>();
  }

  bool has_model() const { return cfg_.contains("model"); }
  DataModel model() const;
  bool has_data() const { return cfg_.contains("data"); }
  std::string data_csv() const;
  int data_dim() const;

  std::vector<std::int64_t> n_list() const;
  int reps() const { return cfg_.at("reps").get<int>(); }
  int degree() const { return cfg_.at("degree").get<int>(); }

  std::vector<double> theta_grid() const;
  std::vector<std::vector<double>> u_grid() const;

  bool has_class() const { return cfg_.contains("class"); }
  FunctionClass function_class() const;

  const nlohmann::json& check() const { return cfg_.at("check"); }
  /// Tolerance override with fallback.
  double tolerance(const std::string& name, double fallback) const;

  PerturbationFunction perturbation_from(const nlohmann::json& spec,
                                         const DataModel& model) const;

 private:
  explicit ExperimentConfig(nlohmann::json cfg) : cfg_(std::move(cfg)) {}
  nlohmann::json cfg_;
};

}  // namespace pseudoproc
