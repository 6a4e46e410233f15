#include "pseudoproc/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKinds = {
    "kendall",
    "copula",
    "residual",
    "smooth",
    "entropy",
    "verify:negligibility",
    "verify:l2-consistency",
    "verify:condition19",
    "verify:lemma-limit-1d",
    "verify:lemma-limit-2d",
    "verify:hadamard-smooth",
    "verify:hadamard-bv",
    "verify:compare-covariance",
    "verify:normality",
};

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(Errc::parse, "config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      bad(path + "." + item.key(), "unknown key");
    }
  }
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

void default_key(json& obj, const std::string& key, json value) {
  if (!obj.contains(key)) obj[key] = std::move(value);
}

void validate_model(json& m) {
  check_keys(m, "model", {"kind", "dim", "alpha", "coeffs", "noise_sd"});
  const std::string kind = as_string(m.at("kind"), "model.kind");
  if (kind == "independence") {
    default_key(m, "dim", 2);
    const auto d = as_int(m.at("dim"), "model.dim");
    if (d < 1) bad("model.dim", "must be >= 1");
    if (m.contains("alpha") || m.contains("coeffs") || m.contains("noise_sd")) {
      bad("model", "independence accepts only 'dim'");
    }
  } else if (kind == "clayton") {
    default_key(m, "dim", 2);
    if (as_int(m.at("dim"), "model.dim") != 2) {
      bad("model.dim", "clayton is bivariate only");
    }
    if (!m.contains("alpha")) bad("model.alpha", "required for clayton");
    if (as_number(m.at("alpha"), "model.alpha") <= 0.0) {
      bad("model.alpha", "must be > 0");
    }
    if (m.contains("coeffs") || m.contains("noise_sd")) {
      bad("model", "clayton accepts only 'alpha' and 'dim'");
    }
  } else if (kind == "regression") {
    if (!m.contains("coeffs") || !m.at("coeffs").is_array() ||
        m.at("coeffs").empty()) {
      bad("model.coeffs", "required non-empty array for regression");
    }
    for (const auto& c : m.at("coeffs")) {
      as_number(c, "model.coeffs[]");
    }
    default_key(m, "noise_sd", 1.0);
    if (as_number(m.at("noise_sd"), "model.noise_sd") < 0.0) {
      bad("model.noise_sd", "must be >= 0");
    }
    if (m.contains("dim") || m.contains("alpha")) {
      bad("model", "regression accepts only 'coeffs' and 'noise_sd'");
    }
  } else {
    bad("model.kind", "unknown model kind '" + kind + "'");
  }
}

void validate_grid_spec(json& g, const std::string& path, double lo, double hi,
                        int points) {
  check_keys(g, path, {"min", "max", "points", "levels"});
  if (g.contains("levels")) {
    if (g.size() != 1) bad(path, "'levels' excludes min/max/points");
    if (!g.at("levels").is_array() || g.at("levels").empty()) {
      bad(path + ".levels", "expected a non-empty array");
    }
    for (const auto& v : g.at("levels")) as_number(v, path + ".levels[]");
    return;
  }
  default_key(g, "min", lo);
  default_key(g, "max", hi);
  default_key(g, "points", points);
  const double mn = as_number(g.at("min"), path + ".min");
  const double mx = as_number(g.at("max"), path + ".max");
  if (!(mn < mx)) bad(path, "min must be below max");
  if (as_int(g.at("points"), path + ".points") < 1) {
    bad(path + ".points", "must be >= 1");
  }
}

void validate_class(json& c) {
  check_keys(c, "class",
             {"kind", "count", "seed", "dim", "grid", "atoms", "weights"});
  const std::string kind = as_string(c.at("kind"), "class.kind");
  if (kind == "lipschitz") {
    default_key(c, "count", 20);
    default_key(c, "seed", 7);
    default_key(c, "dim", 1);
    if (as_int(c.at("count"), "class.count") < 1) {
      bad("class.count", "must be >= 1");
    }
    if (c.contains("grid") || c.contains("atoms") || c.contains("weights")) {
      bad("class", "lipschitz accepts count/seed/dim only");
    }
  } else if (kind == "indicator") {
    json grid = c.value("grid", json::object());
    validate_grid_spec(grid, "class.grid", 0.1, 0.9, 17);
    c["grid"] = grid;
    if (c.contains("count") || c.contains("seed") || c.contains("dim") ||
        c.contains("atoms") || c.contains("weights")) {
      bad("class", "indicator accepts 'grid' only");
    }
  } else if (kind == "survival") {
    if (!c.contains("atoms") || !c.at("atoms").is_array()) {
      bad("class.atoms", "required array");
    }
    if (!c.contains("weights") || !c.at("weights").is_array() ||
        c.at("weights").empty()) {
      bad("class.weights", "required non-empty array of rows");
    }
    if (c.contains("count") || c.contains("seed") || c.contains("grid") ||
        c.contains("dim")) {
      bad("class", "survival accepts atoms/weights only");
    }
  } else {
    bad("class.kind", "unknown class kind '" + kind + "'");
  }
}

void validate_perturbation(const json& p, const std::string& path) {
  check_keys(p, path, {"kind", "value", "rule", "scale", "coeffs", "axis"});
  const std::string kind = as_string(p.at("kind"), path + ".kind");
  if (kind == "constant") {
    as_number(p.at("value"), path + ".value");
  } else if (kind == "compose") {
    const std::string rule = as_string(p.at("rule"), path + ".rule");
    if (rule != "identity" && rule != "sin" && rule != "bridge") {
      bad(path + ".rule", "unknown rule '" + rule + "'");
    }
    as_number(p.at("scale"), path + ".scale");
  } else if (kind == "compose-poly") {
    if (!p.contains("coeffs") || !p.at("coeffs").is_array() ||
        p.at("coeffs").empty()) {
      bad(path + ".coeffs", "required non-empty array");
    }
  } else if (kind == "rough-sign") {
    as_int(p.at("axis"), path + ".axis");
    as_number(p.at("value"), path + ".value");
  } else {
    bad(path + ".kind", "unknown perturbation kind '" + kind + "'");
  }
}

void validate_band(json& b, const std::string& path) {
  check_keys(b, path, {"h", "draws"});
  default_key(b, "h", 1e-3);
  default_key(b, "draws", 1'000'000);
  if (as_number(b.at("h"), path + ".h") <= 0.0) bad(path + ".h", "must be > 0");
  if (as_int(b.at("draws"), path + ".draws") < 1) {
    bad(path + ".draws", "must be >= 1");
  }
}

void validate_check_block(const std::string& kind, json& chk) {
  if (kind == "verify:negligibility") {
    check_keys(chk, "check", {"process"});
    default_key(chk, "process", "kendall");
  } else if (kind == "verify:l2-consistency") {
    check_keys(chk, "check", {"pool"});
    default_key(chk, "pool", 100'000);
  } else if (kind == "verify:condition19") {
    check_keys(chk, "check",
               {"perturbations", "delta_rule", "pool", "t_grid"});
    default_key(chk, "delta_rule", "n^-1/4");
    const std::string rule = as_string(chk.at("delta_rule"), "check.delta_rule");
    if (rule != "n^-1/4" && rule != "zero") {
      bad("check.delta_rule", "expected 'n^-1/4' or 'zero'");
    }
    default_key(chk, "pool", 1'000'000);
    if (!chk.contains("perturbations")) {
      chk["perturbations"] = json::array(
          {{{"kind", "constant"}, {"value", 1.0}},
           {{"kind", "compose"}, {"rule", "sin"}, {"scale", 0.5}}});
    }
    if (!chk.at("perturbations").is_array() || chk.at("perturbations").empty()) {
      bad("check.perturbations", "expected a non-empty array");
    }
    for (const auto& p : chk.at("perturbations")) {
      validate_perturbation(p, "check.perturbations[]");
    }
    if (chk.contains("t_grid")) {
      for (const auto& t : chk.at("t_grid")) as_number(t, "check.t_grid[]");
    }
  } else if (kind == "verify:lemma-limit-1d") {
    check_keys(chk, "check",
               {"preset", "y_value", "y_scale", "g", "x", "a", "b", "t_grid",
                "draws", "y_t", "target"});
    default_key(chk, "preset", "uniform-constant-y");
    const std::string preset = as_string(chk.at("preset"), "check.preset");
    if (preset != "uniform-constant-y" && preset != "uniform-linear-y" &&
        preset != "uniform-independent-y") {
      bad("check.preset", "unknown preset '" + preset + "'");
    }
    default_key(chk, "y_value", 2.0);
    default_key(chk, "y_scale", 1.0);
    default_key(chk, "g", "identity");
    const std::string g = as_string(chk.at("g"), "check.g");
    if (g != "identity" && g != "one") bad("check.g", "expected identity|one");
    default_key(chk, "x", 0.5);
    default_key(chk, "a", 1.0);
    default_key(chk, "b", 1.0);
    default_key(chk, "t_grid", json::array({1e-1, 1e-2, 1e-3}));
    default_key(chk, "draws", 1'000'000);
    default_key(chk, "y_t", "none");
    const std::string yt = as_string(chk.at("y_t"), "check.y_t");
    if (yt != "none" && yt != "plus-t") bad("check.y_t", "expected none|plus-t");
  } else if (kind == "verify:lemma-limit-2d") {
    check_keys(chk, "check",
               {"y_values", "g", "x", "a", "b", "t_grid", "draws", "target"});
    default_key(chk, "y_values", json::array({1.0, 2.0}));
    default_key(chk, "g", "one");
    const std::string g = as_string(chk.at("g"), "check.g");
    if (g != "one" && g != "first") bad("check.g", "expected one|first");
    default_key(chk, "x", json::array({0.5, 0.5}));
    default_key(chk, "a", 1.0);
    default_key(chk, "b", json::array({1.0, 1.0}));
    default_key(chk, "t_grid", json::array({1e-1, 1e-2, 1e-3}));
    default_key(chk, "draws", 1'000'000);
  } else if (kind == "verify:hadamard-smooth") {
    check_keys(chk, "check", {"perturbation", "t_grid", "pool"});
    if (!chk.contains("perturbation")) {
      chk["perturbation"] = {{"kind", "constant"}, {"value", 1.0}};
    }
    validate_perturbation(chk.at("perturbation"), "check.perturbation");
    default_key(chk, "t_grid", json::array({1e-1, 1e-2, 1e-3}));
    default_key(chk, "pool", 200'000);
  } else if (kind == "verify:hadamard-bv") {
    check_keys(chk, "check",
               {"perturbation", "s_grid", "t_grid", "pool", "band"});
    if (!chk.contains("perturbation")) {
      chk["perturbation"] = {{"kind", "constant"}, {"value", 1.0}};
    }
    validate_perturbation(chk.at("perturbation"), "check.perturbation");
    default_key(chk, "s_grid", json::array({0.3, 0.5, 0.7}));
    default_key(chk, "t_grid", json::array({1e-1, 1e-2, 1e-3}));
    default_key(chk, "pool", 1'000'000);
    json band = chk.value("band", json::object());
    validate_band(band, "check.band");
    chk["band"] = band;
  } else if (kind == "verify:compare-covariance") {
    check_keys(chk, "check", {"process", "n", "mc_size", "band"});
    default_key(chk, "process", "kendall");
    default_key(chk, "n", 1000);
    default_key(chk, "mc_size", 200'000);
    json band = chk.value("band", json::object());
    validate_band(band, "check.band");
    chk["band"] = band;
  } else if (kind == "verify:normality") {
    check_keys(chk, "check", {"process", "n", "theta"});
    default_key(chk, "process", "kendall");
    default_key(chk, "n", 1000);
    default_key(chk, "theta", 0.5);
  } else if (kind == "entropy") {
    check_keys(chk, "check", {"delta_list", "eps_list", "measures"});
    default_key(chk, "delta_list", json::array({1.0, 0.5, 0.25, 0.125}));
    default_key(chk, "eps_list",
                json::array({1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125}));
    json measures = chk.value("measures", json::object());
    check_keys(measures, "check.measures",
               {"empirical_count", "empirical_size", "stress_points"});
    default_key(measures, "empirical_count", 3);
    default_key(measures, "empirical_size", 200);
    default_key(measures, "stress_points", true);
    chk["measures"] = measures;
  } else {
    if (!chk.empty()) {
      bad("check", "experiment kind '" + kind + "' takes no check options");
    }
  }
  const std::set<std::string> process_kinds = {"kendall", "copula"};
  if (chk.contains("process") &&
      !process_kinds.count(chk.at("process").get<std::string>())) {
    bad("check.process", "expected kendall|copula");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse, std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(cfg, "config",
             {"kind", "seed", "model", "data", "n_list", "reps", "theta_grid",
              "u_grid", "class", "degree", "check", "oracle", "tolerances",
              "output_dir"});

  if (!cfg.contains("kind")) bad("kind", "required");
  const std::string kind = as_string(cfg.at("kind"), "kind");
  if (!kKnownKinds.count(kind)) bad("kind", "unknown kind '" + kind + "'");

  if (!cfg.contains("seed")) bad("seed", "required (no wall-clock seeding)");
  if (!cfg.at("seed").is_number_unsigned() &&
      !(cfg.at("seed").is_number_integer() &&
        cfg.at("seed").get<std::int64_t>() >= 0)) {
    bad("seed", "expected a nonnegative integer");
  }

  if (cfg.contains("model")) validate_model(cfg.at("model"));
  if (cfg.contains("data")) {
    check_keys(cfg.at("data"), "data", {"csv", "dim"});
    as_string(cfg.at("data").at("csv"), "data.csv");
    if (as_int(cfg.at("data").at("dim"), "data.dim") < 1) {
      bad("data.dim", "must be >= 1");
    }
  }
  const bool data_kinds = kind == "kendall" || kind == "copula";
  if (!cfg.contains("model") && !(data_kinds && cfg.contains("data"))) {
    bad("model", "required for kind '" + kind + "'");
  }
  if (cfg.contains("data") && !data_kinds) {
    bad("data", "only kendall/copula experiments ingest data");
  }
  if (cfg.contains("data") && cfg.contains("model")) {
    bad("data", "give either a model or a data block, not both");
  }

  default_key(cfg, "n_list", nlohmann::json::array({100, 400, 1600}));
  if (!cfg.at("n_list").is_array() || cfg.at("n_list").empty()) {
    bad("n_list", "expected a non-empty array");
  }
  std::int64_t prev = 0;
  for (const auto& v : cfg.at("n_list")) {
    const auto n = as_int(v, "n_list[]");
    if (n < 1) bad("n_list", "entries must be >= 1");
    if (n <= prev) bad("n_list", "n_list not increasing");
    prev = n;
  }

  default_key(cfg, "reps", 10);
  if (as_int(cfg.at("reps"), "reps") < 1) bad("reps", "reps must be >= 1");
  default_key(cfg, "degree", 1);
  if (as_int(cfg.at("degree"), "degree") < 0) bad("degree", "must be >= 0");

  nlohmann::json theta = cfg.value("theta_grid", nlohmann::json::object());
  validate_grid_spec(theta, "theta_grid", 0.1, 0.9, 17);
  cfg["theta_grid"] = theta;

  nlohmann::json ugrid = cfg.value("u_grid", nlohmann::json::object());
  check_keys(ugrid, "u_grid", {"points_per_dim", "levels"});
  if (ugrid.contains("levels")) {
    if (!ugrid.at("levels").is_array() || ugrid.at("levels").empty()) {
      bad("u_grid.levels", "expected a non-empty array");
    }
    for (const auto& v : ugrid.at("levels")) as_number(v, "u_grid.levels[]");
  } else {
    default_key(ugrid, "points_per_dim", 5);
    if (as_int(ugrid.at("points_per_dim"), "u_grid.points_per_dim") < 1) {
      bad("u_grid.points_per_dim", "must be >= 1");
    }
  }
  cfg["u_grid"] = ugrid;

  if (cfg.contains("class")) validate_class(cfg.at("class"));
  if (kind == "smooth" || kind == "entropy" ||
      kind == "verify:negligibility" || kind == "verify:l2-consistency" ||
      kind == "verify:hadamard-smooth") {
    if (!cfg.contains("class")) bad("class", "required for kind '" + kind + "'");
  }

  nlohmann::json chk = cfg.value("check", nlohmann::json::object());
  validate_check_block(kind, chk);
  cfg["check"] = chk;

  nlohmann::json oracle = cfg.value("oracle", nlohmann::json::object());
  check_keys(oracle, "oracle", {"draws", "band_h", "band_pool"});
  default_key(oracle, "draws", 1'000'000);
  default_key(oracle, "band_h", 1e-3);
  default_key(oracle, "band_pool", 1'000'000);
  cfg["oracle"] = oracle;

  nlohmann::json tol = cfg.value("tolerances", nlohmann::json::object());
  check_keys(tol, "tolerances",
             {"halving_ratio", "rel_tol", "tol", "se_mult", "min_fraction",
              "alpha"});
  default_key(tol, "halving_ratio", 0.5);
  default_key(tol, "rel_tol", 0.05);
  default_key(tol, "tol", 1e-2);
  default_key(tol, "se_mult", 4.0);
  default_key(tol, "min_fraction", 0.9);
  default_key(tol, "alpha", 0.01);
  cfg["tolerances"] = tol;

  default_key(cfg, "output_dir", "out");
  as_string(cfg.at("output_dir"), "output_dir");

  return ExperimentConfig(std::move(cfg));
}

std::string ExperimentConfig::config_hash() const {
  std::ostringstream os;
  os << std::hex << fnv1a64(canonical_dump());
  return os.str();
}

DataModel ExperimentConfig::model() const {
  require(has_model(), Errc::invalid_argument, "config: no model block");
  const nlohmann::json& m = cfg_.at("model");
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "independence") {
    return DataModel::independence(m.at("dim").get<int>());
  }
  if (kind == "clayton") {
    return DataModel::clayton(m.at("alpha").get<double>());
  }
  return DataModel::regression(m.at("coeffs").get<std::vector<double>>(),
                               m.at("noise_sd").get<double>());
}

std::string ExperimentConfig::data_csv() const {
  require(has_data(), Errc::invalid_argument, "config: no data block");
  return cfg_.at("data").at("csv").get<std::string>();
}

int ExperimentConfig::data_dim() const {
  require(has_data(), Errc::invalid_argument, "config: no data block");
  return cfg_.at("data").at("dim").get<int>();
}

std::vector<std::int64_t> ExperimentConfig::n_list() const {
  return cfg_.at("n_list").get<std::vector<std::int64_t>>();
}

namespace {

std::vector<double> grid_from_spec(const nlohmann::json& g) {
  if (g.contains("levels")) return g.at("levels").get<std::vector<double>>();
  return equispaced_grid(g.at("min").get<double>(), g.at("max").get<double>(),
                         g.at("points").get<int>());
}

}  // namespace

std::vector<double> ExperimentConfig::theta_grid() const {
  return grid_from_spec(cfg_.at("theta_grid"));
}

std::vector<std::vector<double>> ExperimentConfig::u_grid() const {
  const nlohmann::json& g = cfg_.at("u_grid");
  std::vector<double> levels;
  if (g.contains("levels")) {
    levels = g.at("levels").get<std::vector<double>>();
  } else {
    const int p = g.at("points_per_dim").get<int>();
    for (int i = 1; i <= p; ++i) {
      levels.push_back(static_cast<double>(i) / (p + 1));
    }
  }
  std::vector<std::vector<double>> grid;
  for (double a : levels) {
    for (double b : levels) {
      grid.push_back({a, b});
    }
  }
  return grid;
}

FunctionClass ExperimentConfig::function_class() const {
  require(has_class(), Errc::invalid_argument, "config: no class block");
  const nlohmann::json& c = cfg_.at("class");
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "lipschitz") {
    return make_lipschitz_family(c.at("seed").get<std::uint64_t>(),
                                 c.at("count").get<int>(),
                                 c.at("dim").get<int>());
  }
  if (kind == "indicator") {
    return make_indicator_grid(grid_from_spec(c.at("grid")));
  }
  return make_survival_family(
      c.at("atoms").get<std::vector<std::vector<double>>>(),
      c.at("weights").get<std::vector<std::vector<double>>>());
}

double ExperimentConfig::tolerance(const std::string& name,
                                   double fallback) const {
  const nlohmann::json& tol = cfg_.at("tolerances");
  if (tol.contains(name)) return tol.at(name).get<double>();
  return fallback;
}

PerturbationFunction ExperimentConfig::perturbation_from(
    const nlohmann::json& spec, const DataModel& model) const {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "constant") {
    return perturb_constant(spec.at("value").get<double>());
  }
  if (kind == "compose") {
    return perturb_compose(model, spec.at("rule").get<std::string>(),
                           spec.at("scale").get<double>());
  }
  if (kind == "compose-poly") {
    return perturb_compose_poly(model,
                                spec.at("coeffs").get<std::vector<double>>());
  }
  return perturb_rough_sign(spec.at("axis").get<int>(),
                            spec.at("value").get<double>());
}

}  // namespace pseudoproc
