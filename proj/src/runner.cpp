#include "pseudoproc/runner.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "pseudoproc/csvio.hpp"
#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"
#include "pseudoproc/parallel.hpp"
#include "pseudoproc/version.hpp"

namespace pseudoproc {

namespace {

using nlohmann::json;

struct RunContext {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  std::vector<VerificationReport> reports;

  void add_file(const std::string& name, const std::string& content) {
    files.emplace_back(name, content);
  }
  void add_report(const VerificationReport& rep) {
    reports.push_back(rep);
    add_file("report.json", rep.to_json().dump(2) + "\n");
    add_file("report.csv", rep.to_csv());
  }
};

json summary_entry(std::int64_t n, const std::vector<ProcessPath>& paths) {
  const std::size_t grid = paths.front().values.size();
  std::vector<double> mean(grid, 0.0);
  std::vector<double> sd(grid, 0.0);
  for (const auto& p : paths) {
    for (std::size_t g = 0; g < grid; ++g) mean[g] += p.values[g];
  }
  for (double& v : mean) v /= static_cast<double>(paths.size());
  if (paths.size() >= 2) {
    for (const auto& p : paths) {
      for (std::size_t g = 0; g < grid; ++g) {
        sd[g] += (p.values[g] - mean[g]) * (p.values[g] - mean[g]);
      }
    }
    for (double& v : sd) {
      v = std::sqrt(v / (static_cast<double>(paths.size()) - 1.0));
    }
  }
  json index = json::array();
  for (const auto& pt : paths.front().index) index.push_back(pt);
  return json{{"n", n},
              {"reps", paths.size()},
              {"kind", paths.front().kind},
              {"index", index},
              {"mean", mean},
              {"sd", sd}};
}

template <typename PathFn>
void run_path_experiment(const ExperimentConfig& cfg, RunContext& ctx,
                         PathFn&& make_path) {
  json summaries = json::array();
  const std::uint64_t base = derive_seed(cfg.seed(), cfg.kind());
  for (const std::int64_t n : cfg.n_list()) {
    std::vector<ProcessPath> paths(static_cast<std::size_t>(cfg.reps()));
    parallel_for(cfg.reps(), [&](std::int64_t r) {
      const std::uint64_t seed =
          derive_seed(base, static_cast<std::uint64_t>(n) * 1'000'003u +
                                static_cast<std::uint64_t>(r));
      paths[static_cast<std::size_t>(r)] = make_path(n, seed);
    });
    std::ostringstream name;
    name << "paths_n" << n << ".csv";
    ctx.add_file(name.str(), paths_to_csv(paths));
    summaries.push_back(summary_entry(n, paths));
  }
  ctx.add_file("summary.json",
               json{{"kind", cfg.kind()}, {"seed", cfg.seed()},
                    {"per_n", summaries}}
                       .dump(2) +
                   "\n");
}

void run_kendall(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto grid = cfg.theta_grid();
  if (cfg.has_data()) {
    const Sample data = ingest_csv(cfg.data_csv(), cfg.data_dim());
    const ProcessPath path = kendall_empirical(data, grid);
    ctx.add_file("paths_data.csv", paths_to_csv({path}));
    ctx.add_file("summary.json",
                 json{{"kind", "kendall-empirical"},
                      {"n", data.size()},
                      {"provenance", data.provenance()},
                      {"note", "empirical path only; limit comparisons "
                               "require a model"}}
                         .dump(2) +
                     "\n");
    return;
  }
  const DataModel model = cfg.model();
  require(model.is_copula(), Errc::unsupported,
          "kendall experiment: copula model required");
  run_path_experiment(cfg, ctx, [&](std::int64_t n, std::uint64_t seed) {
    ProcessPath p = kendall_process(model.sample(n, seed), model, grid);
    p.seed = seed;
    return p;
  });
}

void run_copula(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto grid = cfg.u_grid();
  if (cfg.has_data()) {
    const Sample data = ingest_csv(cfg.data_csv(), cfg.data_dim());
    require(data.dim() == 2, Errc::invalid_argument,
            "copula experiment: two-column data required");
    const ProcessPath path = copula_empirical(data, grid);
    ctx.add_file("paths_data.csv", paths_to_csv({path}));
    ctx.add_file("summary.json",
                 json{{"kind", "copula-empirical"},
                      {"n", data.size()},
                      {"provenance", data.provenance()},
                      {"note", "empirical path only; limit comparisons "
                               "require a model"}}
                         .dump(2) +
                     "\n");
    return;
  }
  const DataModel model = cfg.model();
  require(model.is_copula() && model.dim() == 2, Errc::unsupported,
          "copula experiment: bivariate copula model required");
  run_path_experiment(cfg, ctx, [&](std::int64_t n, std::uint64_t seed) {
    ProcessPath p = copula_process(model.sample(n, seed), model, grid);
    p.seed = seed;
    return p;
  });
}

void run_residual(const ExperimentConfig& cfg, RunContext& ctx) {
  const DataModel model = cfg.model();
  require(model.kind() == ModelKind::regression, Errc::unsupported,
          "residual experiment: regression model required");
  // Default grid spans the noise scale; an explicit levels list overrides.
  std::vector<double> grid;
  if (cfg.json().at("theta_grid").contains("levels")) {
    grid = cfg.theta_grid();
  } else {
    const double sd = std::max(model.noise_sd(), 1e-6);
    grid = equispaced_grid(-3.0 * sd, 3.0 * sd, 17);
  }
  const int degree = cfg.degree();
  run_path_experiment(cfg, ctx, [&](std::int64_t n, std::uint64_t seed) {
    ProcessPath p =
        residual_process(model.sample(n, seed), model, degree, grid);
    p.seed = seed;
    return p;
  });
}

void run_smooth(const ExperimentConfig& cfg, RunContext& ctx) {
  const DataModel model = cfg.model();
  const FunctionClass cls = cfg.function_class();
  const PseudoKind kind =
      cls.dim() == 1 ? PseudoKind::kendall : PseudoKind::copula;
  OracleOptions oracle;
  oracle.draws = cfg.json().at("oracle").at("draws").get<std::int64_t>();
  oracle.seed = derive_seed(cfg.seed(), "smooth-oracle");
  const auto means = smooth_population_means(model, cls, kind, oracle);
  run_path_experiment(cfg, ctx, [&](std::int64_t n, std::uint64_t seed) {
    ProcessPath p =
        smooth_indexed_process(model.sample(n, seed), cls, kind, means);
    p.seed = seed;
    return p;
  });
}

void run_entropy(const ExperimentConfig& cfg, RunContext& ctx) {
  const DataModel model = cfg.model();
  const FunctionClass cls = cfg.function_class();
  const json& chk = cfg.check();
  const auto delta_list = chk.at("delta_list").get<std::vector<double>>();
  const auto eps_list = chk.at("eps_list").get<std::vector<double>>();
  const int count = chk.at("measures").at("empirical_count").get<int>();
  const std::int64_t size =
      chk.at("measures").at("empirical_size").get<std::int64_t>();
  const bool stress = chk.at("measures").at("stress_points").get<bool>();
  const int dim = cls.dim();

  std::vector<DiscreteMeasure> measures;
  for (int k = 0; k < count; ++k) {
    const Sample draws = model.sample(
        size, derive_seed(cfg.seed(), "entropy-measure", static_cast<std::uint64_t>(k)));
    DiscreteMeasure q;
    q.dim = dim;
    for (std::int64_t i = 0; i < draws.size(); ++i) {
      if (dim == 1) {
        q.points.push_back(model.eta0(draws.row(i)));
      } else {
        const auto row = draws.row(i);
        q.points.insert(q.points.end(), row.begin(), row.end());
      }
      q.weights.push_back(1.0);
    }
    measures.push_back(std::move(q));
  }
  if (stress) {
    DiscreteMeasure point;
    point.dim = dim;
    point.points.assign(static_cast<std::size_t>(dim), 0.5);
    point.weights = {1.0};
    measures.push_back(point);
    DiscreteMeasure two;
    two.dim = dim;
    two.points.assign(static_cast<std::size_t>(dim), 0.25);
    for (int j = 0; j < dim; ++j) two.points.push_back(0.75);
    two.weights = {0.5, 0.5};
    measures.push_back(two);
  }

  std::ostringstream entropy_csv;
  entropy_csv << "delta,J\n";
  std::vector<std::string> warnings;
  for (const double d : delta_list) {
    entropy_csv << format_double(d) << ','
                << format_double(
                       uniform_entropy_integral(cls, d, measures, &warnings))
                << '\n';
  }
  ctx.add_file("entropy.csv", entropy_csv.str());

  std::ostringstream covering_csv;
  covering_csv << "eps,measure_id,count\n";
  for (const double e : eps_list) {
    for (std::size_t q = 0; q < measures.size(); ++q) {
      covering_csv << format_double(e) << ',' << q << ','
                   << covering_number(cls, e, measures[q]) << '\n';
    }
  }
  ctx.add_file("covering.csv", covering_csv.str());
  ctx.add_file("summary.json",
               json{{"kind", "entropy"},
                    {"members", cls.size()},
                    {"measures", measures.size()},
                    {"warnings", warnings}}
                       .dump(2) +
                   "\n");
}

FunctionClass negligibility_class(const ExperimentConfig& cfg,
                                  PseudoKind process) {
  if (process == PseudoKind::kendall) return cfg.function_class();
  // Copula-side indicator families index the u grid; lipschitz families
  // must already be two-dimensional.
  if (cfg.has_class() &&
      cfg.json().at("class").at("kind").get<std::string>() == "lipschitz") {
    return cfg.function_class();
  }
  std::vector<Member> members;
  for (const auto& u : cfg.u_grid()) members.push_back(Member::indicator(u));
  return FunctionClass(ClassKind::indicator_grid, 2, std::move(members));
}

void run_verify(const ExperimentConfig& cfg, RunContext& ctx) {
  const std::string kind = cfg.kind();
  const DataModel model = cfg.model();
  const json& chk = cfg.check();

  if (kind == "verify:negligibility") {
    NegligibilityOptions opt;
    opt.n_list = cfg.n_list();
    opt.reps = cfg.reps();
    opt.seed = cfg.seed();
    opt.process = chk.at("process").get<std::string>() == "copula"
                      ? PseudoKind::copula
                      : PseudoKind::kendall;
    opt.halving_ratio = cfg.tolerance("halving_ratio", 0.5);
    ctx.add_report(
        check_negligibility(model, negligibility_class(cfg, opt.process), opt));
  } else if (kind == "verify:l2-consistency") {
    L2ConsistencyOptions opt;
    opt.n_list = cfg.n_list();
    opt.reps = cfg.reps();
    opt.pool = chk.at("pool").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.halving_ratio = cfg.tolerance("halving_ratio", 0.5);
    ctx.add_report(check_l2_consistency(model, cfg.function_class(), opt));
  } else if (kind == "verify:condition19") {
    Condition19Options opt;
    opt.n_list = cfg.n_list();
    opt.pool = chk.at("pool").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.delta_zero = chk.at("delta_rule").get<std::string>() == "zero";
    if (chk.contains("t_grid")) {
      opt.t_grid = chk.at("t_grid").get<std::vector<double>>();
    }
    std::vector<PerturbationFunction> hs;
    for (const auto& p : chk.at("perturbations")) {
      hs.push_back(cfg.perturbation_from(p, model));
    }
    ctx.add_report(check_condition_19(model, hs, opt));
  } else if (kind == "verify:lemma-limit-1d") {
    LemmaLimitOptions opt;
    opt.t_grid = chk.at("t_grid").get<std::vector<double>>();
    opt.draws = chk.at("draws").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.rel_tol = cfg.tolerance("rel_tol", 0.05);
    const std::string preset = chk.at("preset").get<std::string>();
    const double y_value = chk.at("y_value").get<double>();
    const double y_scale = chk.at("y_scale").get<double>();
    const bool g_identity = chk.at("g").get<std::string>() == "identity";
    const double x = chk.at("x").get<double>();
    const double a = chk.at("a").get<double>();
    const double b = chk.at("b").get<double>();
    auto g = [g_identity](double y) { return g_identity ? y : 1.0; };
    Law1d law;
    law.label = preset;
    if (preset == "uniform-constant-y") {
      law.draw = [y_value](Rng& rng, double& xv, double& yv) {
        xv = rng.uniform();
        yv = y_value;
      };
    } else if (preset == "uniform-linear-y") {
      law.draw = [y_scale](Rng& rng, double& xv, double& yv) {
        xv = rng.uniform();
        yv = y_scale * xv;
      };
    } else {
      law.draw = [](Rng& rng, double& xv, double& yv) {
        xv = rng.uniform();
        yv = rng.uniform();
      };
    }
    double target;
    if (chk.contains("target")) {
      target = chk.at("target").get<double>();
    } else if (preset == "uniform-constant-y") {
      target = b * g(y_value);
    } else if (preset == "uniform-linear-y") {
      target = b * g(y_scale * x);
    } else {
      target = b * (g_identity ? 0.5 : 1.0);
    }
    const bool shift = chk.at("y_t").get<std::string>() == "plus-t";
    auto y_t = [shift](double y, double t) { return shift ? y + t : y; };
    ctx.add_report(check_lemma_limit_1d(law, y_t, g, x, a, b, target, opt));
  } else if (kind == "verify:lemma-limit-2d") {
    LemmaLimitOptions opt;
    opt.t_grid = chk.at("t_grid").get<std::vector<double>>();
    opt.draws = chk.at("draws").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.rel_tol = cfg.tolerance("rel_tol", 0.05);
    const auto yv = chk.at("y_values").get<std::vector<double>>();
    require(yv.size() == 2, Errc::parse, "check.y_values: expected 2 entries");
    const auto xv = chk.at("x").get<std::vector<double>>();
    require(xv.size() == 2, Errc::parse, "check.x: expected 2 entries");
    const auto bv = chk.at("b").get<std::vector<double>>();
    require(bv.size() == 2, Errc::parse, "check.b: expected 2 entries");
    const double a = chk.at("a").get<double>();
    const bool g_first = chk.at("g").get<std::string>() == "first";
    auto g = [g_first](std::array<double, 2> y) {
      return g_first ? y[0] : 1.0;
    };
    Law2d law;
    law.label = "uniform-square-constant-y";
    const std::array<double, 2> y_const{yv[0], yv[1]};
    law.draw = [y_const](Rng& rng, std::array<double, 2>& x,
                         std::array<double, 2>& y) {
      x[0] = rng.uniform();
      x[1] = rng.uniform();
      y = y_const;
    };
    const std::array<double, 2> x{xv[0], xv[1]};
    const std::array<double, 2> b{bv[0], bv[1]};
    double target;
    if (chk.contains("target")) {
      target = chk.at("target").get<double>();
    } else {
      const double gy = g(y_const);
      target = lemma2d_boundary_target(
          [](double s1, double s2) {
            return (s1 >= 0.0 && s1 <= 1.0 && s2 >= 0.0 && s2 <= 1.0) ? 1.0
                                                                      : 0.0;
          },
          [gy](double, double) { return gy; }, x, b, {0.0, 0.0});
    }
    auto y_t = [](std::array<double, 2> y, double) { return y; };
    ctx.add_report(check_lemma_limit_2d(law, y_t, g, x, a, b, target, opt));
  } else if (kind == "verify:hadamard-smooth") {
    HadamardSmoothOptions opt;
    opt.t_grid = chk.at("t_grid").get<std::vector<double>>();
    opt.pool = chk.at("pool").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.tol = cfg.tolerance("tol", 1e-2);
    const auto h = cfg.perturbation_from(chk.at("perturbation"), model);
    ctx.add_report(check_hadamard_smooth(model, cfg.function_class(), h, opt));
  } else if (kind == "verify:hadamard-bv") {
    HadamardBvOptions opt;
    opt.s_grid = chk.at("s_grid").get<std::vector<double>>();
    opt.t_grid = chk.at("t_grid").get<std::vector<double>>();
    opt.pool = chk.at("pool").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.rel_tol = cfg.tolerance("rel_tol", 0.05);
    opt.band.h = chk.at("band").at("h").get<double>();
    opt.band.draws = chk.at("band").at("draws").get<std::int64_t>();
    const auto h0 = cfg.perturbation_from(chk.at("perturbation"), model);
    ctx.add_report(check_hadamard_bv(model, h0, opt));
  } else if (kind == "verify:compare-covariance") {
    CompareCovarianceOptions opt;
    opt.n = chk.at("n").get<std::int64_t>();
    opt.reps = cfg.reps();
    opt.mc_size = chk.at("mc_size").get<std::int64_t>();
    opt.seed = cfg.seed();
    opt.se_mult = cfg.tolerance("se_mult", 4.0);
    opt.min_fraction = cfg.tolerance("min_fraction", 0.9);
    opt.band.h = chk.at("band").at("h").get<double>();
    opt.band.draws = chk.at("band").at("draws").get<std::int64_t>();
    if (chk.at("process").get<std::string>() == "copula") {
      ctx.add_report(compare_covariance_copula(model, cfg.u_grid(), opt));
    } else {
      ctx.add_report(
          compare_covariance_kendall(model, cfg.theta_grid(), opt));
    }
  } else if (kind == "verify:normality") {
    const double theta = chk.at("theta").get<double>();
    const auto paths = replicate_kendall_paths(
        model, {theta}, chk.at("n").get<std::int64_t>(), cfg.reps(),
        cfg.seed());
    VerificationReport rep =
        check_normality(paths, 0, cfg.tolerance("alpha", 0.01));
    rep.seed = cfg.seed();
    ctx.add_report(rep);
  } else {
    fail(Errc::internal, "run_verify: unhandled kind " + kind);
  }
}

}  // namespace

json RunManifest::to_json() const {
  return json{{"artifact_version", version},
              {"config_hash", config_hash},
              {"outputs", outputs},
              {"wall_time_ms", wall_time_ms},
              {"all_passed", all_passed}};
}

RunManifest run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.add_file("config.json", cfg.canonical_dump() + "\n");

  const std::string kind = cfg.kind();
  if (kind == "kendall") {
    run_kendall(cfg, ctx);
  } else if (kind == "copula") {
    run_copula(cfg, ctx);
  } else if (kind == "residual") {
    run_residual(cfg, ctx);
  } else if (kind == "smooth") {
    run_smooth(cfg, ctx);
  } else if (kind == "entropy") {
    run_entropy(cfg, ctx);
  } else {
    run_verify(cfg, ctx);
  }

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash();
  manifest.version = kVersion;
  for (const auto& rep : ctx.reports) {
    manifest.all_passed = manifest.all_passed && rep.passed();
  }

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir());
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, Errc::io, "cannot create output directory '" + dir.string() + "'");
  for (const auto& [name, content] : ctx.files) {
    write_text_file((dir / name).string(), content);
    manifest.outputs.push_back(name);
  }
  manifest.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
  write_text_file((dir / "manifest.json").string(),
                  manifest.to_json().dump(2) + "\n");
  return manifest;
}

RunManifest run_config_text(const std::string& text) {
  return run(ExperimentConfig::parse(text));
}

RunManifest run_config_file(const std::string& path) {
  return run_config_text(read_text_file(path));
}

std::string list_checks_text() {
  return
      "verify:negligibility\tsup |G_n(theta(eta_n) - theta(eta_0))| trend "
      "across n (kendall or copula pseudo-observations)\n"
      "verify:l2-consistency\tsup_theta P(theta(eta_n) - theta(eta_0))^2 "
      "trend across n\n"
      "verify:condition19\tsqrt(n)-scaled shifted-indicator mass, sup over "
      "levels and perturbations, trend across n\n"
      "verify:lemma-limit-1d\tsmall-interval conditional limit, univariate\n"
      "verify:lemma-limit-2d\tsmall-interval conditional limit, bivariate "
      "slab form\n"
      "verify:hadamard-smooth\tdifference quotients of smooth compositions "
      "against the derivative term\n"
      "verify:hadamard-bv\tindicator-level difference quotients against the "
      "conditional-mean times density target\n"
      "verify:compare-covariance\treplication covariance of the finite-n "
      "process vs the influence-function limit covariance\n"
      "verify:normality\tKS test of standardized replication values at a "
      "grid point\n";
}

}  // namespace pseudoproc
