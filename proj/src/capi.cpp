#include "pseudoproc.h"

#include <cstring>
#include <string>

#include "pseudoproc/csvio.hpp"
#include "pseudoproc/empirical.hpp"
#include "pseudoproc/errors.hpp"
#include "pseudoproc/models.hpp"
#include "pseudoproc/processes.hpp"
#include "pseudoproc/runner.hpp"
#include "pseudoproc/version.hpp"

namespace {

thread_local std::string g_last_error;

pp_status to_status(pseudoproc::Errc code) {
  using pseudoproc::Errc;
  switch (code) {
    case Errc::invalid_argument:
      return PP_ERROR_INVALID_ARGUMENT;
    case Errc::domain:
      return PP_ERROR_DOMAIN;
    case Errc::unsupported:
      return PP_ERROR_UNSUPPORTED;
    case Errc::parse:
      return PP_ERROR_PARSE;
    case Errc::io:
      return PP_ERROR_IO;
    case Errc::estimation:
      return PP_ERROR_ESTIMATION;
    case Errc::numeric:
      return PP_ERROR_NUMERIC;
    case Errc::internal:
      return PP_ERROR_INTERNAL;
  }
  return PP_ERROR_INTERNAL;
}

template <typename Fn>
pp_status guarded(Fn&& fn) {
  try {
    fn();
    return PP_OK;
  } catch (const pseudoproc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PP_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PP_ERROR_INTERNAL;
  }
}

pp_status require_c(bool ok, const char* message) {
  if (ok) return PP_OK;
  g_last_error = message;
  return PP_ERROR_INVALID_ARGUMENT;
}

}  // namespace

struct pp_model {
  pseudoproc::DataModel model;
};

struct pp_sample {
  pseudoproc::Sample sample;
};

struct pp_result {
  pseudoproc::RunManifest manifest;
  std::string manifest_json;
};

extern "C" {

const char* pp_version(void) { return pseudoproc::kVersion; }

const char* pp_status_name(pp_status status) {
  switch (status) {
    case PP_OK:
      return "ok";
    case PP_ERROR_INVALID_ARGUMENT:
      return "invalid-argument";
    case PP_ERROR_DOMAIN:
      return "domain";
    case PP_ERROR_UNSUPPORTED:
      return "unsupported";
    case PP_ERROR_PARSE:
      return "parse";
    case PP_ERROR_IO:
      return "io";
    case PP_ERROR_ESTIMATION:
      return "estimation";
    case PP_ERROR_NUMERIC:
      return "numeric";
    case PP_ERROR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* pp_last_error(void) { return g_last_error.c_str(); }

pp_status pp_model_independence(int dim, pp_model** out) {
  if (auto s = require_c(out != nullptr, "null out pointer")) return s;
  return guarded([&] {
    *out = new pp_model{pseudoproc::DataModel::independence(dim)};
  });
}

pp_status pp_model_clayton(double alpha, pp_model** out) {
  if (auto s = require_c(out != nullptr, "null out pointer")) return s;
  return guarded(
      [&] { *out = new pp_model{pseudoproc::DataModel::clayton(alpha)}; });
}

pp_status pp_model_regression(const double* coeffs, size_t n_coeffs,
                              double noise_sd, pp_model** out) {
  if (auto s = require_c(out != nullptr && coeffs != nullptr, "null pointer")) {
    return s;
  }
  return guarded([&] {
    *out = new pp_model{pseudoproc::DataModel::regression(
        std::vector<double>(coeffs, coeffs + n_coeffs), noise_sd)};
  });
}

void pp_model_free(pp_model* model) { delete model; }

int pp_model_dim(const pp_model* model) {
  return model == nullptr ? 0 : model->model.dim();
}

pp_status pp_model_cdf(const pp_model* model, const double* u, size_t dim,
                       double* out) {
  if (auto s = require_c(model && u && out, "null pointer")) return s;
  return guarded([&] { *out = model->model.cdf({u, dim}); });
}

pp_status pp_model_grad_cdf(const pp_model* model, const double* u, size_t dim,
                            double* grad) {
  if (auto s = require_c(model && u && grad, "null pointer")) return s;
  return guarded([&] {
    const auto g = model->model.grad_cdf({u, dim});
    std::memcpy(grad, g.data(), g.size() * sizeof(double));
  });
}

pp_status pp_model_kendall_cdf(const pp_model* model, double t, double* out) {
  if (auto s = require_c(model && out, "null pointer")) return s;
  return guarded([&] { *out = model->model.kendall_cdf(t); });
}

pp_status pp_model_kendall_density(const pp_model* model, double t,
                                   double* out) {
  if (auto s = require_c(model && out, "null pointer")) return s;
  return guarded([&] { *out = model->model.kendall_density(t); });
}

pp_status pp_model_regression_truth(const pp_model* model, double x,
                                    double* out) {
  if (auto s = require_c(model && out, "null pointer")) return s;
  return guarded([&] { *out = model->model.regression_truth(x); });
}

pp_status pp_model_sample(const pp_model* model, int64_t n, uint64_t seed,
                          pp_sample** out) {
  if (auto s = require_c(model && out, "null pointer")) return s;
  return guarded([&] { *out = new pp_sample{model->model.sample(n, seed)}; });
}

pp_status pp_sample_from_array(const double* data, int64_t n, int dim,
                               pp_sample** out) {
  if (auto s = require_c(data && out, "null pointer")) return s;
  return guarded([&] {
    *out = new pp_sample{pseudoproc::Sample(
        std::vector<double>(data, data + n * dim), dim, "array")};
  });
}

pp_status pp_sample_ingest_csv(const char* path, int dim, pp_sample** out) {
  if (auto s = require_c(path && out, "null pointer")) return s;
  return guarded(
      [&] { *out = new pp_sample{pseudoproc::ingest_csv(path, dim)}; });
}

void pp_sample_free(pp_sample* sample) { delete sample; }

int64_t pp_sample_size(const pp_sample* sample) {
  return sample == nullptr ? 0 : sample->sample.size();
}

int pp_sample_dim(const pp_sample* sample) {
  return sample == nullptr ? 0 : sample->sample.dim();
}

pp_status pp_sample_copy_data(const pp_sample* sample, double* out) {
  if (auto s = require_c(sample && out, "null pointer")) return s;
  const auto& data = sample->sample.data();
  std::memcpy(out, data.data(), data.size() * sizeof(double));
  return PP_OK;
}

pp_status pp_kendall_pseudo_obs(const pp_sample* sample, double* out) {
  if (auto s = require_c(sample && out, "null pointer")) return s;
  return guarded([&] {
    const auto po = pseudoproc::kendall_pseudo_obs(sample->sample);
    std::memcpy(out, po.values.data(), po.values.size() * sizeof(double));
  });
}

pp_status pp_copula_pseudo_obs(const pp_sample* sample, double* out) {
  if (auto s = require_c(sample && out, "null pointer")) return s;
  return guarded([&] {
    const auto po = pseudoproc::copula_pseudo_obs(sample->sample);
    std::memcpy(out, po.values.data(), po.values.size() * sizeof(double));
  });
}

pp_status pp_kendall_process(const pp_model* model, const pp_sample* sample,
                             const double* thetas, size_t n_grid,
                             double* values) {
  if (auto s = require_c(model && sample && thetas && values && n_grid > 0,
                         "null pointer or empty grid")) {
    return s;
  }
  return guarded([&] {
    const auto path = pseudoproc::kendall_process(
        sample->sample, model->model,
        std::vector<double>(thetas, thetas + n_grid));
    std::memcpy(values, path.values.data(), n_grid * sizeof(double));
  });
}

pp_status pp_copula_process(const pp_model* model, const pp_sample* sample,
                            const double* u_points, size_t n_grid,
                            double* values) {
  if (auto s = require_c(model && sample && u_points && values && n_grid > 0,
                         "null pointer or empty grid")) {
    return s;
  }
  return guarded([&] {
    const int d = model->model.dim();
    std::vector<std::vector<double>> grid(n_grid);
    for (size_t i = 0; i < n_grid; ++i) {
      grid[i].assign(u_points + i * d, u_points + (i + 1) * d);
    }
    const auto path =
        pseudoproc::copula_process(sample->sample, model->model, grid);
    std::memcpy(values, path.values.data(), n_grid * sizeof(double));
  });
}

pp_status pp_run_config_text(const char* json_text, pp_result** out) {
  if (auto s = require_c(json_text && out, "null pointer")) return s;
  return guarded([&] {
    auto manifest = pseudoproc::run_config_text(json_text);
    auto* result = new pp_result{manifest, manifest.to_json().dump(2)};
    *out = result;
  });
}

pp_status pp_run_config_file(const char* path, pp_result** out) {
  if (auto s = require_c(path && out, "null pointer")) return s;
  return guarded([&] {
    auto manifest = pseudoproc::run_config_file(path);
    auto* result = new pp_result{manifest, manifest.to_json().dump(2)};
    *out = result;
  });
}

void pp_result_free(pp_result* result) { delete result; }

const char* pp_result_manifest_json(const pp_result* result) {
  return result == nullptr ? "" : result->manifest_json.c_str();
}

int pp_result_all_passed(const pp_result* result) {
  return (result != nullptr && result->manifest.all_passed) ? 1 : 0;
}

const char* pp_list_checks(void) {
  static const std::string text = pseudoproc::list_checks_text();
  return text.c_str();
}

}  // extern "C"
