/*
 * pseudoproc C API: empirical processes indexed by estimated functions.
 *
 * All functions return a pp_status; PP_OK means success. On failure the
 * out-parameters are untouched and pp_last_error() returns a description
 * of what went wrong on the calling thread. Handles are opaque; every
 * *_free accepts NULL.
 */
#ifndef PSEUDOPROC_H
#define PSEUDOPROC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pp_status {
  PP_OK = 0,
  PP_ERROR_INVALID_ARGUMENT = 1,
  PP_ERROR_DOMAIN = 2,
  PP_ERROR_UNSUPPORTED = 3,
  PP_ERROR_PARSE = 4,
  PP_ERROR_IO = 5,
  PP_ERROR_ESTIMATION = 6,
  PP_ERROR_NUMERIC = 7,
  PP_ERROR_INTERNAL = 8
} pp_status;

const char* pp_version(void);
const char* pp_status_name(pp_status status);
/* Message of the most recent failure on the calling thread. */
const char* pp_last_error(void);

typedef struct pp_model pp_model;
typedef struct pp_sample pp_sample;
typedef struct pp_result pp_result;

/* ------------------------------------------------------------------ */
/* Data models                                                         */
/* ------------------------------------------------------------------ */

pp_status pp_model_independence(int dim, pp_model** out);
pp_status pp_model_clayton(double alpha, pp_model** out);
pp_status pp_model_regression(const double* coeffs, size_t n_coeffs,
                              double noise_sd, pp_model** out);
void pp_model_free(pp_model* model);

int pp_model_dim(const pp_model* model);
pp_status pp_model_cdf(const pp_model* model, const double* u, size_t dim,
                       double* out);
/* grad must hold dim doubles. */
pp_status pp_model_grad_cdf(const pp_model* model, const double* u, size_t dim,
                            double* grad);
pp_status pp_model_kendall_cdf(const pp_model* model, double t, double* out);
pp_status pp_model_kendall_density(const pp_model* model, double t,
                                   double* out);
pp_status pp_model_regression_truth(const pp_model* model, double x,
                                    double* out);
pp_status pp_model_sample(const pp_model* model, int64_t n, uint64_t seed,
                          pp_sample** out);

/* ------------------------------------------------------------------ */
/* Samples                                                             */
/* ------------------------------------------------------------------ */

/* data is row-major, n rows of dim columns, copied in. */
pp_status pp_sample_from_array(const double* data, int64_t n, int dim,
                               pp_sample** out);
/* CSV with a header line, comma separators, blank lines skipped. */
pp_status pp_sample_ingest_csv(const char* path, int dim, pp_sample** out);
void pp_sample_free(pp_sample* sample);

int64_t pp_sample_size(const pp_sample* sample);
int pp_sample_dim(const pp_sample* sample);
/* out must hold size*dim doubles. */
pp_status pp_sample_copy_data(const pp_sample* sample, double* out);

/* ------------------------------------------------------------------ */
/* Pseudo-observations and process paths                               */
/* ------------------------------------------------------------------ */

/* out must hold size doubles (joint-ECDF values at the rows). */
pp_status pp_kendall_pseudo_obs(const pp_sample* sample, double* out);
/* out must hold size*dim doubles (marginal ranks / n). */
pp_status pp_copula_pseudo_obs(const pp_sample* sample, double* out);

/* values must hold n_grid doubles: sqrt(n)(K_n - K) at the levels. */
pp_status pp_kendall_process(const pp_model* model, const pp_sample* sample,
                             const double* thetas, size_t n_grid,
                             double* values);
/* u_points is row-major n_grid x dim; values must hold n_grid doubles. */
pp_status pp_copula_process(const pp_model* model, const pp_sample* sample,
                            const double* u_points, size_t n_grid,
                            double* values);

/* ------------------------------------------------------------------ */
/* Experiment runner                                                   */
/* ------------------------------------------------------------------ */

/* Runs the JSON experiment config; writes result files and manifest into
 * the config's output directory. */
pp_status pp_run_config_text(const char* json_text, pp_result** out);
pp_status pp_run_config_file(const char* path, pp_result** out);
void pp_result_free(pp_result* result);

const char* pp_result_manifest_json(const pp_result* result);
/* 1 when every verdict passed (or the experiment has no verdicts). */
int pp_result_all_passed(const pp_result* result);

/* Static text: one line per runnable check, "name<TAB>description". */
const char* pp_list_checks(void);

#ifdef __cplusplus
}
#endif

#endif /* PSEUDOPROC_H */
