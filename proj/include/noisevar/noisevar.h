/* Model-free residual noise estimation: C interface.
 *
 * Every function that can fail returns an nv_status. On failure the message
 * is available from nv_last_error() until the next call on the same thread.
 * Objects are opaque and released with their matching *_free function;
 * strings returned through char** are released with nv_string_free.
 */
#ifndef NOISEVAR_H
#define NOISEVAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NOISEVAR_BUILDING)
#    define NV_API __declspec(dllexport)
#  else
#    define NV_API __declspec(dllimport)
#  endif
#else
#  define NV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nv_status {
  NV_OK = 0,
  NV_ERR_INVALID_ARGUMENT = 1,
  NV_ERR_IO = 2,
  NV_ERR_PARSE = 3,
  NV_ERR_DATA = 4,
  NV_ERR_NUMERIC = 5,
  NV_ERR_INTERNAL = 6
} nv_status;

typedef enum nv_noise_mode { NV_NOISE_ITERATIVE = 0, NV_NOISE_SUPERIMPOSED = 1 } nv_noise_mode;

typedef struct nv_dataset nv_dataset;
typedef struct nv_analysis nv_analysis;
typedef struct nv_scan nv_scan;

NV_API const char* nv_version(void);
NV_API const char* nv_last_error(void);
NV_API const char* nv_status_name(nv_status status);
NV_API void nv_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

NV_API nv_status nv_dataset_load_csv(const char* path, nv_dataset** out);
/* Writes with shortest round-trip number formatting. */
NV_API nv_status nv_dataset_save_csv(const nv_dataset* data, const char* path);
/* `values` holds n_cols columns of n_rows each, column after column. */
NV_API nv_status nv_dataset_create(size_t n_rows, size_t n_cols, const char* const* names,
                                   const double* values, nv_dataset** out);
NV_API void nv_dataset_free(nv_dataset* data);
NV_API size_t nv_dataset_rows(const nv_dataset* data);
NV_API size_t nv_dataset_cols(const nv_dataset* data);
NV_API const char* nv_dataset_column_name(const nv_dataset* data, size_t col);
NV_API nv_status nv_dataset_column(const nv_dataset* data, size_t col, double* out, size_t capacity);

/* ---- generators -------------------------------------------------------- */

typedef struct nv_ikeda_config {
  double p, B, kappa, alpha;
  size_t n;
  double sigma_r;
  nv_noise_mode noise_mode;
  uint64_t seed;
  size_t transient;
  double z0_re, z0_im;
} nv_ikeda_config;

typedef struct nv_lorenz_config {
  double r, b, sigma;
  double dt_out;
  size_t n;
  double sigma_r;
  nv_noise_mode noise_mode;
  uint64_t seed;
  double transient_time;
  double initial[3];
  double tolerance;
} nv_lorenz_config;

typedef struct nv_henon_config {
  size_t n;
  double sigma_r;
  nv_noise_mode noise_mode;
  uint64_t seed;
  size_t transient;
} nv_henon_config;

NV_API void nv_ikeda_config_default(nv_ikeda_config* cfg);
NV_API void nv_lorenz_config_default(nv_lorenz_config* cfg);
NV_API void nv_henon_config_default(nv_henon_config* cfg);
NV_API nv_status nv_generate_ikeda(const nv_ikeda_config* cfg, nv_dataset** out);
NV_API nv_status nv_generate_lorenz(const nv_lorenz_config* cfg, nv_dataset** out);
NV_API nv_status nv_generate_henon(const nv_henon_config* cfg, nv_dataset** out);
/* JSON object describing the resolved generator configuration. */
NV_API nv_status nv_ikeda_config_json(const nv_ikeda_config* cfg, char** out);
NV_API nv_status nv_lorenz_config_json(const nv_lorenz_config* cfg, char** out);
NV_API nv_status nv_henon_config_json(const nv_henon_config* cfg, char** out);
NV_API nv_status nv_gaussian_noise(size_t n, double sigma, uint64_t seed, double* out);

/* ---- analysis ---------------------------------------------------------- */

typedef struct nv_analysis_options {
  size_t n_eps_bins;
  size_t n_delta_bins;
  int auto_range;
  double eps_min, eps_max;
  double delta_min, delta_max;
  double eps_percentile;   /* percent, used when auto_range != 0 */
  double delta_percentile; /* percent, used when auto_range != 0 */
  size_t min_count;
  int standardize;
  size_t workers; /* 0: NOISEVAR_WORKERS or 1 */
  double nonlinearity_margin;
} nv_analysis_options;

typedef struct nv_report_summary {
  size_t rows, dims;
  uint64_t total_pairs;
  double sigma_y, y_scale;
  double sigma2_nl, sigma_nl_fractional, stderr_nl_fractional;
  double moment1, moment2, moment3;
  double sigma2_direct, sigma_direct_fractional, stderr_direct_fractional;
  int erf_ok;
  double erf_sigma, erf_sigma_fractional, erf_rms_misfit;
  double sigma2_lr, sigma_lr_fractional;
  double lr_nl_gap;
  int nonlinear;
} nv_report_summary;

NV_API void nv_analysis_options_default(nv_analysis_options* opts);
/* JSON object of the options (the resolved run configuration). */
NV_API nv_status nv_analysis_options_json(const nv_analysis_options* opts, char** out);

/* `target` and `vars` use the name@lag syntax; vars is comma separated,
 * "" or "none" for the empty set, and "x@1..4" expands a lag range. */
NV_API nv_status nv_analyze(const nv_dataset* data, const char* target, const char* vars,
                            const nv_analysis_options* opts, nv_analysis** out);
NV_API void nv_analysis_free(nv_analysis* a);
NV_API nv_status nv_analysis_summary(const nv_analysis* a, nv_report_summary* out);
/* significant_digits <= 0 keeps full precision. */
NV_API nv_status nv_analysis_json(const nv_analysis* a, int significant_digits, char** out);
/* eps,delta,p,stderr,n_pairs */
NV_API nv_status nv_analysis_condprob_csv(const nv_analysis* a, int significant_digits, char** out);
/* eps,p_data,p_fit; fails when the erf fit did not converge on this data. */
NV_API nv_status nv_analysis_erf_csv(const nv_analysis* a, int significant_digits, char** out);
NV_API size_t nv_analysis_curve_size(const nv_analysis* a);
NV_API nv_status nv_analysis_curve(const nv_analysis* a, double* eps, double* p, double* stderr_out,
                                   size_t capacity);

/* ---- scans ------------------------------------------------------------- */

typedef struct nv_scan_row {
  const char* label;
  int ok;
  const char* error;
  size_t rows;
  double sigma_lr_fractional;
  double sigma_nl_fractional;
  double stderr_nl;
} nv_scan_row;

NV_API nv_status nv_scan_lags(const nv_dataset* data, const char* target, size_t max_lag,
                              double stop_threshold, const nv_analysis_options* opts, nv_scan** out);
/* Each subset is a variable list in the same syntax as nv_analyze. */
NV_API nv_status nv_scan_subsets(const nv_dataset* data, const char* target, const char* const* subsets,
                                 size_t n_subsets, const nv_analysis_options* opts, nv_scan** out);
NV_API void nv_scan_free(nv_scan* s);
NV_API size_t nv_scan_row_count(const nv_scan* s);
/* Strings in the row stay valid until nv_scan_free. */
NV_API nv_status nv_scan_get_row(const nv_scan* s, size_t index, nv_scan_row* out);
/* Embedding dimension, or 0 when the scan does not choose one. */
NV_API size_t nv_scan_chosen_de(const nv_scan* s);
NV_API nv_status nv_scan_json(const nv_scan* s, int significant_digits, char** out);

#ifdef __cplusplus
}
#endif

#endif /* NOISEVAR_H */
