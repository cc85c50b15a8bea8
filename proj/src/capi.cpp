#include <cstring>
#include <new>
#include <string>

#include "noisevar/error.hpp"
#include "noisevar/estimator.hpp"
#include "noisevar/generators.hpp"
#include "noisevar/noisevar.h"
#include "noisevar/report.hpp"
#include "noisevar/scan.hpp"

struct nv_dataset {
  noisevar::Dataset data;
};

struct nv_analysis {
  noisevar::Analysis analysis;
};

struct nv_scan {
  noisevar::ScanReport report;
};

namespace {

thread_local std::string g_last_error;

nv_status to_status(noisevar::ErrorKind kind) {
  using noisevar::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return NV_ERR_INVALID_ARGUMENT;
    case ErrorKind::Io: return NV_ERR_IO;
    case ErrorKind::Parse: return NV_ERR_PARSE;
    case ErrorKind::Data: return NV_ERR_DATA;
    case ErrorKind::Numeric: return NV_ERR_NUMERIC;
  }
  return NV_ERR_INTERNAL;
}

nv_status fail(nv_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
nv_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return NV_OK;
  } catch (const noisevar::Error& e) {
    return fail(to_status(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NV_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename... Ptrs>
void require(Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) {
    throw noisevar::Error(noisevar::ErrorKind::InvalidArgument, "null pointer argument");
  }
}

noisevar::NoiseMode mode(nv_noise_mode m) {
  if (m == NV_NOISE_ITERATIVE) return noisevar::NoiseMode::Iterative;
  if (m == NV_NOISE_SUPERIMPOSED) return noisevar::NoiseMode::Superimposed;
  throw noisevar::Error(noisevar::ErrorKind::InvalidArgument, "unknown noise mode");
}

noisevar::IkedaConfig convert(const nv_ikeda_config& c) {
  noisevar::IkedaConfig k;
  k.p = c.p;
  k.B = c.B;
  k.kappa = c.kappa;
  k.alpha = c.alpha;
  k.n = c.n;
  k.sigma_r = c.sigma_r;
  k.noise_mode = mode(c.noise_mode);
  k.seed = c.seed;
  k.transient = c.transient;
  k.z0 = {c.z0_re, c.z0_im};
  return k;
}

noisevar::LorenzConfig convert(const nv_lorenz_config& c) {
  noisevar::LorenzConfig k;
  k.r = c.r;
  k.b = c.b;
  k.sigma = c.sigma;
  k.dt_out = c.dt_out;
  k.n = c.n;
  k.sigma_r = c.sigma_r;
  k.noise_mode = mode(c.noise_mode);
  k.seed = c.seed;
  k.transient_time = c.transient_time;
  k.initial = {c.initial[0], c.initial[1], c.initial[2]};
  k.tolerance = c.tolerance;
  return k;
}

noisevar::HenonConfig convert(const nv_henon_config& c) {
  noisevar::HenonConfig k;
  k.n = c.n;
  k.sigma_r = c.sigma_r;
  k.noise_mode = mode(c.noise_mode);
  k.seed = c.seed;
  k.transient = c.transient;
  return k;
}

noisevar::AnalysisOptions convert(const nv_analysis_options* o) {
  noisevar::AnalysisOptions k;
  if (!o) return k;
  k.grid.n_eps_bins = o->n_eps_bins;
  k.grid.n_delta_bins = o->n_delta_bins;
  k.grid.auto_range = o->auto_range != 0;
  k.grid.eps_min = o->eps_min;
  k.grid.eps_max = o->eps_max;
  k.grid.delta_min = o->delta_min;
  k.grid.delta_max = o->delta_max;
  k.grid.eps_percentile = o->eps_percentile;
  k.grid.delta_percentile = o->delta_percentile;
  k.min_count = o->min_count;
  k.standardize = o->standardize != 0;
  k.workers = o->workers;
  k.nonlinearity_margin = o->nonlinearity_margin;
  return k;
}

}  // namespace

extern "C" {

const char* nv_version(void) { return "1.0.0"; }

const char* nv_last_error(void) { return g_last_error.c_str(); }

const char* nv_status_name(nv_status status) {
  switch (status) {
    case NV_OK: return "ok";
    case NV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NV_ERR_IO: return "i/o error";
    case NV_ERR_PARSE: return "parse error";
    case NV_ERR_DATA: return "data error";
    case NV_ERR_NUMERIC: return "numeric error";
    case NV_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void nv_string_free(char* s) { std::free(s); }

nv_status nv_dataset_load_csv(const char* path, nv_dataset** out) {
  return guarded([&] {
    require(path, out);
    *out = new nv_dataset{noisevar::load_csv(path)};
  });
}

nv_status nv_dataset_save_csv(const nv_dataset* data, const char* path) {
  return guarded([&] {
    require(data, path);
    noisevar::save_csv(data->data, path);
  });
}

nv_status nv_dataset_create(size_t n_rows, size_t n_cols, const char* const* names, const double* values,
                            nv_dataset** out) {
  return guarded([&] {
    require(names, values, out);
    std::vector<std::string> cols_names;
    std::vector<std::vector<double>> cols;
    for (size_t c = 0; c < n_cols; ++c) {
      require(names[c]);
      cols_names.emplace_back(names[c]);
      cols.emplace_back(values + c * n_rows, values + (c + 1) * n_rows);
    }
    *out = new nv_dataset{noisevar::Dataset(std::move(cols_names), std::move(cols))};
  });
}

void nv_dataset_free(nv_dataset* data) { delete data; }

size_t nv_dataset_rows(const nv_dataset* data) { return data ? data->data.rows() : 0; }

size_t nv_dataset_cols(const nv_dataset* data) { return data ? data->data.cols() : 0; }

const char* nv_dataset_column_name(const nv_dataset* data, size_t col) {
  if (!data || col >= data->data.cols()) return nullptr;
  return data->data.names()[col].c_str();
}

nv_status nv_dataset_column(const nv_dataset* data, size_t col, double* out, size_t capacity) {
  return guarded([&] {
    require(data, out);
    const auto column = data->data.column(col);
    if (capacity < column.size()) {
      throw noisevar::Error(noisevar::ErrorKind::InvalidArgument, "output buffer too small");
    }
    std::copy(column.begin(), column.end(), out);
  });
}

void nv_ikeda_config_default(nv_ikeda_config* cfg) {
  if (!cfg) return;
  const noisevar::IkedaConfig d;
  *cfg = {d.p, d.B, d.kappa, d.alpha, d.n, d.sigma_r, NV_NOISE_ITERATIVE, d.seed, d.transient,
          d.z0.real(), d.z0.imag()};
}

void nv_lorenz_config_default(nv_lorenz_config* cfg) {
  if (!cfg) return;
  const noisevar::LorenzConfig d;
  *cfg = {d.r, d.b, d.sigma, d.dt_out, d.n, d.sigma_r, NV_NOISE_SUPERIMPOSED, d.seed, d.transient_time,
          {d.initial[0], d.initial[1], d.initial[2]}, d.tolerance};
}

void nv_henon_config_default(nv_henon_config* cfg) {
  if (!cfg) return;
  const noisevar::HenonConfig d;
  *cfg = {d.n, d.sigma_r, NV_NOISE_ITERATIVE, d.seed, d.transient};
}

nv_status nv_generate_ikeda(const nv_ikeda_config* cfg, nv_dataset** out) {
  return guarded([&] {
    require(cfg, out);
    *out = new nv_dataset{noisevar::gen_ikeda(convert(*cfg))};
  });
}

nv_status nv_generate_lorenz(const nv_lorenz_config* cfg, nv_dataset** out) {
  return guarded([&] {
    require(cfg, out);
    *out = new nv_dataset{noisevar::gen_lorenz(convert(*cfg))};
  });
}

nv_status nv_generate_henon(const nv_henon_config* cfg, nv_dataset** out) {
  return guarded([&] {
    require(cfg, out);
    *out = new nv_dataset{noisevar::gen_henon(convert(*cfg))};
  });
}

nv_status nv_ikeda_config_json(const nv_ikeda_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, out);
    *out = duplicate(noisevar::config_to_json(convert(*cfg)).dump());
  });
}

nv_status nv_lorenz_config_json(const nv_lorenz_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, out);
    *out = duplicate(noisevar::config_to_json(convert(*cfg)).dump());
  });
}

nv_status nv_henon_config_json(const nv_henon_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, out);
    *out = duplicate(noisevar::config_to_json(convert(*cfg)).dump());
  });
}

nv_status nv_gaussian_noise(size_t n, double sigma, uint64_t seed, double* out) {
  return guarded([&] {
    require(out);
    const auto v = noisevar::gaussian_noise(n, sigma, seed);
    std::copy(v.begin(), v.end(), out);
  });
}

void nv_analysis_options_default(nv_analysis_options* opts) {
  if (!opts) return;
  const noisevar::AnalysisOptions d;
  *opts = {d.grid.n_eps_bins,     d.grid.n_delta_bins,     d.grid.auto_range ? 1 : 0,
           d.grid.eps_min,        d.grid.eps_max,          d.grid.delta_min,
           d.grid.delta_max,      d.grid.eps_percentile,   d.grid.delta_percentile,
           d.min_count,           d.standardize ? 1 : 0,   d.workers,
           d.nonlinearity_margin};
}

nv_status nv_analysis_options_json(const nv_analysis_options* opts, char** out) {
  return guarded([&] {
    require(opts, out);
    *out = duplicate(noisevar::options_to_json(convert(opts)).dump());
  });
}

nv_status nv_analyze(const nv_dataset* data, const char* target, const char* vars,
                     const nv_analysis_options* opts, nv_analysis** out) {
  return guarded([&] {
    require(data, target, out);
    const auto target_ref = noisevar::parse_var(target);
    const auto var_refs = noisevar::parse_var_list(vars ? vars : "");
    const auto problem = noisevar::build_problem(data->data, target_ref, var_refs);
    *out = new nv_analysis{noisevar::analyze(problem, convert(opts))};
  });
}

void nv_analysis_free(nv_analysis* a) { delete a; }

nv_status nv_analysis_summary(const nv_analysis* a, nv_report_summary* out) {
  return guarded([&] {
    require(a, out);
    const auto& r = a->analysis.report;
    *out = {};
    out->rows = r.rows;
    out->dims = r.dims;
    out->total_pairs = r.total_pairs;
    out->sigma_y = r.sigma_y;
    out->y_scale = r.y_scale;
    out->sigma2_nl = r.sigma2_nl;
    out->sigma_nl_fractional = r.sigma_nl_fractional;
    out->stderr_nl_fractional = r.stderr_nl_fractional;
    out->moment1 = r.moments[1];
    out->moment2 = r.moments[2];
    out->moment3 = r.moments[3];
    out->sigma2_direct = r.sigma2_direct;
    out->sigma_direct_fractional = r.sigma_direct_fractional;
    out->stderr_direct_fractional = r.stderr_direct_fractional;
    out->erf_ok = r.erf ? 1 : 0;
    out->erf_sigma = r.erf ? r.erf->sigma : 0.0;
    out->erf_sigma_fractional = r.erf ? r.erf->sigma / r.sigma_y : 0.0;
    out->erf_rms_misfit = r.erf ? r.erf->rms_misfit : 0.0;
    out->sigma2_lr = r.linear.sigma2_residual;
    out->sigma_lr_fractional = r.linear.sigma_lr_fractional;
    out->lr_nl_gap = r.lr_nl_gap;
    out->nonlinear = r.nonlinear ? 1 : 0;
  });
}

nv_status nv_analysis_json(const nv_analysis* a, int significant_digits, char** out) {
  return guarded([&] {
    require(a, out);
    *out = duplicate(noisevar::report_to_json(a->analysis.report, significant_digits).dump(2));
  });
}

nv_status nv_analysis_condprob_csv(const nv_analysis* a, int significant_digits, char** out) {
  return guarded([&] {
    require(a, out);
    *out = duplicate(noisevar::condprob_csv(a->analysis.matrix, significant_digits));
  });
}

nv_status nv_analysis_erf_csv(const nv_analysis* a, int significant_digits, char** out) {
  return guarded([&] {
    require(a, out);
    const auto& r = a->analysis.report;
    if (!r.erf) throw noisevar::Error(noisevar::ErrorKind::Data, r.erf_error);
    *out = duplicate(noisevar::erf_fit_csv(a->analysis.curve, *r.erf, significant_digits));
  });
}

size_t nv_analysis_curve_size(const nv_analysis* a) { return a ? a->analysis.curve.size() : 0; }

nv_status nv_analysis_curve(const nv_analysis* a, double* eps, double* p, double* stderr_out,
                            size_t capacity) {
  return guarded([&] {
    require(a);
    const auto& c = a->analysis.curve;
    if (capacity < c.size()) throw noisevar::Error(noisevar::ErrorKind::InvalidArgument, "output buffer too small");
    for (size_t i = 0; i < c.size(); ++i) {
      if (eps) eps[i] = c.eps[i];
      if (p) p[i] = c.p[i];
      if (stderr_out) stderr_out[i] = c.std_err[i];
    }
  });
}

nv_status nv_scan_lags(const nv_dataset* data, const char* target, size_t max_lag, double stop_threshold,
                       const nv_analysis_options* opts, nv_scan** out) {
  return guarded([&] {
    require(data, target, out);
    *out = new nv_scan{noisevar::embedding_scan(data->data, target, max_lag, stop_threshold, convert(opts))};
  });
}

nv_status nv_scan_subsets(const nv_dataset* data, const char* target, const char* const* subsets,
                          size_t n_subsets, const nv_analysis_options* opts, nv_scan** out) {
  return guarded([&] {
    require(data, target, out);
    if (n_subsets > 0) require(subsets);
    std::vector<std::vector<noisevar::VarRef>> sets;
    for (size_t i = 0; i < n_subsets; ++i) sets.push_back(noisevar::parse_var_list(subsets[i] ? subsets[i] : ""));
    *out = new nv_scan{noisevar::subset_scan(data->data, noisevar::parse_var(target), sets, convert(opts))};
  });
}

void nv_scan_free(nv_scan* s) { delete s; }

size_t nv_scan_row_count(const nv_scan* s) { return s ? s->report.rows.size() : 0; }

nv_status nv_scan_get_row(const nv_scan* s, size_t index, nv_scan_row* out) {
  return guarded([&] {
    require(s, out);
    if (index >= s->report.rows.size()) {
      throw noisevar::Error(noisevar::ErrorKind::InvalidArgument, "scan row index out of range");
    }
    const auto& r = s->report.rows[index];
    *out = {r.label.c_str(), r.ok ? 1 : 0, r.error.c_str(), r.rows,
            r.sigma_lr_fractional, r.sigma_nl_fractional, r.stderr_nl};
  });
}

size_t nv_scan_chosen_de(const nv_scan* s) {
  return (s && s->report.chosen_de) ? *s->report.chosen_de : 0;
}

nv_status nv_scan_json(const nv_scan* s, int significant_digits, char** out) {
  return guarded([&] {
    require(s, out);
    *out = duplicate(noisevar::scan_to_json(s->report, significant_digits).dump(2));
  });
}

}  // extern "C"
