// noisevar: command-line driver over the C API.
//
//   noisevar generate --system ikeda --n 2000 --noise 0.02 --seed 7 --out ik.csv
//   noisevar analyze ik.csv --target x --vars "x@1,y@1" [--json]
//   noisevar scan ik.csv --target x --lags-up-to 5
//   noisevar curve ik.csv --target x --vars "x@1,y@1" --out pe.csv
//   noisevar fit-erf ik.csv --target x --vars "x@1,y@1" --out fit.csv
//
// Exit codes: 0 success, 1 usage error, 2 data or numeric error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "noisevar/noisevar.h"

namespace {

using nlohmann::json;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kReportDigits = 4;

struct Failure {
  int code;
  std::string message;
};

void check(nv_status status) {
  if (status == NV_OK) return;
  throw Failure{status == NV_ERR_INVALID_ARGUMENT ? kUsageError : kDataError, nv_last_error()};
}

struct DatasetDeleter {
  void operator()(nv_dataset* d) const { nv_dataset_free(d); }
};
struct AnalysisDeleter {
  void operator()(nv_analysis* a) const { nv_analysis_free(a); }
};
struct ScanDeleter {
  void operator()(nv_scan* s) const { nv_scan_free(s); }
};
using DatasetPtr = std::unique_ptr<nv_dataset, DatasetDeleter>;
using AnalysisPtr = std::unique_ptr<nv_analysis, AnalysisDeleter>;
using ScanPtr = std::unique_ptr<nv_scan, ScanDeleter>;

std::string take(char* s) {
  std::string out(s ? s : "");
  nv_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{kDataError, "cannot write '" + path + "'"};
}

std::string fmt(double v, bool full) {
  char buf[64];
  if (full) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", v);
  }
  return buf;
}

int digits(bool full) { return full ? 0 : kReportDigits; }

// Flags shared by every subcommand that runs the estimator.
struct AnalysisFlags {
  std::string input;
  std::string target;
  std::string vars;
  std::size_t eps_bins = 0;
  std::size_t delta_bins = 0;
  std::vector<double> eps_range;
  std::vector<double> delta_range;
  std::optional<double> eps_percentile;
  std::optional<double> delta_percentile;
  std::optional<std::size_t> min_count;
  std::optional<std::size_t> workers;
  std::optional<double> margin;
  bool no_standardize = false;
  bool json_out = false;
  bool full_precision = false;
  std::string out;
  std::string config_out;

  void add_common(CLI::App* app) {
    app->add_option("input", input, "CSV file with a header row")->required();
    app->add_option("--target", target, "Dependent variable, name or name@lag")->required();
    app->add_option("--eps-bins", eps_bins, "Number of log-spaced |dy| bins (default 40)");
    app->add_option("--delta-bins", delta_bins, "Number of log-spaced |dx| bins (default 40)");
    app->add_option("--eps-range", eps_range, "Fixed eps range MIN,MAX (disables auto range)")->expected(2)->delimiter(',');
    app->add_option("--delta-range", delta_range, "Fixed delta range MIN,MAX (disables auto range)")->expected(2)->delimiter(',');
    app->add_option("--eps-percentile", eps_percentile, "Auto-range lower eps edge, percent of nonzero |dy|");
    app->add_option("--delta-percentile", delta_percentile, "Auto-range lower delta edge, percent of nonzero |dx|");
    app->add_option("--min-count", min_count, "Minimum pairs for a delta bin to qualify (default 50)");
    app->add_option("--workers", workers, "Worker threads for the pair pass (default $NOISEVAR_WORKERS or 1)");
    app->add_option("--nonlinearity-margin", margin, "LR-NL gap above which nonlinearity is flagged (default 0.05)");
    app->add_flag("--no-standardize", no_standardize, "Analyse raw units instead of unit-variance columns");
    app->add_flag("--full-precision", full_precision, "Print round-trip precision instead of 4 significant digits");
    app->add_option("--config-out", config_out, "Write the resolved run configuration to this JSON file");
  }

  nv_analysis_options options() const {
    nv_analysis_options o;
    nv_analysis_options_default(&o);
    if (eps_bins) o.n_eps_bins = eps_bins;
    if (delta_bins) o.n_delta_bins = delta_bins;
    if (!eps_range.empty() || !delta_range.empty()) {
      if (eps_range.size() != 2 || delta_range.size() != 2) {
        throw Failure{kUsageError, "--eps-range and --delta-range must be given together"};
      }
      o.auto_range = 0;
      o.eps_min = eps_range[0];
      o.eps_max = eps_range[1];
      o.delta_min = delta_range[0];
      o.delta_max = delta_range[1];
    }
    if (eps_percentile) o.eps_percentile = *eps_percentile;
    if (delta_percentile) o.delta_percentile = *delta_percentile;
    if (min_count) o.min_count = *min_count;
    if (workers) o.workers = *workers;
    if (margin) o.nonlinearity_margin = *margin;
    o.standardize = no_standardize ? 0 : 1;
    return o;
  }
};

json run_config(const std::string& subcommand, const AnalysisFlags& f, const nv_analysis_options& o) {
  char* opts = nullptr;
  check(nv_analysis_options_json(&o, &opts));
  json j = {{"subcommand", subcommand},
            {"input", f.input},
            {"target", f.target},
            {"options", json::parse(take(opts))},
            {"json", f.json_out},
            {"full_precision", f.full_precision},
            {"version", nv_version()}};
  if (!f.out.empty()) j["output"] = f.out;
  return j;
}

void emit_config(const json& config, const AnalysisFlags& f) {
  std::string path = f.config_out;
  if (path.empty() && !f.out.empty()) path = f.out + ".config.json";
  if (!path.empty()) write_file(path, config.dump(2) + "\n");
}

DatasetPtr load(const std::string& path) {
  nv_dataset* d = nullptr;
  check(nv_dataset_load_csv(path.c_str(), &d));
  return DatasetPtr(d);
}

AnalysisPtr run_analysis(const AnalysisFlags& f, const nv_analysis_options& o) {
  const auto data = load(f.input);
  nv_analysis* a = nullptr;
  check(nv_analyze(data.get(), f.target.c_str(), f.vars.c_str(), &o, &a));
  return AnalysisPtr(a);
}

std::string set_label(const std::string& vars) {
  if (vars.empty() || vars == "none") return "{none}";
  return "{" + vars + "}";
}

int cmd_analyze(const AnalysisFlags& f) {
  const auto o = f.options();
  auto config = run_config("analyze", f, o);
  config["vars"] = f.vars;
  const auto a = run_analysis(f, o);
  emit_config(config, f);
  const bool full = f.full_precision;
  if (f.json_out) {
    char* text = nullptr;
    check(nv_analysis_json(a.get(), digits(full), &text));
    auto j = json::parse(take(text));
    j["run_config"] = config;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  nv_report_summary s;
  check(nv_analysis_summary(a.get(), &s));
  std::ostringstream os;
  os << "target " << f.target << " given " << set_label(f.vars) << "  (N=" << s.rows
     << ", pairs=" << s.total_pairs << ")\n";
  os << "  fractional error (LR)        " << fmt(s.sigma_lr_fractional, full) << "\n";
  os << "  fractional error (NL)        " << fmt(s.sigma_nl_fractional, full) << " +/- "
     << fmt(s.stderr_nl_fractional, full) << "\n";
  os << "  fractional error (direct)    " << fmt(s.sigma_direct_fractional, full) << " +/- "
     << fmt(s.stderr_direct_fractional, full) << "\n";
  os << "  residual variance (NL)       " << fmt(s.sigma2_nl, full) << "\n";
  os << "  <|dr|^1> <|dr|^2> <|dr|^3>   " << fmt(s.moment1, full) << " " << fmt(s.moment2, full) << " "
     << fmt(s.moment3, full) << "\n";
  if (s.erf_ok) {
    os << "  erf fit sigma (fractional)   " << fmt(s.erf_sigma_fractional, full) << "  rms misfit "
       << fmt(s.erf_rms_misfit, full) << "\n";
  } else {
    os << "  erf fit                      unavailable\n";
  }
  os << "  LR - NL gap                  " << fmt(s.lr_nl_gap, full) << (s.nonlinear ? "  (nonlinear)" : "")
     << "\n";
  std::cout << os.str();
  return 0;
}

int cmd_curve(const AnalysisFlags& f, bool erf) {
  const auto o = f.options();
  auto config = run_config(erf ? "fit-erf" : "curve", f, o);
  config["vars"] = f.vars;
  const auto a = run_analysis(f, o);
  char* text = nullptr;
  if (erf) {
    check(nv_analysis_erf_csv(a.get(), digits(f.full_precision), &text));
  } else {
    check(nv_analysis_condprob_csv(a.get(), digits(f.full_precision), &text));
  }
  const auto csv = take(text);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    write_file(f.out, csv);
  }
  emit_config(config, f);
  return 0;
}

std::vector<std::string> read_subsets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kDataError, "cannot open '" + path + "'"};
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Failure{kDataError, path + ": " + e.what()};
  }
  const json& list = j.is_object() ? j.value("subsets", json::array()) : j;
  if (!list.is_array()) throw Failure{kDataError, path + ": expected a \"subsets\" array"};
  std::vector<std::string> out;
  for (const auto& item : list) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (item.is_array()) {
      std::string joined;
      for (const auto& v : item) {
        if (!v.is_string()) throw Failure{kDataError, path + ": variables must be strings"};
        if (!joined.empty()) joined += ",";
        joined += v.get<std::string>();
      }
      out.push_back(joined);
    } else {
      throw Failure{kDataError, path + ": each subset must be a string or an array of strings"};
    }
  }
  return out;
}

int cmd_scan(const AnalysisFlags& f, std::optional<std::size_t> lags, const std::string& subsets_path,
             double stop_threshold) {
  if (lags.has_value() == !subsets_path.empty()) {
    throw Failure{kUsageError, "scan needs exactly one of --lags-up-to or --subsets"};
  }
  const auto o = f.options();
  auto config = run_config("scan", f, o);
  const auto data = load(f.input);
  nv_scan* raw = nullptr;
  if (lags) {
    config["lags_up_to"] = *lags;
    config["stop_threshold"] = stop_threshold;
    check(nv_scan_lags(data.get(), f.target.c_str(), *lags, stop_threshold, &o, &raw));
  } else {
    const auto sets = read_subsets(subsets_path);
    config["subsets"] = sets;
    std::vector<const char*> ptrs;
    for (const auto& s : sets) ptrs.push_back(s.c_str());
    check(nv_scan_subsets(data.get(), f.target.c_str(), ptrs.data(), ptrs.size(), &o, &raw));
  }
  const ScanPtr scan(raw);
  emit_config(config, f);
  const bool full = f.full_precision;
  if (f.json_out) {
    char* text = nullptr;
    check(nv_scan_json(scan.get(), digits(full), &text));
    auto j = json::parse(take(text));
    j["run_config"] = config;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %12s %12s %12s %7s\n", "variables", "sigma_LR", "sigma_NL", "stderr_NL",
                "rows");
  os << line;
  for (std::size_t i = 0; i < nv_scan_row_count(scan.get()); ++i) {
    nv_scan_row row;
    check(nv_scan_get_row(scan.get(), i, &row));
    if (row.ok) {
      std::snprintf(line, sizeof line, "%-28s %12s %12s %12s %7zu\n", row.label,
                    fmt(row.sigma_lr_fractional, full).c_str(), fmt(row.sigma_nl_fractional, full).c_str(),
                    fmt(row.stderr_nl, full).c_str(), row.rows);
    } else {
      std::snprintf(line, sizeof line, "%-28s failed: %s\n", row.label, row.error);
    }
    os << line;
  }
  if (const auto de = nv_scan_chosen_de(scan.get())) {
    os << "embedding dimension d_E = " << de << " (stop threshold " << fmt(stop_threshold, full) << ")\n";
  }
  std::cout << os.str();
  return 0;
}

struct GenerateFlags {
  std::string system;
  std::optional<std::size_t> n;
  double noise = 0.0;
  std::string noise_mode;
  std::uint64_t seed = 1;
  std::optional<std::size_t> transient;
  std::vector<std::string> params;
  std::string out;
};

nv_noise_mode parse_mode(const std::string& s) {
  if (s == "iterative") return NV_NOISE_ITERATIVE;
  if (s == "superimposed") return NV_NOISE_SUPERIMPOSED;
  throw Failure{kUsageError, "unknown --noise-mode '" + s + "' (iterative|superimposed)"};
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Failure{kUsageError, "--param expects key=value, got '" + item + "'"};
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      out[item.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw Failure{kUsageError, "--param value is not a number in '" + item + "'"};
    }
  }
  return out;
}

void apply(std::map<std::string, double>& params, const char* key, double& field) {
  if (auto it = params.find(key); it != params.end()) {
    field = it->second;
    params.erase(it);
  }
}

int cmd_generate(const GenerateFlags& g) {
  auto params = parse_params(g.params);
  nv_dataset* raw = nullptr;
  char* cfg_text = nullptr;
  if (g.system == "ikeda") {
    nv_ikeda_config c;
    nv_ikeda_config_default(&c);
    if (g.n) c.n = *g.n;
    c.sigma_r = g.noise;
    c.seed = g.seed;
    if (!g.noise_mode.empty()) c.noise_mode = parse_mode(g.noise_mode);
    if (g.transient) c.transient = *g.transient;
    apply(params, "p", c.p);
    apply(params, "B", c.B);
    apply(params, "kappa", c.kappa);
    apply(params, "alpha", c.alpha);
    apply(params, "z0_re", c.z0_re);
    apply(params, "z0_im", c.z0_im);
    if (!params.empty()) throw Failure{kUsageError, "unknown ikeda parameter '" + params.begin()->first + "'"};
    check(nv_generate_ikeda(&c, &raw));
    check(nv_ikeda_config_json(&c, &cfg_text));
  } else if (g.system == "lorenz") {
    nv_lorenz_config c;
    nv_lorenz_config_default(&c);
    if (g.n) c.n = *g.n;
    c.sigma_r = g.noise;
    c.seed = g.seed;
    if (!g.noise_mode.empty()) c.noise_mode = parse_mode(g.noise_mode);
    if (g.transient) c.transient_time = static_cast<double>(*g.transient);
    apply(params, "r", c.r);
    apply(params, "b", c.b);
    apply(params, "sigma", c.sigma);
    apply(params, "dt", c.dt_out);
    apply(params, "tolerance", c.tolerance);
    apply(params, "transient_time", c.transient_time);
    apply(params, "x0", c.initial[0]);
    apply(params, "y0", c.initial[1]);
    apply(params, "z0", c.initial[2]);
    if (!params.empty()) throw Failure{kUsageError, "unknown lorenz parameter '" + params.begin()->first + "'"};
    check(nv_generate_lorenz(&c, &raw));
    check(nv_lorenz_config_json(&c, &cfg_text));
  } else if (g.system == "henon") {
    nv_henon_config c;
    nv_henon_config_default(&c);
    if (g.n) c.n = *g.n;
    c.sigma_r = g.noise;
    c.seed = g.seed;
    if (!g.noise_mode.empty()) c.noise_mode = parse_mode(g.noise_mode);
    if (g.transient) c.transient = *g.transient;
    if (!params.empty()) throw Failure{kUsageError, "unknown henon parameter '" + params.begin()->first + "'"};
    check(nv_generate_henon(&c, &raw));
    check(nv_henon_config_json(&c, &cfg_text));
  } else {
    throw Failure{kUsageError, "unknown --system '" + g.system + "' (ikeda|lorenz|henon)"};
  }
  const DatasetPtr data(raw);
  check(nv_dataset_save_csv(data.get(), g.out.c_str()));
  const json sidecar = {{"subcommand", "generate"},
                        {"output", g.out},
                        {"generator", json::parse(take(cfg_text))},
                        {"version", nv_version()}};
  write_file(g.out + ".json", sidecar.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free estimation of nonlinear regression noise"};
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Synthesize Ikeda, Lorenz or Henon data");
  generate->add_option("--system", gen.system, "ikeda | lorenz | henon")->required();
  generate->add_option("--n", gen.n, "Number of samples");
  generate->add_option("--noise", gen.noise, "Gaussian noise standard deviation");
  generate->add_option("--noise-mode", gen.noise_mode, "iterative | superimposed");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--transient", gen.transient, "Discarded steps (time units for lorenz)");
  generate->add_option("--param", gen.params, "Model parameter override key=value (repeatable)");
  generate->add_option("--out", gen.out, "Output CSV; a JSON sidecar is written to OUT.json")->required();

  AnalysisFlags an;
  auto* analyze = app.add_subcommand("analyze", "Estimate the residual noise of target given variables");
  an.add_common(analyze);
  analyze->add_option("--vars", an.vars, "Explanatory variables, e.g. \"x@1,y@1\" (empty: none)");
  analyze->add_flag("--json", an.json_out, "Print the report as JSON");
  analyze->add_option("--out", an.out, "Only used to name the run-config sidecar");

  AnalysisFlags cu;
  auto* curve = app.add_subcommand("curve", "Export P(eps|delta) as CSV");
  cu.add_common(curve);
  curve->add_option("--vars", cu.vars, "Explanatory variables");
  curve->add_option("--out", cu.out, "Output CSV (default stdout)");

  AnalysisFlags fe;
  auto* fit = app.add_subcommand("fit-erf", "Export P(eps) with its Gaussian erf fit as CSV");
  fe.add_common(fit);
  fit->add_option("--vars", fe.vars, "Explanatory variables");
  fit->add_option("--out", fe.out, "Output CSV (default stdout)");

  AnalysisFlags sc;
  std::optional<std::size_t> lags;
  std::string subsets;
  double stop_threshold = 0.02;
  auto* scan = app.add_subcommand("scan", "Variable-subset or embedding-dimension scan");
  sc.add_common(scan);
  scan->add_option("--lags-up-to", lags, "Scan target@1..k for k = 0..K");
  scan->add_option("--subsets", subsets, "JSON file with a \"subsets\" array of variable lists");
  scan->add_option("--stop-threshold", stop_threshold, "Improvement below which the lag scan stops (default 0.02)");
  scan->add_flag("--json", sc.json_out, "Print the report as JSON");
  scan->add_option("--out", sc.out, "Only used to name the run-config sidecar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return kUsageError;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*analyze) return cmd_analyze(an);
    if (*curve) return cmd_curve(cu, false);
    if (*fit) return cmd_curve(fe, true);
    if (*scan) return cmd_scan(sc, lags, subsets, stop_threshold);
  } catch (const Failure& f) {
    std::cerr << "noisevar: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "noisevar: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
