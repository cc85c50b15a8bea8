#include "noisevar/report.hpp"

#include "noisevar/error.hpp"

namespace noisevar {

using nlohmann::json;

namespace {

json number(double v, int digits) {
  if (!std::isfinite(v)) return nullptr;
  return round_significant(v, digits);
}

json vars_to_json(const std::vector<VarRef>& vars) {
  json arr = json::array();
  for (const auto& v : vars) arr.push_back(v.label());
  return arr;
}

}  // namespace

const char* to_string(NoiseMode mode) {
  return mode == NoiseMode::Iterative ? "iterative" : "superimposed";
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "iterative") return NoiseMode::Iterative;
  if (s == "superimposed") return NoiseMode::Superimposed;
  throw Error(ErrorKind::InvalidArgument, "unknown noise mode '" + s + "' (iterative|superimposed)");
}

json report_to_json(const EstimateReport& r, int digits) {
  json j;
  j["target"] = r.target;
  j["variables"] = r.variables;
  j["rows"] = r.rows;
  j["total_pairs"] = r.total_pairs;
  j["min_count"] = r.min_count;
  j["sigma_y"] = number(r.sigma_y, digits);
  j["y_scale"] = number(r.y_scale, digits);
  j["nl"] = {
      {"sigma2", number(r.sigma2_nl, digits)},
      {"sigma_fractional", number(r.sigma_nl_fractional, digits)},
      {"stderr_fractional", number(r.stderr_nl_fractional, digits)},
      {"moments", {{"1", number(r.moments[1], digits)},
                   {"2", number(r.moments[2], digits)},
                   {"3", number(r.moments[3], digits)}}},
      {"sigma2_unconditional", number(r.sigma2_unconditional, digits)},
  };
  j["direct"] = {
      {"sigma2", number(r.sigma2_direct, digits)},
      {"sigma_fractional", number(r.sigma_direct_fractional, digits)},
      {"stderr_fractional", number(r.stderr_direct_fractional, digits)},
      {"delta", number(r.direct_delta, digits)},
      {"pairs", r.direct_pairs},
  };
  if (r.erf) {
    j["erf_fit"] = {
        {"sigma", number(r.erf->sigma, digits)},
        {"sigma_fractional", number(r.erf->sigma / r.sigma_y, digits)},
        {"rms_misfit", number(r.erf->rms_misfit, digits)},
    };
  } else {
    j["erf_fit"] = {{"error", r.erf_error}};
  }
  json coef = json::array();
  for (double a : r.linear.a) coef.push_back(number(a, digits));
  j["lr"] = {
      {"a0", number(r.linear.a0, digits)},
      {"a", coef},
      {"sigma2", number(r.linear.sigma2_residual, digits)},
      {"sigma_fractional", number(r.linear.sigma_lr_fractional, digits)},
      {"condition", number(r.linear.condition, digits)},
  };
  j["lr_nl_gap"] = number(r.lr_nl_gap, digits);
  j["nonlinear"] = r.nonlinear;
  return j;
}

json scan_to_json(const ScanReport& r, int digits) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = {{"label", row.label}, {"variables", vars_to_json(row.variables)}, {"ok", row.ok},
               {"rows", row.rows}};
    if (row.ok) {
      jr["sigma_lr_fractional"] = number(row.sigma_lr_fractional, digits);
      jr["sigma_nl_fractional"] = number(row.sigma_nl_fractional, digits);
      jr["stderr_nl"] = number(row.stderr_nl, digits);
    } else {
      jr["error"] = row.error;
    }
    rows.push_back(std::move(jr));
  }
  json j = {{"target", r.target}, {"rows", rows}, {"stop_threshold", number(r.stop_threshold, digits)}};
  j["chosen_dE"] = r.chosen_de ? json(*r.chosen_de) : json(nullptr);
  return j;
}

ScanReport scan_from_json(const json& j) {
  try {
    ScanReport r;
    r.target = j.at("target").get<std::string>();
    r.stop_threshold = j.at("stop_threshold").get<double>();
    if (!j.at("chosen_dE").is_null()) r.chosen_de = j.at("chosen_dE").get<std::size_t>();
    for (const auto& jr : j.at("rows")) {
      ScanRow row;
      row.label = jr.at("label").get<std::string>();
      for (const auto& v : jr.at("variables")) row.variables.push_back(parse_var(v.get<std::string>()));
      row.ok = jr.at("ok").get<bool>();
      row.rows = jr.at("rows").get<std::size_t>();
      if (row.ok) {
        row.sigma_lr_fractional = jr.at("sigma_lr_fractional").get<double>();
        row.sigma_nl_fractional = jr.at("sigma_nl_fractional").get<double>();
        row.stderr_nl = jr.at("stderr_nl").get<double>();
      } else {
        row.error = jr.at("error").get<std::string>();
      }
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("scan report: ") + e.what());
  }
}

json grid_config_to_json(const GridConfig& c) {
  return {{"n_eps_bins", c.n_eps_bins},       {"n_delta_bins", c.n_delta_bins},
          {"auto_range", c.auto_range},       {"eps_min", c.eps_min},
          {"eps_max", c.eps_max},             {"delta_min", c.delta_min},
          {"delta_max", c.delta_max},         {"eps_percentile", c.eps_percentile},
          {"delta_percentile", c.delta_percentile}};
}

json options_to_json(const AnalysisOptions& o) {
  return {{"grid", grid_config_to_json(o.grid)},
          {"min_count", o.min_count},
          {"standardize", o.standardize},
          {"workers", o.workers},
          {"nonlinearity_margin", o.nonlinearity_margin}};
}

json config_to_json(const IkedaConfig& c) {
  return {{"system", "ikeda"}, {"p", c.p},          {"B", c.B},
          {"kappa", c.kappa},  {"alpha", c.alpha},  {"n", c.n},
          {"sigma_r", c.sigma_r}, {"noise_mode", to_string(c.noise_mode)}, {"seed", c.seed},
          {"transient", c.transient}, {"z0", {c.z0.real(), c.z0.imag()}}};
}

json config_to_json(const LorenzConfig& c) {
  return {{"system", "lorenz"}, {"r", c.r}, {"b", c.b}, {"sigma", c.sigma}, {"dt_out", c.dt_out},
          {"n", c.n}, {"sigma_r", c.sigma_r}, {"noise_mode", to_string(c.noise_mode)}, {"seed", c.seed},
          {"transient_time", c.transient_time}, {"initial", c.initial}, {"tolerance", c.tolerance}};
}

json config_to_json(const HenonConfig& c) {
  return {{"system", "henon"}, {"n", c.n}, {"sigma_r", c.sigma_r},
          {"noise_mode", to_string(c.noise_mode)}, {"seed", c.seed}, {"transient", c.transient}};
}

}  // namespace noisevar
