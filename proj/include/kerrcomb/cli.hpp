#pragma once

// Command-line front end. `run` is the whole program; tools/kerrcomb.cpp only
// forwards argv to it, which keeps exit codes testable in-process.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 model error
// (instability, singular spectrum, bad steady state), 4 `validate` found a
// failing oracle, 1 anything else (I/O).

#include <kerrcomb/config.hpp>
#include <kerrcomb/experiments.hpp>
#include <kerrcomb/io.hpp>
#include <kerrcomb/oracle.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kerrcomb {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitModel = 3,
  kExitOracle = 4,
};

namespace detail {

struct Artifact {
  std::string file;      // name inside output_dir
  std::string content;
  bool is_json = false;
};

inline RunConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", 0, "cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config(buf.str());
  }
  // A command-line pump setting replaces whichever form the file used.
  bool eps_flag = false;
  for (const auto& [key, value] : overrides) {
    if (key == "eps_ratio" || key == "epsilon") {
      if (eps_flag) throw ConfigError(key, 0, "give exactly one of eps_ratio and epsilon");
      eps_flag = true;
      cfg.eps_ratio.reset();
      cfg.epsilon.reset();
    }
    apply_setting(cfg, key, value);
  }
  finalize_config(cfg);
  return cfg;
}

inline std::string csv_of(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

inline nlohmann::json sweep_json(const SweepResult& sweep) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& pt : sweep.points) {
    nlohmann::json j{{"parameter", pt.parameter},
                     {"rates", to_json(pt.rates)},
                     {"steady_state", to_json(pt.steady)},
                     {"stability", to_json(pt.stability)},
                     {"steady_state_residual", pt.residual},
                     {"computed", pt.computed}};
    if (pt.computed) j["summary"] = to_json(pt.scan.summary);
    pts.push_back(std::move(j));
  }
  return {{"axis", sweep.axis_name},
          {"gain_mode", sweep.gain_mode == GainMode::global ? "global" : "per_omega"},
          {"omega_points", sweep.omega_over_gamma.size()},
          {"omega_max_over_gamma", sweep.omega_over_gamma.empty() ? 0.0 : sweep.omega_over_gamma.back()},
          {"points", pts}};
}

inline std::string gain_mode_name(GainMode m) { return m == GainMode::global ? "global" : "per_omega"; }

inline std::vector<Artifact> cmd_steady_state(const RunConfig& cfg) {
  const RateParams rates = cfg.resolved_rates();
  const LinearModel lm = linearize(rates);
  auto j = sidecar("steady-state", lm);
  j["steady_state_residual"] = steady_state_residual(rates, lm.steady);
  if (cfg.physical) j["physical"] = to_json(*cfg.physical);
  std::ostringstream csv;
  csv << "quantity,value\n"
      << "epsilon_threshold," << format_number(pump_threshold(rates)) << '\n'
      << "A_p," << format_number(lm.steady.a_p) << '\n'
      << "A_a," << format_number(lm.steady.a_a) << '\n'
      << "A_b," << format_number(lm.steady.a_b) << '\n'
      << "above_threshold," << (lm.steady.above_threshold ? 1 : 0) << '\n'
      << "max_real_eigenvalue," << format_number(lm.stability.max_real_part) << '\n'
      << "stable," << (lm.stability.stable ? 1 : 0) << '\n';
  return {{"steady-state.json", j.dump(2) + "\n", true}, {"steady-state.csv", csv.str(), false}};
}

inline LinearModel stable_model(const RateParams& rates) {
  LinearModel lm = linearize(rates);
  if (!lm.stability.stable)
    throw UnstableModelError("drift matrix has growing modes (max Re = " +
                             format_number(lm.stability.max_real_part) + " s^-1)");
  return lm;
}

inline std::vector<Artifact> cmd_spectrum(const RunConfig& cfg) {
  const LinearModel lm = stable_model(cfg.resolved_rates());
  const auto grid = cfg.omega_ratios();
  auto j = sidecar("spectrum", lm);
  j["omega_points"] = grid.size();
  j["omega_max_over_gamma"] = cfg.omega_max;
  return {{"spectrum.csv", csv_of([&](std::ostream& os) { write_spectrum_csv(os, lm, grid); }), false},
          {"spectrum.json", j.dump(2) + "\n", true}};
}

inline std::vector<Artifact> cmd_vlf(const RunConfig& cfg) {
  const RateParams rates = cfg.resolved_rates();
  const LinearModel lm = stable_model(rates);
  const auto grid = cfg.omega_ratios();
  std::vector<double> omegas(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) omegas[k] = grid[k] * rates.gamma;
  const VlfScan scan = five_partite_verdict(lm, omegas, cfg.gain_mode);
  auto j = sidecar("vlf", lm);
  j["gain_mode"] = gain_mode_name(cfg.gain_mode);
  j["omega_points"] = grid.size();
  j["omega_max_over_gamma"] = cfg.omega_max;
  j["summary"] = to_json(scan.summary);
  return {{"vlf.csv", csv_of([&](std::ostream& os) { write_vlf_csv(os, scan, rates.gamma); }), false},
          {"vlf.json", j.dump(2) + "\n", true}};
}

inline nlohmann::json base_json(const std::string& command, const RateParams& base) {
  // The sidecar header describes the base operating point of a sweep.
  const LinearModel lm = linearize(base);
  return sidecar(command, lm);
}

inline std::vector<Artifact> cmd_sweep_coupling(const RunConfig& cfg) {
  const RateParams base = cfg.resolved_rates();
  const auto grid = cfg.omega_ratios();
  const SweepResult sweep = coupling_sweep(base, cfg.sweep_ratios, grid, cfg.gain_mode);
  auto j = base_json("sweep-coupling", base);
  j["sweep"] = sweep_json(sweep);
  return {
      {"sweep-coupling.csv", csv_of([&](std::ostream& os) { write_sweep_csv(os, sweep); }), false},
      {"sweep-coupling_summary.csv", csv_of([&](std::ostream& os) { write_sweep_summary_csv(os, sweep); }), false},
      {"sweep-coupling.json", j.dump(2) + "\n", true}};
}

inline nlohmann::json trace_json(const SweepResult& sweep, int s) {
  const auto& mins = sweep.traces.at("min_S" + std::to_string(s));
  const auto& where = sweep.traces.at("argmin_w_S" + std::to_string(s));
  // Unstable sweep points are gaps; the shape is judged on the rest.
  std::vector<double> axis, values;
  for (std::size_t k = 0; k < mins.size(); ++k)
    if (std::isfinite(mins[k])) {
      axis.push_back(sweep.axis[k]);
      values.push_back(mins[k]);
    }
  nlohmann::json j;
  j["points_analyzed"] = values.size();
  j["gaps"] = mins.size() - values.size();
  if (!values.empty()) {
    const TraceShape shape = analyze_trace(axis, values);
    nlohmann::json turns = nlohmann::json::array();
    for (auto k : shape.turning_points) turns.push_back(axis[k]);
    j["argmin_parameter"] = shape.argmin_parameter;
    j["min_value"] = shape.min_value;
    j["single_dip"] = shape.single_dip;
    j["turning_points"] = turns;
  }
  nlohmann::json jumps = nlohmann::json::array();
  for (const auto& rc : regime_changes(sweep.axis, where))
    jumps.push_back({{"parameter_before", rc.parameter_before},
                     {"parameter_after", rc.parameter_after},
                     {"omega_before", rc.omega_before},
                     {"omega_after", rc.omega_after}});
  j["regime_changes"] = jumps;
  return j;
}

inline std::vector<Artifact> cmd_sweep_pump(const RunConfig& cfg) {
  const RateParams base = cfg.resolved_rates();
  const auto grid = cfg.omega_ratios();
  const auto axis = linear_range(cfg.pump_start, cfg.pump_stop, cfg.pump_step);
  const SweepResult sweep = pump_sweep(base, axis, grid, cfg.gain_mode);
  auto j = base_json("sweep-pump", base);
  j["sweep"] = sweep_json(sweep);
  for (int s = 1; s <= 4; ++s) j["trace_S" + std::to_string(s)] = trace_json(sweep, s);

  std::vector<Artifact> out{
      {"sweep-pump.csv", csv_of([&](std::ostream& os) { write_sweep_csv(os, sweep); }), false},
      {"sweep-pump_summary.csv", csv_of([&](std::ostream& os) { write_sweep_summary_csv(os, sweep); }), false}};
  nlohmann::json dumps = nlohmann::json::array();
  for (double e : cfg.dump_eps) {
    RateParams r = base;
    r.epsilon = e * pump_threshold(base);
    const LinearModel lm = stable_model(r);
    std::ostringstream name;
    name << "sweep-pump_eps_" << std::setprecision(6) << e;
    out.push_back({name.str() + "_spectrum.csv",
                   csv_of([&](std::ostream& os) { write_spectrum_csv(os, lm, grid); }), false});
    const auto pt = detail::evaluate_point(e, r, grid, cfg.gain_mode);
    out.push_back({name.str() + "_vlf.csv",
                   csv_of([&](std::ostream& os) { write_vlf_csv(os, pt.scan, r.gamma); }), false});
    dumps.push_back({{"eps_over_threshold", e}, {"files", {name.str() + "_spectrum.csv", name.str() + "_vlf.csv"}}});
  }
  j["dumps"] = dumps;
  out.push_back({"sweep-pump.json", j.dump(2) + "\n", true});
  return out;
}

inline std::vector<Artifact> cmd_scaling_check(const RunConfig& cfg) {
  const RateParams base = cfg.resolved_rates();
  const auto grid = cfg.omega_ratios();
  const std::vector<OracleReport> reps{scaling_check(base, cfg.scale, grid, true),
                                       scaling_check(base, cfg.scale, grid, false)};
  auto j = base_json("scaling-check", base);
  j["scale"] = cfg.scale;
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reps) j["reports"].push_back(to_json(r));
  return {{"scaling-check.csv", csv_of([&](std::ostream& os) { write_oracle_csv(os, reps); }), false},
          {"scaling-check.json", j.dump(2) + "\n", true}};
}

inline std::vector<Artifact> cmd_validate(const RunConfig& cfg, bool& all_passed) {
  const RateParams rates = cfg.resolved_rates();
  const auto grid = omega_ratio_grid(cfg.omega_max, std::min(cfg.omega_points, 41));
  const auto reps = validate_operating_point(rates, grid);
  all_passed = true;
  for (const auto& r : reps) all_passed = all_passed && r.passed;
  auto j = base_json("validate", rates);
  j["all_passed"] = all_passed;
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reps) j["reports"].push_back(to_json(r));
  return {{"validate.csv", csv_of([&](std::ostream& os) { write_oracle_csv(os, reps); }), false},
          {"validate.json", j.dump(2) + "\n", true}};
}

inline void emit(const RunConfig& cfg, const std::vector<Artifact>& artifacts, std::ostream& out) {
  const bool want_csv = cfg.format != OutputFormat::json;
  const bool want_json = cfg.format != OutputFormat::csv;
  if (cfg.output_dir.empty()) {
    // stdout gets the first artifact of the requested kind only.
    for (const auto& a : artifacts)
      if ((a.is_json && want_json && !want_csv) || (!a.is_json && want_csv)) {
        out << a.content;
        return;
      }
    return;
  }
  for (const auto& a : artifacts)
    if ((a.is_json && want_json) || (!a.is_json && want_csv))
      write_file_atomic(std::filesystem::path(cfg.output_dir) / a.file, a.content);
}

inline std::string keys_help() {
  std::string text = "Config keys (config file 'key = value', or --set key=value):\n";
  for (const auto& [k, doc] : config_keys()) text += "  " + k + std::string(k.size() < 14 ? 14 - k.size() : 1, ' ') + doc + "\n";
  text += "Environment: KERRCOMB_THREADS sets the worker thread count.\n";
  return text;
}

}  // namespace detail

/// Runs the tool; argv[0] is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Five-mode Kerr comb: steady states, quadrature noise spectra and optimized\n"
               "van Loock-Furusawa entanglement witnesses. Rates are angular rates in s^-1,\n"
               "frequencies are given as w/gamma.",
               kToolName};
  app.footer(detail::keys_help());
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> overrides;
  app.add_option("-c,--config", config_path, "config file of 'key = value' lines");
  app.add_option("--set", sets, "override any config key, as key=value (repeatable)");

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--gamma", "gamma", "total damping rate gamma [s^-1]"},
      {"--g", "g", "nonlinear coupling g [s^-1]"},
      {"--gamma-c-ratio", "gamma_c_ratio", "out-coupling fraction gamma_c/gamma in [0, 1]"},
      {"--eps-ratio", "eps_ratio", "pump amplitude eps/eps_th"},
      {"--epsilon", "epsilon", "absolute pump amplitude eps [s^-1]"},
      {"--omega-max", "omega_max", "largest w/gamma of the frequency grid"},
      {"--omega-points", "omega_points", "number of frequency points"},
      {"--scale", "scale", "gamma multiplier for scaling-check"},
      {"-o,--output-dir", "output_dir", "directory for result files (default stdout)"},
      {"--format", "format", "csv | json | both"},
      {"--gain-mode", "gain_mode", "per_omega | global"},
  };
  std::vector<std::string> flag_values(std::size(flags));
  std::vector<CLI::Option*> flag_options;
  for (std::size_t k = 0; k < std::size(flags); ++k)
    flag_options.push_back(app.add_option(flags[k].name, flag_values[k], flags[k].help));

  const std::vector<std::pair<const char*, const char*>> commands{
      {"steady-state", "threshold, steady-state amplitudes and stability"},
      {"spectrum", "single-quadrature output noise spectra versus w/gamma"},
      {"vlf", "optimized S1..S4 versus w/gamma and the five-partite verdict"},
      {"sweep-coupling", "optimized witnesses for each gamma_c/gamma in sweep_ratios"},
      {"sweep-pump", "minimum witnesses versus eps/eps_th over pump_start..pump_stop"},
      {"scaling-check", "check that results depend only on w/gamma, eps/eps_th, gamma_c/gamma"},
      {"validate", "run all numerical oracles at the operating point"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    std::vector<std::string> args;
    for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "kerrcomb: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig cfg;
  try {
    for (std::size_t k = 0; k < std::size(flags); ++k)
      if (flag_options[k]->count() > 0) overrides.emplace_back(flags[k].key, flag_values[k]);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(s, 0, "--set expects key=value");
      overrides.emplace_back(std::string(detail::trim(s.substr(0, eq))), s.substr(eq + 1));
    }
    cfg = detail::load_config(config_path, overrides);
  } catch (const Error& e) {
    err << "kerrcomb: configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  const RateParams rates = cfg.resolved_rates();
  try {
    std::vector<detail::Artifact> artifacts;
    bool passed = true;
    if (command == "steady-state") artifacts = detail::cmd_steady_state(cfg);
    else if (command == "spectrum") artifacts = detail::cmd_spectrum(cfg);
    else if (command == "vlf") artifacts = detail::cmd_vlf(cfg);
    else if (command == "sweep-coupling") artifacts = detail::cmd_sweep_coupling(cfg);
    else if (command == "sweep-pump") artifacts = detail::cmd_sweep_pump(cfg);
    else if (command == "scaling-check") artifacts = detail::cmd_scaling_check(cfg);
    else artifacts = detail::cmd_validate(cfg, passed);
    detail::emit(cfg, artifacts, out);
    if (!passed) {
      err << "kerrcomb: validation failed at " << describe(rates) << '\n';
      return kExitOracle;
    }
    return kExitOk;
  } catch (const ModelError& e) {
    err << "kerrcomb: model error: " << e.what() << "\n  operating point: " << describe(rates) << '\n';
    return kExitModel;
  } catch (const InvalidArgument& e) {
    err << "kerrcomb: invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "kerrcomb: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace kerrcomb
