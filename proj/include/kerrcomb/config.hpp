#pragma once

// Line-oriented `key = value` run configuration for the command-line tool.
// Blank lines and text after '#' are ignored; unknown keys are errors.

#include <kerrcomb/model.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/vlf.hpp>

#include <algorithm>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace kerrcomb {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message)
      : Error(line > 0 ? "config line " + std::to_string(line) + ", key '" + key + "': " + message
                       : "setting '" + key + "': " + message),
        key_(key),
        line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class OutputFormat { csv, json, both };

struct RunConfig {
  std::optional<PhysicalParams> physical;
  double gamma = 4.02e5;                 // s^-1
  std::optional<double> g;               // s^-1; derived from physical when absent
  double gamma_c_ratio = 1.0;
  std::optional<double> eps_ratio;       // eps / eps_th
  std::optional<double> epsilon;         // s^-1
  double omega_max = 5.0;                // w/gamma
  int omega_points = 1001;
  std::vector<double> sweep_ratios{0.34, 0.57, 0.8, 1.0};
  double pump_start = 1.01;
  double pump_stop = 1.5;
  double pump_step = 0.005;
  std::vector<double> dump_eps;          // pump values whose full traces are dumped
  double scale = 2.0;
  std::string output_dir;                // empty: write to stdout
  OutputFormat format = OutputFormat::both;
  GainMode gain_mode = GainMode::per_omega;

  static constexpr double kDefaultG = 2.21e-4;
  static constexpr double kDefaultEpsRatio = 1.15;

  double resolved_g() const {
    if (g) return *g;
    if (physical) return coupling_constant(*physical);
    return kDefaultG;
  }

  RateParams resolved_rates() const {
    RateParams r = RateParams::from_ratios(gamma, gamma_c_ratio, resolved_g(),
                                           eps_ratio.value_or(kDefaultEpsRatio));
    if (epsilon) r.epsilon = *epsilon;
    return r;
  }

  std::vector<double> omega_ratios() const { return omega_ratio_grid(omega_max, omega_points); }
};

/// Documentation of every key, shown by `--help`.
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"gamma", "total damping rate gamma of every mode [s^-1] (default 4.02e5)"},
      {"g", "nonlinear coupling g [s^-1] (default 2.21e-4, or derived from n0/n2/lambda0/mode_volume)"},
      {"gamma_c_ratio", "out-coupling fraction gamma_c/gamma in [0, 1] (default 1.0)"},
      {"eps_ratio", "pump amplitude relative to threshold eps/eps_th (default 1.15)"},
      {"epsilon", "absolute pump amplitude eps [s^-1]; excludes eps_ratio"},
      {"n0", "linear refractive index (enables device parameters)"},
      {"n2", "Kerr coefficient [m^2/W]"},
      {"lambda0", "pump wavelength [m]"},
      {"mode_volume", "mode volume [m^3]"},
      {"radius", "resonator radius [m] (informational)"},
      {"q_factor", "loaded quality factor (informational)"},
      {"omega_max", "largest analysis frequency w/gamma (default 5)"},
      {"omega_points", "number of uniform frequency points from 0 (default 1001)"},
      {"sweep_ratios", "comma list of gamma_c/gamma values for sweep-coupling"},
      {"pump_start", "first eps/eps_th of sweep-pump (default 1.01)"},
      {"pump_stop", "last eps/eps_th of sweep-pump (default 1.5)"},
      {"pump_step", "eps/eps_th step of sweep-pump (default 0.005)"},
      {"dump_eps", "comma list of eps/eps_th values whose full traces sweep-pump dumps"},
      {"scale", "gamma multiplier used by scaling-check (default 2)"},
      {"output_dir", "directory for result files (default: print to stdout)"},
      {"format", "csv | json | both (default both)"},
      {"gain_mode", "per_omega | global (default per_omega)"},
  };
  return keys;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, const std::string& key, int line) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(key, line, "expected a finite number, got '" + std::string(text) + "'");
  return v;
}

inline int parse_int(std::string_view text, const std::string& key, int line) {
  text = trim(text);
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, line, "expected an integer");
  return v;
}

inline std::vector<double> parse_list(std::string_view text, const std::string& key, int line) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma - start), key, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void require(bool ok, const std::string& key, int line, const std::string& message) {
  if (!ok) throw ConfigError(key, line, message);
}

}  // namespace detail

/// Applies one `key = value` setting (also used for command-line overrides,
/// with line = 0).
inline void apply_setting(RunConfig& cfg, const std::string& key, std::string_view value,
                          int line = 0) {
  using detail::parse_double;
  using detail::require;
  auto physical = [&]() -> PhysicalParams& {
    if (!cfg.physical) cfg.physical = PhysicalParams{};
    return *cfg.physical;
  };
  auto positive = [&](double v) {
    require(v > 0.0, key, line, "must be positive");
    return v;
  };

  if (key == "gamma") cfg.gamma = positive(parse_double(value, key, line));
  else if (key == "g") cfg.g = positive(parse_double(value, key, line));
  else if (key == "gamma_c_ratio") {
    const double v = parse_double(value, key, line);
    require(v >= 0.0 && v <= 1.0, key, line, "must lie in [0, 1]");
    cfg.gamma_c_ratio = v;
  } else if (key == "eps_ratio") {
    const double v = parse_double(value, key, line);
    require(v >= 0.0, key, line, "must be non-negative");
    require(!cfg.epsilon, key, line, "give exactly one of eps_ratio and epsilon");
    cfg.eps_ratio = v;
  } else if (key == "epsilon") {
    const double v = parse_double(value, key, line);
    require(v >= 0.0, key, line, "must be non-negative");
    require(!cfg.eps_ratio, key, line, "give exactly one of eps_ratio and epsilon");
    cfg.epsilon = v;
  } else if (key == "n0") physical().n0 = positive(parse_double(value, key, line));
  else if (key == "n2") physical().n2 = positive(parse_double(value, key, line));
  else if (key == "lambda0") {
    const double v = parse_double(value, key, line);
    require(v > 1e-7 && v < 1e-5, key, line, "must lie in (1e-7, 1e-5) m");
    physical().lambda0 = v;
  } else if (key == "mode_volume") physical().mode_volume = positive(parse_double(value, key, line));
  else if (key == "radius") physical().radius = positive(parse_double(value, key, line));
  else if (key == "q_factor") physical().q_factor = positive(parse_double(value, key, line));
  else if (key == "omega_max") cfg.omega_max = positive(parse_double(value, key, line));
  else if (key == "omega_points") {
    const int v = detail::parse_int(value, key, line);
    require(v >= 1, key, line, "must be at least 1");
    cfg.omega_points = v;
  } else if (key == "sweep_ratios") {
    auto v = detail::parse_list(value, key, line);
    require(!v.empty(), key, line, "needs at least one value");
    for (double r : v) require(r >= 0.0 && r <= 1.0, key, line, "values must lie in [0, 1]");
    cfg.sweep_ratios = std::move(v);
  } else if (key == "pump_start" || key == "pump_stop") {
    const double v = parse_double(value, key, line);
    require(v > 1.0 && v <= 2.0, key, line, "must lie in (1, 2]");
    (key == "pump_start" ? cfg.pump_start : cfg.pump_stop) = v;
  } else if (key == "pump_step") cfg.pump_step = positive(parse_double(value, key, line));
  else if (key == "dump_eps") {
    auto v = detail::parse_list(value, key, line);
    for (double e : v) require(e > 1.0 && e <= 2.0, key, line, "values must lie in (1, 2]");
    cfg.dump_eps = std::move(v);
  } else if (key == "scale") cfg.scale = positive(parse_double(value, key, line));
  else if (key == "output_dir") cfg.output_dir = std::string(detail::trim(value));
  else if (key == "format") {
    const auto v = detail::trim(value);
    if (v == "csv") cfg.format = OutputFormat::csv;
    else if (v == "json") cfg.format = OutputFormat::json;
    else if (v == "both") cfg.format = OutputFormat::both;
    else throw ConfigError(key, line, "must be csv, json or both");
  } else if (key == "gain_mode") {
    const auto v = detail::trim(value);
    if (v == "per_omega") cfg.gain_mode = GainMode::per_omega;
    else if (v == "global") cfg.gain_mode = GainMode::global;
    else throw ConfigError(key, line, "must be per_omega or global");
  } else {
    throw ConfigError(key, line, "unknown key");
  }
}

/// Checks relations between keys once all settings are applied.
inline void finalize_config(const RunConfig& cfg) {
  detail::require(cfg.pump_stop >= cfg.pump_start, "pump_stop", 0, "must not be below pump_start");
  if (cfg.physical) {
    try {
      cfg.physical->validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("physical", 0, e.what());
    }
  }
  try {
    cfg.resolved_rates().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("rates", 0, e.what());
  }
}

inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(line), line_no, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(key, line_no, "missing key");
    apply_setting(cfg, key, line.substr(eq + 1), line_no);
  }
  finalize_config(cfg);
  return cfg;
}

/// Canonical text form; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  auto list = [&](const std::vector<double>& v) {
    std::ostringstream l;
    l.precision(17);
    for (std::size_t k = 0; k < v.size(); ++k) l << (k ? ", " : "") << v[k];
    return l.str();
  };
  os << "gamma = " << cfg.gamma << '\n';
  if (cfg.g) os << "g = " << *cfg.g << '\n';
  os << "gamma_c_ratio = " << cfg.gamma_c_ratio << '\n';
  if (cfg.epsilon) os << "epsilon = " << *cfg.epsilon << '\n';
  else os << "eps_ratio = " << cfg.eps_ratio.value_or(RunConfig::kDefaultEpsRatio) << '\n';
  if (cfg.physical) {
    const auto& p = *cfg.physical;
    os << "n0 = " << p.n0 << "\nn2 = " << p.n2 << "\nlambda0 = " << p.lambda0
       << "\nmode_volume = " << p.mode_volume << "\nradius = " << p.radius
       << "\nq_factor = " << p.q_factor << '\n';
  }
  os << "omega_max = " << cfg.omega_max << '\n';
  os << "omega_points = " << cfg.omega_points << '\n';
  os << "sweep_ratios = " << list(cfg.sweep_ratios) << '\n';
  os << "pump_start = " << cfg.pump_start << '\n';
  os << "pump_stop = " << cfg.pump_stop << '\n';
  os << "pump_step = " << cfg.pump_step << '\n';
  if (!cfg.dump_eps.empty()) os << "dump_eps = " << list(cfg.dump_eps) << '\n';
  os << "scale = " << cfg.scale << '\n';
  if (!cfg.output_dir.empty()) os << "output_dir = " << cfg.output_dir << '\n';
  os << "format = "
     << (cfg.format == OutputFormat::csv ? "csv" : cfg.format == OutputFormat::json ? "json" : "both")
     << '\n';
  os << "gain_mode = " << (cfg.gain_mode == GainMode::global ? "global" : "per_omega") << '\n';
  return os.str();
}

}  // namespace kerrcomb
