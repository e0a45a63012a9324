#pragma once

// CSV tables and JSON sidecars for every result type, plus atomic writes.

#include <kerrcomb/experiments.hpp>
#include <kerrcomb/linearize.hpp>
#include <kerrcomb/model.hpp>
#include <kerrcomb/oracle.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/vlf.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace kerrcomb {

inline constexpr const char* kToolName = "kerrcomb";
inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits; NaN and infinities spelled nan / inf / -inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

namespace detail {

inline std::string gain_header() {
  std::string out;
  for (Witness w : kAllWitnesses)
    for (Mode m : free_modes(w))
      out += ",g" + std::to_string(static_cast<int>(w)) + "_" + std::string(mode_name(m));
  return out;
}

inline void write_report_fields(std::ostream& os, const VlfReport& r, double gamma) {
  os << format_number(r.omega / gamma);
  for (double s : r.s_values) os << ',' << format_number(s);
  for (Witness w : kAllWitnesses) {
    const auto& g = r.gains[witness_slot(w)];
    for (Mode m : free_modes(w)) {
      const auto it = g.values.find(m);
      os << ',' << format_number(it == g.values.end() ? std::nan("") : it->second);
    }
  }
}

// nlohmann serializes NaN as null, which is what the sidecar wants for gaps.
inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline std::string vlf_csv_header() {
  return "omega_over_gamma,S1,S2,S3,S4" + detail::gain_header();
}

inline void write_vlf_csv(std::ostream& os, const VlfScan& scan, double gamma) {
  os << vlf_csv_header() << '\n';
  for (const auto& r : scan.reports) {
    detail::write_report_fields(os, r, gamma);
    os << '\n';
  }
}

inline std::string sweep_csv_header(const std::string& axis_name) {
  return axis_name + ",omega_over_gamma,S1,S2,S3,S4" + detail::gain_header();
}

/// One row per (parameter, w) pair. Unstable sweep points emit a single row
/// with nan witnesses so that they remain visible.
inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << sweep_csv_header(sweep.axis_name) << '\n';
  for (const auto& pt : sweep.points) {
    if (!pt.computed) {
      os << format_number(pt.parameter) << ",nan,nan,nan,nan,nan";
      for (int k = 0; k < 12; ++k) os << ",nan";
      os << '\n';
      continue;
    }
    for (const auto& r : pt.scan.reports) {
      os << format_number(pt.parameter) << ',';
      detail::write_report_fields(os, r, pt.rates.gamma);
      os << '\n';
    }
  }
}

/// Per-parameter summary table: minima over w and their locations.
inline void write_sweep_summary_csv(std::ostream& os, const SweepResult& sweep) {
  os << sweep.axis_name
     << ",stable,min_S1,min_S2,min_S3,min_S4,argmin_w_S1,argmin_w_S2,argmin_w_S3,argmin_w_S4\n";
  for (std::size_t k = 0; k < sweep.points.size(); ++k) {
    os << format_number(sweep.axis[k]) << ',' << (sweep.points[k].computed ? 1 : 0);
    for (int s = 1; s <= 4; ++s) os << ',' << format_number(sweep.traces.at("min_S" + std::to_string(s))[k]);
    for (int s = 1; s <= 4; ++s) os << ',' << format_number(sweep.traces.at("argmin_w_S" + std::to_string(s))[k]);
    os << '\n';
  }
}

inline std::string spectrum_csv_header() {
  std::string out = "omega_over_gamma";
  for (const char* q : {"X", "Y"})
    for (Mode m : kAllModes) out += std::string(",V_") + q + "_" + std::string(mode_name(m));
  return out;
}

/// Extracavity single-quadrature variances per frequency; rows where the
/// spectrum is singular are written with nan.
inline void write_spectrum_csv(std::ostream& os, const LinearModel& lm,
                               std::span<const double> omega_ratios) {
  os << spectrum_csv_header() << '\n';
  for (double r : omega_ratios) {
    os << format_number(r);
    try {
      const auto qs = quadrature_spectrum_at(lm, r * lm.rates.gamma);
      for (int k = 0; k < kDim; ++k) {
        CombinationCoeffs c;
        if (k < kModes) c.cx[k] = 1.0; else c.cy[k - kModes] = 1.0;
        os << ',' << format_number(output_variance(qs, c, lm.rates.gammac));
      }
    } catch (const SingularMatrixError&) {
      for (int k = 0; k < kDim; ++k) os << ",nan";
    }
    os << '\n';
  }
}

inline void write_oracle_csv(std::ostream& os, const std::vector<OracleReport>& reports) {
  os << "name,max_abs_error,max_rel_error,tolerance,passed,details\n";
  for (const auto& r : reports)
    os << r.name << ',' << format_number(r.max_abs_error) << ',' << format_number(r.max_rel_error)
       << ',' << format_number(r.tolerance) << ',' << (r.passed ? "true" : "false") << ",\""
       << r.details << "\"\n";
}

inline nlohmann::json to_json(const RateParams& r) {
  const double th = pump_threshold(r);
  return {{"gamma", r.gamma},         {"gamma0", r.gamma0},
          {"gamma_c", r.gammac},      {"g", r.g},
          {"epsilon", r.epsilon},     {"gamma_c_ratio", r.coupling_ratio()},
          {"eps_over_threshold", r.epsilon / th}, {"epsilon_threshold", th}};
}

inline nlohmann::json to_json(const SteadyState& s) {
  return {{"A_p", s.a_p}, {"A_a", s.a_a}, {"A_b", s.a_b}, {"above_threshold", s.above_threshold}};
}

inline nlohmann::json to_json(const StabilityReport& s) {
  nlohmann::json eig = nlohmann::json::array();
  for (int k = 0; k < kDim; ++k) eig.push_back({s.eigenvalues(k).real(), s.eigenvalues(k).imag()});
  return {{"max_real_part", s.max_real_part}, {"tolerance", s.tolerance},
          {"neutral_modes", s.neutral_modes}, {"stable", s.stable}, {"eigenvalues", eig}};
}

inline nlohmann::json to_json(const PhysicalParams& p) {
  return {{"n0", p.n0},           {"n2", p.n2},         {"lambda0", p.lambda0},
          {"mode_volume", p.mode_volume}, {"radius", p.radius}, {"q_factor", p.q_factor},
          {"coupling_constant", coupling_constant(p)}};
}

inline nlohmann::json to_json(const VerdictSummary& s) {
  nlohmann::json mins = nlohmann::json::array(), where = nlohmann::json::array();
  for (int k = 0; k < 4; ++k) {
    mins.push_back(detail::number_or_null(s.min_values[k]));
    where.push_back(detail::number_or_null(s.argmin_omega[k]));
  }
  return {{"min_values", mins}, {"argmin_omega", where}, {"five_partite", s.five_partite},
          {"five_partite_points", s.five_partite_points}, {"gaps", s.gaps}};
}

inline nlohmann::json to_json(const OracleReport& r) {
  return {{"name", r.name},
          {"max_abs_error", detail::number_or_null(r.max_abs_error)},
          {"max_rel_error", detail::number_or_null(r.max_rel_error)},
          {"tolerance", r.tolerance},
          {"passed", r.passed},
          {"details", r.details}};
}

/// Self-describing header shared by every sidecar.
inline nlohmann::json sidecar(const std::string& command, const LinearModel& lm) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"rates", to_json(lm.rates)},
          {"epsilon_threshold", pump_threshold(lm.rates)},
          {"steady_state", to_json(lm.steady)},
          {"stability", to_json(lm.stability)}};
}

/// Writes via a temporary sibling and rename so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace kerrcomb
