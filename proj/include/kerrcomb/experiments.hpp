#pragma once

// Parameter sweeps over the out-coupling ratio and the pump level, trace
// shape analysis, and the w/gamma scaling check.

#include <kerrcomb/detail/parallel.hpp>
#include <kerrcomb/linearize.hpp>
#include <kerrcomb/model.hpp>
#include <kerrcomb/oracle.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/vlf.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kerrcomb {

struct SweepPoint {
  double parameter = 0.0;
  RateParams rates;
  SteadyState steady;
  StabilityReport stability;
  double residual = 0.0;
  bool computed = false;  // false: unstable operating point, kept as a gap
  VlfScan scan;
};

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis;
  std::vector<double> omega_over_gamma;
  GainMode gain_mode = GainMode::per_omega;
  std::vector<SweepPoint> points;
  // min_S1..min_S4 and argmin_w_S1..argmin_w_S4 (in w/gamma); NaN at gaps.
  std::map<std::string, std::vector<double>> traces;
};

inline constexpr double kSymmetryTolerance = 1e-8;

namespace detail {

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline void check_symmetry(const VlfScan& scan, const RateParams& rates) {
  for (const auto& r : scan.reports) {
    if (!r.valid) continue;
    const double scale = std::max({r.s_values[0], r.s_values[1], r.s_values[2], r.s_values[3]});
    if (std::abs(r.s_values[0] - r.s_values[1]) > kSymmetryTolerance * scale ||
        std::abs(r.s_values[2] - r.s_values[3]) > kSymmetryTolerance * scale)
      throw ModelError("signal/idler symmetry broken at " + describe(rates));
  }
}

inline SweepPoint evaluate_point(double parameter, const RateParams& rates,
                                 std::span<const double> omega_ratios, GainMode mode) {
  SweepPoint pt;
  pt.parameter = parameter;
  pt.rates = rates;
  const LinearModel lm = linearize(rates);
  pt.steady = lm.steady;
  pt.stability = lm.stability;
  pt.residual = steady_state_residual(rates, lm.steady);
  if (pt.residual > 1e-8)
    throw ModelError("steady state residual " + std::to_string(pt.residual) + " at " + describe(rates));
  if (!lm.stability.stable) return pt;
  std::vector<double> omegas(omega_ratios.size());
  for (std::size_t k = 0; k < omegas.size(); ++k) omegas[k] = omega_ratios[k] * rates.gamma;
  pt.scan = five_partite_verdict(lm, omegas, mode);
  check_symmetry(pt.scan, rates);
  pt.computed = true;
  return pt;
}

inline SweepResult run_sweep(std::string axis_name, std::span<const double> axis,
                             std::span<const double> omega_ratios, GainMode mode,
                             const std::function<RateParams(double)>& make_rates) {
  SweepResult out;
  out.axis_name = std::move(axis_name);
  out.axis.assign(axis.begin(), axis.end());
  out.omega_over_gamma.assign(omega_ratios.begin(), omega_ratios.end());
  out.gain_mode = mode;
  out.points.resize(axis.size());
  std::vector<RateParams> rates(axis.size());
  for (std::size_t k = 0; k < axis.size(); ++k) rates[k] = make_rates(axis[k]);
  parallel_for(axis.size(), [&](std::size_t k) {
    out.points[k] = evaluate_point(axis[k], rates[k], omega_ratios, mode);
  });
  for (int s = 0; s < 4; ++s) {
    auto& mins = out.traces["min_S" + std::to_string(s + 1)];
    auto& where = out.traces["argmin_w_S" + std::to_string(s + 1)];
    for (const auto& pt : out.points) {
      const bool ok = pt.computed && pt.scan.summary.gaps < pt.scan.reports.size();
      mins.push_back(ok ? pt.scan.summary.min_values[s] : nan());
      where.push_back(ok ? pt.scan.summary.argmin_omega[s] / pt.rates.gamma : nan());
    }
  }
  return out;
}

}  // namespace detail

/// Optimized S(1)..S(4) versus w/gamma for each out-coupling ratio
/// gammac/gamma, at the pump and total damping of `base`.
inline SweepResult coupling_sweep(const RateParams& base, std::span<const double> ratios,
                                  std::span<const double> omega_ratios,
                                  GainMode mode = GainMode::per_omega) {
  base.validate();
  for (double r : ratios)
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("coupling_sweep: ratios must lie in [0, 1]");
  return detail::run_sweep("gamma_c_ratio", ratios, omega_ratios, mode, [&](double r) {
    RateParams p = base;
    p.gammac = r * base.gamma;
    p.gamma0 = base.gamma - p.gammac;
    return p;
  });
}

/// Minimum-over-w witnesses versus eps/eps_th at the damping of `base`.
inline SweepResult pump_sweep(const RateParams& base, std::span<const double> eps_over_th,
                              std::span<const double> omega_ratios,
                              GainMode mode = GainMode::per_omega) {
  base.validate();
  for (double e : eps_over_th)
    if (!(e > 1.0 && e <= 2.0)) throw InvalidArgument("pump_sweep: eps/eps_th values must lie in (1, 2]");
  const double threshold = pump_threshold(base);
  return detail::run_sweep("eps_over_threshold", eps_over_th, omega_ratios, mode, [&](double e) {
    RateParams p = base;
    p.epsilon = e * threshold;
    return p;
  });
}

/// Uniform list lo, lo + step, ... <= hi (inclusive up to rounding).
inline std::vector<double> linear_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("linear_range: need step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + step * static_cast<double>(k));
  return out;
}

struct TraceShape {
  std::size_t argmin_index = 0;
  double argmin_parameter = 0.0;
  double min_value = 0.0;
  bool single_dip = false;  // non-increasing up to an interior argmin, non-decreasing after
  std::vector<std::size_t> turning_points;  // interior local extrema
};

inline TraceShape analyze_trace(std::span<const double> axis, std::span<const double> values) {
  if (axis.size() != values.size() || values.empty())
    throw InvalidArgument("analyze_trace: axis and values must be non-empty and equally long");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("analyze_trace: trace contains gaps");
  TraceShape shape;
  const std::size_t n = values.size();
  for (std::size_t k = 1; k < n; ++k)
    if (values[k] < values[shape.argmin_index]) shape.argmin_index = k;
  shape.argmin_parameter = axis[shape.argmin_index];
  shape.min_value = values[shape.argmin_index];

  auto slack = [&](std::size_t k) { return 1e-12 * std::abs(values[k]); };
  bool ok = shape.argmin_index > 0 && shape.argmin_index + 1 < n;
  for (std::size_t k = 0; k + 1 <= shape.argmin_index && ok; ++k)
    ok = values[k + 1] <= values[k] + slack(k);
  for (std::size_t k = shape.argmin_index; k + 1 < n && ok; ++k)
    ok = values[k + 1] + slack(k) >= values[k];
  shape.single_dip = ok;

  int last_sign = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = values[k + 1] - values[k];
    const int sign = d > slack(k) ? 1 : (d < -slack(k) ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) shape.turning_points.push_back(k);
      last_sign = sign;
    }
  }
  return shape;
}

/// A jump of the minimizing frequency between neighbouring sweep points.
struct RegimeChange {
  double parameter_before = 0.0;
  double parameter_after = 0.0;
  double omega_before = 0.0;  // w/gamma
  double omega_after = 0.0;
};

inline std::vector<RegimeChange> regime_changes(std::span<const double> axis,
                                                std::span<const double> argmin_omega,
                                                double jump_threshold = 0.5) {
  std::vector<RegimeChange> out;
  for (std::size_t k = 0; k + 1 < axis.size() && k + 1 < argmin_omega.size(); ++k) {
    const double a = argmin_omega[k], b = argmin_omega[k + 1];
    if (std::isfinite(a) && std::isfinite(b) && std::abs(b - a) > jump_threshold)
      out.push_back({axis[k], axis[k + 1], a, b});
  }
  return out;
}

/// Compares optimized S(1)..S(4) on matched w/gamma grids between `base`
/// and a copy whose gamma is multiplied by `scale` (g fixed). With
/// preserve_ratio the pump is rescaled to hold eps/eps_th; otherwise eps is
/// held fixed in absolute terms.
inline OracleReport scaling_check(const RateParams& base, double scale,
                                  std::span<const double> omega_ratios, bool preserve_ratio = true,
                                  double tolerance = 1e-8) {
  if (!(scale > 0.0)) throw InvalidArgument("scaling_check: scale must be positive");
  base.validate();
  RateParams scaled = base;
  scaled.gamma = scale * base.gamma;
  scaled.gammac = base.coupling_ratio() * scaled.gamma;
  scaled.gamma0 = scaled.gamma - scaled.gammac;
  if (preserve_ratio) scaled.epsilon = base.epsilon / pump_threshold(base) * pump_threshold(scaled);

  OracleReport rep;
  rep.name = preserve_ratio ? "scaling_law" : "scaling_law_fixed_epsilon";
  rep.tolerance = tolerance;
  const auto a = detail::evaluate_point(1.0, base, omega_ratios, GainMode::per_omega);
  const auto b = detail::evaluate_point(scale, scaled, omega_ratios, GainMode::per_omega);
  if (!a.computed || !b.computed) {
    rep.passed = false;
    rep.max_abs_error = rep.max_rel_error = std::numeric_limits<double>::infinity();
    rep.details = "operating point unstable";
    return rep;
  }
  std::size_t compared = 0, mismatched_gaps = 0;
  for (std::size_t k = 0; k < a.scan.reports.size(); ++k) {
    const auto& ra = a.scan.reports[k];
    const auto& rb = b.scan.reports[k];
    if (ra.valid != rb.valid) {
      ++mismatched_gaps;
      continue;
    }
    if (!ra.valid) continue;
    for (int s = 0; s < 4; ++s) {
      const double err = std::abs(ra.s_values[s] - rb.s_values[s]);
      rep.max_abs_error = std::max(rep.max_abs_error, err);
      rep.max_rel_error = std::max(rep.max_rel_error, err / std::abs(ra.s_values[s]));
    }
    ++compared;
  }
  rep.passed = mismatched_gaps == 0 && compared > 0 && rep.max_rel_error <= tolerance;
  rep.details = std::to_string(compared) + " frequencies compared, " +
                std::to_string(mismatched_gaps) + " gap mismatches, scaled eps/eps_th = " +
                std::to_string(scaled.epsilon / pump_threshold(scaled));
  return rep;
}

}  // namespace kerrcomb
