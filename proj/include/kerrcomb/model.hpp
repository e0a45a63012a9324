#pragma once

// Parameters, coupling constant, pump threshold and classical steady states
// of the five-mode Kerr comb (s2, s1, p, i1, i2) with identical damping in
// every mode.

#include <kerrcomb/drift.hpp>
#include <kerrcomb/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kerrcomb {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double c = 299792458.0;         // m / s
}  // namespace constants

/// Device-level inputs. Only n0, n2, lambda0 and mode_volume enter the
/// coupling constant; radius and q_factor are carried for reporting.
struct PhysicalParams {
  double n0 = 1.43;
  double n2 = 3.2e-20;         // m^2 / W
  double lambda0 = 1560.5e-9;  // m
  double mode_volume = 6.6e-12;  // m^3
  double radius = 2.5e-3;      // m
  double q_factor = 3e9;

  double omega0() const { return 2.0 * std::numbers::pi * constants::c / lambda0; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string("PhysicalParams.") + name + " must be positive and finite");
    };
    positive(n0, "n0");
    positive(n2, "n2");
    positive(lambda0, "lambda0");
    positive(mode_volume, "mode_volume");
    positive(radius, "radius");
    positive(q_factor, "q_factor");
    if (!(lambda0 > 1e-7 && lambda0 < 1e-5))
      throw InvalidArgument("PhysicalParams.lambda0 outside the (1e-7, 1e-5) m window");
  }
};

/// Dynamical rates, all in s^-1. Every mode shares gamma, gamma0, gammac.
struct RateParams {
  double gamma = 0.0;
  double gamma0 = 0.0;
  double gammac = 0.0;
  double g = 0.0;
  double epsilon = 0.0;

  /// Builds rates from the total damping, the out-coupling fraction
  /// gammac/gamma and the pump expressed relative to threshold.
  static RateParams from_ratios(double gamma, double coupling_ratio, double g,
                                double eps_over_threshold);

  double coupling_ratio() const { return gammac / gamma; }

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("RateParams.gamma must be positive");
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("RateParams.g must be positive");
    if (!(gammac >= 0.0 && gammac <= gamma)) throw InvalidArgument("RateParams.gammac must lie in [0, gamma]");
    if (!(gamma0 >= 0.0)) throw InvalidArgument("RateParams.gamma0 must be non-negative");
    if (std::abs(gamma0 + gammac - gamma) > 4.0 * std::numeric_limits<double>::epsilon() * gamma)
      throw InvalidArgument("RateParams requires gamma == gamma0 + gammac");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("RateParams.epsilon must be non-negative");
  }
};

/// g = n2 hbar w0^2 c / (V n0^2), w0 = 2 pi c / lambda0. Pure formula: does
/// not enforce PhysicalParams invariants (so n2 = 0 yields 0).
inline double coupling_constant(const PhysicalParams& phys) {
  const double w0 = phys.omega0();
  return phys.n2 * constants::hbar * w0 * w0 * constants::c /
         (phys.mode_volume * phys.n0 * phys.n0);
}

inline double pump_threshold(double gamma, double g) { return gamma * std::sqrt(gamma / g); }

inline double pump_threshold(const RateParams& rates) { return pump_threshold(rates.gamma, rates.g); }

inline RateParams RateParams::from_ratios(double gamma, double coupling_ratio, double g,
                                          double eps_over_threshold) {
  RateParams r;
  r.gamma = gamma;
  r.gammac = coupling_ratio * gamma;
  r.gamma0 = gamma - r.gammac;
  r.g = g;
  r.epsilon = eps_over_threshold * pump_threshold(gamma, g);
  return r;
}

/// Classical amplitudes; real and non-negative since epsilon is taken real
/// and positive. a_a = A_s1 = A_i1, a_b = A_s2 = A_i2.
struct SteadyState {
  double a_p = 0.0;
  double a_a = 0.0;
  double a_b = 0.0;
  bool above_threshold = false;

  FieldVector embed() const {
    FieldVector x;
    x << a_p, a_a, a_a, a_b, a_b, a_p, a_a, a_a, a_b, a_b;
    return x;
  }
};

inline SteadyState steady_state(const RateParams& rates) {
  rates.validate();
  const double gamma = rates.gamma;
  const double g = rates.g;
  const double eps = rates.epsilon;
  SteadyState ss;
  if (eps < pump_threshold(rates)) {
    ss.a_p = eps / gamma;
    return ss;
  }
  ss.above_threshold = true;
  ss.a_p = (eps + std::sqrt(eps * eps + 3.0 * gamma * gamma * gamma / g)) / (3.0 * gamma);
  // Rounding can push the bracket a hair below zero exactly at threshold.
  const double bracket = std::max(0.0, 1.0 - gamma / (g * ss.a_p * ss.a_p));
  ss.a_a = std::sqrt(gamma / (4.0 * g) * bracket);
  ss.a_b = 2.0 * g * ss.a_p * ss.a_a * ss.a_a / gamma;
  return ss;
}

inline FieldVector drift_vector(const RateParams& rates, const FieldVector& x) {
  return drift_vector(rates.gamma, rates.g, rates.epsilon, x);
}

/// max |F(embed(ss))| / (gamma * max(A_p, 1)).
inline double steady_state_residual(const RateParams& rates, const SteadyState& ss) {
  const FieldVector f = drift_vector(rates, ss.embed());
  return max_abs(f) / (rates.gamma * std::max(ss.a_p, 1.0));
}

inline std::string describe(const RateParams& r) {
  std::ostringstream os;
  os.precision(6);
  os << "gamma=" << r.gamma << " s^-1, gammac/gamma=" << r.coupling_ratio() << ", g=" << r.g
     << " s^-1, eps/eps_th=" << r.epsilon / pump_threshold(r);
  return os.str();
}

}  // namespace kerrcomb
