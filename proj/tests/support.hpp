#pragma once

#include <kerrcomb/experiments.hpp>
#include <kerrcomb/linearize.hpp>
#include <kerrcomb/model.hpp>
#include <kerrcomb/oracle.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/vlf.hpp>

#include <Eigen/LU>

#include <array>
#include <random>
#include <vector>

namespace kerrcomb::testing {

inline constexpr double kGamma = 4.02e5;
inline constexpr double kG = 2.21e-4;
inline constexpr double kEpsRatio = 1.15;
inline constexpr std::array<double, 4> kReferenceRatios{0.34, 0.57, 0.8, 1.0};

inline RateParams reference_point(double ratio) {
  return RateParams::from_ratios(kGamma, ratio, kG, kEpsRatio);
}

inline RateParams headline() { return reference_point(1.0); }

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

/// Random rates with gamma over three decades and g over two.
inline RateParams random_rates(std::mt19937_64& gen, double eps_lo, double eps_hi,
                               double ratio_lo = 0.0, double ratio_hi = 1.0) {
  const double gamma = std::pow(10.0, uniform(gen, 4.0, 7.0));
  const double g = std::pow(10.0, uniform(gen, -5.0, -3.0));
  return RateParams::from_ratios(gamma, uniform(gen, ratio_lo, ratio_hi), g,
                                 uniform(gen, eps_lo, eps_hi));
}

/// Newton iteration on the real symmetric reduction (A_p, A_a, A_b) of the
/// drift vector, with a finite-difference Jacobian. Independent of the
/// closed-form steady state.
inline std::array<double, 3> newton_steady_state(const RateParams& r, std::array<double, 3> x) {
  auto residual = [&](const std::array<double, 3>& v) {
    SteadyState s{v[0], v[1], v[2], true};
    const FieldVector f = drift_vector(r, s.embed());
    return Eigen::Vector3d(f(0).real(), f(1).real(), f(3).real());
  };
  for (int it = 0; it < 200; ++it) {
    const Eigen::Vector3d f = residual(x);
    Eigen::Matrix3d jac;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      jac.col(k) = (residual(xp) - residual(xm)) / (2 * h);
    }
    const Eigen::Vector3d step = jac.fullPivLu().solve(-f);
    for (int k = 0; k < 3; ++k) x[k] += step(k);
    if (step.cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, x[0])) break;
  }
  return x;
}

inline std::vector<double> scaled(std::span<const double> ratios, double gamma) {
  std::vector<double> out(ratios.begin(), ratios.end());
  for (double& v : out) v *= gamma;
  return out;
}

}  // namespace kerrcomb::testing
