#pragma once

// Brute-force validators for each analytic shortcut in the library. They
// only reuse the public evaluation functions (drift_vector, vlf_value,
// intracavity_spectrum), never the closed forms they check.

#include <kerrcomb/detail/parallel.hpp>
#include <kerrcomb/linearize.hpp>
#include <kerrcomb/model.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/vlf.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace kerrcomb {

struct OracleReport {
  std::string name;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string details;
};

namespace detail {

template <typename A, typename B>
OracleReport compare_entrywise(std::string name, const Eigen::MatrixBase<A>& value,
                               const Eigen::MatrixBase<B>& reference, double tolerance,
                               double scale_floor = 0.0) {
  OracleReport rep;
  rep.name = std::move(name);
  rep.tolerance = tolerance;
  Eigen::Index wr = 0, wc = 0;
  const auto diff = (value - reference).cwiseAbs().eval();
  rep.max_abs_error = diff.size() ? diff.maxCoeff(&wr, &wc) : 0.0;
  const double scale = std::max(max_abs(reference), scale_floor);
  rep.max_rel_error = scale > 0.0 ? rep.max_abs_error / scale : rep.max_abs_error;
  rep.passed = rep.max_rel_error <= tolerance;
  std::ostringstream os;
  os.precision(6);
  os << "worst entry (" << wr << "," << wc << "), reference scale " << scale;
  rep.details = os.str();
  return rep;
}

}  // namespace detail

/// Central finite differences of drift_vector, one variable at a time,
/// with step h = step_factor * max(1, A_p).
inline Matrix10c numeric_jacobian(const RateParams& rates, const SteadyState& ss,
                                  double step_factor = 1e-6) {
  const FieldVector x0 = ss.embed();
  const double h = step_factor * std::max(1.0, ss.a_p);
  Matrix10c jac;
  for (int k = 0; k < kDim; ++k) {
    FieldVector up = x0, down = x0;
    up(k) += h;
    down(k) -= h;
    jac.col(k) = (drift_vector(rates, up) - drift_vector(rates, down)) / (2.0 * h);
  }
  return jac;
}

/// Stationary covariance V of d(dx) = M dx dt + B dW, i.e. the solution of
/// M V + V M^T + D = 0, by vectorizing to (I (x) M + M (x) I) vec V = -vec D.
/// Requires every eigenvalue of M to be strictly damped.
inline Matrix10c lyapunov_covariance(const Matrix10c& drift, const Matrix10c& diffusion,
                                     double rate_scale = 0.0) {
  const auto stab = stability(drift, rate_scale);
  if (!stab.strictly_stable())
    throw UnstableModelError("lyapunov_covariance: drift matrix is not strictly stable (" +
                             std::to_string(stab.neutral_modes) + " neutral modes)");
  constexpr int n = kDim;
  const Matrix10c id = Matrix10c::Identity();
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += id(i, j) * drift;  // I (x) M
      k.block(i * n, j * n, n, n) += drift(i, j) * id;  // M (x) I
    }
  Eigen::VectorXcd rhs(n * n);
  for (int j = 0; j < n; ++j) rhs.segment(j * n, n) = -diffusion.col(j);
  const Eigen::VectorXcd sol = k.fullPivLu().solve(rhs);
  Matrix10c v;
  for (int j = 0; j < n; ++j) v.col(j) = sol.segment(j * n, n);
  return v;
}

/// Trapezoidal (1 / 2 pi) * integral of S(w) over [-half_width, half_width].
inline Matrix10c spectrum_integral(const LinearModel& lm, double half_width, int points) {
  if (points < 1001) throw InvalidArgument("spectrum_integral: needs at least 1001 points");
  if (!(half_width > 0.0)) throw InvalidArgument("spectrum_integral: half_width must be positive");
  const double h = 2.0 * half_width / (points - 1);
  // Fixed block partition keeps the summation order independent of threads.
  constexpr std::size_t kBlocks = 64;
  std::vector<Matrix10c> partial(kBlocks, Matrix10c::Zero());
  const std::size_t n = static_cast<std::size_t>(points);
  const std::size_t per = (n + kBlocks - 1) / kBlocks;
  detail::parallel_for(kBlocks, [&](std::size_t b) {
    for (std::size_t k = b * per; k < std::min(n, (b + 1) * per); ++k) {
      const double w = -half_width + h * static_cast<double>(k);
      const double weight = (k == 0 || k == n - 1) ? 0.5 : 1.0;
      partial[b] += weight * intracavity_spectrum(lm, w).s;
    }
  });
  Matrix10c total = Matrix10c::Zero();
  for (const auto& p : partial) total += p;
  return total * (h / (2.0 * std::numbers::pi));
}

/// Exhaustive search of the free gains on a steps^3 grid over
/// [-range, range]^3, then coordinate descent (three-point parabolic line
/// search along each axis, swept until no further decrease).
inline GainOptimum grid_search_gains(const QuadratureSpectrum& qs, Witness w, double gammac,
                                     double range, int steps, bool refine = true) {
  if (steps < 1) throw InvalidArgument("grid_search_gains: steps must be positive");
  const auto modes = free_modes(w);
  auto eval = [&](const std::array<double, 3>& g) {
    VlfGains gains{w, {}};
    for (int a = 0; a < 3; ++a) gains.values[modes[a]] = g[a];
    return vlf_value(qs, w, gains, gammac);
  };
  auto coord = [&](int i) { return steps == 1 ? 0.0 : -range + 2.0 * range * i / (steps - 1); };

  std::array<double, 3> best{0.0, 0.0, 0.0};
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j)
      for (int k = 0; k < steps; ++k) {
        const std::array<double, 3> g{coord(i), coord(j), coord(k)};
        const double v = eval(g);
        if (v < best_value) {
          best_value = v;
          best = g;
        }
      }

  if (refine) {
    double step = steps > 1 ? 2.0 * range / (steps - 1) : std::max(range, 1.0);
    for (int sweep = 0; sweep < 200000; ++sweep) {
      const double before = best_value;
      for (int a = 0; a < 3; ++a) {
        auto lo = best, hi = best;
        lo[a] -= step;
        hi[a] += step;
        const double fl = eval(lo), fh = eval(hi), f0 = best_value;
        const double curvature = fl - 2.0 * f0 + fh;
        std::array<double, 3> cand = best;
        if (curvature > 0.0) cand[a] = best[a] + 0.5 * step * (fl - fh) / curvature;
        const double fc = curvature > 0.0 ? eval(cand) : best_value;
        for (const auto& [pt, val] : {std::pair{cand, fc}, std::pair{lo, fl}, std::pair{hi, fh}})
          if (val < best_value) {
            best_value = val;
            best = pt;
          }
      }
      if (!(before - best_value > 1e-15 * std::abs(best_value))) {
        if (step < 1e-9) break;
        step *= 0.25;
      }
    }
  }

  GainOptimum out;
  out.gains = VlfGains{w, {}};
  for (int a = 0; a < 3; ++a) out.gains.values[modes[a]] = best[a];
  out.value = best_value;
  return out;
}

/// Runs every oracle at one operating point. `omega_ratios` are w/gamma
/// values used for the frequency-resolved checks.
inline std::vector<OracleReport> validate_operating_point(const RateParams& rates,
                                                          std::span<const double> omega_ratios,
                                                          int integral_points = 40001) {
  std::vector<OracleReport> out;
  const LinearModel lm = linearize(rates);
  const double gamma = rates.gamma;

  {
    OracleReport rep;
    rep.name = "steady_state_residual";
    rep.tolerance = 1e-8;
    rep.max_rel_error = rep.max_abs_error = steady_state_residual(rates, lm.steady);
    rep.passed = rep.max_rel_error <= rep.tolerance;
    rep.details = lm.steady.above_threshold ? "above threshold" : "below threshold";
    out.push_back(rep);
  }
  out.push_back(detail::compare_entrywise("drift_matrix_vs_finite_difference", lm.drift,
                                          numeric_jacobian(rates, lm.steady), 1e-6));
  out.push_back(detail::compare_entrywise("diffusion_symmetry", lm.diffusion,
                                          lm.diffusion.transpose().eval(), 0.0));
  {
    const Matrix10c b = noise_factor(lm.diffusion);
    auto rep = detail::compare_entrywise("noise_factor_BBt", (b * b.transpose()).eval(),
                                         lm.diffusion, 1e-10, 1.0);
    rep.max_rel_error = rep.max_abs_error / (1.0 + max_abs(lm.diffusion));
    rep.passed = rep.max_rel_error <= rep.tolerance;
    out.push_back(rep);
  }
  {
    OracleReport rep;
    rep.name = "stability";
    rep.tolerance = 0.0;
    rep.max_abs_error = lm.stability.max_real_part;
    rep.max_rel_error = lm.stability.max_real_part / gamma;
    rep.passed = lm.stability.stable;
    rep.details = std::to_string(lm.stability.neutral_modes) + " neutral mode(s)";
    out.push_back(rep);
  }
  if (!lm.stability.stable) return out;

  {
    OracleReport rep;
    rep.name = "resolvent_identity";
    rep.tolerance = 1e-10;
    std::size_t checked = 0;
    for (double r : omega_ratios) {
      const double w = r * gamma;
      try {
        const SpectralMatrix sm = intracavity_spectrum(lm, w);
        // (-M + iw) S (-M^T - iw) = D
        const Matrix10c id = Matrix10c::Identity();
        const Matrix10c lhs = (-lm.drift + cd(0, w) * id) * sm.s * (-lm.drift.transpose() - cd(0, w) * id);
        const double err = max_abs(lhs - lm.diffusion);
        rep.max_abs_error = std::max(rep.max_abs_error, err);
        rep.max_rel_error = std::max(rep.max_rel_error, err / std::max(1.0, max_abs(lm.diffusion)));
        ++checked;
      } catch (const SingularMatrixError&) {
      }
    }
    rep.passed = rep.max_rel_error <= rep.tolerance;
    rep.details = std::to_string(checked) + " frequencies";
    out.push_back(rep);
  }
  {
    const LinearModel damped = deflate_neutral_modes(lm);
    const Matrix10c v = lyapunov_covariance(damped.drift, damped.diffusion, gamma);
    const Matrix10c integral = spectrum_integral(damped, 200.0 * gamma, integral_points);
    auto rep = detail::compare_entrywise("lyapunov_vs_spectrum_integral", integral, v, 1e-2);
    if (lm.stability.neutral_modes > 0) rep.details += "; neutral phase mode deflated";
    out.push_back(rep);
  }
  {
    OracleReport rep;
    rep.name = "gain_optimizer_vs_grid_search";
    rep.tolerance = 1e-6;
    std::size_t checked = 0;
    for (double r : omega_ratios) {
      if (r <= 0.0) continue;
      const auto qs = quadrature_spectrum_at(lm, r * gamma);
      for (Witness w : kAllWitnesses) {
        const double closed = optimize_gains(qs, w, rates.gammac).value;
        const double brute = grid_search_gains(qs, w, rates.gammac, 4.0, 17).value;
        const double err = std::abs(closed - brute);
        rep.max_abs_error = std::max(rep.max_abs_error, err);
        rep.max_rel_error = std::max(rep.max_rel_error, err / std::abs(brute));
        ++checked;
      }
    }
    rep.passed = rep.max_rel_error <= rep.tolerance;
    rep.details = std::to_string(checked) + " (frequency, inequality) pairs";
    out.push_back(rep);
  }
  {
    OracleReport rep;
    rep.name = "signal_idler_symmetry";
    rep.tolerance = 1e-8;
    std::vector<double> omegas;
    for (double r : omega_ratios) omegas.push_back(r * gamma);
    const auto scan = five_partite_verdict(lm, omegas);
    for (const auto& r : scan.reports) {
      if (!r.valid) continue;
      const double scale = std::max({r.s_values[0], r.s_values[1], r.s_values[2], r.s_values[3]});
      const double err = std::max(std::abs(r.s_values[0] - r.s_values[1]),
                                  std::abs(r.s_values[2] - r.s_values[3]));
      rep.max_abs_error = std::max(rep.max_abs_error, err);
      rep.max_rel_error = std::max(rep.max_rel_error, err / scale);
    }
    rep.passed = rep.max_rel_error <= rep.tolerance;
    rep.details = std::to_string(scan.summary.gaps) + " singular frequency gap(s)";
    out.push_back(rep);
  }
  return out;
}

}  // namespace kerrcomb
