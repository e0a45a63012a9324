#pragma once

// Four van Loock-Furusawa inequalities for the five comb modes, with the
// free Y-quadrature gains optimized in closed form.

#include <kerrcomb/detail/parallel.hpp>
#include <kerrcomb/spectra.hpp>
#include <kerrcomb/types.hpp>

#include <Eigen/QR>

#include <array>
#include <limits>
#include <map>
#include <span>
#include <vector>

namespace kerrcomb {

enum class Witness : int { S1 = 1, S2 = 2, S3 = 3, S4 = 4 };

inline constexpr std::array<Witness, 4> kAllWitnesses{Witness::S1, Witness::S2, Witness::S3,
                                                      Witness::S4};

/// Vacuum value of every optimized witness; violation means value < 4.
inline constexpr double kVlfBound = 4.0;

inline Witness witness_from_index(int index) {
  if (index < 1 || index > 4) throw InvalidArgument("VLF inequality index must be in 1..4");
  return static_cast<Witness>(index);
}

constexpr int witness_slot(Witness w) { return static_cast<int>(w) - 1; }

/// Modes whose Y gain is free in each inequality.
constexpr std::array<Mode, 3> free_modes(Witness w) {
  switch (w) {
    case Witness::S1: return {Mode::i1, Mode::s2, Mode::i2};
    case Witness::S2: return {Mode::s1, Mode::s2, Mode::i2};
    case Witness::S3: return {Mode::p, Mode::i1, Mode::i2};
    case Witness::S4: return {Mode::p, Mode::s1, Mode::s2};
  }
  return {};
}

struct VlfGains {
  Witness witness = Witness::S1;
  std::map<Mode, double> values;

  static VlfGains zero(Witness w) {
    VlfGains out{w, {}};
    for (Mode m : free_modes(w)) out.values[m] = 0.0;
    return out;
  }
};

/// Fixed +-1 parts of the two combinations; the free gains are zero here.
inline std::pair<CombinationCoeffs, CombinationCoeffs> witness_base(Witness w) {
  CombinationCoeffs u, v;
  switch (w) {
    case Witness::S1:
      u.x(Mode::p, 1).x(Mode::s1, 1);
      v.y(Mode::p, -1).y(Mode::s1, 1);
      break;
    case Witness::S2:
      u.x(Mode::p, 1).x(Mode::i1, 1);
      v.y(Mode::p, -1).y(Mode::i1, 1);
      break;
    case Witness::S3:
      u.x(Mode::s1, 1).x(Mode::s2, -1);
      v.y(Mode::s1, 1).y(Mode::s2, 1);
      break;
    case Witness::S4:
      u.x(Mode::i2, 1).x(Mode::i1, -1);
      v.y(Mode::i1, 1).y(Mode::i2, 1);
      break;
  }
  return {u, v};
}

/// The (X-part, Y-part) combinations of inequality w with the given gains.
inline std::pair<CombinationCoeffs, CombinationCoeffs> witness_combinations(const VlfGains& gains) {
  const auto modes = free_modes(gains.witness);
  if (gains.values.size() != modes.size())
    throw InvalidArgument("VLF gains do not match the free modes of the inequality");
  auto [u, v] = witness_base(gains.witness);
  for (Mode m : modes) {
    const auto it = gains.values.find(m);
    if (it == gains.values.end())
      throw InvalidArgument("VLF gains missing free mode " + std::string(mode_name(m)));
    if (!std::isfinite(it->second)) throw InvalidArgument("VLF gains must be finite");
    v.y(m, it->second);
  }
  return {u, v};
}

inline double vlf_value(const QuadratureSpectrum& qs, Witness w, const VlfGains& gains,
                        double gammac) {
  if (gains.witness != w) throw InvalidArgument("VLF gains belong to a different inequality");
  const auto [u, v] = witness_combinations(gains);
  return output_variance(qs, u, gammac) + output_variance(qs, v, gammac);
}

struct GainOptimum {
  VlfGains gains;
  double value = 0.0;
};

namespace detail {

// Accumulates the quadratic objective in the free gains,
//   value(g) = const + b^T g + 1/2 g^T H g,
// with H = 2 (I + 2 gammac R_ff) and b = 4 gammac R_f. v0 per spectrum.
struct GainQuadratic {
  using Matrix3x = Eigen::Matrix<xreal, 3, 3>;
  using Vector3x = Eigen::Matrix<xreal, 3, 1>;
  Matrix3x hessian = Matrix3x::Zero();
  Vector3x linear = Vector3x::Zero();

  void add(const QuadratureSpectrum& qs, Witness w, double gammac_in) {
    const Matrix10x r = qs.sq.real();
    if (!r.allFinite()) throw InvalidArgument("optimize_gains: spectrum has non-finite entries");
    const xreal gammac = gammac_in;
    const auto modes = free_modes(w);
    const Vector10x v0 = witness_base(w).second.vec().cast<xreal>();
    std::array<int, 3> slots{};
    for (int a = 0; a < 3; ++a) slots[a] = conj_index_of(modes[a]);  // Y_k slot = k + 5
    for (int a = 0; a < 3; ++a) {
      hessian(a, a) += 2.0L;
      for (int b = 0; b < 3; ++b) hessian(a, b) += 4.0L * gammac * r(slots[a], slots[b]);
      linear(a) += 4.0L * gammac * r.row(slots[a]).dot(v0);
    }
  }

  // Minimum-norm stationary point.
  Eigen::Vector3d solve() const {
    Eigen::CompleteOrthogonalDecomposition<Matrix3x> cod;
    cod.setThreshold(1e-13L);
    cod.compute(hessian);
    return Vector3x(cod.solve(Vector3x(-linear))).cast<double>();
  }
};

inline VlfGains gains_from(Witness w, const Eigen::Vector3d& g) {
  VlfGains out{w, {}};
  const auto modes = free_modes(w);
  for (int a = 0; a < 3; ++a) out.values[modes[a]] = g(a);
  return out;
}

}  // namespace detail

/// Global minimizer of vlf_value over the free gains at one frequency.
inline GainOptimum optimize_gains(const QuadratureSpectrum& qs, Witness w, double gammac) {
  if (!(gammac >= 0.0)) throw InvalidArgument("optimize_gains: gammac must be non-negative");
  detail::GainQuadratic quad;
  quad.add(qs, w, gammac);
  GainOptimum out;
  out.gains = detail::gains_from(w, quad.solve());
  out.value = vlf_value(qs, w, out.gains, gammac);
  return out;
}

/// One gain set for a whole frequency grid, minimizing the grid sum of the
/// witness. Exposed for comparison with per-frequency optimization.
inline VlfGains optimize_gains_global(std::span<const QuadratureSpectrum> spectra, Witness w,
                                      double gammac) {
  detail::GainQuadratic quad;
  for (const auto& qs : spectra) quad.add(qs, w, gammac);
  if (spectra.empty()) return VlfGains::zero(w);
  return detail::gains_from(w, quad.solve());
}

/// Gradient of the witness objective with respect to the free gains.
inline Eigen::Vector3d gain_gradient(const QuadratureSpectrum& qs, const VlfGains& gains,
                                     double gammac) {
  detail::GainQuadratic quad;
  quad.add(qs, gains.witness, gammac);
  detail::GainQuadratic::Vector3x g;
  const auto modes = free_modes(gains.witness);
  for (int a = 0; a < 3; ++a) g(a) = gains.values.at(modes[a]);
  return detail::GainQuadratic::Vector3x(quad.hessian * g + quad.linear).cast<double>();
}

enum class GainMode { per_omega, global };

struct VlfReport {
  double omega = 0.0;
  bool valid = true;  // false: spectrum singular at this w (recorded gap)
  std::array<double, 4> s_values{};
  std::array<VlfGains, 4> gains{};
  std::array<bool, 4> violated{};
  bool five_partite = false;
};

struct VerdictSummary {
  std::array<double, 4> min_values{};
  std::array<double, 4> argmin_omega{};
  bool five_partite = false;         // all four < 4 at some common w
  std::size_t five_partite_points = 0;
  std::size_t gaps = 0;
};

struct VlfScan {
  std::vector<VlfReport> reports;
  VerdictSummary summary;
};

namespace detail {

inline void finish_report(VlfReport& rep) {
  rep.five_partite = true;
  for (int k = 0; k < 4; ++k) {
    rep.violated[k] = rep.s_values[k] < kVlfBound;
    rep.five_partite = rep.five_partite && rep.violated[k];
  }
}

inline VlfReport gap_report(double omega) {
  VlfReport rep;
  rep.omega = omega;
  rep.valid = false;
  rep.s_values.fill(std::numeric_limits<double>::quiet_NaN());
  for (Witness w : kAllWitnesses) rep.gains[witness_slot(w)] = VlfGains{w, {}};
  rep.violated.fill(false);
  return rep;
}

inline VerdictSummary summarize(const std::vector<VlfReport>& reports) {
  VerdictSummary s;
  s.min_values.fill(std::numeric_limits<double>::infinity());
  s.argmin_omega.fill(std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : reports) {
    if (!r.valid) {
      ++s.gaps;
      continue;
    }
    for (int k = 0; k < 4; ++k)
      if (r.s_values[k] < s.min_values[k]) {
        s.min_values[k] = r.s_values[k];
        s.argmin_omega[k] = r.omega;
      }
    if (r.five_partite) {
      s.five_partite = true;
      ++s.five_partite_points;
    }
  }
  return s;
}

}  // namespace detail

/// Optimized S(1)..S(4) at every w of the grid (rad/s) plus a summary.
/// Frequencies where the spectrum is singular are kept as gaps.
inline VlfScan five_partite_verdict(const LinearModel& lm, std::span<const double> omegas,
                                    GainMode mode = GainMode::per_omega) {
  if (!lm.stability.stable)
    throw UnstableModelError("five_partite_verdict: drift matrix has growing modes");
  const double gammac = lm.rates.gammac;
  std::vector<QuadratureSpectrum> spectra(omegas.size());
  std::vector<char> ok(omegas.size(), 1);
  detail::parallel_for(omegas.size(), [&](std::size_t k) {
    try {
      spectra[k] = quadrature_spectrum_at(lm, omegas[k]);
    } catch (const SingularMatrixError&) {
      ok[k] = 0;
    }
  });

  std::array<VlfGains, 4> global{};
  if (mode == GainMode::global) {
    std::vector<QuadratureSpectrum> valid;
    for (std::size_t k = 0; k < spectra.size(); ++k)
      if (ok[k]) valid.push_back(spectra[k]);
    for (Witness w : kAllWitnesses) global[witness_slot(w)] = optimize_gains_global(valid, w, gammac);
  }

  VlfScan scan;
  scan.reports.resize(omegas.size());
  detail::parallel_for(omegas.size(), [&](std::size_t k) {
    if (!ok[k]) {
      scan.reports[k] = detail::gap_report(omegas[k]);
      return;
    }
    VlfReport rep;
    rep.omega = omegas[k];
    for (Witness w : kAllWitnesses) {
      const int slot = witness_slot(w);
      if (mode == GainMode::per_omega) {
        const auto opt = optimize_gains(spectra[k], w, gammac);
        rep.gains[slot] = opt.gains;
        rep.s_values[slot] = opt.value;
      } else {
        rep.gains[slot] = global[slot];
        rep.s_values[slot] = vlf_value(spectra[k], w, global[slot], gammac);
      }
    }
    detail::finish_report(rep);
    scan.reports[k] = rep;
  });
  scan.summary = detail::summarize(scan.reports);
  return scan;
}

}  // namespace kerrcomb
