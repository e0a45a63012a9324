#pragma once

// Intracavity spectral matrix, quadrature spectra and extracavity variances.

#include <kerrcomb/detail/parallel.hpp>
#include <kerrcomb/linearize.hpp>
#include <kerrcomb/types.hpp>

#include <array>
#include <span>
#include <sstream>
#include <vector>

namespace kerrcomb {

/// Reciprocal condition number below which a shifted drift matrix is
/// treated as singular.
inline constexpr double kSingularRcond = 1e-9;

/// S(w) in the [alpha, alpha*] basis; w in rad/s.
struct SpectralMatrix {
  double omega = 0.0;
  Matrix10c s;
};

/// Symmetrized spectrum in the [X_p..X_i2, Y_p..Y_i2] basis, kept in
/// extended precision.
struct QuadratureSpectrum {
  double omega = 0.0;
  Matrix10cx sq;
};

/// Real coefficients of a linear quadrature combination sum cx_k X_k + cy_k Y_k.
struct CombinationCoeffs {
  std::array<double, kModes> cx{};
  std::array<double, kModes> cy{};

  Vector10d vec() const {
    Vector10d v;
    for (int k = 0; k < kModes; ++k) {
      v(k) = cx[k];
      v(k + kModes) = cy[k];
    }
    return v;
  }

  bool is_zero() const { return vec().isZero(0.0); }

  CombinationCoeffs& x(Mode m, double c) { cx[index_of(m)] = c; return *this; }
  CombinationCoeffs& y(Mode m, double c) { cy[index_of(m)] = c; return *this; }
};

namespace detail {

// Eigen's rcond estimate can miss an exactly zero pivot, so the pivot
// spread is checked as well.
inline bool nearly_singular(const Eigen::PartialPivLU<Matrix10cx>& lu) {
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs().eval();
  const xreal spread = pivots.minCoeff() / pivots.maxCoeff();
  return !(lu.rcond() >= kSingularRcond) || !(spread >= kSingularRcond);
}

inline std::string omega_text(double omega) {
  std::ostringstream os;
  os.precision(10);
  os << omega;
  return os.str();
}

}  // namespace detail

namespace detail {

inline void throw_singular(const char* which, double omega) {
  throw SingularMatrixError(std::string("intracavity_spectrum: ") + which +
                                " is singular at w = " + omega_text(omega) + " rad/s",
                            omega);
}

// S(w) = (-M + iw)^-1 D (-M^T - iw)^-1 in extended precision.
inline Matrix10cx spectrum_ext(const LinearModel& lm, double omega) {
  if (!lm.stability.stable)
    throw UnstableModelError("intracavity_spectrum: drift matrix has growing modes");
  const Matrix10cx m = lm.drift.cast<xcomplex>();
  const Matrix10cx id = Matrix10cx::Identity();
  const xcomplex iw(0.0L, static_cast<xreal>(omega));
  Eigen::PartialPivLU<Matrix10cx> left(-m + iw * id);
  if (nearly_singular(left)) throw_singular("-M + i w I", omega);
  const Matrix10cx x = left.solve(lm.diffusion.cast<xcomplex>());
  // S (-M^T - iw) = X  <=>  (-M - iw) S^T = X^T
  Eigen::PartialPivLU<Matrix10cx> right(-m - iw * id);
  if (nearly_singular(right)) throw_singular("-M - i w I", omega);
  Matrix10cx s = right.solve(x.transpose()).transpose();
  if (!s.allFinite()) throw_singular("the spectrum", omega);
  return s;
}

}  // namespace detail

/// S(w) = (-M + iw)^-1 D (-M^T - iw)^-1, evaluated with two LU solves.
/// Throws UnstableModelError if the model is unstable and
/// SingularMatrixError when -M + iw is numerically singular (for instance at
/// w = 0 above threshold, where the phase-diffusion mode makes S diverge).
inline SpectralMatrix intracavity_spectrum(const LinearModel& lm, double omega) {
  SpectralMatrix out;
  out.omega = omega;
  out.s = detail::spectrum_ext(lm, omega).cast<cd>();
  return out;
}

/// Rows X_k = e_k + e_{k+5}, Y_k = -i (e_k - e_{k+5}).
inline Matrix10c quadrature_transform() {
  Matrix10c t = Matrix10c::Zero();
  const cd i(0.0, 1.0);
  for (int k = 0; k < kModes; ++k) {
    t(k, k) = 1.0;
    t(k, k + kModes) = 1.0;
    t(k + kModes, k) = -i;
    t(k + kModes, k + kModes) = i;
  }
  return t;
}

namespace detail {

inline QuadratureSpectrum to_quadratures(const Matrix10cx& s, double omega) {
  static const Matrix10cx t = quadrature_transform().cast<xcomplex>();
  const Matrix10cx raw = t * s * t.transpose();
  QuadratureSpectrum out;
  out.omega = omega;
  out.sq = xreal(0.5) * (raw + raw.transpose());
  return out;
}

}  // namespace detail

inline QuadratureSpectrum quadrature_spectrum(const SpectralMatrix& sm) {
  return detail::to_quadratures(sm.s.cast<xcomplex>(), sm.omega);
}

/// Extracavity variance in shot-noise units (vacuum = 1 per quadrature):
/// sum c^2 + 2 gammac Re(c^T sq c).
inline double output_variance(const QuadratureSpectrum& qs, const CombinationCoeffs& c,
                              double gammac) {
  if (!(gammac >= 0.0)) throw InvalidArgument("output_variance: gammac must be non-negative");
  const Vector10x v = c.vec().cast<xreal>();
  const Matrix10x r = qs.sq.real();
  return static_cast<double>(v.squaredNorm() + 2.0L * static_cast<xreal>(gammac) * v.dot(r * v));
}

inline QuadratureSpectrum quadrature_spectrum_at(const LinearModel& lm, double omega) {
  return detail::to_quadratures(detail::spectrum_ext(lm, omega), omega);
}

/// Quadrature spectra on a grid of w (rad/s), order preserved. A failing
/// point propagates its error (SingularMatrixError carries the w).
inline std::vector<QuadratureSpectrum> spectrum_grid(const LinearModel& lm,
                                                     std::span<const double> omegas) {
  for (double w : omegas)
    if (!std::isfinite(w)) throw InvalidArgument("spectrum_grid: non-finite frequency");
  std::vector<QuadratureSpectrum> out(omegas.size());
  detail::parallel_for(omegas.size(),
                       [&](std::size_t k) { out[k] = quadrature_spectrum_at(lm, omegas[k]); });
  return out;
}

/// Uniform grid of `points` values of w/gamma over [0, max_ratio].
inline std::vector<double> omega_ratio_grid(double max_ratio = 5.0, int points = 1001) {
  if (points < 1) throw InvalidArgument("omega grid needs at least one point");
  if (!(max_ratio >= 0.0) || !std::isfinite(max_ratio))
    throw InvalidArgument("omega grid maximum must be finite and non-negative");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    out[static_cast<std::size_t>(k)] = points == 1 ? 0.0 : max_ratio * k / (points - 1);
  return out;
}

}  // namespace kerrcomb
