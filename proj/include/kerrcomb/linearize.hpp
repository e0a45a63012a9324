#pragma once

// Linearization about a steady state: drift matrix M, diffusion matrix D,
// a noise factor B with B B^T = D, and dynamical stability.

#include <kerrcomb/drift.hpp>
#include <kerrcomb/model.hpp>
#include <kerrcomb/types.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <vector>

namespace kerrcomb {

/// Eigen-analysis of a drift matrix.
///
/// `stable` means no eigenvalue has real part above `tolerance`
/// (1e-9 * rate scale). Eigenvalues with |Re| <= tolerance are counted as
/// neutral: above threshold the comb has an exact phase symmetry, so M always
/// carries one zero eigenvalue (undamped signal/idler phase diffusion).
struct StabilityReport {
  Eigen::Matrix<cd, kDim, 1> eigenvalues;
  double max_real_part = 0.0;
  double tolerance = 0.0;
  int neutral_modes = 0;
  bool stable = false;

  /// True when every eigenvalue is strictly damped (no neutral modes).
  bool strictly_stable() const { return stable && neutral_modes == 0; }
};

/// Eigenvalues of M and the stability verdict. `rate_scale` (typically
/// gamma) sets the tolerance 1e-9 * rate_scale; pass 0 for an exact test.
inline StabilityReport stability(const Matrix10c& drift, double rate_scale = 0.0) {
  Eigen::ComplexEigenSolver<Matrix10c> solver(drift, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw ModelError("eigenvalue solver failed on drift matrix");
  StabilityReport rep;
  rep.eigenvalues = solver.eigenvalues();
  rep.tolerance = 1e-9 * rate_scale;
  rep.max_real_part = rep.eigenvalues.real().maxCoeff();
  for (int k = 0; k < kDim; ++k)
    if (std::abs(rep.eigenvalues(k).real()) <= rep.tolerance && rate_scale > 0.0) ++rep.neutral_modes;
  rep.stable = rate_scale > 0.0 ? rep.max_real_part <= rep.tolerance : rep.max_real_part < 0.0;
  return rep;
}

inline Matrix10c drift_matrix(const RateParams& rates, const SteadyState& ss) {
  return drift_jacobian(rates.gamma, rates.g, ss.embed());
}

/// D = [[d, 0], [0, d*]] with d evaluated at the (possibly complex) field x.
inline Matrix10c diffusion_at(double g, const FieldVector& x) {
  using namespace detail;
  const cd p = x(P), s1 = x(S1), i1 = x(I1), s2 = x(S2), i2 = x(I2);
  Eigen::Matrix<cd, kModes, kModes> d;
  // clang-format off
  d << -2.0 * s1 * i1, -s2 * i1,      -s1 * i2,      s1 * s1, i1 * i1,
       -s2 * i1,       -2.0 * p * s2, p * p,         0.0,     i1 * p,
       -s1 * i2,       p * p,         -2.0 * p * i2, s1 * p,  0.0,
       s1 * s1,        0.0,           s1 * p,        0.0,     0.0,
       i1 * i1,        i1 * p,        0.0,           0.0,     0.0;
  // clang-format on
  d *= g;
  Matrix10c out = Matrix10c::Zero();
  out.topLeftCorner<kModes, kModes>() = d;
  out.bottomRightCorner<kModes, kModes>() = d.conjugate();
  return out;
}

inline Matrix10c diffusion_matrix(const RateParams& rates, const SteadyState& ss) {
  return diffusion_at(rates.g, ss.embed());
}

/// Autonne-Takagi factor of a complex symmetric D: returns B with B B^T = D.
///
/// Uses the real symmetric embedding H = [[Re D, Im D], [Im D, -Re D]],
/// whose eigenpairs (sigma, [x; y]) with sigma > 0 give the Takagi vectors
/// u = x + i y and values sigma. B = U diag(sqrt(sigma)), zero-padded.
inline Matrix10c noise_factor(const Matrix10c& diffusion) {
  const double scale = max_abs(diffusion);
  if (max_abs(diffusion - diffusion.transpose()) > 1e-12 * (1.0 + scale))
    throw InvalidArgument("noise_factor: diffusion matrix is not complex symmetric");
  const Matrix10d re = diffusion.real();
  const Matrix10d im = diffusion.imag();
  Eigen::Matrix<double, 2 * kDim, 2 * kDim> h;
  h << re, im, im, -re;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 2 * kDim, 2 * kDim>> solver(h);
  if (solver.info() != Eigen::Success) throw ModelError("noise_factor: eigen decomposition failed");

  Matrix10c b = Matrix10c::Zero();
  const auto& values = solver.eigenvalues();  // ascending
  const double cutoff = 1e-14 * std::max(1.0, values.cwiseAbs().maxCoeff());
  int col = 0;
  for (int k = 2 * kDim - 1; k >= 0 && col < kDim; --k) {
    if (values(k) <= cutoff) break;
    const auto v = solver.eigenvectors().col(k);
    const double root = std::sqrt(values(k));
    for (int r = 0; r < kDim; ++r) b(r, col) = cd(v(r), v(r + kDim)) * root;
    ++col;
  }
  return b;
}

/// Drift and diffusion matrices at a steady state, with the stability
/// verdict cached.
struct LinearModel {
  Matrix10c drift;
  Matrix10c diffusion;
  SteadyState steady;
  RateParams rates;
  StabilityReport stability;

  /// Rate used to scale tolerances (gamma for physical models).
  double rate_scale() const { return rates.gamma; }

  /// Wraps arbitrary matrices (used for synthetic checks). Only `gamma` of
  /// the stored rates is meaningful.
  static LinearModel from_matrices(const Matrix10c& drift, const Matrix10c& diffusion,
                                   double rate_scale) {
    LinearModel lm;
    lm.drift = drift;
    lm.diffusion = diffusion;
    lm.rates.gamma = rate_scale;
    lm.stability = kerrcomb::stability(drift, rate_scale);
    return lm;
  }
};

inline LinearModel linearize(const RateParams& rates) {
  LinearModel lm;
  lm.rates = rates;
  lm.steady = steady_state(rates);
  lm.drift = drift_matrix(rates, lm.steady);
  lm.diffusion = diffusion_matrix(rates, lm.steady);
  lm.stability = stability(lm.drift, rates.gamma);
  return lm;
}

/// Restricts a model to the subspace of damped modes.
///
/// Each neutral eigenvalue is shifted by -rate_scale through its spectral
/// projector P0 = r l^T (l^T r = 1), and D is replaced by Q D Q^T with
/// Q = I - P0. Because Q commutes with M, the spectrum and stationary
/// covariance of the result equal Q S(w) Q^T and Q V Q^T of the original,
/// which stay finite even though the neutral direction diffuses freely.
/// Returns the model unchanged when there are no neutral modes.
inline LinearModel deflate_neutral_modes(const LinearModel& lm) {
  if (lm.stability.neutral_modes == 0) return lm;
  Eigen::ComplexEigenSolver<Matrix10c> solver(lm.drift, true);
  if (solver.info() != Eigen::Success) throw ModelError("eigen decomposition failed during deflation");
  const Matrix10c right = solver.eigenvectors();
  Eigen::PartialPivLU<Matrix10c> lu(right);
  if (lu.rcond() < 1e-12) throw ModelError("drift matrix is defective; neutral modes cannot be deflated");
  const Matrix10c left = lu.inverse();  // rows are left eigenvectors, l_k^T r_j = delta_kj

  Matrix10c projector = Matrix10c::Zero();
  for (int k = 0; k < kDim; ++k)
    if (std::abs(solver.eigenvalues()(k).real()) <= lm.stability.tolerance)
      projector += right.col(k) * left.row(k);
  const Matrix10c q = Matrix10c::Identity() - projector;

  LinearModel out = lm;
  out.drift = lm.drift - lm.rate_scale() * projector;
  out.diffusion = q * lm.diffusion * q.transpose();
  out.diffusion = 0.5 * (out.diffusion + out.diffusion.transpose()).eval();
  out.stability = kerrcomb::stability(out.drift, lm.rate_scale());
  return out;
}

}  // namespace kerrcomb
