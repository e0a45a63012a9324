#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kerrcomb {

using cd = std::complex<double>;

inline constexpr int kModes = 5;
inline constexpr int kDim = 2 * kModes;

// Ordering [p, s1, i1, s2, i2, p*, s1*, i1*, s2*, i2*].
using FieldVector = Eigen::Matrix<cd, kDim, 1>;
using Matrix10c = Eigen::Matrix<cd, kDim, kDim>;
using Matrix10d = Eigen::Matrix<double, kDim, kDim>;
using Vector10d = Eigen::Matrix<double, kDim, 1>;

// Extended precision for quadrature spectra and witness objectives. Near
// w = 0 and near the stability boundary the spectra are large while the
// optimized witnesses are O(1), so their evaluation cancels many digits.
using xreal = long double;
using xcomplex = std::complex<long double>;
using Matrix10cx = Eigen::Matrix<xcomplex, kDim, kDim>;
using Matrix10x = Eigen::Matrix<xreal, kDim, kDim>;
using Vector10x = Eigen::Matrix<xreal, kDim, 1>;

enum class Mode : int { p = 0, s1 = 1, i1 = 2, s2 = 3, i2 = 4 };

inline constexpr std::array<Mode, kModes> kAllModes{Mode::p, Mode::s1, Mode::i1,
                                                    Mode::s2, Mode::i2};

constexpr int index_of(Mode m) { return static_cast<int>(m); }
constexpr int conj_index_of(Mode m) { return static_cast<int>(m) + kModes; }

constexpr std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::p: return "p";
    case Mode::s1: return "s1";
    case Mode::i1: return "i1";
    case Mode::s2: return "s2";
    case Mode::i2: return "i2";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The physics cannot be evaluated at this operating point.
class ModelError : public Error {
 public:
  using Error::Error;
};

class UnstableModelError : public ModelError {
 public:
  using ModelError::ModelError;
};

class SingularMatrixError : public ModelError {
 public:
  SingularMatrixError(const std::string& what, double omega)
      : ModelError(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace kerrcomb
