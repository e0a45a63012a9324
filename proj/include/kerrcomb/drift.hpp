#pragma once

// Deterministic part of the P-representation Langevin equations for the
// five-mode comb, stored as a table of cubic monomials so that both the
// vector field and its exact Jacobian come from one source.

#include <kerrcomb/types.hpp>

#include <array>

namespace kerrcomb {

namespace detail {

// Variable slots in the 10-vector.
enum Slot : int {
  P = 0, S1 = 1, I1 = 2, S2 = 3, I2 = 4,
  Pc = 5, S1c = 6, I1c = 7, S2c = 8, I2c = 9
};

// g * coeff * x[a] * x[b] * x[c] contributes to row `row` of f.
struct CubicTerm {
  int row;
  double coeff;
  std::array<int, 3> vars;
};

inline constexpr std::array<CubicTerm, 17> kCubicTerms{{
    // pump
    {P, -2.0, {Pc, S1, I1}},
    {P, -1.0, {S1c, S2, I1}},
    {P, -1.0, {I1c, I2, S1}},
    {P, +1.0, {S1, S1, S2c}},
    {P, +1.0, {I1, I1, I2c}},
    // s1
    {S1, +1.0, {P, P, I1c}},
    {S1, +1.0, {I1, P, I2c}},
    {S1, -1.0, {S2, I1, Pc}},
    {S1, -2.0, {P, S2, S1c}},
    // i1
    {I1, +1.0, {P, P, S1c}},
    {I1, +1.0, {S1, P, S2c}},
    {I1, -1.0, {I2, S1, Pc}},
    {I1, -2.0, {P, I2, I1c}},
    // s2
    {S2, +1.0, {S1, P, I1c}},
    {S2, +1.0, {S1, S1, Pc}},
    // i2
    {I2, +1.0, {I1, P, S1c}},
    {I2, +1.0, {I1, I1, Pc}},
}};

// Maps a slot to its conjugate partner (alpha_k <-> alpha_k*).
constexpr int swap_conj(int v) { return v < kModes ? v + kModes : v - kModes; }

// Applies fn(row, coeff, vars) for every term of the full 10-row field F,
// where rows 5..9 are the conjugate equations expressed in the independent
// variables (all coefficients are real).
template <typename Fn>
void for_each_term(Fn&& fn) {
  for (const auto& t : kCubicTerms) {
    fn(t.row, t.coeff, t.vars);
    fn(t.row + kModes, t.coeff,
       std::array<int, 3>{swap_conj(t.vars[0]), swap_conj(t.vars[1]),
                          swap_conj(t.vars[2])});
  }
}

}  // namespace detail

/// Drift vector F = [f, f*] at an arbitrary point of the 10-dimensional
/// phase space. Entries 5..9 are evaluated as functions of the independent
/// variables, so F is holomorphic in x and its Jacobian is well defined.
inline FieldVector drift_vector(double gamma, double g, double epsilon,
                                const FieldVector& x) {
  FieldVector out = -gamma * x;
  out(detail::P) += epsilon;
  out(detail::Pc) += epsilon;
  detail::for_each_term([&](int row, double coeff, const std::array<int, 3>& v) {
    out(row) += g * coeff * x(v[0]) * x(v[1]) * x(v[2]);
  });
  return out;
}

/// Exact Jacobian dF/dx (x and x* treated as independent).
inline Matrix10c drift_jacobian(double gamma, double g, const FieldVector& x) {
  Matrix10c m = Matrix10c::Identity() * cd(-gamma);
  detail::for_each_term([&](int row, double coeff, const std::array<int, 3>& v) {
    const cd c = g * coeff;
    m(row, v[0]) += c * x(v[1]) * x(v[2]);
    m(row, v[1]) += c * x(v[0]) * x(v[2]);
    m(row, v[2]) += c * x(v[0]) * x(v[1]);
  });
  return m;
}

}  // namespace kerrcomb
