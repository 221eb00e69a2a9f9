#pragma once

// Shared helpers for the unit tests.

#include <cmath>
#include <complex>
#include <random>

#include "qfb/qstate.hpp"

namespace qfb::test {

inline bool approx_equal(const Mat4& a, const Mat4& b, double tol) { return (a - b).max_abs() <= tol; }

inline bool approx_equal(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b, double tol) {
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

inline std::array<cplx, 4> random_ket(std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  std::array<cplx, 4> v;
  for (auto& x : v) x = {n01(gen), n01(gen)};
  return v;
}

inline Mat4 random_hermitian(std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  Mat4 a;
  for (auto& x : a.a) x = {n01(gen), n01(gen)};
  return hermitian_part(a);
}

/// Random density matrix of the given rank (Ginibre construction).
inline Mat4 random_density(std::mt19937_64& gen, int rank = 4) {
  std::normal_distribution<double> n01;
  Mat4 a;
  for (std::size_t i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) a(i, static_cast<std::size_t>(j)) = {n01(gen), n01(gen)};
  Mat4 rho = a * a.adjoint();
  rho *= 1.0 / rho.trace().real();
  return hermitian_part(rho);
}

inline Mat2 random_unitary2(std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  cplx a{n01(gen), n01(gen)};
  cplx b{n01(gen), n01(gen)};
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  a /= n;
  b /= n;
  const cplx phase = std::polar(1.0, 2.0 * M_PI * std::uniform_real_distribution<double>()(gen));
  Mat2 u;
  u(0, 0) = a * phase;
  u(0, 1) = -std::conj(b) * phase;
  u(1, 0) = b * phase;
  u(1, 1) = std::conj(a) * phase;
  return u;
}

}  // namespace qfb::test
