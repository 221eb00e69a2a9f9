#pragma once

// Two-qubit linear algebra.
//
// Basis ordering is fixed as {|00>, |01>, |10>, |11>} with qubit 1 the left
// tensor factor. Single-qubit conventions: sigma_z = diag(1, -1),
// sigma^- = |0><1|, sigma^+ = |1><0|.
//
// Bell-state naming follows the convention used throughout this project,
// which is swapped relative to most textbooks:
//   Psi_pm = (|00> +- |11>) / sqrt(2)
//   Phi_pm = (|01> +- |10>) / sqrt(2)
// Phi_plus is the feedback target and the dark state of J_z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qfb {

using cplx = std::complex<double>;

/// Dense N x N complex matrix, row-major.
template <std::size_t N>
struct Matrix {
  static constexpr std::size_t dim = N;
  std::array<cplx, N * N> a{};

  static Matrix zero() { return {}; }
  static Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diagonal(const std::array<cplx, N>& d) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return a[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a[r * N + c]; }

  Matrix& operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a[i] += o.a[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a[i] -= o.a[i];
    return *this;
  }
  Matrix& operator*=(cplx s) {
    for (auto& x : a) x *= s;
    return *this;
  }
  Matrix& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix l, const Matrix& r) { return l += r; }
  friend Matrix operator-(Matrix l, const Matrix& r) { return l -= r; }
  friend Matrix operator-(Matrix m) { return m *= -1.0; }
  friend Matrix operator*(Matrix m, cplx s) { return m *= s; }
  friend Matrix operator*(cplx s, Matrix m) { return m *= s; }
  friend Matrix operator*(Matrix m, double s) { return m *= s; }
  friend Matrix operator*(double s, Matrix m) { return m *= s; }

  friend Matrix operator*(const Matrix& l, const Matrix& r) {
    Matrix out;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < N; ++k) {
        const cplx lik = l(i, k);
        if (lik == cplx{}) continue;
        for (std::size_t j = 0; j < N; ++j) out(i, j) += lik * r(k, j);
      }
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  Matrix adjoint() const {
    Matrix out;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) out(i, j) = std::conj((*this)(j, i));
    return out;
  }
  Matrix conjugate() const {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.a[i] = std::conj(a[i]);
    return out;
  }
  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }
  /// Largest entry modulus.
  double max_abs() const {
    double m = 0.0;
    for (const auto& x : a) m = std::max(m, std::abs(x));
    return m;
  }
  bool is_finite() const {
    for (const auto& x : a)
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
  }
};

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;

Mat4 commutator(const Mat4& a, const Mat4& b);
Mat4 anticommutator(const Mat4& a, const Mat4& b);
/// max_ij |h_ij - conj(h_ji)|
double hermiticity_error(const Mat4& h);
Mat4 hermitian_part(const Mat4& h);

/// Standard tensor product; `a` is the left (qubit 1) factor.
Mat4 kron(const Mat2& a, const Mat2& b);

namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
Mat2 plus();   // |1><0|
Mat2 minus();  // |0><1|
}  // namespace pauli

enum class QubitOpKind { x, y, z, plus, minus };

/// Single-qubit operator on qubit `which` (1 or 2), identity on the other.
Mat4 qubit_op(QubitOpKind kind, int which);

enum class CollectiveKind { Jz, Jx, Jx_bar, sigma_minus_diff, sigma_minus_sum, weighted_x };

/// J_z, J_x, J_x_bar = sx1 - sx2, s1^- - s2^-, s1^- + s2^-, or c1*sx1 + c2*sx2.
/// Weights are read only for `weighted_x`.
Mat4 collective_op(CollectiveKind kind, double c1 = 1.0, double c2 = 1.0);

/// Unit-norm amplitudes in the fixed basis.
class Ket {
 public:
  Ket() = default;
  /// Normalizes; throws std::invalid_argument on a zero or non-finite vector.
  explicit Ket(const std::array<cplx, 4>& amps);

  static Ket basis(std::size_t index);

  const std::array<cplx, 4>& amps() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  double norm() const;
  Mat4 projector() const;

 private:
  std::array<cplx, 4> amps_{cplx{1.0}, {}, {}, {}};
};

std::array<cplx, 4> apply(const Mat4& m, const std::array<cplx, 4>& v);
cplx inner(const Ket& a, const Ket& b);

enum class BellState { Psi_plus, Psi_minus, Phi_plus, Phi_minus };

Ket bell_state(BellState which);
std::string_view to_string(BellState which);
/// Throws std::invalid_argument for an unknown name.
BellState parse_bell_state(std::string_view name);

/// Product state (|0>+|1>)(|0>+|1>)/2, the separable starting point.
Ket separable_plus_state();

class PositivityError : public std::runtime_error {
 public:
  PositivityError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Two-qubit density matrix: Hermitian, unit trace, PSD within tolerance.
class DensityMatrix {
 public:
  static constexpr double kDefaultPositivityTol = 1e-6;

  DensityMatrix() : m_(Ket{}.projector()) {}

  static DensityMatrix from_ket(const Ket& k) { return DensityMatrix(k.projector()); }
  static DensityMatrix maximally_mixed();
  /// Validates hermiticity (1e-10), trace (1e-9) and positivity (`positivity_tol`).
  static DensityMatrix from_matrix(const Mat4& m, double positivity_tol = kDefaultPositivityTol);
  /// No validation. For integrator internals that maintain the invariants themselves.
  static DensityMatrix unchecked(const Mat4& m) { return DensityMatrix(m); }

  const Mat4& mat() const { return m_; }
  cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

 private:
  explicit DensityMatrix(const Mat4& m) : m_(m) {}
  Mat4 m_;
};

struct Eigensystem {
  std::array<double, 4> values;      // ascending
  std::array<Ket, 4> vectors;        // vectors[i] pairs with values[i]
};

/// Cyclic complex Jacobi rotations. Throws std::invalid_argument if `h` is not
/// Hermitian within 1e-10 and std::runtime_error if the sweep cap is hit.
Eigensystem hermitian_eigensystem(const Mat4& h);

double min_eigenvalue(const Mat4& h);

/// Hermitian PSD square root. Eigenvalues in [-1e-6, 0) are clipped to zero,
/// anything lower raises PositivityError.
Mat4 matrix_sqrt_psd(const DensityMatrix& rho);

/// Wootters concurrence through the Hermitian form sqrt(rho) rho~ sqrt(rho).
double concurrence(const DensityMatrix& rho);

/// <target|rho|target>, clipped to [0, 1].
double fidelity_to(const DensityMatrix& rho, const Ket& target);

double purity(const DensityMatrix& rho);
cplx expectation(const Mat4& a, const DensityMatrix& rho);
cplx expectation(const Mat4& a, const Mat4& rho);

}  // namespace qfb
