#include "qfb/qstate.hpp"

#include <numeric>
#include <string>

namespace qfb {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-9;
constexpr double kSqrtNegativeTol = 1e-6;
constexpr int kMaxJacobiSweeps = 60;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

Mat4 commutator(const Mat4& a, const Mat4& b) { return a * b - b * a; }
Mat4 anticommutator(const Mat4& a, const Mat4& b) { return a * b + b * a; }

double hermiticity_error(const Mat4& h) {
  double err = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j) err = std::max(err, std::abs(h(i, j) - std::conj(h(j, i))));
  return err;
}

Mat4 hermitian_part(const Mat4& h) {
  Mat4 out;
  for (std::size_t i = 0; i < 4; ++i) {
    out(i, i) = h(i, i).real();
    for (std::size_t j = i + 1; j < 4; ++j) {
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
  return out;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

namespace pauli {
Mat2 identity() { return Mat2::identity(); }
Mat2 x() {
  Mat2 m;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
Mat2 y() {
  Mat2 m;
  m(0, 1) = cplx{0.0, -1.0};
  m(1, 0) = cplx{0.0, 1.0};
  return m;
}
Mat2 z() {
  Mat2 m;
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}
Mat2 plus() {
  Mat2 m;
  m(1, 0) = 1.0;
  return m;
}
Mat2 minus() {
  Mat2 m;
  m(0, 1) = 1.0;
  return m;
}
}  // namespace pauli

Mat4 qubit_op(QubitOpKind kind, int which) {
  Mat2 single;
  switch (kind) {
    case QubitOpKind::x: single = pauli::x(); break;
    case QubitOpKind::y: single = pauli::y(); break;
    case QubitOpKind::z: single = pauli::z(); break;
    case QubitOpKind::plus: single = pauli::plus(); break;
    case QubitOpKind::minus: single = pauli::minus(); break;
    default: throw std::invalid_argument("qubit_op: invalid operator kind");
  }
  if (which == 1) return kron(single, pauli::identity());
  if (which == 2) return kron(pauli::identity(), single);
  throw std::invalid_argument("qubit_op: qubit index must be 1 or 2, got " + std::to_string(which));
}

Mat4 collective_op(CollectiveKind kind, double c1, double c2) {
  using K = QubitOpKind;
  switch (kind) {
    case CollectiveKind::Jz: return qubit_op(K::z, 1) + qubit_op(K::z, 2);
    case CollectiveKind::Jx: return qubit_op(K::x, 1) + qubit_op(K::x, 2);
    case CollectiveKind::Jx_bar: return qubit_op(K::x, 1) - qubit_op(K::x, 2);
    case CollectiveKind::sigma_minus_diff: return qubit_op(K::minus, 1) - qubit_op(K::minus, 2);
    case CollectiveKind::sigma_minus_sum: return qubit_op(K::minus, 1) + qubit_op(K::minus, 2);
    case CollectiveKind::weighted_x:
      if (!std::isfinite(c1) || !std::isfinite(c2))
        throw std::invalid_argument("collective_op: weights must be finite");
      return c1 * qubit_op(K::x, 1) + c2 * qubit_op(K::x, 2);
  }
  throw std::invalid_argument("collective_op: invalid kind");
}

Ket::Ket(const std::array<cplx, 4>& amps) : amps_(amps) {
  double n2 = 0.0;
  for (const auto& x : amps_) n2 += std::norm(x);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("Ket: zero or non-finite amplitudes");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : amps_) x *= inv;
}

Ket Ket::basis(std::size_t index) {
  if (index >= 4) throw std::invalid_argument("Ket::basis: index out of range");
  std::array<cplx, 4> v{};
  v[index] = 1.0;
  return Ket(v);
}

double Ket::norm() const {
  double n2 = 0.0;
  for (const auto& x : amps_) n2 += std::norm(x);
  return std::sqrt(n2);
}

Mat4 Ket::projector() const {
  Mat4 p;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) p(i, j) = amps_[i] * std::conj(amps_[j]);
  return p;
}

std::array<cplx, 4> apply(const Mat4& m, const std::array<cplx, 4>& v) {
  std::array<cplx, 4> out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out[i] += m(i, j) * v[j];
  return out;
}

cplx inner(const Ket& a, const Ket& b) {
  cplx s{};
  for (std::size_t i = 0; i < 4; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

Ket bell_state(BellState which) {
  const double h = kInvSqrt2;
  switch (which) {
    case BellState::Psi_plus: return Ket({h, 0.0, 0.0, h});
    case BellState::Psi_minus: return Ket({h, 0.0, 0.0, -h});
    case BellState::Phi_plus: return Ket({0.0, h, h, 0.0});
    case BellState::Phi_minus: return Ket({0.0, h, -h, 0.0});
  }
  throw std::invalid_argument("bell_state: invalid state");
}

std::string_view to_string(BellState which) {
  switch (which) {
    case BellState::Psi_plus: return "Psi_plus";
    case BellState::Psi_minus: return "Psi_minus";
    case BellState::Phi_plus: return "Phi_plus";
    case BellState::Phi_minus: return "Phi_minus";
  }
  return "?";
}

BellState parse_bell_state(std::string_view name) {
  for (auto b : {BellState::Psi_plus, BellState::Psi_minus, BellState::Phi_plus, BellState::Phi_minus})
    if (to_string(b) == name) return b;
  throw std::invalid_argument("unknown Bell state '" + std::string(name) + "'");
}

Ket separable_plus_state() { return Ket({0.5, 0.5, 0.5, 0.5}); }

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(Mat4::identity() * 0.25); }

DensityMatrix DensityMatrix::from_matrix(const Mat4& m, double positivity_tol) {
  if (!m.is_finite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
  if (hermiticity_error(m) > kHermitianTol) throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(m.trace() - 1.0) > kTraceTol) throw std::invalid_argument("DensityMatrix: trace differs from 1");
  const double lo = min_eigenvalue(m);
  if (lo < -positivity_tol) throw PositivityError("DensityMatrix: negative eigenvalue", lo);
  return DensityMatrix(hermitian_part(m));
}

// Each rotation acts on the (p, q) plane. The phase of h_pq is first absorbed
// into column q so the 2x2 block is real symmetric, then a real Jacobi
// rotation annihilates it.
Eigensystem hermitian_eigensystem(const Mat4& h) {
  if (!h.is_finite()) throw std::invalid_argument("hermitian_eigensystem: non-finite input");
  if (hermiticity_error(h) > kHermitianTol)
    throw std::invalid_argument("hermitian_eigensystem: input is not Hermitian");

  Mat4 a = hermitian_part(h);
  Mat4 v = Mat4::identity();
  const double scale = std::max(a.max_abs(), 1e-300);

  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < 4; ++p)
      for (std::size_t q = p + 1; q < 4; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-16 * scale || off == 0.0) break;
    if (sweep >= kMaxJacobiSweeps)
      throw std::runtime_error("hermitian_eigensystem: Jacobi iteration did not converge");

    for (std::size_t p = 0; p < 4; ++p) {
      for (std::size_t q = p + 1; q < 4; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const cplx phase = a(p, q) / mag;  // e^{i phi}
        const cplx phase_c = std::conj(phase);
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // a <- a G, v <- v G with G_pp = c, G_qp = -s e^{-i phi}, G_pq = s, G_qq = c e^{-i phi}
        for (std::size_t k = 0; k < 4; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * c - akq * s * phase_c;
          a(k, q) = akp * s + akq * c * phase_c;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * c - vkq * s * phase_c;
          v(k, q) = vkp * s + vkq * c * phase_c;
        }
        // a <- G^dagger a
        for (std::size_t k = 0; k < 4; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * apk + c * phase * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  Eigensystem es;
  for (std::size_t n = 0; n < 4; ++n) {
    const std::size_t col = order[n];
    es.values[n] = a(col, col).real();
    es.vectors[n] = Ket({v(0, col), v(1, col), v(2, col), v(3, col)});
  }
  return es;
}

double min_eigenvalue(const Mat4& h) { return hermitian_eigensystem(h).values[0]; }

namespace {

Mat4 sqrt_from_eigensystem(const Eigensystem& es) {
  Mat4 out;
  for (std::size_t n = 0; n < 4; ++n) {
    const double lam = es.values[n];
    if (lam < -kSqrtNegativeTol)
      throw PositivityError("matrix_sqrt_psd: eigenvalue below -1e-6", lam);
    const double r = std::sqrt(std::max(lam, 0.0));
    if (r == 0.0) continue;
    const auto& u = es.vectors[n];
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) out(i, j) += r * u[i] * std::conj(u[j]);
  }
  return out;
}

}  // namespace

Mat4 matrix_sqrt_psd(const DensityMatrix& rho) {
  return sqrt_from_eigensystem(hermitian_eigensystem(rho.mat()));
}

double concurrence(const DensityMatrix& rho) {
  static const Mat4 yy = kron(pauli::y(), pauli::y());
  const Mat4 rho_tilde = yy * rho.mat().conjugate() * yy;
  const Mat4 root = matrix_sqrt_psd(rho);
  const Mat4 m = hermitian_part(root * rho_tilde * root);
  const auto es = hermitian_eigensystem(m);

  std::array<double, 4> lam{};
  for (std::size_t i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(es.values[i], 0.0));
  // values ascend, so lam[3] is the largest
  const double c = lam[3] - lam[2] - lam[1] - lam[0];
  return std::clamp(c, 0.0, 1.0);
}

double fidelity_to(const DensityMatrix& rho, const Ket& target) {
  // same arithmetic as expectation() so the two agree bit for bit
  return std::clamp(expectation(target.projector(), rho).real(), 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  double p = 0.0;
  for (const auto& x : rho.mat().a) p += std::norm(x);
  return p;
}

cplx expectation(const Mat4& a, const Mat4& rho) {
  cplx s{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) s += a(i, j) * rho(j, i);
  return s;
}

cplx expectation(const Mat4& a, const DensityMatrix& rho) { return expectation(a, rho.mat()); }

}  // namespace qfb
