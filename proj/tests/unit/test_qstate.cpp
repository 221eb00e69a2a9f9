#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qfb/qstate.hpp"
#include "support.hpp"

using namespace qfb;
using qfb::test::approx_equal;

namespace {

// Eigenvalues of a real 4x4 matrix with real spectrum by unshifted QR
// iteration (Gram-Schmidt). Used only as an independent check on the
// Hermitian route inside `concurrence`.
std::array<double, 4> real_qr_eigenvalues(std::array<std::array<double, 4>, 4> a) {
  for (int it = 0; it < 2000; ++it) {
    std::array<std::array<double, 4>, 4> q{}, r{};
    for (int j = 0; j < 4; ++j) {
      std::array<double, 4> v{};
      for (int i = 0; i < 4; ++i) v[i] = a[i][j];
      for (int k = 0; k < j; ++k) {
        double d = 0;
        for (int i = 0; i < 4; ++i) d += q[i][k] * a[i][j];
        r[k][j] = d;
        for (int i = 0; i < 4; ++i) v[i] -= d * q[i][k];
      }
      double n = 0;
      for (double x : v) n += x * x;
      n = std::sqrt(n);
      r[j][j] = n;
      for (int i = 0; i < 4; ++i) q[i][j] = n > 1e-300 ? v[i] / n : 0.0;
    }
    std::array<std::array<double, 4>, 4> next{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) next[i][j] += r[i][k] * q[k][j];
    a = next;
  }
  return {a[0][0], a[1][1], a[2][2], a[3][3]};
}

double wootters_by_qr(const Mat4& rho) {
  const Mat4 yy = kron(pauli::y(), pauli::y());
  const Mat4 rr = rho * (yy * rho.conjugate() * yy);
  std::array<std::array<double, 4>, 4> a{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      REQUIRE(std::abs(rr(i, j).imag()) < 1e-14);
      a[i][j] = rr(i, j).real();
    }
  auto ev = real_qr_eigenvalues(a);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(ev[i], 0.0));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

Mat4 werner(double p) {
  return p * bell_state(BellState::Phi_plus).projector() + (1.0 - p) * 0.25 * Mat4::identity();
}

}  // namespace

TEST_CASE("qubit operators act on the left or right tensor factor") {
  const auto k10 = Ket::basis(2);
  const auto down = qfb::apply(qubit_op(QubitOpKind::minus, 1), k10.amps());
  CHECK(approx_equal(down, Ket::basis(0).amps(), 0.0));

  CHECK(qubit_op(QubitOpKind::z, 2) == Mat4::diagonal({1.0, -1.0, 1.0, -1.0}));

  const auto up = qfb::apply(qubit_op(QubitOpKind::plus, 1), Ket::basis(0).amps());
  CHECK(approx_equal(up, Ket::basis(2).amps(), 0.0));

  CHECK_THROWS_AS(qubit_op(QubitOpKind::x, 0), std::invalid_argument);
  CHECK_THROWS_AS(qubit_op(QubitOpKind::x, 3), std::invalid_argument);
}

TEST_CASE("collective operators") {
  const Mat4 jz = collective_op(CollectiveKind::Jz);
  CHECK(jz == Mat4::diagonal({2.0, 0.0, 0.0, -2.0}));

  const auto phi = bell_state(BellState::Phi_plus);
  const auto zero = qfb::apply(jz, phi.amps());
  for (auto z : zero) CHECK(std::abs(z) == 0.0);

  // J_x |Phi+> = sqrt2 (|00> + |11>) = 2 |Psi+>
  const auto jx_phi = qfb::apply(collective_op(CollectiveKind::Jx), phi.amps());
  const auto psi = bell_state(BellState::Psi_plus);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(jx_phi[i] - 2.0 * psi[i]) < 1e-15);

  CHECK(collective_op(CollectiveKind::Jx_bar) ==
        qubit_op(QubitOpKind::x, 1) - qubit_op(QubitOpKind::x, 2));
  CHECK(collective_op(CollectiveKind::sigma_minus_diff) ==
        qubit_op(QubitOpKind::minus, 1) - qubit_op(QubitOpKind::minus, 2));
  CHECK(collective_op(CollectiveKind::sigma_minus_sum) ==
        qubit_op(QubitOpKind::minus, 1) + qubit_op(QubitOpKind::minus, 2));
  CHECK(approx_equal(collective_op(CollectiveKind::weighted_x, 0.3, -2.0),
                     0.3 * qubit_op(QubitOpKind::x, 1) - 2.0 * qubit_op(QubitOpKind::x, 2), 1e-15));
}

TEST_CASE("Bell states use the |Phi> = (|01> +- |10>) naming") {
  const double h = 1.0 / std::sqrt(2.0);
  const auto phi = bell_state(BellState::Phi_plus);
  CHECK(std::abs(phi[0]) == 0.0);
  CHECK(phi[1].real() == doctest::Approx(h).epsilon(1e-15));
  CHECK(phi[2].real() == doctest::Approx(h).epsilon(1e-15));
  CHECK(std::abs(phi[3]) == 0.0);

  const auto psi_m = bell_state(BellState::Psi_minus);
  CHECK(psi_m[0].real() == doctest::Approx(h).epsilon(1e-15));
  CHECK(psi_m[3].real() == doctest::Approx(-h).epsilon(1e-15));
  CHECK(std::abs(psi_m[1]) + std::abs(psi_m[2]) == 0.0);

  CHECK(bell_state(BellState::Phi_minus).norm() == doctest::Approx(1.0).epsilon(1e-15));

  for (auto b : {BellState::Psi_plus, BellState::Psi_minus, BellState::Phi_plus, BellState::Phi_minus})
    CHECK(parse_bell_state(to_string(b)) == b);
  CHECK_THROWS_AS(parse_bell_state("Phi"), std::invalid_argument);
}

TEST_CASE("Ket rejects a zero vector") {
  CHECK_THROWS_AS(Ket(std::array<cplx, 4>{}), std::invalid_argument);
}

TEST_CASE("hermitian_eigensystem on known spectra") {
  auto vals = [](const Mat4& m) { return hermitian_eigensystem(m).values; };
  const auto d = vals(Mat4::diagonal({1.0, 2.0, 3.0, 4.0}));
  CHECK(d == std::array<double, 4>{1.0, 2.0, 3.0, 4.0});

  const auto jz = vals(collective_op(CollectiveKind::Jz));
  CHECK(jz == std::array<double, 4>{-2.0, 0.0, 0.0, 2.0});

  const auto sx = vals(qubit_op(QubitOpKind::x, 1));
  const std::array<double, 4> expect{-1.0, -1.0, 1.0, 1.0};
  for (int i = 0; i < 4; ++i) CHECK(sx[i] == doctest::Approx(expect[i]).epsilon(1e-14));

  Mat4 bad;
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eigensystem(bad), std::invalid_argument);
}

TEST_CASE("hermitian_eigensystem residuals, orthonormality and reconstruction") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat4 h = qfb::test::random_hermitian(gen);
    const auto es = hermitian_eigensystem(h);
    CHECK(std::is_sorted(es.values.begin(), es.values.end()));

    Mat4 rebuilt;
    for (std::size_t n = 0; n < 4; ++n) {
      const auto hv = qfb::apply(h, es.vectors[n].amps());
      double res = 0.0;
      for (std::size_t i = 0; i < 4; ++i) res += std::norm(hv[i] - es.values[n] * es.vectors[n][i]);
      CHECK(std::sqrt(res) < 1e-10);
      for (std::size_t m = 0; m < 4; ++m) {
        const double expect = n == m ? 1.0 : 0.0;
        CHECK(std::abs(inner(es.vectors[n], es.vectors[m]) - expect) < 1e-10);
      }
      rebuilt += es.values[n] * es.vectors[n].projector();
    }
    CHECK((rebuilt - h).max_abs() < 1e-9);
  }
}

TEST_CASE("matrix_sqrt_psd") {
  const Mat4 half = matrix_sqrt_psd(DensityMatrix::maximally_mixed());
  CHECK(approx_equal(half, 0.5 * Mat4::identity(), 1e-14));

  const auto p00 = DensityMatrix::from_ket(Ket::basis(0));
  CHECK(approx_equal(matrix_sqrt_psd(p00), p00.mat(), 1e-14));

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rho = DensityMatrix::from_matrix(qfb::test::random_density(gen));
    const Mat4 s = matrix_sqrt_psd(rho);
    CHECK((s * s - rho.mat()).max_abs() < 1e-8);
  }

  Mat4 neg = Mat4::diagonal({0.5, 0.5, 0.01, -0.01});
  CHECK_THROWS_AS(matrix_sqrt_psd(DensityMatrix::unchecked(neg)), PositivityError);
}

TEST_CASE("concurrence of tabulated states") {
  CHECK(concurrence(DensityMatrix::from_ket(bell_state(BellState::Phi_plus))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence(DensityMatrix::from_ket(Ket::basis(0))) == doctest::Approx(0.0).epsilon(1e-12));

  for (auto b : {BellState::Psi_plus, BellState::Psi_minus, BellState::Phi_plus, BellState::Phi_minus})
    CHECK(concurrence(DensityMatrix::from_ket(bell_state(b))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence(DensityMatrix::from_ket(separable_plus_state())) < 1e-7);
}

TEST_CASE("Werner concurrence against an independent eigenvalue route") {
  const double c = concurrence(DensityMatrix::from_matrix(werner(0.5)));
  CHECK(c == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(wootters_by_qr(werner(0.5)) == doctest::Approx(0.25).epsilon(1e-10));

  for (double p = 0.0; p <= 1.0; p += 0.05) {
    const double analytic = std::max(0.0, (3.0 * p - 1.0) / 2.0);
    const double ours = concurrence(DensityMatrix::from_matrix(werner(p)));
    CHECK(ours == doctest::Approx(analytic).epsilon(1e-9));
    CHECK(wootters_by_qr(werner(p)) == doctest::Approx(analytic).epsilon(1e-8));
  }
}

TEST_CASE("concurrence matches the QR route on random real states") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    Mat4 a;
    for (auto& x : a.a) x = n01(gen);
    Mat4 rho = a * a.adjoint();
    rho *= 1.0 / rho.trace().real();
    CHECK(concurrence(DensityMatrix::from_matrix(rho)) == doctest::Approx(wootters_by_qr(rho)).epsilon(1e-8));
  }
}

TEST_CASE("concurrence is invariant under local unitaries") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const Mat4 rho = qfb::test::random_density(gen, trial % 3 == 0 ? 1 : 4);
    const Mat4 u = kron(qfb::test::random_unitary2(gen), qfb::test::random_unitary2(gen));
    const Mat4 rotated = hermitian_part(u * rho * u.adjoint());
    const double c0 = concurrence(DensityMatrix::from_matrix(rho));
    const double c1 = concurrence(DensityMatrix::from_matrix(rotated));
    CHECK(std::abs(c0 - c1) < 1e-8);
    CHECK(c0 >= 0.0);
    CHECK(c0 <= 1.0);
  }
}

TEST_CASE("fidelity, purity and expectation") {
  const auto phi = bell_state(BellState::Phi_plus);
  CHECK(fidelity_to(DensityMatrix::from_ket(phi), phi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fidelity_to(DensityMatrix::from_ket(Ket::basis(0)), phi) == 0.0);
  CHECK(fidelity_to(DensityMatrix::maximally_mixed(), phi) == doctest::Approx(0.25).epsilon(1e-15));

  CHECK(purity(DensityMatrix::from_ket(separable_plus_state())) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(purity(DensityMatrix::maximally_mixed()) == doctest::Approx(0.25).epsilon(1e-15));

  const Mat4 jz = collective_op(CollectiveKind::Jz);
  CHECK(expectation(jz, DensityMatrix::from_ket(Ket::basis(0))) == cplx(2.0));
  CHECK(std::abs(expectation(jz, DensityMatrix::from_ket(phi))) == 0.0);

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = DensityMatrix::from_matrix(qfb::test::random_density(gen));
    const auto target = Ket(qfb::test::random_ket(gen));
    CHECK(fidelity_to(rho, target) == std::clamp(expectation(target.projector(), rho).real(), 0.0, 1.0));
    CHECK(std::abs(expectation(jz, rho).imag()) < 1e-10);
  }
}

TEST_CASE("DensityMatrix::from_matrix validates its invariants") {
  CHECK_NOTHROW(DensityMatrix::from_matrix(0.25 * Mat4::identity()));
  CHECK_THROWS_AS(DensityMatrix::from_matrix(0.3 * Mat4::identity()), std::invalid_argument);

  Mat4 nonherm = 0.25 * Mat4::identity();
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(nonherm), std::invalid_argument);

  CHECK_THROWS_AS(DensityMatrix::from_matrix(Mat4::diagonal({0.6, 0.5, 0.0, -0.1})), PositivityError);
}
