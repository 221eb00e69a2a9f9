#pragma once

// Dispersive two-qubit model after adiabatic elimination of the cavity.
//
// Conditional master equation (Ito):
//   d rho = { -i chi|alpha|^2 [J_z, rho]
//             + sum_j gamma_j D[s_j^-] rho + sum_j (gamma_phi_j / 2) D[s_j^z] rho
//             + gamma_p D[s_1^- -+ s_2^-] rho + (Gamma_d / 2) D[J_z] rho } dt
//           + (sqrt(Gamma_m) / 2) H[J_z] rho dW
//
// with D[A]rho = A rho A^+ - {A^+ A, rho}/2 and
//      H[A]rho = A rho + rho A^+ - Tr[(A + A^+) rho] rho.
//
// Rates are conventionally expressed in units of Gamma_d and times in 1/Gamma_d.

#include <array>
#include <string_view>
#include <vector>

#include "qfb/qstate.hpp"

namespace qfb {

/// Bare circuit parameters. The drive-cavity detuning is always zero and the
/// couplings have opposite signs on the two qubits (lambda_1 = -lambda_2).
struct PhysicalParams {
  double g = 1.0;          // qubit-cavity coupling
  double detuning = 20.0;  // omega_r - Omega
  double epsilon = 1.0;    // measurement drive amplitude
  double kappa = 4.0;      // cavity leakage
  double eta = 1.0;        // homodyne efficiency in (0, 1]

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

struct DerivedRates {
  double chi = 0.0;      // g^2 / Delta
  double lambda = 0.0;   // g / Delta
  cplx alpha{};          // -2 i epsilon / kappa
  double Gamma_d = 0.0;  // 8 |alpha|^2 chi^2 / kappa
  double gamma_p = 0.0;  // kappa lambda^2
  double Gamma_m = 0.0;  // 2 eta Gamma_d
  /// |g / Delta| > 0.1: outside the dispersive regime.
  bool dispersive_warning = false;

  double chi_alpha2() const { return chi * std::norm(alpha); }
};

/// Throws std::invalid_argument for Delta = 0, kappa <= 0 or eta outside (0, 1].
DerivedRates derive_rates(const PhysicalParams& p);

enum class PurcellSign { minus, plus };

std::string_view to_string(PurcellSign s);
PurcellSign parse_purcell_sign(std::string_view name);

struct ModelRates {
  double chi_alpha2 = 0.0;
  double Gamma_d = 1.0;
  double Gamma_m = 2.0;
  double gamma_p = 0.0;
  std::array<double, 2> gamma_relax{0.0, 0.0};
  std::array<double, 2> gamma_phi{0.0, 0.0};
  PurcellSign purcell_sign = PurcellSign::minus;

  /// Gamma_m = 2 eta Gamma_d.
  static ModelRates with_efficiency(double Gamma_d, double eta);
  static ModelRates from_physical(const PhysicalParams& p);

  double efficiency() const { return Gamma_d > 0.0 ? Gamma_m / (2.0 * Gamma_d) : 0.0; }

  /// Throws std::invalid_argument on negative or non-finite rates or Gamma_m > 2 Gamma_d.
  void validate() const;

  friend bool operator==(const ModelRates&, const ModelRates&) = default;
};

/// D[A]rho
Mat4 dissipator(const Mat4& a, const Mat4& rho);
/// H[A]rho
Mat4 unravel(const Mat4& a, const Mat4& rho);

/// Deterministic part of the conditional master equation.
Mat4 qte_drift(const Mat4& rho, const ModelRates& r);
/// Coefficient of dW: (sqrt(Gamma_m)/2) H[J_z] rho.
Mat4 qte_diffusion(const Mat4& rho, const ModelRates& r);

struct MarkovianTerms {
  Mat4 drift_extra;      // (sqrt(Gamma_m)/2) K(J_z rho + rho J_z) + K^2 rho / 2
  Mat4 diffusion_extra;  // K rho
};

/// Extra terms of the current-feedback equation in the Markovian limit,
/// with K rho = -i [F, rho]. `feedback` already carries the gain.
/// Throws std::invalid_argument if it is not Hermitian.
MarkovianTerms markovian_fb_terms(const Mat4& rho, const ModelRates& r, const Mat4& feedback);

/// A dissipative channel rate * D[op].
struct Channel {
  double rate = 0.0;
  Mat4 op;
};

/// Every dissipative channel of the drift with nonzero rate. The measurement
/// channel (Gamma_d / 2) D[J_z] is returned separately by `measurement_channel`.
std::vector<Channel> environment_channels(const ModelRates& r);
Channel measurement_channel(const ModelRates& r);
/// chi|alpha|^2 J_z
Mat4 coherent_hamiltonian(const ModelRates& r);

}  // namespace qfb
