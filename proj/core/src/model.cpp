#include "qfb/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfb {

namespace {

const Mat4& jz() {
  static const Mat4 op = collective_op(CollectiveKind::Jz);
  return op;
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

DerivedRates derive_rates(const PhysicalParams& p) {
  if (p.detuning == 0.0) throw std::invalid_argument("derive_rates: detuning must be nonzero");
  if (!(p.kappa > 0.0)) throw std::invalid_argument("derive_rates: kappa must be positive");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw std::invalid_argument("derive_rates: eta must lie in (0, 1]");

  DerivedRates d;
  d.chi = p.g * p.g / p.detuning;
  d.lambda = p.g / p.detuning;
  d.alpha = cplx{0.0, -2.0 * p.epsilon / p.kappa};
  d.Gamma_d = 8.0 * std::norm(d.alpha) * d.chi * d.chi / p.kappa;
  d.gamma_p = p.kappa * d.lambda * d.lambda;
  d.Gamma_m = 2.0 * p.eta * d.Gamma_d;
  d.dispersive_warning = std::abs(d.lambda) > 0.1;
  return d;
}

std::string_view to_string(PurcellSign s) { return s == PurcellSign::minus ? "minus" : "plus"; }

PurcellSign parse_purcell_sign(std::string_view name) {
  if (name == "minus") return PurcellSign::minus;
  if (name == "plus") return PurcellSign::plus;
  throw std::invalid_argument("unknown Purcell sign '" + std::string(name) + "'");
}

ModelRates ModelRates::with_efficiency(double Gamma_d, double eta) {
  ModelRates r;
  r.Gamma_d = Gamma_d;
  r.Gamma_m = 2.0 * eta * Gamma_d;
  return r;
}

ModelRates ModelRates::from_physical(const PhysicalParams& p) {
  const auto d = derive_rates(p);
  ModelRates r;
  r.chi_alpha2 = d.chi_alpha2();
  r.Gamma_d = d.Gamma_d;
  r.Gamma_m = d.Gamma_m;
  r.gamma_p = d.gamma_p;
  return r;
}

void ModelRates::validate() const {
  if (!std::isfinite(chi_alpha2)) throw std::invalid_argument("rates: chi_alpha2 must be finite");
  if (!finite_nonneg(Gamma_d)) throw std::invalid_argument("rates: Gamma_d must be >= 0");
  if (!finite_nonneg(Gamma_m)) throw std::invalid_argument("rates: Gamma_m must be >= 0");
  if (!finite_nonneg(gamma_p)) throw std::invalid_argument("rates: gamma_p must be >= 0");
  for (double g : gamma_relax)
    if (!finite_nonneg(g)) throw std::invalid_argument("rates: relaxation rates must be >= 0");
  for (double g : gamma_phi)
    if (!finite_nonneg(g)) throw std::invalid_argument("rates: dephasing rates must be >= 0");
  if (Gamma_m > 2.0 * Gamma_d * (1.0 + 1e-12))
    throw std::invalid_argument("rates: Gamma_m exceeds 2 Gamma_d (efficiency above 1)");
}

Mat4 dissipator(const Mat4& a, const Mat4& rho) {
  const Mat4 ad = a.adjoint();
  const Mat4 ada = ad * a;
  return a * rho * ad - 0.5 * anticommutator(ada, rho);
}

Mat4 unravel(const Mat4& a, const Mat4& rho) {
  const Mat4 ad = a.adjoint();
  const double mean = expectation(a + ad, rho).real();
  return a * rho + rho * ad - mean * rho;
}

std::vector<Channel> environment_channels(const ModelRates& r) {
  std::vector<Channel> out;
  for (int j = 0; j < 2; ++j) {
    if (r.gamma_relax[j] > 0.0) out.push_back({r.gamma_relax[j], qubit_op(QubitOpKind::minus, j + 1)});
  }
  for (int j = 0; j < 2; ++j) {
    if (r.gamma_phi[j] > 0.0) out.push_back({0.5 * r.gamma_phi[j], qubit_op(QubitOpKind::z, j + 1)});
  }
  if (r.gamma_p > 0.0) {
    const auto kind = r.purcell_sign == PurcellSign::minus ? CollectiveKind::sigma_minus_diff
                                                           : CollectiveKind::sigma_minus_sum;
    out.push_back({r.gamma_p, collective_op(kind)});
  }
  return out;
}

Channel measurement_channel(const ModelRates& r) { return {0.5 * r.Gamma_d, jz()}; }

Mat4 coherent_hamiltonian(const ModelRates& r) { return r.chi_alpha2 * jz(); }

Mat4 qte_drift(const Mat4& rho, const ModelRates& r) {
  Mat4 out = cplx{0.0, -1.0} * commutator(coherent_hamiltonian(r), rho);
  for (const auto& ch : environment_channels(r)) out += ch.rate * dissipator(ch.op, rho);
  const auto meas = measurement_channel(r);
  if (meas.rate > 0.0) out += meas.rate * dissipator(meas.op, rho);
  return out;
}

Mat4 qte_diffusion(const Mat4& rho, const ModelRates& r) {
  if (r.Gamma_m == 0.0) return Mat4::zero();
  return (0.5 * std::sqrt(r.Gamma_m)) * unravel(jz(), rho);
}

MarkovianTerms markovian_fb_terms(const Mat4& rho, const ModelRates& r, const Mat4& feedback) {
  if (hermiticity_error(feedback) > 1e-12)
    throw std::invalid_argument("markovian_fb_terms: feedback operator must be Hermitian");
  const cplx mi{0.0, -1.0};
  auto k = [&](const Mat4& x) { return mi * commutator(feedback, x); };

  const Mat4 sym = jz() * rho + rho * jz();
  MarkovianTerms t;
  t.drift_extra = (0.5 * std::sqrt(r.Gamma_m)) * k(sym) + 0.5 * k(k(rho));
  t.diffusion_extra = k(rho);
  return t;
}

}  // namespace qfb
