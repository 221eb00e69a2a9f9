#include "qfb/sde.hpp"

#include <cmath>
#include <string>

namespace qfb {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed;
  std::uint64_t mix = splitmix64(s) ^ (stream_id * 0xD1B54A32D192ED03ULL);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(mix);
    words[i] = static_cast<std::uint32_t>(v);
    words[i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

const Mat4& jz_op() {
  static const Mat4 op = collective_op(CollectiveKind::Jz);
  return op;
}

double jz_mean(const Mat4& rho) { return 2.0 * (rho(0, 0).real() - rho(3, 3).real()); }

// T = M rho, then T M^+
Mat4 sandwich(const Mat4& m, const Mat4& rho) {
  const Mat4 t = m * rho;
  Mat4 out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < 4; ++k) s += t(i, k) * std::conj(m(j, k));
      out(i, j) = s;
    }
  return out;
}

Mat4 clip_negative(const Eigensystem& es) {
  Mat4 out;
  double total = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    const double lam = std::max(es.values[n], 0.0);
    total += lam;
    if (lam == 0.0) continue;
    const auto& v = es.vectors[n];
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) out(i, j) += lam * v[i] * std::conj(v[j]);
  }
  return out * (1.0 / total);
}

}  // namespace

std::string_view to_string(Scheme s) { return s == Scheme::kraus ? "kraus" : "euler_maruyama"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "kraus") return Scheme::kraus;
  if (name == "euler_maruyama") return Scheme::euler_maruyama;
  throw std::invalid_argument("unknown integration scheme '" + std::string(name) + "'");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrator.dt must be > 0");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw std::invalid_argument("integrator.t_end must be >= dt");
  if (record_stride < 1) throw std::invalid_argument("integrator.record_stride must be >= 1");
  if (!(positivity_tol >= 0.0)) throw std::invalid_argument("integrator.positivity_tol must be >= 0");
  if (!(death.zero_tol >= 0.0)) throw std::invalid_argument("death.zero_tol must be >= 0");
}

std::size_t IntegratorConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

double IntegratorConfig::sample_time(std::size_t i) const {
  return static_cast<double>(i * static_cast<std::size_t>(record_stride)) * dt;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double wiener_increment(RngStream& rng, double dt) { return std::sqrt(dt) * rng.gaussian(); }

double homodyne_increment(const Mat4& rho, const ModelRates& r, double dW, double dt) {
  return std::sqrt(r.Gamma_m) * expectation(jz_op(), rho).real() * dt + dW;
}

Mat4 enforce_state(const Mat4& rho, const IntegratorConfig& cfg, double t, bool check_positivity) {
  Mat4 out = cfg.hermitize ? hermitian_part(rho) : rho;
  if (!out.is_finite()) throw IntegrationFailure("non-finite state", t, std::nan(""));
  if (cfg.renormalize) {
    const double tr = out.trace().real();
    if (!(tr > 0.0)) throw IntegrationFailure("non-positive trace", t, std::nan(""));
    out *= 1.0 / tr;
  }
  if (check_positivity) {
    const auto es = hermitian_eigensystem(hermitian_part(out));
    const double lo = es.values[0];
    if (lo < -cfg.positivity_tol)
      throw IntegrationFailure("positivity violation: min eigenvalue " + std::to_string(lo), t, lo);
    if (lo < 0.0) out = clip_negative(es);
  }
  return out;
}

Mat4 step(const Mat4& rho, const Mat4& drift, const Mat4& diffusion, double dW, const IntegratorConfig& cfg,
          double t) {
  Mat4 next = rho;
  next += drift * cfg.dt;
  next += diffusion * dW;
  return enforce_state(next, cfg, t, true);
}

KrausUpdate::KrausUpdate(const ModelRates& r, double dt)
    : dt_(dt), meas_linear_(0.5 * std::sqrt(r.Gamma_m)), meas_quadratic_(r.Gamma_m / 8.0) {
  const auto env = environment_channels(r);
  const auto meas = measurement_channel(r);

  Mat4 decay = meas.rate * (meas.op.adjoint() * meas.op);
  for (const auto& ch : env) decay += ch.rate * (ch.op.adjoint() * ch.op);
  const cplx i{0.0, 1.0};
  m0_ = Mat4::identity() - (i * coherent_hamiltonian(r) + 0.5 * decay) * dt;

  // unmonitored Kraus operators, including the (1 - eta) share of J_z dephasing
  std::vector<Channel> unmonitored = env;
  const double residual = meas.rate - r.Gamma_m / 4.0;
  if (residual > 1e-15) unmonitored.push_back({residual, meas.op});

  std::array<cplx, 256> dense{};
  for (const auto& ch : unmonitored) {
    const double w = ch.rate * dt;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t k = 0; k < 4; ++k) {
        const cplx lak = ch.op(a, k);
        if (lak == cplx{}) continue;
        for (std::size_t b = 0; b < 4; ++b)
          for (std::size_t l = 0; l < 4; ++l) {
            const cplx lbl = ch.op(b, l);
            if (lbl == cplx{}) continue;
            dense[(a * 4 + b) * 16 + (k * 4 + l)] += w * lak * std::conj(lbl);
          }
      }
  }
  for (std::size_t o = 0; o < 16; ++o)
    for (std::size_t n = 0; n < 16; ++n)
      if (dense[o * 16 + n] != cplx{})
        jumps_.push_back({static_cast<std::uint8_t>(o), static_cast<std::uint8_t>(n), dense[o * 16 + n]});
}

Mat4 KrausUpdate::apply(const Mat4& rho, double dI) const {
  // J_z = diag(2, 0, 0, -2)
  const double lin = meas_linear_ * dI;
  const double quad = meas_quadratic_ * (dI * dI - dt_);
  Mat4 m = m0_;
  m(0, 0) += 2.0 * lin + 4.0 * quad;
  m(3, 3) += -2.0 * lin + 4.0 * quad;

  Mat4 out = sandwich(m, rho);
  for (const auto& term : jumps_) out.a[term.out] += term.w * rho.a[term.in];
  return out;
}

UnitaryFamily::UnitaryFamily(const Mat4& generator) : es_(hermitian_eigensystem(generator)) {}

Mat4 UnitaryFamily::at(double theta) const {
  Mat4 u;
  for (std::size_t n = 0; n < 4; ++n) {
    const cplx ph = std::polar(1.0, -theta * es_.values[n]);
    const auto& v = es_.vectors[n];
    for (std::size_t i = 0; i < 4; ++i) {
      const cplx vi = ph * v[i];
      for (std::size_t j = 0; j < 4; ++j) u(i, j) += vi * std::conj(v[j]);
    }
  }
  return u;
}

DeathEvent detect_death(const std::vector<double>& times, const std::vector<double>& concurrence,
                        const SuddenDeathRule& rule) {
  DeathEvent ev;
  bool armed = false;
  for (std::size_t i = 0; i < concurrence.size(); ++i) {
    const double c = concurrence[i];
    if (!armed) {
      armed = c > rule.arm_threshold;
      continue;
    }
    if (c <= rule.zero_tol) {
      ev.time = times[i];
      ev.jump = i > 0 && concurrence[i - 1] > rule.jump_from;
      break;
    }
  }
  return ev;
}

DensityMatrix default_initial_state() { return DensityMatrix::from_ket(separable_plus_state()); }

namespace {

struct Evolution {
  const ModelRates& model;
  const FeedbackConfig& fb;
  const IntegratorConfig& cfg;
  RngStream* rng;  // null: noise-free
};

// Shared loop for conditional and unconditional evolution. Throws
// IntegrationFailure; metrics are handed to `on_sample`.
template <class OnSample, class OnCurrent>
void evolve(const Evolution& ev, const DensityMatrix& rho0, OnSample&& on_sample, OnCurrent&& on_current) {
  const auto& r = ev.model;
  const auto& fb = ev.fb;
  const auto& cfg = ev.cfg;
  cfg.validate();
  r.validate();
  fb.validate();

  const double dt = cfg.dt;
  const std::size_t steps = cfg.step_count();
  const auto stride = static_cast<std::size_t>(cfg.record_stride);
  const Strategy strategy = fb.strategy;
  const bool kraus = cfg.scheme == Scheme::kraus;
  const double sqrt_gm = std::sqrt(r.Gamma_m);

  const Mat4 unit_op = feedback_operator(fb.op);
  std::optional<UnitaryFamily> unitary;
  if (strategy != Strategy::none && kraus) unitary.emplace(unit_op);
  std::optional<CurrentFilter> filter;
  if (strategy == Strategy::filtered_current) filter.emplace(fb.filter, dt, r.Gamma_m);
  std::optional<KrausUpdate> kraus_update;
  if (kraus) kraus_update.emplace(r, dt);

  const Mat4 scaled_op = fb.u * unit_op;
  const cplx mi{0.0, -1.0};

  Mat4 rho = rho0.mat();
  double t = 0.0;
  double previous_control = 0.0;
  on_sample(std::size_t{0}, 0.0, rho);

  for (std::size_t n = 0; n < steps; ++n) {
    const double jz = jz_mean(rho);
    const double dW = ev.rng ? wiener_increment(*ev.rng, dt) : 0.0;
    const double dI = sqrt_gm * jz * dt + dW;
    on_current(dI);

    double control = 0.0;
    if (strategy == Strategy::state_estimate || strategy == Strategy::filtered_current) {
      ControlSignals sig;
      sig.dI = dI;
      sig.jz = jz;
      if (filter) sig.R = filter->update(dI);
      const double now = control_value(fb, sig);
      control = fb.one_step_delay ? previous_control : now;
      previous_control = now;
    }

    const double t_next = static_cast<double>(n + 1) * dt;
    if (kraus) {
      rho = kraus_update->apply(rho, dI);
      if (strategy == Strategy::markovian_direct) {
        const Mat4 u = unitary->at(fb.u * dI);
        rho = sandwich(u, rho);
      } else if (control != 0.0) {
        const Mat4 u = unitary->at(control * dt);
        rho = sandwich(u, rho);
      }
      rho = enforce_state(rho, cfg, t_next, false);
    } else {
      Mat4 drift = qte_drift(rho, r);
      Mat4 diffusion = ev.rng ? qte_diffusion(rho, r) : Mat4::zero();
      if (strategy == Strategy::markovian_direct) {
        const auto extra = markovian_fb_terms(rho, r, scaled_op);
        drift += extra.drift_extra;
        diffusion += extra.diffusion_extra;
      } else if (control != 0.0) {
        drift += mi * control * commutator(unit_op, rho);
      }
      rho = step(rho, drift, diffusion, dW, cfg, t_next);
    }
    t = t_next;

    if ((n + 1) % stride == 0) {
      if (kraus) rho = enforce_state(rho, cfg, t, true);
      on_sample((n + 1) / stride, t, rho);
    }
  }
}

}  // namespace

TrajectoryRecord run_trajectory(const ModelRates& model, const FeedbackConfig& fb, const IntegratorConfig& cfg,
                                RngStream& rng, const DensityMatrix& rho0, const SampleObserver& observer) {
  TrajectoryRecord rec;
  rec.stream_id = rng.stream_id();
  const std::size_t samples = cfg.sample_count();
  rec.times.reserve(samples);
  rec.concurrence.reserve(samples);
  rec.fidelity.reserve(samples);
  rec.purity.reserve(samples);
  if (cfg.record_current) rec.current.reserve(cfg.step_count());

  const Ket target = bell_state(cfg.target);
  double last_t = 0.0;
  auto on_sample = [&](std::size_t idx, double t, const Mat4& rho) {
    last_t = t;
    const auto state = DensityMatrix::unchecked(rho);
    const double c = concurrence(state);
    rec.times.push_back(t);
    rec.concurrence.push_back(c);
    rec.fidelity.push_back(fidelity_to(state, target));
    rec.purity.push_back(purity(state));
    if (observer) observer(idx, state);
  };
  auto on_current = [&](double dI) {
    if (cfg.record_current) rec.current.push_back(dI);
  };

  try {
    evolve(Evolution{model, fb, cfg, &rng}, rho0, on_sample, on_current);
  } catch (const IntegrationFailure& e) {
    rec.failure = TrajectoryFailure{e.time(), e.min_eigenvalue(), e.what()};
  } catch (const PositivityError& e) {
    rec.failure = TrajectoryFailure{last_t, e.min_eigenvalue(), e.what()};
  }
  rec.death = detect_death(rec.times, rec.concurrence, cfg.death);
  return rec;
}

void integrate_unconditional(const ModelRates& model, const IntegratorConfig& cfg, const DensityMatrix& rho0,
                             const SampleObserver& observer) {
  ModelRates unmonitored = model;
  unmonitored.Gamma_m = 0.0;
  const FeedbackConfig off{};
  auto on_sample = [&](std::size_t idx, double, const Mat4& rho) {
    if (observer) observer(idx, DensityMatrix::unchecked(rho));
  };
  evolve(Evolution{unmonitored, off, cfg, nullptr}, rho0, on_sample, [](double) {});
}

}  // namespace qfb
