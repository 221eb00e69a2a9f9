#pragma once

// Ito integration of a single conditional trajectory.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qfb/feedback.hpp"
#include "qfb/model.hpp"
#include "qfb/qstate.hpp"

namespace qfb {

/// Update rule used by run_trajectory.
///
/// `kraus` writes the step as a normalized completely-positive map,
///   rho' ~ M rho M^+ + sum_k L_k rho L_k^+ dt,
///   M = 1 - (iH + sum L^+L / 2) dt + (sqrt(Gamma_m)/2) J_z dI + (Gamma_m/8) J_z^2 (dI^2 - dt),
/// which agrees with Euler-Maruyama to O(dt) and keeps rho positive. Plain
/// Euler-Maruyama on this equation produces O(dt) negative eigenvalues whenever
/// the state straddles J_z sectors, so it is only used with small measurement
/// rates or for deterministic runs.
enum class Scheme { kraus, euler_maruyama };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

/// Entanglement death bookkeeping: a trajectory is armed once C exceeds
/// `arm_threshold`; it dies at the first later sample with C <= zero_tol. A
/// death is an instantaneous jump when the previous sample had C > jump_from.
struct SuddenDeathRule {
  double arm_threshold = 0.5;
  double jump_from = 0.2;
  double zero_tol = 0.0;

  friend bool operator==(const SuddenDeathRule&, const SuddenDeathRule&) = default;
};

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 30.0;
  int record_stride = 100;
  double positivity_tol = 1e-6;
  bool renormalize = true;
  bool hermitize = true;
  Scheme scheme = Scheme::kraus;
  bool record_current = false;
  BellState target = BellState::Phi_plus;
  SuddenDeathRule death;

  void validate() const;
  std::size_t step_count() const;
  std::size_t sample_count() const { return step_count() / static_cast<std::size_t>(record_stride) + 1; }
  double sample_time(std::size_t i) const;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// Gaussian stream keyed by (seed, stream_id). Identical keys replay identical
/// sequences; distinct stream ids are decorrelated through splitmix64 seeding.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double gaussian() { return normal_(engine_); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// N(0, dt) sample.
double wiener_increment(RngStream& rng, double dt);

/// dI = sqrt(Gamma_m) <J_z> dt + dW
double homodyne_increment(const Mat4& rho, const ModelRates& r, double dW, double dt);

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double t, double min_eigenvalue)
      : std::runtime_error(what), t_(t), min_eigenvalue_(min_eigenvalue) {}
  double time() const { return t_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double t_;
  double min_eigenvalue_;
};

/// Hermitize, renormalize and check positivity as configured. Negative
/// eigenvalues within positivity_tol are clipped; larger ones or non-finite
/// entries raise IntegrationFailure at time `t`.
Mat4 enforce_state(const Mat4& rho, const IntegratorConfig& cfg, double t, bool check_positivity = true);

/// Euler-Maruyama: rho + drift dt + diffusion dW, then enforce_state.
Mat4 step(const Mat4& rho, const Mat4& drift, const Mat4& diffusion, double dW, const IntegratorConfig& cfg,
          double t = 0.0);

/// Measurement-plus-environment update of the Kraus scheme (no feedback,
/// unnormalized). Precomputes everything that does not depend on dI.
class KrausUpdate {
 public:
  KrausUpdate(const ModelRates& r, double dt);
  Mat4 apply(const Mat4& rho, double dI) const;

 private:
  struct Term {
    std::uint8_t out;  // row-major index into the result
    std::uint8_t in;   // row-major index into rho
    cplx w;
  };
  Mat4 m0_;
  double dt_;
  double meas_linear_;     // sqrt(Gamma_m) / 2
  double meas_quadratic_;  // Gamma_m / 8
  std::vector<Term> jumps_;
};

/// exp(-i theta F) for a fixed Hermitian F.
class UnitaryFamily {
 public:
  explicit UnitaryFamily(const Mat4& generator);
  Mat4 at(double theta) const;

 private:
  Eigensystem es_;
};

struct DeathEvent {
  std::optional<double> time;  // first death, if any
  bool jump = false;           // death was an instantaneous jump

  friend bool operator==(const DeathEvent&, const DeathEvent&) = default;
};

struct TrajectoryFailure {
  double time = 0.0;
  double min_eigenvalue = 0.0;
  std::string reason;
};

struct TrajectoryRecord {
  std::uint64_t stream_id = 0;
  std::vector<double> times;
  std::vector<double> concurrence;
  std::vector<double> fidelity;
  std::vector<double> purity;
  std::vector<double> current;  // every dI, when record_current is set
  DeathEvent death;
  std::optional<TrajectoryFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

/// Scan a concurrence series with the given rule.
DeathEvent detect_death(const std::vector<double>& times, const std::vector<double>& concurrence,
                        const SuddenDeathRule& rule);

/// Called once per recorded sample with the sample index and the state.
using SampleObserver = std::function<void(std::size_t, const DensityMatrix&)>;

/// Default starting point: the product state (|0>+|1>)(|0>+|1>)/2.
DensityMatrix default_initial_state();

/// One seeded conditional trajectory. Integration failures do not throw; the
/// record is truncated and carries the failure.
TrajectoryRecord run_trajectory(const ModelRates& model, const FeedbackConfig& fb, const IntegratorConfig& cfg,
                                RngStream& rng, const DensityMatrix& rho0, const SampleObserver& observer = {});

/// Noise-free unconditional evolution: no H[J_z] term and no feedback, with the
/// whole measurement dephasing kept as an ordinary channel. Throws
/// IntegrationFailure on failure.
void integrate_unconditional(const ModelRates& model, const IntegratorConfig& cfg, const DensityMatrix& rho0,
                             const SampleObserver& observer);

}  // namespace qfb
