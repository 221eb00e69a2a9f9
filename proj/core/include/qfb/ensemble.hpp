#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qfb/feedback.hpp"
#include "qfb/model.hpp"
#include "qfb/sde.hpp"

namespace qfb {

struct EnsembleOptions {
  unsigned workers = 1;
  /// Keep full records for stream ids below this bound (for per-trajectory output).
  std::size_t keep_trajectories = 0;
  /// Abort threshold on the fraction of failed trajectories.
  double max_failure_fraction = 0.01;
  /// Called after each finished trajectory with (done, total); may run on any worker.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Per-sample statistics over the successful trajectories.
///
/// Two conventions are reported side by side: the mean of per-trajectory
/// metrics, E[C(rho_c)], and metrics of the averaged state, C(E[rho_c]).
struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_concurrence;
  std::vector<double> std_concurrence;  // sample standard deviation
  std::vector<double> mean_fidelity;
  std::vector<double> std_fidelity;
  std::vector<double> concurrence_of_mean_state;
  std::vector<double> fidelity_of_mean_state;
  std::vector<double> purity_of_mean_state;
  std::vector<Mat4> mean_state;

  std::size_t n_trajectories = 0;  // successful
  std::size_t failure_count = 0;
  std::vector<DeathEvent> deaths;  // one per successful trajectory, stream order
  std::vector<TrajectoryRecord> kept;

  double standard_error_concurrence(std::size_t i) const;
  double standard_error_fidelity(std::size_t i) const;
};

class EnsembleFailure : public std::runtime_error {
 public:
  EnsembleFailure(const std::string& what, std::size_t failures, std::size_t total)
      : std::runtime_error(what), failures_(failures), total_(total) {}
  std::size_t failures() const { return failures_; }
  std::size_t total() const { return total_; }

 private:
  std::size_t failures_;
  std::size_t total_;
};

/// Runs stream ids 0..n_traj-1. Trajectories are processed in fixed-size
/// chunks whose partial sums are merged in stream order, so the result is
/// bit-identical for any worker count.
EnsembleStats run_ensemble(const ModelRates& model, const FeedbackConfig& fb, const IntegratorConfig& cfg,
                           std::size_t n_traj, std::uint64_t seed, const DensityMatrix& rho0,
                           const EnsembleOptions& opts = {});

struct SuddenDeathSummary {
  std::size_t n = 0;
  std::size_t dead = 0;
  std::size_t jumps = 0;
  double death_fraction = 0.0;
  std::vector<double> bin_edges;     // histogram of first-death times over [0, t_end]
  std::vector<std::size_t> counts;
};

SuddenDeathSummary sudden_death_stats(std::span<const DeathEvent> deaths, double t_end, std::size_t bins = 30);

struct StateSeries {
  std::vector<double> times;
  std::vector<Mat4> states;
};

/// Unconditional master equation on the sampling grid of `cfg`.
StateSeries lindblad_solve(const ModelRates& model, const IntegratorConfig& cfg, const DensityMatrix& rho0);

}  // namespace qfb
