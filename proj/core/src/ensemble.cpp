#include "qfb/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace qfb {

namespace {

// Chunk size is part of the summation order and must not depend on workers.
constexpr std::size_t kChunk = 8;

struct Accumulator {
  explicit Accumulator(std::size_t samples)
      : c(samples), c2(samples), f(samples), f2(samples), rho(samples) {}

  std::vector<double> c, c2, f, f2;
  std::vector<Mat4> rho;
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::vector<DeathEvent> deaths;
  std::vector<TrajectoryRecord> kept;

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] += o.c[i];
      c2[i] += o.c2[i];
      f[i] += o.f[i];
      f2[i] += o.f2[i];
      rho[i] += o.rho[i];
    }
    ok += o.ok;
    failed += o.failed;
    deaths.insert(deaths.end(), o.deaths.begin(), o.deaths.end());
  }
};

}  // namespace

double EnsembleStats::standard_error_concurrence(std::size_t i) const {
  return n_trajectories > 0 ? std_concurrence[i] / std::sqrt(static_cast<double>(n_trajectories)) : 0.0;
}

double EnsembleStats::standard_error_fidelity(std::size_t i) const {
  return n_trajectories > 0 ? std_fidelity[i] / std::sqrt(static_cast<double>(n_trajectories)) : 0.0;
}

EnsembleStats run_ensemble(const ModelRates& model, const FeedbackConfig& fb, const IntegratorConfig& cfg,
                           std::size_t n_traj, std::uint64_t seed, const DensityMatrix& rho0,
                           const EnsembleOptions& opts) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  cfg.validate();
  model.validate();
  fb.validate();

  const std::size_t samples = cfg.sample_count();
  const std::size_t n_chunks = (n_traj + kChunk - 1) / kChunk;
  std::vector<std::optional<Accumulator>> chunks(n_chunks);
  std::vector<TrajectoryRecord> kept(std::min(opts.keep_trajectories, n_traj));

  std::atomic<std::size_t> next_chunk{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t ci = next_chunk.fetch_add(1);
        if (ci >= n_chunks) return;
        Accumulator acc(samples);
        const std::size_t lo = ci * kChunk;
        const std::size_t hi = std::min(lo + kChunk, n_traj);
        for (std::size_t id = lo; id < hi; ++id) {
          RngStream rng(seed, id);
          std::vector<Mat4> states(samples);
          auto rec = run_trajectory(model, fb, cfg, rng, rho0,
                                    [&](std::size_t i, const DensityMatrix& s) { states[i] = s.mat(); });
          if (!rec.ok() || rec.times.size() != samples) {
            ++acc.failed;
          } else {
            for (std::size_t i = 0; i < samples; ++i) {
              acc.c[i] += rec.concurrence[i];
              acc.c2[i] += rec.concurrence[i] * rec.concurrence[i];
              acc.f[i] += rec.fidelity[i];
              acc.f2[i] += rec.fidelity[i] * rec.fidelity[i];
              acc.rho[i] += states[i];
            }
            ++acc.ok;
            acc.deaths.push_back(rec.death);
          }
          if (id < kept.size()) kept[id] = std::move(rec);
          const std::size_t d = done.fetch_add(1) + 1;
          if (opts.progress) opts.progress(d, n_traj);
        }
        chunks[ci].emplace(std::move(acc));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next_chunk.store(n_chunks);
    }
  };

  const unsigned n_workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(n_chunks)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  Accumulator total(samples);
  for (const auto& ch : chunks) total.merge(*ch);

  const std::size_t failures = total.failed;
  if (static_cast<double>(failures) > opts.max_failure_fraction * static_cast<double>(n_traj) ||
      total.ok == 0) {
    throw EnsembleFailure("run_ensemble: " + std::to_string(failures) + " of " + std::to_string(n_traj) +
                              " trajectories failed",
                          failures, n_traj);
  }

  EnsembleStats st;
  st.n_trajectories = total.ok;
  st.failure_count = failures;
  st.deaths = std::move(total.deaths);
  st.kept = std::move(kept);

  const double n = static_cast<double>(total.ok);
  const Ket target = bell_state(cfg.target);
  auto sample_std = [n](double sum, double sum2) {
    if (n < 2.0) return 0.0;
    const double var = (sum2 - sum * sum / n) / (n - 1.0);
    return std::sqrt(std::max(var, 0.0));
  };

  st.times.resize(samples);
  st.mean_concurrence.resize(samples);
  st.std_concurrence.resize(samples);
  st.mean_fidelity.resize(samples);
  st.std_fidelity.resize(samples);
  st.concurrence_of_mean_state.resize(samples);
  st.fidelity_of_mean_state.resize(samples);
  st.purity_of_mean_state.resize(samples);
  st.mean_state.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    st.times[i] = cfg.sample_time(i);
    st.mean_concurrence[i] = total.c[i] / n;
    st.std_concurrence[i] = sample_std(total.c[i], total.c2[i]);
    st.mean_fidelity[i] = total.f[i] / n;
    st.std_fidelity[i] = sample_std(total.f[i], total.f2[i]);
    const Mat4 mean = hermitian_part(total.rho[i] * (1.0 / n));
    st.mean_state[i] = mean;
    const auto avg = DensityMatrix::unchecked(mean);
    st.concurrence_of_mean_state[i] = concurrence(avg);
    st.fidelity_of_mean_state[i] = fidelity_to(avg, target);
    st.purity_of_mean_state[i] = purity(avg);
  }
  return st;
}

SuddenDeathSummary sudden_death_stats(std::span<const DeathEvent> deaths, double t_end, std::size_t bins) {
  SuddenDeathSummary s;
  s.n = deaths.size();
  bins = std::max<std::size_t>(bins, 1);
  s.counts.assign(bins, 0);
  s.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) s.bin_edges[b] = t_end * static_cast<double>(b) / static_cast<double>(bins);

  for (const auto& d : deaths) {
    if (!d.time) continue;
    ++s.dead;
    if (d.jump) ++s.jumps;
    auto b = static_cast<std::size_t>(*d.time / t_end * static_cast<double>(bins));
    s.counts[std::min(b, bins - 1)] += 1;
  }
  s.death_fraction = s.n ? static_cast<double>(s.dead) / static_cast<double>(s.n) : 0.0;
  return s;
}

StateSeries lindblad_solve(const ModelRates& model, const IntegratorConfig& cfg, const DensityMatrix& rho0) {
  StateSeries out;
  out.times.reserve(cfg.sample_count());
  out.states.reserve(cfg.sample_count());
  integrate_unconditional(model, cfg, rho0, [&](std::size_t i, const DensityMatrix& s) {
    out.times.push_back(cfg.sample_time(i));
    out.states.push_back(s.mat());
  });
  return out;
}

}  // namespace qfb
