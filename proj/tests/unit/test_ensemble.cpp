#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>

#include "qfb/ensemble.hpp"
#include "support.hpp"

using namespace qfb;
using qfb::test::approx_equal;

namespace {

ModelRates noisy_rates() {
  ModelRates r = ModelRates::with_efficiency(1.0, 1.0);
  r.gamma_p = 1.0;
  r.gamma_relax = {0.1, 0.1};
  return r;
}

FeedbackConfig estimate_feedback() {
  FeedbackConfig fb;
  fb.strategy = Strategy::state_estimate;
  fb.u = 1.0;
  return fb;
}

IntegratorConfig short_run(double t_end) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  return cfg;
}

double sample_std(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / (x.size() - 1));
}

}  // namespace

TEST_CASE("a one-trajectory ensemble is that trajectory") {
  const auto r = noisy_rates();
  const auto fb = estimate_feedback();
  const auto cfg = short_run(2.0);
  const auto stats = run_ensemble(r, fb, cfg, 1, 11, default_initial_state());
  RngStream rng(11, 0);
  const auto rec = run_trajectory(r, fb, cfg, rng, default_initial_state());
  CHECK(stats.n_trajectories == 1);
  CHECK(stats.times == rec.times);
  CHECK(stats.mean_concurrence == rec.concurrence);
  CHECK(stats.mean_fidelity == rec.fidelity);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    CHECK(stats.std_concurrence[i] == 0.0);
    CHECK(stats.concurrence_of_mean_state[i] == rec.concurrence[i]);
  }
}

TEST_CASE("results do not depend on the worker count") {
  const auto r = noisy_rates();
  const auto fb = estimate_feedback();
  const auto cfg = short_run(1.0);
  EnsembleOptions one, many;
  many.workers = 4;
  const auto a = run_ensemble(r, fb, cfg, 37, 5, default_initial_state(), one);
  const auto b = run_ensemble(r, fb, cfg, 37, 5, default_initial_state(), many);
  CHECK(a.mean_concurrence == b.mean_concurrence);
  CHECK(a.std_concurrence == b.std_concurrence);
  CHECK(a.mean_fidelity == b.mean_fidelity);
  CHECK(a.concurrence_of_mean_state == b.concurrence_of_mean_state);
  CHECK(a.purity_of_mean_state == b.purity_of_mean_state);
  CHECK(a.deaths == b.deaths);
}

TEST_CASE("kept trajectories and progress reports") {
  EnsembleOptions opts;
  opts.workers = 3;
  opts.keep_trajectories = 4;
  std::atomic<std::size_t> calls{0}, wrong_total{0};
  opts.progress = [&](std::size_t, std::size_t total) {
    wrong_total += total != 20;
    ++calls;
  };
  const auto stats = run_ensemble(noisy_rates(), estimate_feedback(), short_run(0.5), 20, 3, default_initial_state(), opts);
  CHECK(calls == 20);
  CHECK(wrong_total == 0);
  REQUIRE(stats.kept.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(stats.kept[i].stream_id == i);
}

TEST_CASE("mean-state metrics against mean metrics") {
  const auto stats = run_ensemble(noisy_rates(), estimate_feedback(), short_run(5.0), 64, 9, default_initial_state());
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    // concurrence is convex, fidelity is linear
    CHECK(stats.concurrence_of_mean_state[i] <= stats.mean_concurrence[i] + 1e-12);
    CHECK(stats.fidelity_of_mean_state[i] == doctest::Approx(stats.mean_fidelity[i]).epsilon(1e-12));
    CHECK(stats.mean_state[i].trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats.purity_of_mean_state[i] <= 1.0 + 1e-12);
  }
}

TEST_CASE("standard errors follow the sample spread") {
  const auto stats = run_ensemble(noisy_rates(), estimate_feedback(), short_run(2.0), 50, 13, default_initial_state());
  const std::size_t i = stats.times.size() - 1;
  CHECK(stats.std_concurrence[i] > 0.0);
  CHECK(stats.standard_error_concurrence(i) == doctest::Approx(stats.std_concurrence[i] / std::sqrt(50.0)));
  CHECK(stats.standard_error_fidelity(i) == doctest::Approx(stats.std_fidelity[i] / std::sqrt(50.0)));
}

TEST_CASE("the spread of the ensemble mean shrinks as one over root n") {
  const auto r = noisy_rates();
  const auto fb = estimate_feedback();
  const auto cfg = short_run(0.3);
  EnsembleOptions opts;
  opts.workers = 4;
  std::vector<double> spread;
  for (std::size_t n : {125u, 500u, 2000u}) {
    std::vector<double> means;
    for (std::uint64_t batch = 0; batch < 16; ++batch)
      means.push_back(run_ensemble(r, fb, cfg, n, 1000 + batch, default_initial_state(), opts).mean_fidelity.back());
    spread.push_back(sample_std(means));
  }
  for (std::size_t k = 0; k + 1 < spread.size(); ++k) {
    const double ratio = spread[k] / spread[k + 1];
    CHECK(ratio > 2.0 / 1.5);
    CHECK(ratio < 2.0 * 1.5);
  }
}

TEST_CASE("averaged conditional states follow the unconditional solve") {
  ModelRates r = ModelRates::with_efficiency(1.0, 1.0);
  r.gamma_relax = {0.1, 0.2};
  const auto cfg = short_run(2.0);
  EnsembleOptions opts;
  opts.workers = 4;
  const auto stats = run_ensemble(r, {}, cfg, 400, 21, default_initial_state(), opts);
  const auto exact = lindblad_solve(r, cfg, default_initial_state());
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.states.size(); ++i)
    worst = std::max(worst, (stats.mean_state[i] - exact.states[i]).max_abs());
  // loose bound for n = 400; the 0.02 bound at n = 2000 is an acceptance criterion
  CHECK(worst < 0.05);
}

TEST_CASE("no deaths without dynamics") {
  ModelRates r;
  r.Gamma_d = 0.0;
  r.Gamma_m = 0.0;
  const auto stats =
      run_ensemble(r, {}, short_run(1.0), 10, 1, DensityMatrix::from_ket(bell_state(BellState::Phi_plus)));
  for (const auto& d : stats.deaths) CHECK_FALSE(d.time);
  const auto summary = sudden_death_stats(stats.deaths, 1.0);
  CHECK(summary.n == 10);
  CHECK(summary.dead == 0);
  CHECK(summary.death_fraction == 0.0);
}

TEST_CASE("sudden death summary") {
  std::vector<DeathEvent> ev(4);
  ev[0].time = 0.5;
  ev[1].time = 2.9;
  ev[1].jump = true;
  ev[3].time = 3.0;
  const auto s = sudden_death_stats(ev, 3.0, 3);
  CHECK(s.n == 4);
  CHECK(s.dead == 3);
  CHECK(s.jumps == 1);
  CHECK(s.death_fraction == doctest::Approx(0.75));
  REQUIRE(s.bin_edges.size() == 4);
  CHECK(s.bin_edges.front() == 0.0);
  CHECK(s.bin_edges.back() == 3.0);
  CHECK(s.counts == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("unconditional solve") {
  ModelRates r;
  r.Gamma_d = 0.0;
  r.Gamma_m = 0.0;
  r.gamma_relax = {0.5, 0.0};
  IntegratorConfig cfg = short_run(2.0);
  const auto series = lindblad_solve(r, cfg, DensityMatrix::from_ket(Ket::basis(2)));
  REQUIRE(series.states.size() == cfg.sample_count());
  for (std::size_t i = 0; i < series.times.size(); ++i)
    CHECK(series.states[i](2, 2).real() == doctest::Approx(std::exp(-0.5 * series.times[i])).epsilon(1e-3));

  ModelRates dark = ModelRates::with_efficiency(1.0, 1.0);
  dark.gamma_p = 1.0;
  const auto target = DensityMatrix::from_ket(bell_state(BellState::Phi_plus));
  const auto fixed = lindblad_solve(dark, cfg, target);
  CHECK(approx_equal(fixed.states.back(), target.mat(), 1e-13));
}

TEST_CASE("ensemble aborts when too many trajectories fail") {
  ModelRates r = ModelRates::with_efficiency(20.0, 1.0);
  IntegratorConfig cfg = short_run(2.0);
  cfg.scheme = Scheme::euler_maruyama;
  cfg.dt = 0.05;
  cfg.record_stride = 1;
  try {
    run_ensemble(r, {}, cfg, 16, 1, default_initial_state());
    FAIL("expected EnsembleFailure");
  } catch (const EnsembleFailure& e) {
    CHECK(e.total() == 16);
    CHECK(e.failures() > 0);
  }
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(run_ensemble(noisy_rates(), {}, short_run(1.0), 0, 1, default_initial_state()),
                  std::invalid_argument);
  IntegratorConfig bad;
  bad.dt = -1.0;
  CHECK_THROWS_AS(run_ensemble(noisy_rates(), {}, bad, 4, 1, default_initial_state()), std::invalid_argument);
}
