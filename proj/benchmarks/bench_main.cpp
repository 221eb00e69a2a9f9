#include <benchmark/benchmark.h>

#include <random>

#include "qfb/ensemble.hpp"
#include "qfb/feedback.hpp"
#include "qfb/sde.hpp"

namespace {

qfb::ModelRates rates() {
  auto r = qfb::ModelRates::with_efficiency(1.0, 1.0);
  r.gamma_p = 1.0;
  r.gamma_relax = {0.1, 0.1};
  return r;
}

qfb::Mat4 mixed_state() {
  const qfb::Mat4 bell = qfb::bell_state(qfb::BellState::Phi_plus).projector();
  return 0.7 * bell + 0.3 * qfb::DensityMatrix::from_ket(qfb::separable_plus_state()).mat();
}

void BM_KrausUpdate(benchmark::State& state) {
  const qfb::KrausUpdate k(rates(), 1e-3);
  qfb::Mat4 rho = mixed_state();
  double dI = 0.01;
  for (auto _ : state) {
    qfb::Mat4 next = k.apply(rho, dI);
    benchmark::DoNotOptimize(next);
    dI = -dI;
  }
}
BENCHMARK(BM_KrausUpdate);

void BM_EulerStep(benchmark::State& state) {
  const auto r = rates();
  qfb::IntegratorConfig cfg;
  const qfb::Mat4 rho = mixed_state();
  for (auto _ : state) {
    qfb::Mat4 next = qfb::step(rho, qfb::qte_drift(rho, r), qfb::qte_diffusion(rho, r), 0.01, cfg);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_EulerStep);

void BM_Concurrence(benchmark::State& state) {
  const auto rho = qfb::DensityMatrix::unchecked(mixed_state());
  for (auto _ : state) benchmark::DoNotOptimize(qfb::concurrence(rho));
}
BENCHMARK(BM_Concurrence);

void BM_HermitianEigensystem(benchmark::State& state) {
  const qfb::Mat4 rho = mixed_state();
  for (auto _ : state) {
    auto es = qfb::hermitian_eigensystem(rho);
    benchmark::DoNotOptimize(es);
  }
}
BENCHMARK(BM_HermitianEigensystem);

void BM_FilterUpdate(benchmark::State& state) {
  qfb::FilterParams p;
  p.gamma_ft = 0.006;
  p.window_T = 2.0;
  p.recursive = state.range(0) != 0;
  qfb::CurrentFilter f(p, 1e-3, 2.0);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n01(0.0, std::sqrt(1e-3));
  std::vector<double> input(4096);
  for (auto& x : input) x = n01(gen);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(f.update(input[i++ & 4095]));
}
BENCHMARK(BM_FilterUpdate)->Arg(0)->Arg(1)->ArgName("recursive");

void BM_Trajectory(benchmark::State& state) {
  const auto r = rates();
  qfb::FeedbackConfig fb;
  fb.strategy = static_cast<qfb::Strategy>(state.range(0));
  fb.u = fb.strategy == qfb::Strategy::filtered_current ? 10.0 : 1.0;
  qfb::IntegratorConfig cfg;
  cfg.t_end = 1.0;
  std::uint64_t id = 0;
  for (auto _ : state) {
    qfb::RngStream rng(1, id++);
    auto rec = qfb::run_trajectory(r, fb, cfg, rng, qfb::default_initial_state());
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.step_count()));
}
BENCHMARK(BM_Trajectory)
    ->Arg(static_cast<int>(qfb::Strategy::none))
    ->Arg(static_cast<int>(qfb::Strategy::markovian_direct))
    ->Arg(static_cast<int>(qfb::Strategy::state_estimate))
    ->Arg(static_cast<int>(qfb::Strategy::filtered_current))
    ->ArgName("strategy")
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
