#include "kinklab/ansatz.hpp"
#include "kinklab/interaction.hpp"
#include "kinklab/lattice.hpp"
#include "kinklab/spectral.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace kinklab;

namespace {

constexpr double v24 = 1.0 / 24.0;

void BM_LatticeRk4(benchmark::State& st) {
  const double eps = 0.1;
  const long H = st.range(0);
  const AnsatzFields a = AnsatzFields::make(eps, BackgroundField::kink(make_slow_grid(eps, 2.2 * eps * H), v24));
  const LatticeState s0 = initial_lattice_state(a, -H, H);
  EvolveConfig cfg;
  cfg.guard_boundary = false;
  for (auto _ : st) {
    // 100 steps of size 0.05
    evolve_lattice(s0, {5.0}, cfg, [](const LatticeState& s, double) { benchmark::DoNotOptimize(s.u[0]); });
  }
  st.SetItemsProcessed(st.iterations() * 100 * (2 * H + 1));
}
BENCHMARK(BM_LatticeRk4)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void BM_SpectralDerivative(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const UniformGrid g = UniformGrid::centered(80.0 / static_cast<double>(n), n);
  const GridFunction f = GridFunction::from_function(g, [](double x) { return std::exp(-x * x / 8); });
  for (auto _ : st) benchmark::DoNotOptimize(spectral_derivative(f, 3));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SpectralDerivative)->RangeMultiplier(4)->Range(256, 16384);

void BM_MkdvPerturbedKink(benchmark::State& st) {
  const UniformGrid g = UniformGrid::centered(80.0 / 1024.0, 1024);
  const TanhReference ref = TanhReference::kink(v24, true);
  const BackgroundField f0 = BackgroundField::from_total(
      g, ref, [&](double X) { return ref.value(X, 0.0) + 0.05 * std::exp(-(X - 2) * (X - 2)); }, 0.0);
  SolverConfig sc;
  sc.dt_slow = 1e-3;
  for (auto _ : st) benchmark::DoNotOptimize(evolve_mkdv(f0, {0.1}, sc));
}
BENCHMARK(BM_MkdvPerturbedKink)->Unit(benchmark::kMillisecond);

void BM_PhiPanel(benchmark::State& st) {
  const UniformGrid g = UniformGrid::centered(0.05, 2048);
  const BackgroundField f = BackgroundField::kink(g, v24);
  const LocalizedField gp = gaussian_pulse(g, 0.3, 2.0);
  const double eps = 0.1, c = wave_speed(eps, f.f_plus());
  const UniformGrid xg = make_xi_grid(0.05, 10.0, 1.0, 20.0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_phi_psi(f, gp, xg, {1.0}, eps, c));
  st.SetItemsProcessed(st.iterations() * 100);  // panels of width 0.01
}
BENCHMARK(BM_PhiPanel)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
