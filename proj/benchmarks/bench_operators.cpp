#include <benchmark/benchmark.h>

#include "spinflow/flow.hpp"
#include "spinflow/twisted_dirac.hpp"
#include "spinflow/verify.hpp"

namespace {

using namespace spinflow;

MapField make_map(int n) {
  TorusDomain dom(2.0 * M_PI, 2.0 * M_PI, n, n);
  auto torus = make_clifford_torus();
  return perturb_map(constant_map(dom, torus, torus->project(Eigen::Vector4d(1, 0, 1, 0))), 0.05,
                     42);
}

void bm_assemble(benchmark::State& state) {
  MapField u = make_map(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    TwistedDiracOperator op(u, spin_pp);
    benchmark::DoNotOptimize(op.matrix(DiracBlock::holomorphic));
  }
}
BENCHMARK(bm_assemble)->Arg(8)->Arg(16);

void bm_eigensolve(benchmark::State& state) {
  MapField u = make_map(static_cast<int>(state.range(0)));
  TwistedDiracOperator op(u, spin_pp);
  op.matrix(DiracBlock::holomorphic);
  for (auto _ : state) {
    SpectralData data = eigen_solve(op, DiracBlock::holomorphic);
    benchmark::DoNotOptimize(data.eigenvalues);
  }
}
BENCHMARK(bm_eigensolve)->Arg(8)->Arg(16);

void bm_apply_dirac(benchmark::State& state) {
  MapField u = make_map(static_cast<int>(state.range(0)));
  SpectralKit kit(u.domain);
  TwistedSpinorField psi = random_tangential_field(u, spin_pp, 7);
  for (auto _ : state) {
    TwistedSpinorField out = apply_dirac(kit, u, psi);
    benchmark::DoNotOptimize(out.values);
  }
}
BENCHMARK(bm_apply_dirac)->Arg(8)->Arg(16)->Arg(32);

void bm_flow_step(benchmark::State& state) {
  MapField u = make_map(static_cast<int>(state.range(0)));
  FlowConfig cfg;
  cfg.spin = spin_pp;
  cfg.alpha = 1.05;
  FlowEngine engine(u.domain, u.target, cfg);
  FlowState st = engine.initial_state(u, nullptr);
  for (auto _ : state) {
    FlowState next = engine.step(st);
    benchmark::DoNotOptimize(next.u);
  }
}
BENCHMARK(bm_flow_step)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
