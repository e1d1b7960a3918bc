#include <memory>

#include <benchmark/benchmark.h>

#include "steklov/factorization.hpp"
#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/measure.hpp"
#include "steklov/mesh.hpp"
#include "steklov/spectral.hpp"
#include "steklov/steklov.hpp"

namespace {

using namespace steklov;

TriMesh prefractal_mesh(int generation, int refinement) {
  PrefractalSpec spec;
  spec.generation = generation;
  return mesh_polyomino(build_domain(spec), refinement);
}

std::shared_ptr<const OperatorSet> prefractal_ops(int generation, int refinement) {
  const TriMesh mesh = prefractal_mesh(generation, refinement);
  return std::make_shared<const OperatorSet>(assemble(mesh, arclength_measure(mesh, TagSet::all())));
}

void BM_Mesh(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(prefractal_mesh(2, r));
}
BENCHMARK(BM_Mesh)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Assembly(benchmark::State& state) {
  const TriMesh mesh = prefractal_mesh(2, static_cast<int>(state.range(0)));
  const BoundaryMeasure measure = arclength_measure(mesh, TagSet::all());
  for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, measure));
  state.counters["vertices"] = static_cast<double>(mesh.vertices.size());
}
BENCHMARK(BM_Assembly)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Factorization(benchmark::State& state) {
  const auto ops = prefractal_ops(2, static_cast<int>(state.range(0)));
  const double coeffs[] = {1.0, 1.0};
  const SparseSym* mats[] = {&ops->K, &ops->M};
  const SparseSym a = SparseSym::combine(coeffs, mats);
  for (auto _ : state) benchmark::DoNotOptimize(SymmetricFactorization(a));
  state.counters["n"] = a.dimension();
}
BENCHMARK(BM_Factorization)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RobinEigenpairs(benchmark::State& state) {
  const auto ops = prefractal_ops(2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(robin_spectrum(*ops, 0.1, 12));
}
BENCHMARK(BM_RobinEigenpairs)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SteklovBuild(benchmark::State& state) {
  const auto ops = prefractal_ops(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_steklov(ops, 1.0));
  state.counters["gamma"] = ops->gamma_count();
}
BENCHMARK(BM_SteklovBuild)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
