#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "dpeigen/energy.hpp"
#include "dpeigen/mesh.hpp"
#include "dpeigen/modular.hpp"
#include "dpeigen/solver.hpp"

using namespace dpeigen;

namespace {

ExponentField linear_field(const Mesh& mesh, double base, double slope) {
  std::vector<double> values(mesh.quadrature_count());
  for (std::size_t qp = 0; qp < values.size(); ++qp) {
    values[qp] = base + slope * mesh.quadrature_point(qp)[0];
  }
  return ExponentField::from_values(mesh, std::move(values));
}

void BM_luxemburg_norm(benchmark::State& state) {
  Mesh mesh = build_interval_mesh(0.0, 1.0, static_cast<int>(state.range(0)));
  ExponentField p = linear_field(mesh, 2.0, 0.4);
  DiscreteFunction u = interpolate(
      [](double x, double) { return std::sin(3.0 * x) * x * (1.0 - x); },
      mesh);
  ScalarField f = absolute_values(u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(luxemburg_norm(f, p));
  }
}
BENCHMARK(BM_luxemburg_norm)->Arg(64)->Arg(512)->Arg(4096);

void BM_energy_breakdown(benchmark::State& state) {
  Mesh mesh = build_interval_mesh(0.0, 1.0, static_cast<int>(state.range(0)));
  ExponentField p1 = linear_field(mesh, 2.8, 0.1);
  ExponentField p2 = linear_field(mesh, 1.5, 0.05);
  ExponentField q = linear_field(mesh, 2.0, 0.05);
  DiscreteFunction u = interpolate(
      [](double x, double) { return x * (1.0 - x); }, mesh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_breakdown(u, p1, p2, q));
  }
}
BENCHMARK(BM_energy_breakdown)->Arg(64)->Arg(512)->Arg(4096);

void BM_dirichlet_gradient(benchmark::State& state) {
  Mesh mesh = build_interval_mesh(0.0, 1.0, static_cast<int>(state.range(0)));
  ExponentField p1 = linear_field(mesh, 2.8, 0.1);
  ExponentField p2 = linear_field(mesh, 1.5, 0.05);
  DiscreteFunction u = interpolate(
      [](double x, double) { return std::sin(5.0 * x) * x * (1.0 - x); },
      mesh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dirichlet_gradient(u, p1, p2));
  }
}
BENCHMARK(BM_dirichlet_gradient)->Arg(64)->Arg(512)->Arg(4096);

void BM_energy_breakdown_2d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Mesh mesh = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n);
  ExponentField p1 = linear_field(mesh, 2.6, 0.1);
  ExponentField p2 = linear_field(mesh, 1.4, 0.05);
  ExponentField q = linear_field(mesh, 2.0, 0.05);
  DiscreteFunction u = interpolate(
      [](double x, double y) {
        return std::sin(3.14159265358979323846 * x) *
               std::sin(3.14159265358979323846 * y);
      },
      mesh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_breakdown(u, p1, p2, q));
  }
}
BENCHMARK(BM_energy_breakdown_2d)->Arg(8)->Arg(24)->Arg(48);

void BM_rayleigh_minimization(benchmark::State& state) {
  Mesh mesh = build_interval_mesh(0.0, 1.0, static_cast<int>(state.range(0)));
  ExponentField p1 = linear_field(mesh, 2.8, 0.05);
  ExponentField p2 = linear_field(mesh, 1.5, 0.0);
  ExponentField q = linear_field(mesh, 2.0, 0.02);
  SolverOptions options;
  options.restarts = 1;
  options.rng_seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_rayleigh(QuotientKind::weighted, p1, p2,
                                               q, mesh, options));
  }
}
BENCHMARK(BM_rayleigh_minimization)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
