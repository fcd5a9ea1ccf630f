#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "g2glue/cone_spectral.hpp"
#include "g2glue/eguchi_hanson.hpp"
#include "g2glue/exterior_algebra.hpp"
#include "g2glue/kummer.hpp"
#include "g2glue/torus_solver.hpp"

using namespace g2glue;

namespace {

ext::Form random_form(std::mt19937_64& rng, int dim, int degree, double scale = 1.0) {
  std::normal_distribution<double> n01;
  ext::Form f(dim, degree);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = scale * n01(rng);
  return f;
}

ext::Metric random_metric(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ext::Matrix a(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) a(i, j) = 0.2 * n01(rng);
  return ext::Metric(ext::Matrix(ext::Matrix::Identity(7, 7) + a * a.transpose()));
}

}  // namespace

static void BM_Wedge3x4(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const ext::Form a = random_form(rng, 7, 3), b = random_form(rng, 7, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ext::wedge(a, b));
}
BENCHMARK(BM_Wedge3x4);

static void BM_HodgeStar(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const ext::Metric g = random_metric(rng);
  const ext::Form a = random_form(rng, 7, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ext::hodge_star(g, a));
}
BENCHMARK(BM_HodgeStar)->DenseRange(2, 5);

static void BM_MetricFromG2(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const ext::Form phi = ext::phi0() + random_form(rng, 7, 3, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(ext::metric_from_g2(phi));
}
BENCHMARK(BM_MetricFromG2);

static void BM_Theta(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const ext::Form phi = ext::phi0() + random_form(rng, 7, 3, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(ext::theta(phi));
}
BENCHMARK(BM_Theta);

static void BM_ThetaSplit(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const ext::Form chi = random_form(rng, 7, 3, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(ext::theta_split(ext::phi0(), chi));
}
BENCHMARK(BM_ThetaSplit);

static void BM_EhIdentities(benchmark::State& state) {
  for (auto _ : state) {
    const eh::ChartPtr chart = eh::make_chart(0.3);
    const eh::HarmonicForms h = eh::harmonic_forms(chart);
    benchmark::DoNotOptimize(eh::relative_residual(eh::exterior_derivative(h.lambda) - h.nu, 1.7));
  }
}
BENCHMARK(BM_EhIdentities);

static void BM_CriticalRates(benchmark::State& state) {
  const auto so3 = cone::LinkSpectrum::so3(400);
  for (auto _ : state)
    benchmark::DoNotOptimize(cone::critical_rates(so3, 2, cone::Interval::half_open(cone::Rational(-39) / 10, 0)));
}
BENCHMARK(BM_CriticalRates)->Unit(benchmark::kMicrosecond);

static void BM_RefinedRateBound(benchmark::State& state) {
  const auto table = cone::refined_jk_table();
  const cone::EpsRational weight = cone::EpsRational(2) + cone::EpsRational::eps();
  for (auto _ : state) benchmark::DoNotOptimize(cone::jk_rate_bound(table, weight));
}
BENCHMARK(BM_RefinedRateBound)->Unit(benchmark::kMicrosecond);

static void BM_SingularComponents(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kummer::singular_components());
}
BENCHMARK(BM_SingularComponents)->Unit(benchmark::kMicrosecond);

static void BM_GluedTorsion(benchmark::State& state) {
  const kummer::GluingModel model(0.005);
  const double r = kummer::radius_at_distance(3 * kummer::kZeta / 8);
  for (auto _ : state) benchmark::DoNotOptimize(model.torsion_norm(r));
}
BENCHMARK(BM_GluedTorsion)->Unit(benchmark::kMicrosecond);

static void BM_ForwardFft(benchmark::State& state) {
  const torus::Grid grid(static_cast<int>(state.range(0)));
  torus::GridField f(grid, 3);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (double& v : f.values()) v = n01(rng);
  for (auto _ : state) benchmark::DoNotOptimize(torus::forward(f));
}
BENCHMARK(BM_ForwardFft)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_InverseLaplacian(benchmark::State& state) {
  const torus::Grid grid(static_cast<int>(state.range(0)));
  torus::GridField f(grid, 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (double& v : f.values()) v = n01(rng);
  torus::SpectralField s = torus::forward(f);
  torus::project_off_kernel(s);
  for (auto _ : state) benchmark::DoNotOptimize(torus::inverse_laplacian(s));
}
BENCHMARK(BM_InverseLaplacian)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_PicardStep(benchmark::State& state) {
  torus::SolverConfig cfg;
  cfg.n = 4;
  const torus::ModelProblem problem = torus::make_model_problem(cfg);
  const torus::SpectralField eta(problem.grid, 2);
  for (auto _ : state) benchmark::DoNotOptimize(torus::picard_step(problem, eta));
}
BENCHMARK(BM_PicardStep)->Unit(benchmark::kMillisecond);

static void BM_SliceNewtonStep(benchmark::State& state) {
  torus::SolverConfig cfg;
  cfg.n = 4;
  const torus::ModelProblem problem = torus::make_model_problem(cfg);
  const torus::SpectralField eta(problem.grid, 2);
  for (auto _ : state) benchmark::DoNotOptimize(torus::slice_newton_step(problem, eta));
}
BENCHMARK(BM_SliceNewtonStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
