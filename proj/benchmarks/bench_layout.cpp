// Timings for the hot paths: goal evaluation, projection, alignment choice
// and the whole pipeline per mode.

#include <benchmark/benchmark.h>

#include "gridlay/aca.hpp"
#include "gridlay/generate.hpp"
#include "gridlay/pipeline.hpp"
#include "gridlay/stress.hpp"

using namespace gridlay;

namespace {

Graph bench_graph(std::size_t n) { return random_graph({.nodes = n, .density = 1.5, .seed = 7}); }

void BM_GoalAndGradient(benchmark::State& state) {
    const Graph g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const IdealDistances d = shortest_path_distances(g, 100.0);
    const LayoutState s = random_layout(g.size(), 100.0, 3);
    StressParams params = grid_params(GridSpec(50.0), 1000.0, 10.0, 1.0);
    const AlignedEdges aligned = detect_aligned_edges(g, s);
    Gradient grad(2 * g.size());
    for (auto _ : state) {
        std::fill(grad.begin(), grad.end(), 0.0);
        benchmark::DoNotOptimize(goal_and_gradient(g, d, s, params, aligned, grad));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GoalAndGradient)->RangeMultiplier(2)->Range(25, 400)->Complexity(benchmark::oNSquared);

void BM_HessianProduct(benchmark::State& state) {
    const Graph g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const IdealDistances d = shortest_path_distances(g, 100.0);
    const LayoutState s = random_layout(g.size(), 100.0, 3);
    const StressParams params = grid_params(GridSpec(50.0), 1000.0, 10.0, 1.0);
    const AlignedEdges aligned = detect_aligned_edges(g, s);
    std::vector<double> v(2 * g.size(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(hessian_product(g, d, s, params, aligned, v));
}
BENCHMARK(BM_HessianProduct)->Arg(100)->Arg(200);

void BM_ProjectNonOverlap(benchmark::State& state) {
    const Graph g = bench_graph(static_cast<std::size_t>(state.range(0)));
    // A cramped layout so that many pairs need separating.
    const LayoutState s = random_layout(g.size(), 15.0, 5);
    const ConstraintList base = generate_non_overlap(g, s, NonOverlap::NodeSizes);
    for (auto _ : state) {
        ConstraintList cs = base;
        benchmark::DoNotOptimize(project(Dim::X, s.x, cs));
    }
    state.counters["constraints"] = static_cast<double>(base.size());
}
BENCHMARK(BM_ProjectNonOverlap)->Arg(50)->Arg(100)->Arg(200);

void BM_ChooseSa(benchmark::State& state) {
    const Graph g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const IdealDistances d = shortest_path_distances(g, 100.0);
    const LayoutState s = random_layout(g.size(), 100.0, 3);
    const ConstraintList cs;
    const AlignFlags flags(g, cs);
    const Eligibility eligible(g.edge_count());
    const CostModel model;
    for (auto _ : state) benchmark::DoNotOptimize(choose_sa(g, d, flags, s, cs, model, eligible));
}
BENCHMARK(BM_ChooseSa)->Arg(50)->Arg(100);

void BM_Pipeline(benchmark::State& state) {
    const Mode mode = kAllModes[state.range(0)];
    const Graph g = random_graph({.nodes = 100, .density = 1.5, .seed = 11});
    PipelineOptions opts;
    opts.mode = mode;
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(g, opts));
    state.SetLabel(to_string(mode));
}
BENCHMARK(BM_Pipeline)->DenseRange(0, 5)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
