#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/error.hpp"
#include "cvxpnpl/qcqp.hpp"
#include "cvxpnpl/quadric.hpp"
#include "cvxpnpl/recovery.hpp"
#include "cvxpnpl/sdp.hpp"
#include "cvxpnpl/synth.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace cvxpnpl;

namespace {

struct Instance {
    std::vector<PointCorrespondence> points;
    std::vector<LineCorrespondence> lines;
};

// A fixed pool so every iteration sees a different, reproducible scene.
std::vector<Instance> instances(int n, int m, double sigma) {
    ScenarioConfig cfg;
    cfg.n_points = n;
    cfg.n_lines = m;
    std::vector<Instance> pool;
    for (std::uint64_t i = 0; i < 64; ++i) {
        Rng rng(trial_seed(17, i));
        const Scene scene = generate_scene(cfg, rng);
        const Observations obs = apply_pixel_noise(scene.observed, sigma, rng);
        pool.push_back({point_correspondences(scene, obs, cfg.intrinsics),
                        line_correspondences(scene, obs, cfg.intrinsics)});
    }
    return pool;
}

void BM_Solve(benchmark::State &state) {
    const auto pool = instances(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1.0);
    std::size_t i = 0;
    for (auto _ : state) {
        const Instance &in = pool[i++ % pool.size()];
        try {
            benchmark::DoNotOptimize(solve(in.points, in.lines));
        } catch (const Error &) {
            // Ambiguous minimal instances can exceed rank 4; still timed.
        }
    }
}
BENCHMARK(BM_Solve)
    ->ArgNames({"points", "lines"})
    ->Args({3, 0})
    ->Args({10, 0})
    ->Args({0, 4})
    ->Args({0, 10})
    ->Args({2, 2})
    ->Args({5, 5})
    ->Args({100, 0})
    ->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State &state) {
    const auto pool = instances(static_cast<int>(state.range(0)), 0, 1.0);
    std::size_t i = 0;
    for (auto _ : state) {
        const Instance &in = pool[i++ % pool.size()];
        benchmark::DoNotOptimize(build_problem(reduce(assemble(in.points, in.lines)).A));
    }
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_Relaxation(benchmark::State &state) {
    std::vector<SdpProblem> problems;
    for (const Instance &in : instances(10, 0, 1.0))
        problems.push_back(make_sdp(build_problem(reduce(assemble(in.points, in.lines)).A)));
    std::size_t i = 0;
    int iterations = 0;
    for (auto _ : state) {
        const SdpSolution sol = solve_sdp(problems[i++ % problems.size()]);
        iterations += sol.iterations;
        benchmark::DoNotOptimize(sol);
    }
    state.counters["ipm_iters"] = benchmark::Counter(iterations, benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_Relaxation)->Unit(benchmark::kMillisecond);

void BM_Rank4Quadric(benchmark::State &state) {
    std::vector<Eigen::MatrixXd> systems;
    Rng rng(5);
    for (int k = 0; k < 64; ++k) {
        Eigen::Matrix<double, 10, Eigen::Dynamic> span(10, 4);
        for (int i = 0; i < 4; ++i)
            span.col(i) << vec(random_rotation(rng)), 1.0;
        systems.push_back(build_system(normalize_basis(span)).G);
    }
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_rank4(systems[i++ % systems.size()]));
}
BENCHMARK(BM_Rank4Quadric)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
