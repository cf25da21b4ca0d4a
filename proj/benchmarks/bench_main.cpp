#include <benchmark/benchmark.h>

#include <random>

#include "gibbs/dlr_hierarchy.hpp"
#include "gibbs/exact_oracle.hpp"
#include "gibbs/glauber_sampler.hpp"
#include "gibbs/lp_solver.hpp"
#include "gibbs/mc_hierarchy.hpp"

using namespace gibbs;

namespace {

SpinSystem ferro_chain(std::size_t n, double beta) { return SpinSystem::chain(n, {InteractionTable::ising(1.0)}, beta); }

// Dense random LP with a normalising row; m constraints, 4m columns.
LpProblem random_lp(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 4 * m;
    LpProblem lp(n, Sense::Max);
    std::vector<double> x0(n);
    for (double& v : x0) v = 0.5 + 0.5 * u(rng);
    double s = 0;
    for (double v : x0) s += v;
    std::vector<LpTerm> norm;
    for (std::size_t j = 0; j < n; ++j) norm.push_back({j, 1.0});
    lp.add_row(norm, 1.0);
    for (std::size_t i = 1; i < m; ++i) {
        std::vector<LpTerm> row;
        double b = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = u(rng);
            row.push_back({j, a});
            b += a * x0[j] / s;
        }
        lp.add_row(row, b);
    }
    for (double& c : lp.objective()) c = u(rng);
    return lp;
}

void BM_Simplex(benchmark::State& state) {
    const LpProblem lp = random_lp(std::size_t(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(solve(lp).value);
}
BENCHMARK(BM_Simplex)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DlrRawLp(benchmark::State& state) {
    const SpinSystem sys = ferro_chain(40, 0.4);
    const Region region = ball_region(sys, std::vector<Site>{20}, std::size_t(state.range(0)));
    DlrOptions o;
    o.method = Method::RawLp;
    for (auto _ : state) benchmark::DoNotOptimize(solve_dlr(sys, region, spin_product({20}), o).upper);
}
BENCHMARK(BM_DlrRawLp)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_DlrReduced(benchmark::State& state) {
    const SpinSystem sys = SpinSystem::grid2d(9, 9, {InteractionTable::ising(1.0)}, 0.4);
    const Region region = ball_region(sys, std::vector<Site>{40}, std::size_t(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_dlr(sys, region, spin_product({40})).upper);
}
BENCHMARK(BM_DlrReduced)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_McPolicyIteration(benchmark::State& state) {
    const SpinSystem sys = ferro_chain(24, 0.3);
    const Region region = ball_region(sys, std::vector<Site>{11, 12}, std::size_t(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_mc(sys, region, spin_product({11, 12})).upper);
}
BENCHMARK(BM_McPolicyIteration)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_ExactEnumeration(benchmark::State& state) {
    const SpinSystem sys = SpinSystem::grid2d(4, std::size_t(state.range(0)), {InteractionTable::ising(1.0)}, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(expectation(sys, spin_product({5, 6})));
}
BENCHMARK(BM_ExactEnumeration)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_GlauberSweeps(benchmark::State& state) {
    const SpinSystem sys = SpinSystem::grid2d(16, 16, {InteractionTable::ising(1.0)}, 0.4);
    ChainState s = random_state(sys, 1);
    const std::uint64_t steps = 1000 * sys.num_sites();
    for (auto _ : state) advance(sys, s, steps);
    state.SetItemsProcessed(std::int64_t(state.iterations() * steps));
}
BENCHMARK(BM_GlauberSweeps)->Unit(benchmark::kMillisecond);

void BM_Coupling(benchmark::State& state) {
    const SpinSystem sys = ferro_chain(12, 0.3);
    const Region region = ball_region(sys, std::vector<Site>{6}, 2);
    const std::vector<Site> b{6};
    for (auto _ : state) benchmark::DoNotOptimize(coupled_disagreement_probability(sys, region, b, 48, 1000, 3).probability);
}
BENCHMARK(BM_Coupling)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
