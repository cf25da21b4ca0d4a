#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbs/glauber_sampler.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

SpinSystem ferro_chain(std::size_t n, double beta) { return SpinSystem::chain(n, {InteractionTable::ising(1.0)}, beta); }

std::uint64_t word_of(const ChainState& s) {
    std::uint64_t w = 0;
    for (int8_t x : s.spins) w = (w << 1) | (x > 0 ? 1U : 0U);
    return w;
}

}  // namespace

TEST_CASE("uniform helpers stay in range") {
    std::mt19937_64 e(splitmix64(7));
    for (int k = 0; k < 10000; ++k) {
        const double u = unit_uniform(e);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(uniform_index(e, 5) < 5);
    }
    CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("infinite temperature flips half the time") {
    const SpinSystem sys = ferro_chain(10, 0.0);
    const Estimate e = estimate(sys, spin_product({3}), 1000, 200000, 1, 99);
    CHECK(e.acceptance == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(e.mean) <= 5 * e.std_error + 1e-3);
}

TEST_CASE("fixed seeds reproduce the chain exactly") {
    const SpinSystem sys = SpinSystem::grid2d(3, 3, {InteractionTable::ising(1.0)}, 0.4);
    const Observable f = spin_product({4, 5});
    const Estimate a = estimate(sys, f, 500, 4000, 9, 1234);
    const Estimate b = estimate(sys, f, 500, 4000, 9, 1234);
    const Estimate c = estimate(sys, f, 500, 4000, 9, 1235);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.acceptance == b.acceptance);
    CHECK(a.mean != c.mean);

    ChainState s = make_state(sys, 5, +1);
    ChainState t = make_state(sys, 5, +1);
    advance(sys, s, 777);
    for (int k = 0; k < 777; ++k) step(sys, t);
    CHECK(s.spins == t.spins);
    CHECK(s.step_count == 777);
}

TEST_CASE("single edge estimate matches tanh(beta)") {
    const SpinSystem edge = ferro_chain(2, 0.5);
    const Estimate e = estimate(edge, spin_product({0, 1}), 1000, 200000, 2, 2024);
    CHECK(std::abs(e.mean - std::tanh(0.5)) <= 5 * e.std_error);
    CHECK(e.std_error > 0.0);
    CHECK(e.std_error < 0.01);
}

TEST_CASE("visit frequencies approach the Gibbs distribution") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 3; ++trial) {
        const SpinSystem sys = trial == 2 ? SpinSystem::grid2d(2, 4, oracle::random_tables(rng, 10), 0.8)
                                          : SpinSystem::cycle(6 + trial, oracle::random_tables(rng, 6 + trial), 0.8);
        const std::vector<double> p = oracle::gibbs_weights(sys);
        std::vector<double> visits(p.size(), 0.0);
        ChainState s = random_state(sys, 100 + trial);
        advance(sys, s, 10000);
        const int steps = 1000000;
        for (int k = 0; k < steps; ++k) {
            step(sys, s);
            visits[word_of(s)] += 1.0;
        }
        double tv = 0.0;
        for (std::size_t w = 0; w < p.size(); ++w) tv += std::abs(visits[w] / steps - p[w]);
        CHECK(0.5 * tv <= 0.02);
    }
}

TEST_CASE("coupled chains") {
    const SpinSystem sys = ferro_chain(12, 0.3);
    const Region region = ball_region(sys, std::vector<Site>{6}, 2);
    const std::vector<Site> b{6};
    const Disagreement zero = coupled_disagreement_probability(sys, region, b, 0, 100, 1);
    CHECK(zero.probability == 0.0);
    CHECK(zero.trials == 100);

    // Lambda = V: both chains start equal and stay equal
    std::vector<Site> all;
    for (Site s = 0; s < 12; ++s) all.push_back(s);
    const Disagreement same = coupled_disagreement_probability(sys, make_region(sys, all), b, 500, 200, 2);
    CHECK(same.probability == 0.0);

    // a long run lets the boundary disagreement reach B sometimes
    const Disagreement late = coupled_disagreement_probability(sys, region, b, 400, 2000, 3);
    CHECK(late.probability > 0.0);
    CHECK(late.sweeps == doctest::Approx(400.0 / 12));
    const Disagreement again = coupled_disagreement_probability(sys, region, b, 400, 2000, 3);
    CHECK(again.probability == late.probability);

    CHECK_THROWS_AS(coupled_disagreement_probability(sys, region, std::vector<Site>{0}, 10, 10, 1), GuardError);
}

TEST_CASE("sampler argument checks") {
    const SpinSystem sys = ferro_chain(4, 0.3);
    CHECK_THROWS_AS(estimate(sys, spin_product({0}), 10, 1, 1, 1), InputError);
    CHECK_THROWS_AS(estimate(sys, spin_product({0}), 10, 100, 0, 1), InputError);
    const SpinSystem inf = SpinSystem::infinite_chain(InteractionTable::ising(1.0), 0.3);
    CHECK_THROWS_AS(random_state(inf, 1), GuardError);
}
