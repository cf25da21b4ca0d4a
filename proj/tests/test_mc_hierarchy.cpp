#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbs/dlr_hierarchy.hpp"
#include "gibbs/mc_hierarchy.hpp"
#include "gibbs/region_layout.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

SpinSystem ferro_chain(std::size_t n, double beta) { return SpinSystem::chain(n, {InteractionTable::ising(1.0)}, beta); }

McOptions with(Method m) {
    McOptions o;
    o.method = m;
    return o;
}

std::vector<double> dense_row(const LpProblem& lp, std::size_t i) {
    std::vector<double> out(lp.num_vars(), 0.0);
    for (const LpTerm& t : lp.row(i)) out[t.col] += t.value;
    return out;
}

}  // namespace

TEST_CASE("heat-bath rates") {
    CHECK(heat_bath(0.0) == 0.5);
    CHECK(heat_bath(2.0) == doctest::Approx(std::exp(-2.0) / (1 + std::exp(-2.0))).epsilon(1e-15));
    CHECK(heat_bath(2.0) == doctest::Approx(0.11920).epsilon(1e-4));
    for (double g : {-700.0, -30.0, -1.5, 0.1, 3.0, 45.0, 800.0}) {
        CHECK(heat_bath(g) + heat_bath(-g) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(heat_bath(g) >= 0.0);
        CHECK(heat_bath(g) <= 1.0);
    }
    const SpinSystem sys = ferro_chain(3, 0.7);
    const SpinConfig x = SpinConfig::uniform(SiteList({0, 1, 2}), 1);
    // flipping the middle of an aligned chain costs 4 beta
    CHECK(heat_bath_rate(sys, x, 1) == doctest::Approx(heat_bath(4 * 0.7)));
    CHECK(heat_bath_rate(sys, x, 1) + heat_bath_rate(sys, flip(x, 1), 1) == doctest::Approx(1.0));
}

TEST_CASE("rate validator") {
    const std::vector<Site> sites{0, 1};
    CHECK_NOTHROW(validate_rate(heat_bath_rule(), sites));
    // Metropolis rate min(1, e^-g) is reversible and in [0, 1]
    CHECK_NOTHROW(validate_rate([](Site, double g) { return std::min(1.0, std::exp(-g)); }, sites));
    CHECK_THROWS_AS(validate_rate([](Site, double) { return 0.5; }, sites), InputError);
    CHECK_THROWS_AS(validate_rate([](Site, double g) { return 2.0 * heat_bath(g); }, sites), InputError);
}

TEST_CASE("one application of the heat-bath kernel") {
    const SpinSystem sys = ferro_chain(5, 0.8);
    const Observable c = constant_observable(2.5);
    CHECK(apply_P(sys, c).table()[0] == 2.5);

    // beta = 0: c = 1/2 and grad x_i = -2 x_i, so P x_i = (1 - 1/n) x_i
    const SpinSystem free = ferro_chain(5, 0.0);
    const Observable px = apply_P(free, spin_product({2}));
    CHECK(px.support().sites() == std::vector<Site>{1, 2, 3});
    const SiteList sup = px.support();
    for (std::uint64_t w = 0; w < 8; ++w) {
        const SpinConfig x(sup, w);
        CHECK(eval(px, x) == doctest::Approx(0.8 * x[2]).epsilon(1e-15));
    }

    // against a direct sum over the full chain
    const Observable f = spin_product({1, 2});
    const Observable pf = apply_P(sys, f);
    CHECK(pf.support().sites() == std::vector<Site>{0, 1, 2, 3});
    const SiteList all({0, 1, 2, 3, 4});
    for (std::uint64_t w = 0; w < 32; ++w) {
        const SpinConfig x(all, w);
        double expect = eval(f, x);
        for (Site i = 0; i < 5; ++i) expect += heat_bath_rate(sys, x, i) / 5.0 * (eval(f, flip(x, i)) - eval(f, x));
        CHECK(eval(pf, x.restricted(pf.support())) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("reversibility and adjointness") {
    std::mt19937_64 rng(5);
    const SpinSystem sys = SpinSystem::grid2d(2, 3, oracle::random_tables(rng, 7), 1.2);
    const std::vector<double> h = oracle::energies(sys);
    const SiteList all({0, 1, 2, 3, 4, 5});
    for (std::uint64_t w = 0; w < 64; ++w) {
        const SpinConfig x(all, w);
        for (Site i = 0; i < 6; ++i) {
            const SpinConfig y = flip(x, i);
            const double lhs = heat_bath_rate(sys, x, i) * std::exp(-h[w]);
            const double rhs = heat_bath_rate(sys, y, i) * std::exp(-h[y.word()]);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs));
        }
    }
    // sum_x f grad_i g = sum_x grad_i f g
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> tf(64), tg(64);
        for (auto& v : tf) v = u(rng);
        for (auto& v : tg) v = u(rng);
        const Observable f({0, 1, 2, 3, 4, 5}, tf), g({0, 1, 2, 3, 4, 5}, tg);
        for (Site i = 0; i < 6; ++i) {
            double a = 0, b = 0;
            for (std::uint64_t w = 0; w < 64; ++w) {
                const SpinConfig x(all, w);
                a += eval(f, x) * grad_f(g, x, i);
                b += grad_f(f, x, i) * eval(g, x);
            }
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("MC LP shape and feasibility of the true marginal") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const SpinSystem sys = oracle::random_small_system(rng);
        const Observable f = oracle::random_product(rng, sys);
        for (std::size_t r = 0; r <= 1; ++r) {
            const Region region = ball_region(sys, f.support().sites(), r);
            if (region.closure().size() > 12) continue;
            const LpProblem lp = build_mc_lp(sys, region, f, Sense::Max);
            CHECK(lp.num_rows() == 1 + (std::size_t{1} << region.lambda().size()));
            CHECK(lp.num_vars() == (std::size_t{1} << region.closure().size()));
            const std::vector<double> nu = oracle::marginal(sys, region.closure().sites());
            CHECK(lp.primal_residual(nu) <= 1e-9);
            CHECK(stationarity_residual(sys, region, nu) <= 1e-9);
        }
    }
}

TEST_CASE("stationarity rows equal n (P g - g) for the indicator of each sigma") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const SpinSystem sys = oracle::random_small_system(rng);
        const Observable f = oracle::random_product(rng, sys);
        const Region region = ball_region(sys, f.support().sites(), trial % 2);
        if (region.closure().size() > 10) continue;
        const RegionLayout layout(sys, region);
        const LpProblem lp = build_mc_lp(sys, region, f, Sense::Max);
        const double n = double(sys.num_sites());
        for (std::uint64_t sigma = 0; sigma < (std::uint64_t{1} << region.lambda().size()); ++sigma) {
            const Observable g = indicator(SpinConfig(region.lambda(), sigma));
            const std::vector<double> pg = tabulate_on_closure(apply_P(sys, g), layout);
            const std::vector<double> gg = tabulate_on_closure(g, layout);
            const std::vector<double> row = dense_row(lp, 1 + sigma);
            for (std::size_t x = 0; x < row.size(); ++x) CHECK(std::abs(row[x] - n * (pg[x] - gg[x])) <= 1e-12);
        }
    }
}

TEST_CASE("MC at Lambda = V pins the Gibbs expectation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        const SpinSystem sys = SpinSystem::cycle(6 + trial % 3, oracle::random_tables(rng, 6 + trial % 3), 1.0);
        const Observable f = oracle::random_product(rng, sys);
        std::vector<Site> all;
        for (Site s = 0; s < Site(sys.num_sites()); ++s) all.push_back(s);
        const double mu = oracle::expectation(sys, f);
        for (Method m : {Method::RawLp, Method::PolicyIteration}) {
            const CertifiedInterval ci = solve_mc(sys, make_region(sys, all), f, with(m));
            CHECK(ci.width() <= 1e-7);
            CHECK(ci.midpoint() == doctest::Approx(mu).epsilon(1e-7));
        }
    }
}

TEST_CASE("policy iteration agrees with the raw LP and nests the DLR interval") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const SpinSystem sys = oracle::random_small_system(rng);
        const Observable f = oracle::random_product(rng, sys);
        const double mu = oracle::expectation(sys, f);
        for (std::size_t r = 0; r <= 2; ++r) {
            const Region region = ball_region(sys, f.support().sites(), r);
            const CertifiedInterval pi = solve_mc(sys, region, f, with(Method::PolicyIteration));
            const CertifiedInterval dlr = solve_dlr(sys, region, f);
            CHECK(pi.contains(mu, 1e-8));
            CHECK(pi.lower <= dlr.lower + 1e-8);
            CHECK(pi.upper >= dlr.upper - 1e-8);
            if (region.closure().size() <= 10) {
                const CertifiedInterval raw = solve_mc(sys, region, f, with(Method::RawLp));
                CHECK(std::abs(raw.lower - pi.lower) <= 1e-7);
                CHECK(std::abs(raw.upper - pi.upper) <= 1e-7);
            }
        }
    }
}

TEST_CASE("MC at beta = 0 keeps odd observables centred") {
    const SpinSystem free = ferro_chain(9, 0.0);
    const Region region = ball_region(free, std::vector<Site>{4}, 1);
    const CertifiedInterval ci = solve_mc(free, region, spin_product({4}));
    CHECK(ci.contains(0.0, 1e-12));
}

TEST_CASE("MC guards") {
    const SpinSystem inf = SpinSystem::infinite_chain(InteractionTable::ising(1.0), 0.2);
    CHECK_THROWS_AS(solve_mc(inf, ball_region(inf, std::vector<Site>{0}, 1), spin_product({0})), GuardError);
    const SpinSystem sys = ferro_chain(10, 0.2);
    CHECK_THROWS_AS(solve_mc(sys, make_region(sys, {2}), spin_product({5})), GuardError);
    McOptions bad;
    bad.rate = [](Site, double) { return 0.3; };
    CHECK_THROWS_AS(solve_mc(sys, make_region(sys, {2}), spin_product({2}), bad), InputError);
}
