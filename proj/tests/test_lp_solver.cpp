#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gibbs/error.hpp"
#include "gibbs/lp_solver.hpp"
#include "lp_oracle.hpp"

using namespace gibbs;

using oracle::dense;
using oracle::vertex_enumeration;

TEST_CASE("max x1 on a segment picks the vertex (1,0)") {
    LpProblem p(2, Sense::Max);
    p.objective() = {1.0, 0.0};
    p.add_row({{0, 1.0}, {1, 1.0}}, 1.0);
    const LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.point[0] == doctest::Approx(1.0));
    CHECK(s.point[1] == doctest::Approx(0.0));
}

TEST_CASE("negative right-hand side with nonnegative columns is infeasible") {
    LpProblem p(2, Sense::Min);
    p.add_row({{0, 1.0}, {1, 1.0}}, -1.0);
    CHECK(solve(p).status == LpStatus::Infeasible);
}

TEST_CASE("minimum over the probability simplex is the smallest cost") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 9;
        LpProblem p(n, Sense::Min);
        std::vector<LpTerm> row;
        double lo = 1e300;
        for (std::size_t j = 0; j < n; ++j) {
            p.objective()[j] = u(rng);
            lo = std::min(lo, p.objective()[j]);
            row.push_back({j, 1.0});
        }
        p.add_row(row, 1.0);
        const LpSolution s = solve(p);
        REQUIRE(s.status == LpStatus::Optimal);
        CHECK(s.value == doctest::Approx(lo).epsilon(1e-12));
    }
}

TEST_CASE("unbounded direction is reported") {
    LpProblem p(2, Sense::Max);
    p.objective() = {1.0, 0.0};
    p.add_row({{0, 1.0}, {1, -1.0}}, 0.5);
    CHECK(solve(p).status == LpStatus::Unbounded);
}

TEST_CASE("preprocess drops zero rows and duplicates and scales rows") {
    LpProblem p(3, Sense::Min);
    p.add_row({{0, 2.0}, {1, 4.0}}, 2.0);
    p.add_row({{0, 1.0}, {1, 2.0}}, 1.0);
    p.add_row({{0, -0.5}, {1, -1.0}}, -0.5);
    p.add_row({}, 0.0);
    p.add_row({{2, 0.0}}, 0.0);
    p.add_row({{2, -3.0}}, 1.5);
    const Preprocessed pre = preprocess(p);
    CHECK_FALSE(pre.infeasible);
    CHECK(pre.zero_rows == 2);
    CHECK(pre.duplicate_rows == 2);
    REQUIRE(pre.problem.num_rows() == 2);
    CHECK(pre.row_origin == std::vector<std::size_t>{0, 5});
    CHECK(pre.problem.row(0)[1].value == doctest::Approx(1.0));
    CHECK(pre.problem.rhs(0) == doctest::Approx(0.5));
    CHECK(pre.problem.row(1)[0].value == doctest::Approx(1.0));
    CHECK(pre.problem.rhs(1) == doctest::Approx(-0.5));
}

TEST_CASE("zero row with nonzero right-hand side signals infeasibility") {
    LpProblem p(1, Sense::Min);
    p.add_row({{0, 0.0}}, 1.0);
    CHECK(preprocess(p).infeasible);
    CHECK(solve(p).status == LpStatus::Infeasible);
}

TEST_CASE("random small LPs agree with vertex enumeration") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> rhs(0, 4);
    int feasible_count = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 2 + trial % 5;
        const std::size_t m = 1 + (trial / 5) % 4;
        std::vector<std::vector<double>> a(m, std::vector<double>(n));
        std::vector<double> b(m), c(n);
        for (auto& row : a)
            for (double& v : row) v = coef(rng);
        for (double& v : b) v = rhs(rng);
        for (double& v : c) v = coef(rng);
        // a normalising row keeps most instances bounded
        if (trial % 2 == 0) {
            a.emplace_back(n, 1.0);
            b.push_back(1.0);
        }
        for (Sense sense : {Sense::Min, Sense::Max}) {
            bool feasible = false;
            const double want = vertex_enumeration(a, b, c, sense == Sense::Max, feasible);
            const LpSolution s = solve(dense(a, b, c, sense));
            if (!feasible) {
                CHECK(s.status == LpStatus::Infeasible);
                continue;
            }
            ++feasible_count;
            CHECK(s.status != LpStatus::Infeasible);
            if (s.status == LpStatus::Optimal) {
                CHECK(std::abs(s.value - want) <= 1e-9 * std::max(1.0, std::abs(want)));
                CHECK(s.primal_residual <= 1e-8);
                CHECK(s.bound_violation <= 1e-8);
            }
        }
    }
    CHECK(feasible_count > 100);
}

TEST_CASE("max of c equals minus min of -c") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 6;
        LpProblem mx(n, Sense::Max);
        LpProblem mn(n, Sense::Min);
        std::vector<LpTerm> norm;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = u(rng);
            mx.objective()[j] = c;
            mn.objective()[j] = -c;
            norm.push_back({j, 1.0});
        }
        std::vector<LpTerm> extra;
        for (std::size_t j = 0; j < n; ++j) extra.push_back({j, u(rng)});
        for (LpProblem* p : {&mx, &mn}) {
            p->add_row(norm, 1.0);
            p->add_row(extra, 0.0);
        }
        const LpSolution a = solve(mx);
        const LpSolution b = solve(mn);
        REQUIRE(a.status == b.status);
        if (a.status == LpStatus::Optimal) CHECK(std::abs(a.value + b.value) <= 1e-10);
    }
}

TEST_CASE("doubleton chains collapse and postsolve onto the original rows") {
    // x0 = 2 x1, x1 = 3 x2, x3 + x4 = 0 (forces zeros), sum = 1
    LpProblem p(5, Sense::Max);
    p.objective() = {0.0, 0.0, 1.0, 5.0, 5.0};
    p.add_row({{0, 1.0}, {1, -2.0}}, 0.0);
    p.add_row({{1, 1.0}, {2, -3.0}}, 0.0);
    p.add_row({{2, 3.0}, {1, -1.0}}, 0.0);
    p.add_row({{3, 1.0}, {4, 1.0}}, 0.0);
    p.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}}, 1.0);
    const LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.reduced_cols == 1);
    CHECK(s.value == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.point[0] == doctest::Approx(0.6));
    CHECK(s.point[3] == 0.0);

    LpOptions plain;
    plain.aggregate_doubletons = false;
    const LpSolution t = solve(p, plain);
    REQUIRE(t.status == LpStatus::Optimal);
    CHECK(t.value == doctest::Approx(s.value).epsilon(1e-12));
}

TEST_CASE("inconsistent doubleton cycle forces its component to zero") {
    LpProblem p(3, Sense::Max);
    p.objective() = {1.0, 1.0, 0.0};
    p.add_row({{0, 1.0}, {1, -2.0}}, 0.0);
    p.add_row({{1, 1.0}, {0, -2.0}}, 0.0);
    p.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0);
    const LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.value == doctest::Approx(0.0));
    CHECK(s.point[2] == doctest::Approx(1.0));
}

TEST_CASE("degenerate problem with redundant rows terminates") {
    // assignment-like polytope: lots of degeneracy and one redundant row
    const std::size_t k = 5;
    LpProblem p(k * k, Sense::Max);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> w(0, 3);
    for (double& c : p.objective()) c = w(rng);
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<LpTerm> r, c;
        for (std::size_t j = 0; j < k; ++j) {
            r.push_back({i * k + j, 1.0});
            c.push_back({j * k + i, 1.0});
        }
        p.add_row(r, 1.0);
        p.add_row(c, 1.0);
    }
    const LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    // brute force over permutations
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    double best = -1;
    do {
        double v = 0;
        for (std::size_t i = 0; i < k; ++i) v += p.objective()[i * k + perm[i]];
        best = std::max(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(s.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("iteration cap raises SolverError") {
    LpProblem p(4, Sense::Max);
    p.objective() = {1.0, 2.0, 3.0, 4.0};
    p.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, 1.0);
    LpOptions opts;
    opts.iteration_factor = 0;
    CHECK_THROWS_AS(solve(p, opts), SolverError);
}

TEST_CASE("malformed problems are rejected") {
    LpProblem p(2, Sense::Min);
    p.add_row({{5, 1.0}}, 1.0);
    CHECK_THROWS_AS(solve(p), InputError);
    LpProblem q(1, Sense::Min);
    q.objective()[0] = std::nan("");
    CHECK_THROWS_AS(solve(q), InputError);
}

TEST_CASE("MPS dump lists every section") {
    LpProblem p(2, Sense::Max);
    p.objective() = {1.0, -2.0};
    p.add_row({{0, 1.0}, {1, 1.0}}, 1.0);
    std::ostringstream os;
    write_mps(p, os);
    const std::string s = os.str();
    for (const char* tag : {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "ENDATA", " E  R0", "X1"}) {
        CHECK(s.find(tag) != std::string::npos);
    }
}

TEST_CASE("stationarity system with a redundant row pins the stationary law") {
    // Random reversible jump chain on N states: detailed balance rows from
    // weights pi, with the sum of balance rows identically zero.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40 + 20 * std::size_t(trial % 4);
        std::vector<double> pi(n);
        double z = 0;
        for (auto& v : pi) z += (v = u(rng) * u(rng));
        for (auto& v : pi) v /= z;
        // rate q(x -> y) = min(1, pi_y / pi_x) on a ring plus chords
        auto rate = [&](std::size_t x, std::size_t y) { return std::min(1.0, pi[y] / pi[x]); };
        std::vector<std::vector<std::size_t>> nb(n);
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t step : {std::size_t{1}, std::size_t{7}}) {
                const std::size_t y = (x + step) % n;
                nb[x].push_back(y);
                nb[y].push_back(x);
            }
        }
        LpProblem lp(n, trial % 2 ? Sense::Max : Sense::Min);
        std::vector<LpTerm> norm;
        for (std::size_t x = 0; x < n; ++x) norm.push_back({x, 1.0});
        lp.add_row(norm, 1.0);
        for (std::size_t y = 0; y < n; ++y) {
            std::vector<LpTerm> row;
            for (std::size_t x : nb[y]) {
                row.push_back({x, rate(x, y)});
                row.push_back({y, -rate(y, x)});
            }
            lp.add_row(row, 0.0);
        }
        for (std::size_t x = 0; x < n; ++x) lp.objective()[x] = u(rng) - 0.5;
        const LpSolution s = solve(lp);
        REQUIRE(s.status == LpStatus::Optimal);
        for (std::size_t x = 0; x < n; ++x) CHECK(s.point[x] == doctest::Approx(pi[x]).epsilon(1e-9));
    }
}

TEST_CASE("heavily degenerate transport polytope solves well inside the cap") {
    // k x k doubly stochastic matrices scaled by k: every vertex is a
    // permutation and most basic variables sit at zero.
    for (std::size_t k : {6, 9, 12}) {
        std::mt19937_64 rng(k);
        std::uniform_int_distribution<int> cost(0, 3);
        LpProblem lp(k * k, Sense::Min);
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<LpTerm> r, c;
            for (std::size_t j = 0; j < k; ++j) {
                r.push_back({i * k + j, 1.0});
                c.push_back({j * k + i, 1.0});
            }
            lp.add_row(r, 1.0);
            lp.add_row(c, 1.0);
        }
        for (auto& v : lp.objective()) v = cost(rng);
        const LpSolution s = solve(lp);
        REQUIRE(s.status == LpStatus::Optimal);
        CHECK(s.primal_residual <= 1e-9);
        CHECK(s.iterations < 10 * (lp.num_rows() + lp.num_vars()));
        // the optimum is integral
        CHECK(std::abs(s.value - std::round(s.value)) <= 1e-9);
    }
}
