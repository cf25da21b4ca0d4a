#include "policy_iteration.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbs/error.hpp"

namespace gibbs::detail {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

constexpr std::size_t kDirectLimit = 256;
constexpr double kTargetResidual = 1e-12;
constexpr double kAcceptResidual = 1e-9;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Normwise backward error. The residual relative to b alone is unreachable
// when x spans many orders of magnitude (an unlikely pinned state).
double rel_residual(const RowMat& a, const Vec& x, const Vec& b) {
    double anorm = 0.0;
    for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
        double row = 0.0;
        for (RowMat::InnerIterator it(a, i); it; ++it) row += std::abs(it.value());
        anorm = std::max(anorm, row);
    }
    const double scale = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    return (a * x - b).lpNorm<Eigen::Infinity>() / std::max(scale, 1e-300);
}

// Restarted GMRES keeping the best iterate. Metastable generators make it
// stagnate just above roundoff; accepting kAcceptResidual only loosens the
// certificate (valid for any bias vector) by a negligible amount.
template <typename Solver>
bool gmres_solve(Solver& it, const RowMat& a, const Vec& b, int passes, Vec& out) {
    it.set_restart(60);
    it.setTolerance(1e-14);
    it.setMaxIterations(600);
    it.compute(a);
    Vec x = it.solve(b);
    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; x.allFinite(); ++pass) {
        const double res = rel_residual(a, x, b);
        if (res < best) {
            best = res;
            out = x;
        }
        if (res < kTargetResidual || pass + 1 == passes) break;
        x = it.solveWithGuess(b, x);
    }
    return best < kAcceptResidual;
}

// Jacobi scaling is enough for most generators and costs nothing to set up;
// ILUT factorisation dominates the run time when it is needed, sparse LU is
// the last resort.
Vec solve_linear(const RowMat& a, const Vec& b) {
    if (b.lpNorm<Eigen::Infinity>() == 0.0) return Vec::Zero(b.size());
    if (std::size_t(a.rows()) > kDirectLimit) {
        Vec x;
        Eigen::GMRES<RowMat, Eigen::DiagonalPreconditioner<double>> jacobi;
        if (gmres_solve(jacobi, a, b, 1, x)) return x;
        Eigen::GMRES<RowMat, Eigen::IncompleteLUT<double>> ilut;
        ilut.preconditioner().setDroptol(1e-3);
        ilut.preconditioner().setFillfactor(2);
        if (gmres_solve(ilut, a, b, 4, x)) return x;
    }
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(SpMat(a));
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU failed on the policy generator");
    return lu.solve(b);
}

struct Evaluation {
    std::vector<double> p;  // stationary law of the policy chain
    std::vector<double> g;  // bias, g[0] = 0
    double rho = 0.0;
};

Evaluation evaluate(const ControlProblem& cp, const std::vector<std::uint32_t>& policy, const std::vector<double>& r) {
    const std::size_t n = cp.states;
    const std::size_t L = cp.sites;
    // generator with state 0 deleted: rows / cols are s - 1
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve((n - 1) * (L + 1));
    Vec b_p = Vec::Zero(Eigen::Index(n - 1));
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t a = policy[s];
        double out = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double c = cp.c(s, a, k);
            out += c;
            const std::size_t t = s ^ cp.flip[k];
            if (s == 0) {
                b_p(Eigen::Index(t - 1)) = -c;
            } else if (t != 0) {
                trip.emplace_back(Eigen::Index(s - 1), Eigen::Index(t - 1), c);
            }
        }
        if (s != 0) trip.emplace_back(Eigen::Index(s - 1), Eigen::Index(s - 1), -out);
    }
    RowMat q(Eigen::Index(n - 1), Eigen::Index(n - 1));
    q.setFromTriplets(trip.begin(), trip.end());
    const RowMat qt = RowMat(q.transpose());

    Evaluation ev;
    ev.p.assign(n, 0.0);
    ev.p[0] = 1.0;
    const Vec pp = solve_linear(qt, b_p);
    double total = 1.0;
    for (std::size_t s = 1; s < n; ++s) {
        ev.p[s] = std::max(pp(Eigen::Index(s - 1)), 0.0);
        total += ev.p[s];
    }
    for (double& v : ev.p) v /= total;
    for (std::size_t s = 0; s < n; ++s) ev.rho += ev.p[s] * r[s * cp.actions + policy[s]];

    Vec b_g(Eigen::Index(n - 1));
    for (std::size_t s = 1; s < n; ++s) b_g(Eigen::Index(s - 1)) = ev.rho - r[s * cp.actions + policy[s]];
    const Vec gg = solve_linear(q, b_g);
    ev.g.assign(n, 0.0);
    for (std::size_t s = 1; s < n; ++s) ev.g[s] = gg(Eigen::Index(s - 1));
    return ev;
}

double q_value(const ControlProblem& cp, const std::vector<double>& r, const std::vector<double>& g, std::size_t s,
               std::size_t a) {
    double v = r[s * cp.actions + a];
    for (std::size_t k = 0; k < cp.sites; ++k) v += cp.c(s, a, k) * (g[s ^ cp.flip[k]] - g[s]);
    return v;
}

double stationarity_residual(const ControlProblem& cp, const std::vector<double>& occ) {
    std::vector<double> net(cp.states, 0.0);
    for (std::size_t s = 0; s < cp.states; ++s) {
        for (std::size_t a = 0; a < cp.actions; ++a) {
            const double w = occ[s * cp.actions + a];
            if (w == 0.0) continue;
            for (std::size_t k = 0; k < cp.sites; ++k) {
                const double flow = w * cp.c(s, a, k);
                net[s] -= flow;
                net[s ^ cp.flip[k]] += flow;
            }
        }
    }
    double worst = 0.0;
    for (double v : net) worst = std::max(worst, std::abs(v));
    return worst;
}

}  // namespace

ControlResult optimise(const ControlProblem& cp, bool maximise, std::size_t max_iterations) {
    const std::size_t n = cp.states;
    const std::size_t na = cp.actions;
    if (n < 2) throw GuardError("control problem needs at least one free site");
    for (double c : cp.rate) {
        if (!(c > 0.0)) throw GuardError("policy iteration needs strictly positive flip rates");
    }
    // always maximise; the minimum is minus the maximum of -f
    std::vector<double> r = cp.reward;
    if (!maximise) {
        for (double& v : r) v = -v;
    }
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::abs(v));

    ControlResult res;
    res.occupation.assign(n * na, 0.0);

    if (na == 1) {
        // the stationary law is unique and reversible: Boltzmann weights
        double emin = std::numeric_limits<double>::infinity();
        for (double e : cp.energy) emin = std::min(emin, e);
        double z = 0.0;
        for (std::size_t s = 0; s < n; ++s) z += std::exp(emin - cp.energy[s]);
        long double value = 0.0L;
        for (std::size_t s = 0; s < n; ++s) {
            res.occupation[s] = std::exp(emin - cp.energy[s]) / z;
            value += static_cast<long double>(res.occupation[s]) * r[s];
        }
        const double v = double(value);
        const double margin = 8.0 * double(n) * kEps * std::max(rmax, 1e-300);
        res.attained = maximise ? v : -v;
        res.certified = maximise ? v + margin : -(v + margin);
        res.residual = stationarity_residual(cp, res.occupation);
        res.iterations = 1;
        return res;
    }

    std::vector<std::uint32_t> policy(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < na; ++a)
            if (r[s * na + a] > r[s * na + best]) best = a;
        policy[s] = std::uint32_t(best);
    }

    Evaluation ev;
    for (res.iterations = 1;; ++res.iterations) {
        ev = evaluate(cp, policy, r);
        double gmax = 0.0;
        for (double v : ev.g) gmax = std::max(gmax, std::abs(v));
        const double tol = 1e-11 * std::max(1.0, rmax) + 64.0 * kEps * double(cp.sites) * gmax;
        bool changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            const double cur = q_value(cp, r, ev.g, s, policy[s]);
            std::size_t best = policy[s];
            double bestv = cur + tol;
            for (std::size_t a = 0; a < na; ++a) {
                const double v = q_value(cp, r, ev.g, s, a);
                if (v > bestv) {
                    bestv = v;
                    best = a;
                }
            }
            if (best != policy[s]) {
                policy[s] = std::uint32_t(best);
                changed = true;
            }
        }
        if (!changed || res.iterations >= max_iterations) break;
    }

    // dual certificate from the last bias vector
    double bound = -std::numeric_limits<double>::infinity();
    double gmax = 0.0;
    for (double v : ev.g) gmax = std::max(gmax, std::abs(v));
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t a = 0; a < na; ++a) bound = std::max(bound, q_value(cp, r, ev.g, s, a));
    const double margin = 8.0 * double(cp.sites + 2) * kEps * (rmax + 2.0 * double(cp.sites) * gmax);
    bound += margin;

    for (std::size_t s = 0; s < n; ++s) res.occupation[s * na + policy[s]] = ev.p[s];
    res.residual = stationarity_residual(cp, res.occupation);
    res.attained = maximise ? ev.rho : -ev.rho;
    res.certified = maximise ? bound : -bound;
    return res;
}

}  // namespace gibbs::detail
