#include "gibbs/mc_hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gibbs/dlr_hierarchy.hpp"
#include "gibbs/region_layout.hpp"
#include "policy_iteration.hpp"

namespace gibbs {

namespace {

constexpr double kRawMcEntries = 4e6;

void check_mc_region(const SpinSystem& sys, const Region& region, const Observable& f) {
    if (!sys.is_finite()) throw GuardError("the Markov-chain hierarchy needs a finite system");
    for (Site s : f.support()) {
        if (!region.closure().contains(s)) {
            throw GuardError("observable support site " + std::to_string(s) + " lies outside the region closure");
        }
    }
    if (region.closure().size() > kMaxRawClosure) {
        throw GuardError("MC LP over " + std::to_string(region.closure().size()) + " closure sites exceeds the cap of " +
                         std::to_string(kMaxRawClosure));
    }
}

double rate_at(const RateFunction& rate, const RegionLayout& layout, std::uint64_t sigma, std::uint64_t eta,
               std::size_t k) {
    return rate(layout.region().lambda()[k], layout.grad_h(sigma, eta, k));
}

CertifiedInterval describe(const SpinSystem& sys, const Region& region, const Observable& f, Method method) {
    CertifiedInterval out;
    out.hierarchy = Hierarchy::Mc;
    out.method = method;
    out.lambda_size = region.lambda().size();
    out.boundary_size = region.boundary().size();
    if (!f.support().empty()) out.dist = distance_to_complement(sys, region, f.support().sites());
    return out;
}

}  // namespace

double heat_bath(double grad) noexcept {
    if (grad > 0) {
        const double e = std::exp(-grad);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(grad));
}

RateFunction heat_bath_rule() {
    return [](Site, double grad) { return heat_bath(grad); };
}

double heat_bath_rate(const SpinSystem& sys, const SpinConfig& x, Site i) { return heat_bath(grad_h(sys, x, i)); }

void validate_rate(const RateFunction& rate, std::span<const Site> sites, double max_grad) {
    if (!rate) throw InputError("rate function is empty");
    for (Site s : sites) {
        for (int step = 0; step <= 400; ++step) {
            const double d = max_grad * step / 400.0;
            const double up = rate(s, d);
            const double down = rate(s, -d);
            for (double v : {up, down}) {
                if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                    throw InputError("rate at site " + std::to_string(s) + " leaves [0, 1]");
                }
            }
            // c(d) = c(-d) e^{-d}
            const double want = down * std::exp(-d);
            if (std::abs(up - want) > 1e-12 * std::max(up, want) + 1e-300) {
                throw InputError("rate at site " + std::to_string(s) + " is not reversible at gradient " +
                                 std::to_string(d));
            }
        }
    }
}

Observable apply_P(const SpinSystem& sys, const Observable& f, const RateFunction& rate) {
    if (!sys.is_finite()) throw GuardError("apply_P needs a finite system");
    if (f.support().empty()) return f;
    const Region region = make_region(sys, f.support().sites());
    if (region.closure().size() > kMaxSupport) {
        throw GuardError("support of Pf would have " + std::to_string(region.closure().size()) +
                         " sites, above the cap of " + std::to_string(kMaxSupport));
    }
    const RegionLayout layout(sys, region);
    const double n = double(sys.num_sites());
    const std::size_t m = layout.closure_size();
    std::vector<double> table(std::size_t{1} << m);
    for (std::uint64_t x = 0; x < table.size(); ++x) {
        const std::uint64_t sigma = layout.sigma_of(x);
        const std::uint64_t eta = layout.eta_of(x);
        const double here = f.value_at(sigma);
        double v = here;
        for (std::size_t k = 0; k < layout.lambda_size(); ++k) {
            const double grad = f.value_at(sigma ^ layout.lambda_bit(k)) - here;
            if (grad != 0.0) v += rate_at(rate, layout, sigma, eta, k) / n * grad;
        }
        table[x] = v;
    }
    return Observable(region.closure().sites(), std::move(table), "P" + f.label());
}

LpProblem build_mc_lp(const SpinSystem& sys, const Region& region, const Observable& f, Sense sense,
                      const RateFunction& rate) {
    check_mc_region(sys, region, f);
    const RegionLayout layout(sys, region);
    const std::size_t m = layout.closure_size();
    const std::size_t nvars = std::size_t{1} << m;
    const std::size_t nsig = std::size_t{1} << layout.lambda_size();
    const std::size_t neta = std::size_t{1} << layout.boundary_size();
    LpProblem lp(nvars, sense);
    lp.objective() = tabulate_on_closure(f, layout);

    std::vector<LpTerm> norm(nvars);
    for (std::size_t x = 0; x < nvars; ++x) norm[x] = {x, 1.0};
    lp.add_row(std::move(norm), 1.0);

    for (std::uint64_t sigma = 0; sigma < nsig; ++sigma) {
        std::vector<LpTerm> row;
        for (std::uint64_t eta = 0; eta < neta; ++eta) {
            const std::uint64_t x = layout.closure_word(sigma, eta);
            for (std::size_t k = 0; k < layout.lambda_size(); ++k) {
                const std::uint64_t sk = sigma ^ layout.lambda_bit(k);
                row.push_back({layout.closure_word(sk, eta), rate_at(rate, layout, sk, eta, k)});
                row.push_back({x, -rate_at(rate, layout, sigma, eta, k)});
            }
        }
        lp.add_row(std::move(row), 0.0);
    }
    return lp;
}

double stationarity_residual(const SpinSystem& sys, const Region& region, std::span<const double> nu,
                             const RateFunction& rate) {
    const RegionLayout layout(sys, region);
    if (nu.size() != (std::size_t{1} << layout.closure_size())) {
        throw InputError("distribution length does not match the region closure");
    }
    const std::size_t nsig = std::size_t{1} << layout.lambda_size();
    const std::size_t neta = std::size_t{1} << layout.boundary_size();
    double worst = 0.0;
    for (std::uint64_t sigma = 0; sigma < nsig; ++sigma) {
        double net = 0.0;
        for (std::uint64_t eta = 0; eta < neta; ++eta) {
            const double here = nu[layout.closure_word(sigma, eta)];
            for (std::size_t k = 0; k < layout.lambda_size(); ++k) {
                const std::uint64_t sk = sigma ^ layout.lambda_bit(k);
                net += nu[layout.closure_word(sk, eta)] * rate_at(rate, layout, sk, eta, k);
                net -= here * rate_at(rate, layout, sigma, eta, k);
            }
        }
        worst = std::max(worst, std::abs(net));
    }
    return worst;
}

CertifiedInterval solve_mc(const SpinSystem& sys, const Region& region, const Observable& f, const McOptions& opts) {
    check_mc_region(sys, region, f);
    validate_rate(opts.rate, region.lambda().sites());
    const Method method = opts.method == Method::Auto ? Method::PolicyIteration : opts.method;
    CertifiedInterval out = describe(sys, region, f, method);

    if (method == Method::RawLp) {
        const double entries = double((std::size_t{1} << region.lambda().size()) + 1) *
                               double(std::size_t{1} << region.closure().size());
        if (entries > kRawMcEntries) throw GuardError("raw MC LP is too large for the dense simplex");
        LpProblem lp = build_mc_lp(sys, region, f, Sense::Max, opts.rate);
        const LpSolution hi = solve(lp, opts.lp);
        lp.set_sense(Sense::Min);
        const LpSolution lo = solve(lp, opts.lp);
        if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
            throw SolverError("MC LP not solved to optimality: max " + to_string(hi.status) + ", min " +
                              to_string(lo.status));
        }
        out.lower = lo.value;
        out.upper = hi.value;
        out.residual = std::max({hi.primal_residual, hi.bound_violation, lo.primal_residual, lo.bound_violation});
        out.iterations = hi.iterations + lo.iterations;
        if (opts.strict) {
            double l1 = 0.0;
            for (double c : lp.objective()) l1 += std::abs(c);
            out.residual_widening = out.residual * l1;
            out.lower -= out.residual_widening;
            out.upper += out.residual_widening;
        }
        return out;
    }
    if (method != Method::PolicyIteration) throw InputError("MC hierarchy supports the raw_lp and policy_iteration methods");

    const RegionLayout layout(sys, region);
    const std::vector<double> ftab = tabulate_on_closure(f, layout);
    detail::ControlProblem cp;
    cp.sites = layout.lambda_size();
    cp.states = std::size_t{1} << cp.sites;
    cp.actions = std::size_t{1} << layout.boundary_size();
    for (std::size_t k = 0; k < cp.sites; ++k) cp.flip.push_back(layout.lambda_bit(k));
    cp.rate.resize(cp.states * cp.actions * cp.sites);
    cp.reward.resize(cp.states * cp.actions);
    cp.energy.resize(cp.states * cp.actions);
    for (std::uint64_t s = 0; s < cp.states; ++s) {
        for (std::uint64_t a = 0; a < cp.actions; ++a) {
            const std::size_t idx = s * cp.actions + a;
            cp.reward[idx] = ftab[layout.closure_word(s, a)];
            cp.energy[idx] = layout.local_energy(s, a);
            for (std::size_t k = 0; k < cp.sites; ++k) cp.rate[idx * cp.sites + k] = rate_at(opts.rate, layout, s, a, k);
        }
    }
    const detail::ControlResult hi = detail::optimise(cp, true, opts.max_policy_iterations);
    const detail::ControlResult lo = detail::optimise(cp, false, opts.max_policy_iterations);
    out.lower = lo.certified;
    out.upper = hi.certified;
    out.residual = std::max(hi.residual, lo.residual);
    out.solver_gap = (hi.certified - hi.attained) + (lo.attained - lo.certified);
    out.iterations = hi.iterations + lo.iterations;
    // the certified values already hold for any bias vector; strict mode has nothing to add
    return out;
}

}  // namespace gibbs
