#include "gibbs/dlr_hierarchy.hpp"

#include <cmath>
#include <string>

#include "gibbs/exact_oracle.hpp"
#include "gibbs/region_layout.hpp"

namespace gibbs {

std::string to_string(Hierarchy h) { return h == Hierarchy::Dlr ? "dlr" : "mc"; }

std::string to_string(Method m) {
    switch (m) {
        case Method::Auto: return "auto";
        case Method::RawLp: return "raw_lp";
        case Method::Reduced: return "reduced";
        case Method::PolicyIteration: return "policy_iteration";
    }
    return "?";
}

namespace {

void require_support_in_lambda(const Region& region, const Observable& f) {
    for (Site s : f.support()) {
        if (!region.in_lambda(s)) {
            throw GuardError("observable support site " + std::to_string(s) + " lies outside Lambda");
        }
    }
}

CertifiedInterval describe(const SpinSystem& sys, const Region& region, const Observable& f, Method method) {
    CertifiedInterval out;
    out.hierarchy = Hierarchy::Dlr;
    out.method = method;
    out.lambda_size = region.lambda().size();
    out.boundary_size = region.boundary().size();
    if (!f.support().empty()) out.dist = distance_to_complement(sys, region, f.support().sites());
    return out;
}

}  // namespace

LpProblem build_dlr_lp(const SpinSystem& sys, const Region& region, const Observable& f, Sense sense) {
    require_support_in_lambda(region, f);
    if (region.closure().size() > kMaxRawClosure) {
        throw GuardError("raw DLR LP over " + std::to_string(region.closure().size()) +
                         " closure sites exceeds the cap of " + std::to_string(kMaxRawClosure));
    }
    const RegionLayout layout(sys, region);
    const std::size_t m = layout.closure_size();
    const std::size_t nvars = std::size_t{1} << m;
    LpProblem lp(nvars, sense);
    lp.objective() = tabulate_on_closure(f, layout);

    std::vector<LpTerm> norm(nvars);
    for (std::size_t x = 0; x < nvars; ++x) norm[x] = {x, 1.0};
    lp.add_row(std::move(norm), 1.0);

    for (std::uint64_t x = 0; x < nvars; ++x) {
        const std::uint64_t sigma = layout.sigma_of(x);
        const std::uint64_t eta = layout.eta_of(x);
        for (std::size_t k = 0; k < layout.lambda_size(); ++k) {
            if (layout.lambda_spin(sigma, k) < 0) continue;
            const std::uint64_t xi = x ^ site_bit(layout.lambda_position(k), m);
            const double g = layout.grad_h(sigma, eta, k);
            // nu(x) = e^g nu(x^i), divided through by e^g when that is huge
            if (g > 30.0) {
                lp.add_row({{x, std::exp(-g)}, {xi, -1.0}}, 0.0);
            } else {
                lp.add_row({{x, 1.0}, {xi, -std::exp(g)}}, 0.0);
            }
        }
    }
    return lp;
}

CertifiedInterval solve_dlr_reduced(const SpinSystem& sys, const Region& region, const Observable& f) {
    require_support_in_lambda(region, f);
    const BoundarySweep sweep = sweep_boundary_conditions(sys, region, f);
    CertifiedInterval out = describe(sys, region, f, Method::Reduced);
    out.lower = sweep.min;
    out.upper = sweep.max;
    out.iterations = sweep.count;
    return out;
}

CertifiedInterval solve_dlr(const SpinSystem& sys, const Region& region, const Observable& f, const DlrOptions& opts) {
    Method method = opts.method;
    if (method == Method::Auto) {
        const std::size_t nb = region.boundary().size();
        const bool enumerable = nb <= kMaxBoundarySites && nb + region.lambda().size() <= kMaxSweepBits;
        method = enumerable ? Method::Reduced : Method::RawLp;
    }
    if (method == Method::Reduced) return solve_dlr_reduced(sys, region, f);
    if (method != Method::RawLp) throw InputError("DLR hierarchy supports the raw_lp and reduced methods only");

    CertifiedInterval out = describe(sys, region, f, Method::RawLp);
    LpProblem lp = build_dlr_lp(sys, region, f, Sense::Max);
    const LpSolution hi = solve(lp, opts.lp);
    lp.set_sense(Sense::Min);
    const LpSolution lo = solve(lp, opts.lp);
    if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
        throw SolverError("DLR LP not solved to optimality: max " + to_string(hi.status) + ", min " +
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

}  // namespace gibbs
