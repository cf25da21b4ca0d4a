#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gibbs/certified_interval.hpp"
#include "gibbs/lp_solver.hpp"
#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs {

/// Flip rate c(i, x) as a function of the site and grad_i H(x). Rates must lie
/// in [0, 1] and satisfy c(d) = c(-d) e^{-d}, which makes the chain reversible
/// for every two-site Hamiltonian.
using RateFunction = std::function<double(Site, double)>;

/// 1 / (1 + e^{d}) in a form that neither overflows nor cancels.
double heat_bath(double grad) noexcept;
RateFunction heat_bath_rule();

double heat_bath_rate(const SpinSystem& sys, const SpinConfig& x, Site i);

/// Probes the rate on a grid of gradients for every listed site; throws
/// InputError on values outside [0, 1] or a broken reversibility relation.
void validate_rate(const RateFunction& rate, std::span<const Site> sites, double max_grad = 40.0);

/// Pf = f + sum_{i in B} (c(i, x) / n) grad_i f, tabulated over the closure of B.
Observable apply_P(const SpinSystem& sys, const Observable& f, const RateFunction& rate = heat_bath_rule());

/// Stationarity LP over nu on the closure configurations: row 0 is the
/// normalisation, then one row per sigma over Lambda (the 1/n factor dropped).
LpProblem build_mc_lp(const SpinSystem& sys, const Region& region, const Observable& f, Sense sense,
                      const RateFunction& rate = heat_bath_rule());

/// max over sigma rows of |inflow - outflow| for a distribution on closure words.
double stationarity_residual(const SpinSystem& sys, const Region& region, std::span<const double> nu,
                             const RateFunction& rate = heat_bath_rule());

struct McOptions {
    Method method = Method::Auto;
    bool strict = false;
    LpOptions lp{};
    RateFunction rate = heat_bath_rule();
    std::size_t max_policy_iterations = 60;
};

CertifiedInterval solve_mc(const SpinSystem& sys, const Region& region, const Observable& f,
                           const McOptions& opts = {});

}  // namespace gibbs
