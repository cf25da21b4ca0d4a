#pragma once

#include <cstddef>

#include "gibbs/certified_interval.hpp"
#include "gibbs/lp_solver.hpp"
#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs {

inline constexpr std::size_t kMaxRawClosure = 16;

/// Spin-flip LP over nu on the closure configurations. Row 0 is the
/// normalisation; then one row per (x, i) with x_i = +1.
LpProblem build_dlr_lp(const SpinSystem& sys, const Region& region, const Observable& f, Sense sense);

/// min / max over boundary conditions of the local Gibbs expectation.
CertifiedInterval solve_dlr_reduced(const SpinSystem& sys, const Region& region, const Observable& f);

struct DlrOptions {
    Method method = Method::Auto;
    bool strict = false;
    LpOptions lp{};
};

CertifiedInterval solve_dlr(const SpinSystem& sys, const Region& region, const Observable& f,
                            const DlrOptions& opts = {});

}  // namespace gibbs
