#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs {

inline constexpr std::size_t kMaxEnumerationSites = 24;
inline constexpr std::size_t kMaxBoundarySites = 22;
// |Lambda| + |boundary| for the boundary sweep, i.e. at most 2^28 local states overall
inline constexpr std::size_t kMaxSweepBits = 28;

/// log Z for a finite system by exhaustive enumeration.
double partition_function(const SpinSystem& sys);
double expectation(const SpinSystem& sys, const Observable& f);

/// Law of the spins on `sites` under the Gibbs measure, indexed by SpinConfig word.
std::vector<double> exact_marginal(const SpinSystem& sys, const SiteList& sites);

double local_gibbs_expectation(const SpinSystem& sys, const Region& region, const BoundaryCondition& eta,
                               const Observable& f);

struct BoundarySweep {
    double min = 0.0;
    double max = 0.0;
    std::uint64_t argmin = 0;  ///< boundary words attaining the extremes
    std::uint64_t argmax = 0;
    std::size_t count = 0;
};

/// mu_Lambda^eta(f) over every boundary condition eta.
BoundarySweep sweep_boundary_conditions(const SpinSystem& sys, const Region& region, const Observable& f);
double boundary_gap(const SpinSystem& sys, const Region& region, const Observable& f);

/// mu(f) for a spin product on a chain or cycle, via 2x2 transfer matrices.
double transfer_matrix_expectation(const SpinSystem& sys, const Observable& f);

}  // namespace gibbs
