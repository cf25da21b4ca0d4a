#pragma once

// Average-reward control on the Lambda configurations. The stationarity LP
// over nu(sigma, eta) is the occupation-measure LP of this problem: states are
// sigma, actions are boundary words eta, sigma jumps to sigma^k at rate
// c_k(sigma, eta) and earns f(sigma, eta). Any bias vector g certifies
//   LP^max <= max_{sigma,eta} f + sum_k c_k (g(sigma^k) - g(sigma)).

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gibbs::detail {

struct ControlProblem {
    std::size_t states = 0;   // 2^|Lambda|
    std::size_t actions = 0;  // 2^|boundary|
    std::size_t sites = 0;    // |Lambda|
    std::vector<std::uint64_t> flip;  // sigma bit of Lambda site k
    std::vector<double> rate;         // [(s * actions + a) * sites + k]
    std::vector<double> reward;       // [s * actions + a]
    std::vector<double> energy;       // local energy, used when there is one action

    double c(std::size_t s, std::size_t a, std::size_t k) const { return rate[(s * actions + a) * sites + k]; }
};

struct ControlResult {
    double certified = 0.0;  // dual bound, outward rounded
    double attained = 0.0;   // value of the final policy's stationary law
    double residual = 0.0;   // stationarity residual of that law
    std::size_t iterations = 0;
    std::vector<double> occupation;  // [s * actions + a]
};

/// maximise when `maximise`, else minimise.
ControlResult optimise(const ControlProblem& cp, bool maximise, std::size_t max_iterations);

}  // namespace gibbs::detail
