#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs {

/// splitmix64 finaliser; per-trial seeds are splitmix(seed + trial).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Current configuration of a heat-bath chain on a finite system.
///
/// Spins are held as a plain vector indexed by site so systems larger than a
/// SpinConfig word are fine; to_config() packs them when n <= 64.
struct ChainState {
    std::vector<std::int8_t> spins;
    std::uint64_t step_count = 0;
    std::mt19937_64 engine;

    SpinConfig to_config() const;
};

ChainState make_state(const SpinSystem& sys, std::uint64_t seed, int initial_spin);
/// Spins drawn uniformly from the engine.
ChainState random_state(const SpinSystem& sys, std::uint64_t seed);

/// Uniform double in [0, 1) with 53 random bits.
double unit_uniform(std::mt19937_64& engine) noexcept;
/// Uniform integer in [0, n).
std::size_t uniform_index(std::mt19937_64& engine, std::size_t n) noexcept;

/// One update: i uniform over V, U uniform, flip x_i iff U <= c(i, x).
/// Returns whether the spin flipped.
bool step(const SpinSystem& sys, ChainState& state);
void advance(const SpinSystem& sys, ChainState& state, std::uint64_t steps);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;  ///< batch-means standard error
    std::size_t samples = 0;
    std::size_t batches = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thin = 0;
    std::uint64_t seed = 0;
    double acceptance = 0.0;  ///< fraction of updates that flipped
};

/// Time average of f after burn_in steps, one sample every `thin` steps.
Estimate estimate(const SpinSystem& sys, const Observable& f, std::uint64_t burn_in, std::size_t samples,
                  std::uint64_t thin, std::uint64_t seed);

struct Disagreement {
    double probability = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    std::uint64_t steps = 0;
    double sweeps = 0.0;  ///< steps / n
};

/// Identical-randomness coupling of X (all +1) and Y (+1 on Lambda, -1
/// elsewhere); frequency of X_t != Y_t somewhere on B after t steps.
Disagreement coupled_disagreement_probability(const SpinSystem& sys, const Region& region, std::span<const Site> b,
                                              std::uint64_t t, std::size_t trials, std::uint64_t seed);

}  // namespace gibbs
