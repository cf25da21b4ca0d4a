#include "gibbs/glauber_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "gibbs/mc_hierarchy.hpp"

namespace gibbs {

namespace {

struct Graph {
    std::vector<std::vector<std::pair<std::size_t, InteractionTable>>> adj;
    double beta;
};

Graph flatten(const SpinSystem& sys) {
    if (!sys.is_finite()) throw GuardError("Glauber dynamics needs a finite system");
    Graph g;
    g.beta = sys.beta();
    g.adj.resize(sys.num_sites());
    for (std::size_t i = 0; i < g.adj.size(); ++i) {
        for (const Neighbor& nb : sys.adjacency(Site(i))) g.adj[i].emplace_back(std::size_t(nb.site), sys.table(nb.table));
    }
    return g;
}

double local_grad(const Graph& g, const std::vector<std::int8_t>& x, std::size_t i) {
    const int xi = x[i];
    double s = 0.0;
    for (const auto& [j, h] : g.adj[i]) s += h(-xi, x[j]) - h(xi, x[j]);
    return g.beta * s;
}

bool update(const Graph& g, std::vector<std::int8_t>& x, std::size_t i, double u) {
    if (u <= heat_bath(local_grad(g, x, i))) {
        x[i] = std::int8_t(-x[i]);
        return true;
    }
    return false;
}

double eval_on(const Observable& f, const std::vector<std::int8_t>& x) {
    const auto& sup = f.support();
    const std::size_t b = sup.size();
    std::uint64_t w = 0;
    for (std::size_t k = 0; k < b; ++k)
        if (x[std::size_t(sup[k])] > 0) w |= site_bit(k, b);
    return f.value_at(w);
}

void check_sites(const SpinSystem& sys, std::span<const Site> sites) {
    for (Site s : sites) {
        if (!sys.contains(s)) throw InputError("site " + std::to_string(s) + " is not in the system");
    }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& engine) noexcept { return double(engine() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& engine, std::size_t n) noexcept {
    return std::size_t((static_cast<unsigned __int128>(engine()) * n) >> 64);
}

SpinConfig ChainState::to_config() const {
    std::vector<Site> sites(spins.size());
    std::vector<int> v(spins.size());
    for (std::size_t i = 0; i < spins.size(); ++i) {
        sites[i] = Site(i);
        v[i] = spins[i];
    }
    return SpinConfig::from_spins(SiteList(std::move(sites)), v);
}

ChainState make_state(const SpinSystem& sys, std::uint64_t seed, int initial_spin) {
    if (!sys.is_finite()) throw GuardError("Glauber dynamics needs a finite system");
    if (initial_spin != 1 && initial_spin != -1) throw InputError("initial spin must be +1 or -1");
    ChainState s;
    s.spins.assign(sys.num_sites(), std::int8_t(initial_spin));
    s.engine.seed(splitmix64(seed));
    return s;
}

ChainState random_state(const SpinSystem& sys, std::uint64_t seed) {
    ChainState s = make_state(sys, seed, 1);
    for (auto& v : s.spins) v = (s.engine() >> 63) ? 1 : -1;
    return s;
}

bool step(const SpinSystem& sys, ChainState& state) {
    const Graph g = flatten(sys);
    const std::size_t i = uniform_index(state.engine, g.adj.size());
    const double u = unit_uniform(state.engine);
    ++state.step_count;
    return update(g, state.spins, i, u);
}

void advance(const SpinSystem& sys, ChainState& state, std::uint64_t steps) {
    const Graph g = flatten(sys);
    for (std::uint64_t t = 0; t < steps; ++t) {
        const std::size_t i = uniform_index(state.engine, g.adj.size());
        update(g, state.spins, i, unit_uniform(state.engine));
    }
    state.step_count += steps;
}

Estimate estimate(const SpinSystem& sys, const Observable& f, std::uint64_t burn_in, std::size_t samples,
                  std::uint64_t thin, std::uint64_t seed) {
    const Graph g = flatten(sys);
    check_sites(sys, f.support().sites());
    if (samples < 2) throw InputError("estimate needs at least two samples");
    if (thin == 0) throw InputError("thinning interval must be positive");
    ChainState st = random_state(sys, seed);
    const std::size_t n = g.adj.size();
    auto run = [&](std::uint64_t steps, std::uint64_t& flips) {
        for (std::uint64_t t = 0; t < steps; ++t) {
            const std::size_t i = uniform_index(st.engine, n);
            flips += update(g, st.spins, i, unit_uniform(st.engine));
        }
    };
    std::uint64_t flips = 0;
    run(burn_in, flips);
    flips = 0;

    Estimate e;
    e.samples = samples;
    e.burn_in = burn_in;
    e.thin = thin;
    e.seed = seed;
    e.batches = std::min<std::size_t>(20, samples);
    const std::size_t per_batch = samples / e.batches;
    std::vector<double> batch(e.batches, 0.0);
    std::vector<std::size_t> count(e.batches, 0);
    double total = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        run(thin, flips);
        const double v = eval_on(f, st.spins);
        total += v;
        const std::size_t b = std::min(s / per_batch, e.batches - 1);
        batch[b] += v;
        ++count[b];
    }
    e.mean = total / double(samples);
    double var = 0.0;
    for (std::size_t b = 0; b < e.batches; ++b) {
        const double d = batch[b] / double(count[b]) - e.mean;
        var += d * d;
    }
    var /= double(e.batches - 1);
    e.std_error = std::sqrt(var / double(e.batches));
    e.acceptance = double(flips) / double(samples * thin);
    return e;
}

Disagreement coupled_disagreement_probability(const SpinSystem& sys, const Region& region, std::span<const Site> b,
                                              std::uint64_t t, std::size_t trials, std::uint64_t seed) {
    const Graph g = flatten(sys);
    check_sites(sys, b);
    for (Site s : b) {
        if (!region.in_lambda(s)) throw GuardError("coupling probe needs B inside Lambda");
    }
    if (trials == 0) throw InputError("coupling probe needs at least one trial");
    const std::size_t n = g.adj.size();
    std::vector<std::int8_t> x0(n, 1), y0(n, -1);
    for (Site s : region.lambda()) y0[std::size_t(s)] = 1;
    std::size_t initial_diff = 0;
    for (std::size_t i = 0; i < n; ++i) initial_diff += x0[i] != y0[i];

    std::size_t hits = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::mt19937_64 engine(splitmix64(seed + trial));
        std::vector<std::int8_t> x = x0, y = y0;
        std::size_t diff = initial_diff;
        for (std::uint64_t s = 0; s < t && diff > 0; ++s) {
            const std::size_t i = uniform_index(engine, n);
            const double u = unit_uniform(engine);
            const bool before = x[i] != y[i];
            update(g, x, i, u);
            update(g, y, i, u);
            // only site i can change its agreement status
            const bool after = x[i] != y[i];
            diff = diff + after - before;
        }
        bool differ = false;
        for (Site s : b) differ = differ || x[std::size_t(s)] != y[std::size_t(s)];
        hits += differ;
    }
    Disagreement d;
    d.trials = trials;
    d.steps = t;
    d.sweeps = double(t) / double(n);
    d.probability = double(hits) / double(trials);
    d.std_error = std::sqrt(d.probability * (1 - d.probability) / double(trials));
    return d;
}

}  // namespace gibbs
