#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gibbs/error.hpp"

namespace gibbs {

using Site = std::int64_t;

/// Symmetric two-site interaction h(a, b) for a, b in {-1, +1}.
///
/// Entries are listed in lexicographic order of (a, b) with -1 before +1,
/// i.e. h(-,-), h(-,+), h(+,-), h(+,+). The constructor rejects tables with
/// h(-,+) != h(+,-).
class InteractionTable {
public:
    constexpr InteractionTable() = default;
    InteractionTable(double mm, double mp, double pm, double pp);

    /// h(a, b) = -coupling * a * b. coupling = +1 is the ferromagnet.
    static InteractionTable ising(double coupling);

    double operator()(int a, int b) const noexcept { return v_[(a > 0 ? 2 : 0) + (b > 0 ? 1 : 0)]; }
    const std::array<double, 4>& entries() const noexcept { return v_; }

    /// (h(+,-) + h(-,+) - h(+,+) - h(-,-)) / 4; equals J for h = -J a b.
    double effective_coupling() const noexcept;
    /// h(a, b) == h(-a, -b) for all a, b.
    bool flip_symmetric() const noexcept;

    bool operator==(const InteractionTable&) const = default;

private:
    std::array<double, 4> v_{};
};

enum class Topology { Chain, Cycle, Grid2D, Explicit, InfiniteChain, InfiniteGrid2D };

std::string_view to_string(Topology t);

struct Edge {
    Site a;
    Site b;
    std::size_t table;
};

struct Neighbor {
    Site site;
    std::size_t table;
};

/// Graph, per-edge interaction tables and inverse temperature.
///
/// Finite systems number their sites 0..n-1 (grids row-major). Implicit
/// lattices (infinite chain, infinite square lattice) have translation
/// invariant couplings and only answer neighbourhood queries; anything that
/// needs the whole vertex set throws GuardError.
class SpinSystem {
public:
    /// `tables` holds either one table shared by every edge or one per edge,
    /// in the order edges() reports them.
    static SpinSystem chain(std::size_t n, std::vector<InteractionTable> tables, double beta);
    static SpinSystem cycle(std::size_t n, std::vector<InteractionTable> tables, double beta);
    static SpinSystem grid2d(std::size_t rows, std::size_t cols, std::vector<InteractionTable> tables,
                             double beta);
    static SpinSystem explicit_graph(std::size_t n, const std::vector<std::pair<Site, Site>>& edges,
                                     std::vector<InteractionTable> tables, double beta);
    static SpinSystem infinite_chain(InteractionTable table, double beta);
    static SpinSystem infinite_grid2d(InteractionTable table, double beta);

    Topology topology() const noexcept { return topology_; }
    bool is_finite() const noexcept;
    double beta() const noexcept { return beta_; }

    std::size_t num_sites() const;
    const std::vector<Edge>& edges() const;
    /// Adjacency of a site in a finite system.
    std::span<const Neighbor> adjacency(Site i) const;
    /// Neighbours of any site, finite or implicit.
    std::vector<Neighbor> neighbors(Site i) const;
    bool contains(Site i) const noexcept;

    const InteractionTable& table(std::size_t index) const { return tables_.at(index); }
    std::size_t num_tables() const noexcept { return tables_.size(); }

    /// Maximum degree Delta.
    int max_degree() const noexcept { return max_degree_; }
    /// Rows and columns of a finite grid.
    std::array<std::size_t, 2> grid_dims() const;
    /// max_e |effective_coupling(h_e)|.
    double max_effective_coupling() const noexcept;
    /// Delta * tanh(beta * J_max) < 1, the sufficient condition for fast
    /// mixing of heat-bath dynamics.
    bool fast_mixing_flag() const noexcept;
    /// True when every table satisfies h(a,b) = h(-a,-b).
    bool flip_symmetric() const noexcept;

    SpinSystem with_beta(double beta) const;
    std::string describe() const;

private:
    SpinSystem() = default;
    void finalize();
    void require_finite(std::string_view what) const;

    Topology topology_ = Topology::Explicit;
    double beta_ = 0.0;
    std::size_t n_ = 0;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Edge> edges_;
    std::vector<InteractionTable> tables_;
    std::vector<std::vector<Neighbor>> adjacency_;
    int max_degree_ = 0;
};

/// Site id of (row, col) on the infinite square lattice; |row|, |col| < 2^30.
Site infinite_grid_site(std::int64_t row, std::int64_t col);
std::pair<std::int64_t, std::int64_t> infinite_grid_coords(Site s);

/// Sorted, duplicate-free list of sites shared cheaply between configurations.
class SiteList {
public:
    SiteList();
    /// Sorts and removes duplicates.
    explicit SiteList(std::vector<Site> sites);

    std::size_t size() const noexcept { return sites_->size(); }
    bool empty() const noexcept { return sites_->empty(); }
    Site operator[](std::size_t k) const noexcept { return (*sites_)[k]; }
    auto begin() const noexcept { return sites_->begin(); }
    auto end() const noexcept { return sites_->end(); }
    const std::vector<Site>& sites() const noexcept { return *sites_; }

    std::optional<std::size_t> index_of(Site s) const noexcept;
    bool contains(Site s) const noexcept { return index_of(s).has_value(); }

    bool operator==(const SiteList& other) const noexcept;

private:
    std::shared_ptr<const std::vector<Site>> sites_;
};

inline constexpr std::size_t kMaxConfigSites = 64;

/// Bit of site index k inside a word over m sites. The first site is the most
/// significant bit, so the word value is the lexicographic index of the
/// configuration with -1 < +1.
constexpr std::uint64_t site_bit(std::size_t k, std::size_t m) noexcept { return std::uint64_t{1} << (m - 1 - k); }
constexpr int spin_of(std::uint64_t word, std::size_t k, std::size_t m) noexcept {
    return ((word >> (m - 1 - k)) & 1U) != 0 ? 1 : -1;
}

/// Assignment of +-1 to every site of a SiteList, packed in one word.
class SpinConfig {
public:
    SpinConfig(SiteList sites, std::uint64_t word);
    static SpinConfig from_spins(SiteList sites, std::span<const int> spins);
    static SpinConfig uniform(SiteList sites, int spin);

    const SiteList& sites() const noexcept { return sites_; }
    std::uint64_t word() const noexcept { return word_; }
    std::size_t size() const noexcept { return sites_.size(); }

    bool covers(Site s) const noexcept { return sites_.contains(s); }
    /// Spin at site s; InputError when s is not covered.
    int operator[](Site s) const;
    int spin_at(std::size_t k) const noexcept { return spin_of(word_, k, sites_.size()); }

    SpinConfig flipped(Site s) const;
    /// Restriction to a subset of the covered sites.
    SpinConfig restricted(const SiteList& subset) const;

    bool operator==(const SpinConfig& other) const noexcept;

private:
    SiteList sites_;
    std::uint64_t word_ = 0;
};

/// x^i: the configuration with spin i flipped.
SpinConfig flip(const SpinConfig& x, Site i);

/// A finite set Lambda with its external boundary and closure.
class Region {
public:
    const SiteList& lambda() const noexcept { return lambda_; }
    const SiteList& boundary() const noexcept { return boundary_; }
    const SiteList& closure() const noexcept { return closure_; }

    bool in_lambda(Site s) const noexcept { return lambda_.contains(s); }
    bool in_boundary(Site s) const noexcept { return boundary_.contains(s); }

private:
    friend Region make_region(const SpinSystem& sys, std::vector<Site> lambda);
    Region(SiteList lambda, SiteList boundary, SiteList closure);

    SiteList lambda_;
    SiteList boundary_;
    SiteList closure_;
};

/// Lambda with its external boundary { j not in Lambda : j ~ i for some i in Lambda }.
Region make_region(const SpinSystem& sys, std::vector<Site> lambda);

/// Region of all sites within graph distance `radius` of `centers`.
Region ball_region(const SpinSystem& sys, std::span<const Site> centers, std::size_t radius);

/// dist(B, Lambda^c) in the (ambient) lattice graph; nullopt when the
/// complement is empty.
std::optional<std::size_t> distance_to_complement(const SpinSystem& sys, const Region& region,
                                                  std::span<const Site> centers);

/// Frozen spins on the external boundary of a region.
class BoundaryCondition {
public:
    BoundaryCondition(const Region& region, std::uint64_t word);
    explicit BoundaryCondition(SpinConfig config) : config_(std::move(config)) {}
    static BoundaryCondition uniform(const Region& region, int spin);

    const SpinConfig& config() const noexcept { return config_; }
    int operator[](Site s) const { return config_[s]; }

private:
    SpinConfig config_;
};

/// H(x) = beta * sum_e h_e(x_i, x_j); x must cover the whole (finite) system.
double hamiltonian(const SpinSystem& sys, const SpinConfig& x);

/// H(x^i) - H(x), evaluated from the neighbourhood of i only.
double grad_h(const SpinSystem& sys, const SpinConfig& x, Site i);

/// beta * H_Lambda^eta(x) with x over Lambda and eta over the boundary.
double local_hamiltonian(const SpinSystem& sys, const Region& region, const BoundaryCondition& eta,
                         const SpinConfig& x);

}  // namespace gibbs
