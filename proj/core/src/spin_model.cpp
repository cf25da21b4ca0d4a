#include "gibbs/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gibbs {

namespace {

constexpr std::int64_t kGridOffset = std::int64_t{1} << 30;
constexpr std::int64_t kChainLimit = std::int64_t{1} << 62;

}  // namespace

InteractionTable::InteractionTable(double mm, double mp, double pm, double pp) : v_{mm, mp, pm, pp} {
    for (double v : v_) {
        if (!std::isfinite(v)) throw InputError("interaction table entries must be finite");
    }
    if (mp != pm) {
        std::ostringstream msg;
        msg << "interaction table is not symmetric: h(-,+)=" << mp << " but h(+,-)=" << pm;
        throw InputError(msg.str());
    }
}

InteractionTable InteractionTable::ising(double coupling) {
    return InteractionTable(-coupling, coupling, coupling, -coupling);
}

double InteractionTable::effective_coupling() const noexcept {
    return (v_[1] + v_[2] - v_[0] - v_[3]) / 4.0;
}

bool InteractionTable::flip_symmetric() const noexcept { return v_[0] == v_[3] && v_[1] == v_[2]; }

std::string_view to_string(Topology t) {
    switch (t) {
        case Topology::Chain: return "chain";
        case Topology::Cycle: return "cycle";
        case Topology::Grid2D: return "grid2d";
        case Topology::Explicit: return "explicit";
        case Topology::InfiniteChain: return "infinite_chain";
        case Topology::InfiniteGrid2D: return "infinite_grid2d";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// SpinSystem

SpinSystem SpinSystem::chain(std::size_t n, std::vector<InteractionTable> tables, double beta) {
    if (n == 0) throw InputError("chain needs at least one site");
    SpinSystem s;
    s.topology_ = Topology::Chain;
    s.n_ = n;
    s.beta_ = beta;
    s.tables_ = std::move(tables);
    for (std::size_t i = 0; i + 1 < n; ++i) s.edges_.push_back({Site(i), Site(i + 1), 0});
    s.finalize();
    return s;
}

SpinSystem SpinSystem::cycle(std::size_t n, std::vector<InteractionTable> tables, double beta) {
    if (n < 3) throw InputError("cycle needs at least three sites");
    SpinSystem s;
    s.topology_ = Topology::Cycle;
    s.n_ = n;
    s.beta_ = beta;
    s.tables_ = std::move(tables);
    for (std::size_t i = 0; i + 1 < n; ++i) s.edges_.push_back({Site(i), Site(i + 1), 0});
    s.edges_.push_back({Site(n - 1), Site(0), 0});
    s.finalize();
    return s;
}

SpinSystem SpinSystem::grid2d(std::size_t rows, std::size_t cols, std::vector<InteractionTable> tables,
                              double beta) {
    if (rows == 0 || cols == 0) throw InputError("grid dimensions must be positive");
    SpinSystem s;
    s.topology_ = Topology::Grid2D;
    s.n_ = rows * cols;
    s.rows_ = rows;
    s.cols_ = cols;
    s.beta_ = beta;
    s.tables_ = std::move(tables);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const Site id = Site(r * cols + c);
            if (c + 1 < cols) s.edges_.push_back({id, id + 1, 0});
            if (r + 1 < rows) s.edges_.push_back({id, id + Site(cols), 0});
        }
    }
    s.finalize();
    return s;
}

SpinSystem SpinSystem::explicit_graph(std::size_t n, const std::vector<std::pair<Site, Site>>& edges,
                                      std::vector<InteractionTable> tables, double beta) {
    if (n == 0) throw InputError("explicit graph needs at least one site");
    SpinSystem s;
    s.topology_ = Topology::Explicit;
    s.n_ = n;
    s.beta_ = beta;
    s.tables_ = std::move(tables);
    for (const auto& [a, b] : edges) s.edges_.push_back({a, b, 0});
    s.finalize();
    return s;
}

SpinSystem SpinSystem::infinite_chain(InteractionTable table, double beta) {
    SpinSystem s;
    s.topology_ = Topology::InfiniteChain;
    s.beta_ = beta;
    s.tables_ = {table};
    s.finalize();
    return s;
}

SpinSystem SpinSystem::infinite_grid2d(InteractionTable table, double beta) {
    SpinSystem s;
    s.topology_ = Topology::InfiniteGrid2D;
    s.beta_ = beta;
    s.tables_ = {table};
    s.finalize();
    return s;
}

void SpinSystem::finalize() {
    if (!std::isfinite(beta_) || beta_ < 0.0) throw InputError("beta must be finite and nonnegative");
    if (tables_.empty()) throw InputError("at least one interaction table is required");

    if (!is_finite()) {
        if (tables_.size() != 1) throw InputError("implicit lattices take exactly one interaction table");
        max_degree_ = topology_ == Topology::InfiniteChain ? 2 : 4;
        return;
    }

    if (tables_.size() != 1 && tables_.size() != edges_.size()) {
        std::ostringstream msg;
        msg << "expected 1 or " << edges_.size() << " interaction tables, got " << tables_.size();
        throw InputError(msg.str());
    }
    std::set<std::pair<Site, Site>> seen;
    adjacency_.assign(n_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        Edge& edge = edges_[e];
        edge.table = tables_.size() == 1 ? 0 : e;
        if (edge.a == edge.b) throw InputError("edge endpoints must be distinct");
        if (edge.a < 0 || edge.b < 0 || std::size_t(edge.a) >= n_ || std::size_t(edge.b) >= n_) {
            throw InputError("edge endpoint outside the site set");
        }
        if (!seen.insert({std::min(edge.a, edge.b), std::max(edge.a, edge.b)}).second) {
            throw InputError("duplicate edge");
        }
        adjacency_[std::size_t(edge.a)].push_back({edge.b, edge.table});
        adjacency_[std::size_t(edge.b)].push_back({edge.a, edge.table});
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Neighbor& x, const Neighbor& y) { return x.site < y.site; });
        max_degree_ = std::max(max_degree_, int(adj.size()));
    }
}

bool SpinSystem::is_finite() const noexcept {
    return topology_ != Topology::InfiniteChain && topology_ != Topology::InfiniteGrid2D;
}

void SpinSystem::require_finite(std::string_view what) const {
    if (!is_finite()) {
        std::ostringstream msg;
        msg << what << " requires a finite system; " << to_string(topology_) << " has no finite vertex set";
        throw GuardError(msg.str());
    }
}

std::size_t SpinSystem::num_sites() const {
    require_finite("num_sites");
    return n_;
}

const std::vector<Edge>& SpinSystem::edges() const {
    require_finite("edge enumeration");
    return edges_;
}

std::span<const Neighbor> SpinSystem::adjacency(Site i) const {
    require_finite("adjacency");
    if (!contains(i)) throw InputError("site " + std::to_string(i) + " is not in the system");
    return adjacency_[std::size_t(i)];
}

std::vector<Neighbor> SpinSystem::neighbors(Site i) const {
    if (!contains(i)) throw InputError("site " + std::to_string(i) + " is not in the system");
    switch (topology_) {
        case Topology::InfiniteChain: return {{i - 1, 0}, {i + 1, 0}};
        case Topology::InfiniteGrid2D: {
            const auto [r, c] = infinite_grid_coords(i);
            std::vector<Neighbor> out;
            if (contains(infinite_grid_site(r - 1, c))) out.push_back({infinite_grid_site(r - 1, c), 0});
            if (contains(infinite_grid_site(r, c - 1))) out.push_back({infinite_grid_site(r, c - 1), 0});
            if (contains(infinite_grid_site(r, c + 1))) out.push_back({infinite_grid_site(r, c + 1), 0});
            if (contains(infinite_grid_site(r + 1, c))) out.push_back({infinite_grid_site(r + 1, c), 0});
            return out;
        }
        default: {
            const auto& adj = adjacency_[std::size_t(i)];
            return {adj.begin(), adj.end()};
        }
    }
}

bool SpinSystem::contains(Site i) const noexcept {
    switch (topology_) {
        case Topology::InfiniteChain: return i > -kChainLimit && i < kChainLimit;
        case Topology::InfiniteGrid2D: {
            if (i < 0) return false;
            const auto [r, c] = infinite_grid_coords(i);
            return r > -kGridOffset && r < kGridOffset && c > -kGridOffset && c < kGridOffset;
        }
        default: return i >= 0 && std::size_t(i) < n_;
    }
}

std::array<std::size_t, 2> SpinSystem::grid_dims() const {
    if (topology_ != Topology::Grid2D) throw InputError("grid_dims on a non-grid system");
    return {rows_, cols_};
}

double SpinSystem::max_effective_coupling() const noexcept {
    double j = 0.0;
    for (const auto& t : tables_) j = std::max(j, std::abs(t.effective_coupling()));
    return j;
}

bool SpinSystem::fast_mixing_flag() const noexcept {
    return double(max_degree_) * std::tanh(beta_ * max_effective_coupling()) < 1.0;
}

bool SpinSystem::flip_symmetric() const noexcept {
    return std::all_of(tables_.begin(), tables_.end(), [](const InteractionTable& t) { return t.flip_symmetric(); });
}

SpinSystem SpinSystem::with_beta(double beta) const {
    SpinSystem copy = *this;
    if (!std::isfinite(beta) || beta < 0.0) throw InputError("beta must be finite and nonnegative");
    copy.beta_ = beta;
    return copy;
}

std::string SpinSystem::describe() const {
    std::ostringstream out;
    out << to_string(topology_);
    if (topology_ == Topology::Grid2D) {
        out << ' ' << rows_ << 'x' << cols_;
    } else if (is_finite()) {
        out << " n=" << n_;
    }
    if (is_finite()) out << ", " << edges_.size() << " edges";
    out << ", Delta=" << max_degree_ << ", beta=" << beta_;
    return out.str();
}

Site infinite_grid_site(std::int64_t row, std::int64_t col) {
    return ((row + kGridOffset) << 31) | (col + kGridOffset);
}

std::pair<std::int64_t, std::int64_t> infinite_grid_coords(Site s) {
    const std::int64_t mask = (std::int64_t{1} << 31) - 1;
    return {(s >> 31) - kGridOffset, (s & mask) - kGridOffset};
}

// ---------------------------------------------------------------------------
// SiteList / SpinConfig

SiteList::SiteList() {
    static const auto empty = std::make_shared<const std::vector<Site>>();
    sites_ = empty;
}

SiteList::SiteList(std::vector<Site> sites) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    sites_ = std::make_shared<const std::vector<Site>>(std::move(sites));
}

std::optional<std::size_t> SiteList::index_of(Site s) const noexcept {
    const auto it = std::lower_bound(sites_->begin(), sites_->end(), s);
    if (it == sites_->end() || *it != s) return std::nullopt;
    return std::size_t(it - sites_->begin());
}

bool SiteList::operator==(const SiteList& other) const noexcept {
    return sites_ == other.sites_ || *sites_ == *other.sites_;
}

SpinConfig::SpinConfig(SiteList sites, std::uint64_t word) : sites_(std::move(sites)), word_(word) {
    const std::size_t m = sites_.size();
    if (m > kMaxConfigSites) throw GuardError("configurations are limited to 64 sites");
    if (m < kMaxConfigSites && (word_ >> m) != 0) throw InputError("configuration word has bits beyond its sites");
}

SpinConfig SpinConfig::from_spins(SiteList sites, std::span<const int> spins) {
    if (spins.size() != sites.size()) throw InputError("spin vector length does not match the site list");
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < spins.size(); ++k) {
        if (spins[k] != 1 && spins[k] != -1) throw InputError("spins must be +1 or -1");
        if (spins[k] > 0) word |= site_bit(k, spins.size());
    }
    return SpinConfig(std::move(sites), word);
}

SpinConfig SpinConfig::uniform(SiteList sites, int spin) {
    const std::size_t m = sites.size();
    if (m > kMaxConfigSites) throw GuardError("configurations are limited to 64 sites");
    std::uint64_t word = 0;
    if (spin > 0) word = m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
    return SpinConfig(std::move(sites), word);
}

int SpinConfig::operator[](Site s) const {
    const auto k = sites_.index_of(s);
    if (!k) throw GuardError("site " + std::to_string(s) + " is not covered by the configuration");
    return spin_at(*k);
}

SpinConfig SpinConfig::flipped(Site s) const {
    const auto k = sites_.index_of(s);
    if (!k) throw GuardError("cannot flip site " + std::to_string(s) + ": not covered");
    return SpinConfig(sites_, word_ ^ site_bit(*k, sites_.size()));
}

SpinConfig SpinConfig::restricted(const SiteList& subset) const {
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < subset.size(); ++k) {
        if ((*this)[subset[k]] > 0) word |= site_bit(k, subset.size());
    }
    return SpinConfig(subset, word);
}

bool SpinConfig::operator==(const SpinConfig& other) const noexcept {
    return word_ == other.word_ && sites_ == other.sites_;
}

SpinConfig flip(const SpinConfig& x, Site i) { return x.flipped(i); }

// ---------------------------------------------------------------------------
// Regions

Region::Region(SiteList lambda, SiteList boundary, SiteList closure)
    : lambda_(std::move(lambda)), boundary_(std::move(boundary)), closure_(std::move(closure)) {}

Region make_region(const SpinSystem& sys, std::vector<Site> lambda) {
    if (lambda.empty()) throw InputError("region must be nonempty");
    for (Site s : lambda) {
        if (!sys.contains(s)) throw InputError("site " + std::to_string(s) + " is not in the system");
    }
    SiteList lam(std::move(lambda));
    std::vector<Site> boundary;
    for (Site i : lam) {
        for (const Neighbor& nb : sys.neighbors(i)) {
            if (!lam.contains(nb.site)) boundary.push_back(nb.site);
        }
    }
    SiteList bd(std::move(boundary));
    std::vector<Site> closure(lam.begin(), lam.end());
    closure.insert(closure.end(), bd.begin(), bd.end());
    return Region(std::move(lam), std::move(bd), SiteList(std::move(closure)));
}

Region ball_region(const SpinSystem& sys, std::span<const Site> centers, std::size_t radius) {
    if (centers.empty()) throw InputError("ball needs at least one center");
    std::unordered_set<Site> visited;
    std::vector<Site> frontier;
    for (Site s : centers) {
        if (!sys.contains(s)) throw InputError("site " + std::to_string(s) + " is not in the system");
        if (visited.insert(s).second) frontier.push_back(s);
    }
    for (std::size_t d = 0; d < radius && !frontier.empty(); ++d) {
        std::vector<Site> next;
        for (Site s : frontier) {
            for (const Neighbor& nb : sys.neighbors(s)) {
                if (visited.insert(nb.site).second) next.push_back(nb.site);
            }
        }
        frontier = std::move(next);
    }
    return make_region(sys, std::vector<Site>(visited.begin(), visited.end()));
}

std::optional<std::size_t> distance_to_complement(const SpinSystem& sys, const Region& region,
                                                  std::span<const Site> centers) {
    std::unordered_set<Site> visited;
    std::vector<Site> frontier;
    for (Site s : centers) {
        if (!region.in_lambda(s)) return 0;
        if (visited.insert(s).second) frontier.push_back(s);
    }
    for (std::size_t d = 1; !frontier.empty(); ++d) {
        std::vector<Site> next;
        for (Site s : frontier) {
            for (const Neighbor& nb : sys.neighbors(s)) {
                if (!region.in_lambda(nb.site)) return d;
                if (visited.insert(nb.site).second) next.push_back(nb.site);
            }
        }
        frontier = std::move(next);
    }
    return std::nullopt;
}

BoundaryCondition::BoundaryCondition(const Region& region, std::uint64_t word)
    : config_(region.boundary(), word) {}

BoundaryCondition BoundaryCondition::uniform(const Region& region, int spin) {
    return BoundaryCondition(SpinConfig::uniform(region.boundary(), spin));
}

// ---------------------------------------------------------------------------
// Hamiltonians

double hamiltonian(const SpinSystem& sys, const SpinConfig& x) {
    if (!sys.is_finite()) throw GuardError("whole-system Hamiltonian requested on an implicit lattice");
    const std::size_t n = sys.num_sites();
    if (x.size() != n || x.sites()[0] != 0 || std::size_t(x.sites()[n - 1]) != n - 1) {
        throw GuardError("hamiltonian needs a configuration over every site of the system");
    }
    double sum = 0.0;
    for (const Edge& e : sys.edges()) {
        sum += sys.table(e.table)(x.spin_at(std::size_t(e.a)), x.spin_at(std::size_t(e.b)));
    }
    return sys.beta() * sum;
}

double grad_h(const SpinSystem& sys, const SpinConfig& x, Site i) {
    const int xi = x[i];
    double sum = 0.0;
    for (const Neighbor& nb : sys.neighbors(i)) {
        if (!x.covers(nb.site)) {
            throw GuardError("grad_h: neighbour " + std::to_string(nb.site) + " of site " + std::to_string(i) +
                             " is not covered");
        }
        const int xj = x[nb.site];
        const InteractionTable& h = sys.table(nb.table);
        sum += h(-xi, xj) - h(xi, xj);
    }
    return sys.beta() * sum;
}

double local_hamiltonian(const SpinSystem& sys, const Region& region, const BoundaryCondition& eta,
                         const SpinConfig& x) {
    if (!(eta.config().sites() == region.boundary())) {
        throw GuardError("boundary condition does not cover exactly the boundary of the region");
    }
    double sum = 0.0;
    for (Site i : region.lambda()) {
        const int xi = x[i];
        for (const Neighbor& nb : sys.neighbors(i)) {
            const InteractionTable& h = sys.table(nb.table);
            if (region.in_lambda(nb.site)) {
                if (i < nb.site) sum += h(xi, x[nb.site]);
            } else {
                sum += h(xi, eta[nb.site]);
            }
        }
    }
    return sys.beta() * sum;
}

}  // namespace gibbs
