#include "gibbs/region_layout.hpp"

namespace gibbs {

RegionLayout::RegionLayout(const SpinSystem& sys, const Region& region)
    : region_(region),
      beta_(sys.beta()),
      lambda_size_(region.lambda().size()),
      boundary_size_(region.boundary().size()) {
    if (region.closure().size() > kMaxConfigSites) {
        throw GuardError("region closure exceeds 64 sites");
    }
    const SiteList& lam = region.lambda();
    const SiteList& bd = region.boundary();
    const SiteList& cl = region.closure();

    lambda_pos_.resize(lambda_size_);
    for (std::size_t k = 0; k < lambda_size_; ++k) lambda_pos_[k] = *cl.index_of(lam[k]);
    boundary_pos_.resize(boundary_size_);
    for (std::size_t b = 0; b < boundary_size_; ++b) boundary_pos_[b] = *cl.index_of(bd[b]);

    links_.resize(lambda_size_);
    for (std::size_t k = 0; k < lambda_size_; ++k) {
        for (const Neighbor& nb : sys.neighbors(lam[k])) {
            const InteractionTable& table = sys.table(nb.table);
            if (const auto j = lam.index_of(nb.site)) {
                links_[k].push_back({std::uint32_t(*j), true, table});
                if (k < *j) inner_edges_.push_back({std::uint32_t(k), std::uint32_t(*j), table});
            } else {
                const std::size_t b = *bd.index_of(nb.site);
                links_[k].push_back({std::uint32_t(b), false, table});
                outer_edges_.push_back({std::uint32_t(k), std::uint32_t(b), table});
            }
        }
    }
}

std::uint64_t RegionLayout::closure_word(std::uint64_t sigma, std::uint64_t eta) const noexcept {
    const std::size_t m = closure_size();
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < lambda_size_; ++k) {
        if ((sigma >> (lambda_size_ - 1 - k)) & 1U) word |= site_bit(lambda_pos_[k], m);
    }
    for (std::size_t b = 0; b < boundary_size_; ++b) {
        if ((eta >> (boundary_size_ - 1 - b)) & 1U) word |= site_bit(boundary_pos_[b], m);
    }
    return word;
}

std::uint64_t RegionLayout::sigma_of(std::uint64_t closure_word) const noexcept {
    const std::size_t m = closure_size();
    std::uint64_t sigma = 0;
    for (std::size_t k = 0; k < lambda_size_; ++k) {
        if ((closure_word >> (m - 1 - lambda_pos_[k])) & 1U) sigma |= site_bit(k, lambda_size_);
    }
    return sigma;
}

std::uint64_t RegionLayout::eta_of(std::uint64_t closure_word) const noexcept {
    const std::size_t m = closure_size();
    std::uint64_t eta = 0;
    for (std::size_t b = 0; b < boundary_size_; ++b) {
        if ((closure_word >> (m - 1 - boundary_pos_[b])) & 1U) eta |= site_bit(b, boundary_size_);
    }
    return eta;
}

double RegionLayout::grad_h(std::uint64_t sigma, std::uint64_t eta, std::size_t k) const noexcept {
    const int xi = lambda_spin(sigma, k);
    double sum = 0.0;
    for (const Link& link : links_[k]) {
        const int xj = link.in_lambda ? lambda_spin(sigma, link.index) : boundary_spin(eta, link.index);
        sum += link.table(-xi, xj) - link.table(xi, xj);
    }
    return beta_ * sum;
}

double RegionLayout::inner_energy(std::uint64_t sigma) const noexcept {
    double sum = 0.0;
    for (const InnerEdge& e : inner_edges_) sum += e.table(lambda_spin(sigma, e.a), lambda_spin(sigma, e.b));
    return beta_ * sum;
}

double RegionLayout::outer_energy(std::uint64_t sigma, std::uint64_t eta) const noexcept {
    double sum = 0.0;
    for (const OuterEdge& e : outer_edges_) {
        sum += e.table(lambda_spin(sigma, e.inner), boundary_spin(eta, e.boundary));
    }
    return beta_ * sum;
}

}  // namespace gibbs
