#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gibbs/spin_model.hpp"

namespace gibbs {

/// Flat indexing of a region used by every enumeration loop.
///
/// Three word spaces are involved: sigma words over Lambda, eta words over the
/// external boundary, and closure words over Lambda-bar. Each uses the
/// SpinConfig bit convention (first site most significant), so word values are
/// lexicographic configuration indices. The layout copies the interaction
/// tables it needs and does not reference the SpinSystem afterwards.
class RegionLayout {
public:
    struct Link {
        std::uint32_t index;  ///< index into Lambda (in_lambda) or into the boundary
        bool in_lambda;
        InteractionTable table;
    };
    struct InnerEdge {
        std::uint32_t a;
        std::uint32_t b;
        InteractionTable table;
    };
    struct OuterEdge {
        std::uint32_t inner;     ///< Lambda index
        std::uint32_t boundary;  ///< boundary index
        InteractionTable table;
    };

    RegionLayout(const SpinSystem& sys, const Region& region);

    const Region& region() const noexcept { return region_; }
    double beta() const noexcept { return beta_; }
    std::size_t lambda_size() const noexcept { return lambda_size_; }
    std::size_t boundary_size() const noexcept { return boundary_size_; }
    std::size_t closure_size() const noexcept { return lambda_size_ + boundary_size_; }

    std::span<const Link> links(std::size_t k) const noexcept { return links_[k]; }
    const std::vector<InnerEdge>& inner_edges() const noexcept { return inner_edges_; }
    const std::vector<OuterEdge>& outer_edges() const noexcept { return outer_edges_; }

    /// Position of Lambda site k / boundary site b inside the closure ordering.
    std::size_t lambda_position(std::size_t k) const noexcept { return lambda_pos_[k]; }
    std::size_t boundary_position(std::size_t b) const noexcept { return boundary_pos_[b]; }

    std::uint64_t closure_word(std::uint64_t sigma, std::uint64_t eta) const noexcept;
    std::uint64_t sigma_of(std::uint64_t closure_word) const noexcept;
    std::uint64_t eta_of(std::uint64_t closure_word) const noexcept;

    int lambda_spin(std::uint64_t sigma, std::size_t k) const noexcept { return spin_of(sigma, k, lambda_size_); }
    int boundary_spin(std::uint64_t eta, std::size_t b) const noexcept { return spin_of(eta, b, boundary_size_); }
    std::uint64_t lambda_bit(std::size_t k) const noexcept { return site_bit(k, lambda_size_); }

    /// H(x^i) - H(x) for the Lambda site with index k, x = (sigma, eta).
    double grad_h(std::uint64_t sigma, std::uint64_t eta, std::size_t k) const noexcept;
    /// beta * (edges inside Lambda).
    double inner_energy(std::uint64_t sigma) const noexcept;
    /// beta * (edges from Lambda to the boundary).
    double outer_energy(std::uint64_t sigma, std::uint64_t eta) const noexcept;
    /// beta * H_Lambda^eta(sigma).
    double local_energy(std::uint64_t sigma, std::uint64_t eta) const noexcept {
        return inner_energy(sigma) + outer_energy(sigma, eta);
    }

private:
    Region region_;
    double beta_;
    std::size_t lambda_size_;
    std::size_t boundary_size_;
    std::vector<std::vector<Link>> links_;
    std::vector<InnerEdge> inner_edges_;
    std::vector<OuterEdge> outer_edges_;
    std::vector<std::size_t> lambda_pos_;
    std::vector<std::size_t> boundary_pos_;
};

}  // namespace gibbs
