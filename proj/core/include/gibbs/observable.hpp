#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gibbs/region_layout.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs {

inline constexpr std::size_t kMaxSupport = 20;

/// Local function f tabulated over the configurations of its support B.
///
/// The table has 2^|B| entries in lexicographic order of the (sorted) support
/// with -1 before +1, matching SpinConfig words over B.
class Observable {
public:
    Observable(std::vector<Site> support, std::vector<double> table, std::string label = {});

    const SiteList& support() const noexcept { return support_; }
    std::span<const double> table() const noexcept { return table_; }
    const std::string& label() const noexcept { return label_; }

    double value_at(std::uint64_t word) const noexcept { return table_[word]; }

private:
    SiteList support_;
    std::vector<double> table_;
    std::string label_;
};

/// prod_{i in S} x_i (the empty product is the constant 1).
Observable spin_product(std::vector<Site> sites);
/// 1 at the configuration `target` of its sites, 0 elsewhere.
Observable indicator(const SpinConfig& target);
Observable constant_observable(double value);

double eval(const Observable& f, const SpinConfig& x);
/// f(x^i) - f(x); zero when i is outside the support.
double grad_f(const Observable& f, const SpinConfig& x, Site i);
/// Shrinks the support to the sites f actually depends on.
Observable tighten(const Observable& f);
double sup_norm(const Observable& f);

/// sum_i |table_i|; the l1 norm of the LP objective built from f.
double table_l1(const Observable& f);
/// True when every support site lies in `sites`.
bool supported_in(const Observable& f, const SiteList& sites);

/// f evaluated at every sigma word over Lambda; requires supp(f) within Lambda.
std::vector<double> tabulate_on_lambda(const Observable& f, const RegionLayout& layout);
/// f evaluated at every closure word; requires supp(f) within the closure.
std::vector<double> tabulate_on_closure(const Observable& f, const RegionLayout& layout);

}  // namespace gibbs
