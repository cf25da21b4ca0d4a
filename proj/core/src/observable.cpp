#include "gibbs/observable.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace gibbs {

namespace {

std::vector<double> tabulate(const Observable& f, std::span<const std::size_t> positions, std::size_t width) {
    const std::size_t b = positions.size();
    if (width > 30) throw GuardError("tabulation over more than 30 sites");
    std::vector<double> out(std::size_t{1} << width);
    for (std::uint64_t w = 0; w < out.size(); ++w) {
        std::uint64_t fw = 0;
        for (std::size_t k = 0; k < b; ++k) {
            if ((w >> (width - 1 - positions[k])) & 1U) fw |= site_bit(k, b);
        }
        out[w] = f.value_at(fw);
    }
    return out;
}

}  // namespace

Observable::Observable(std::vector<Site> support, std::vector<double> table, std::string label)
    : label_(std::move(label)) {
    for (std::size_t k = 1; k < support.size(); ++k) {
        if (support[k] <= support[k - 1]) throw InputError("observable support must be strictly increasing");
    }
    if (support.size() > kMaxSupport) {
        throw GuardError("observable support of " + std::to_string(support.size()) + " sites exceeds the cap of " +
                         std::to_string(kMaxSupport));
    }
    if (table.size() != (std::size_t{1} << support.size())) {
        std::ostringstream msg;
        msg << "observable table has " << table.size() << " entries, expected " << (std::size_t{1} << support.size());
        throw InputError(msg.str());
    }
    for (double v : table) {
        if (!std::isfinite(v)) throw InputError("observable values must be finite");
    }
    support_ = SiteList(std::move(support));
    table_ = std::move(table);
}

Observable spin_product(std::vector<Site> sites) {
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
        throw InputError("spin_product sites must be distinct");
    }
    const std::size_t b = sites.size();
    if (b > kMaxSupport) throw GuardError("spin_product support exceeds the cap");
    std::vector<double> table(std::size_t{1} << b);
    for (std::uint64_t w = 0; w < table.size(); ++w) {
        const int downs = int(b) - std::popcount(w);
        table[w] = downs % 2 == 0 ? 1.0 : -1.0;
    }
    std::ostringstream label;
    label << "prod x{";
    for (std::size_t k = 0; k < b; ++k) label << (k ? "," : "") << sites[k];
    label << '}';
    return Observable(std::move(sites), std::move(table), label.str());
}

Observable indicator(const SpinConfig& target) {
    const std::size_t b = target.size();
    if (b > kMaxSupport) throw GuardError("indicator support exceeds the cap");
    std::vector<double> table(std::size_t{1} << b, 0.0);
    table[target.word()] = 1.0;
    return Observable(target.sites().sites(), std::move(table), "indicator");
}

Observable constant_observable(double value) { return Observable({}, {value}, "constant"); }

double eval(const Observable& f, const SpinConfig& x) {
    const SiteList& support = f.support();
    const std::size_t b = support.size();
    std::uint64_t w = 0;
    for (std::size_t k = 0; k < b; ++k) {
        if (x[support[k]] > 0) w |= site_bit(k, b);
    }
    return f.value_at(w);
}

double grad_f(const Observable& f, const SpinConfig& x, Site i) {
    const double here = eval(f, x);
    if (!f.support().contains(i)) return 0.0;
    return eval(f, x.flipped(i)) - here;
}

Observable tighten(const Observable& f) {
    const SiteList& support = f.support();
    const std::size_t b = support.size();
    const auto table = f.table();
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < b; ++k) {
        const std::uint64_t bit = site_bit(k, b);
        bool depends = false;
        for (std::uint64_t w = 0; w < table.size() && !depends; ++w) depends = table[w] != table[w ^ bit];
        if (depends) keep.push_back(k);
    }
    if (keep.size() == b) return f;

    std::vector<Site> sites;
    for (std::size_t k : keep) sites.push_back(support[k]);
    const std::size_t nb = keep.size();
    std::vector<double> reduced(std::size_t{1} << nb);
    for (std::uint64_t w = 0; w < reduced.size(); ++w) {
        std::uint64_t old = 0;
        for (std::size_t k = 0; k < nb; ++k) {
            if ((w >> (nb - 1 - k)) & 1U) old |= site_bit(keep[k], b);
        }
        reduced[w] = table[old];
    }
    return Observable(std::move(sites), std::move(reduced), f.label());
}

double sup_norm(const Observable& f) {
    double m = 0.0;
    for (double v : f.table()) m = std::max(m, std::abs(v));
    return m;
}

double table_l1(const Observable& f) {
    double s = 0.0;
    for (double v : f.table()) s += std::abs(v);
    return s;
}

bool supported_in(const Observable& f, const SiteList& sites) {
    return std::all_of(f.support().begin(), f.support().end(), [&](Site s) { return sites.contains(s); });
}

std::vector<double> tabulate_on_lambda(const Observable& f, const RegionLayout& layout) {
    const SiteList& lam = layout.region().lambda();
    std::vector<std::size_t> pos;
    for (Site s : f.support()) {
        const auto k = lam.index_of(s);
        if (!k) throw GuardError("observable support site " + std::to_string(s) + " is outside Lambda");
        pos.push_back(*k);
    }
    return tabulate(f, pos, layout.lambda_size());
}

std::vector<double> tabulate_on_closure(const Observable& f, const RegionLayout& layout) {
    const SiteList& cl = layout.region().closure();
    std::vector<std::size_t> pos;
    for (Site s : f.support()) {
        const auto k = cl.index_of(s);
        if (!k) throw GuardError("observable support site " + std::to_string(s) + " is outside the closure");
        pos.push_back(*k);
    }
    return tabulate(f, pos, layout.closure_size());
}

}  // namespace gibbs
