#include "gibbs/exact_oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "gibbs/region_layout.hpp"

namespace gibbs {

namespace {

// Neumaier compensated sum.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) noexcept {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    double value() const noexcept { return sum + c; }
};

// Whole-system enumeration in Gray-code order. Energies are updated one flip
// at a time and recomputed from scratch every 4096 steps to stop drift.
class FullEnumerator {
public:
    explicit FullEnumerator(const SpinSystem& sys) : beta_(sys.beta()) {
        if (!sys.is_finite()) throw GuardError("exact enumeration needs a finite system");
        n_ = sys.num_sites();
        if (n_ > kMaxEnumerationSites) {
            throw GuardError("exact enumeration over " + std::to_string(n_) + " sites exceeds the cap of " +
                             std::to_string(kMaxEnumerationSites));
        }
        for (const Edge& e : sys.edges()) edges_.push_back({std::size_t(e.a), std::size_t(e.b), sys.table(e.table)});
        adj_.resize(n_);
        for (const EdgeRec& e : edges_) {
            adj_[e.a].push_back({e.b, e.table});
            adj_[e.b].push_back({e.a, e.table});
        }
    }

    std::size_t size() const noexcept { return n_; }

    // visit(word, energy); word uses the SpinConfig convention over sites 0..n-1
    template <class Visit>
    void run(Visit&& visit) const {
        std::uint64_t word = 0;
        double energy = energy_of(word);
        visit(word, energy);
        const std::uint64_t total = std::uint64_t{1} << n_;
        for (std::uint64_t t = 1; t < total; ++t) {
            const std::size_t bit = std::size_t(std::countr_zero(t));
            const std::size_t k = n_ - 1 - bit;
            if ((t & 4095U) == 0) {
                word ^= std::uint64_t{1} << bit;
                energy = energy_of(word);
            } else {
                energy += delta(word, k);
                word ^= std::uint64_t{1} << bit;
            }
            visit(word, energy);
        }
    }

    double energy_of(std::uint64_t word) const noexcept {
        double s = 0.0;
        for (const EdgeRec& e : edges_) s += e.table(spin(word, e.a), spin(word, e.b));
        return beta_ * s;
    }

private:
    struct EdgeRec {
        std::size_t a;
        std::size_t b;
        InteractionTable table;
    };
    struct Adj {
        std::size_t j;
        InteractionTable table;
    };

    int spin(std::uint64_t word, std::size_t k) const noexcept { return spin_of(word, k, n_); }

    double delta(std::uint64_t word, std::size_t k) const noexcept {
        const int xk = spin(word, k);
        double s = 0.0;
        for (const Adj& a : adj_[k]) {
            const int xj = spin(word, a.j);
            s += a.table(-xk, xj) - a.table(xk, xj);
        }
        return beta_ * s;
    }

    double beta_;
    std::size_t n_ = 0;
    std::vector<EdgeRec> edges_;
    std::vector<std::vector<Adj>> adj_;
};

double min_energy(const FullEnumerator& en) {
    double m = std::numeric_limits<double>::infinity();
    en.run([&](std::uint64_t, double e) { m = std::min(m, e); });
    return m;
}

std::vector<std::size_t> support_positions(const SiteList& support, std::size_t n) {
    std::vector<std::size_t> pos;
    for (Site s : support) {
        if (s < 0 || std::size_t(s) >= n) throw InputError("observable site " + std::to_string(s) + " is not in the system");
        pos.push_back(std::size_t(s));
    }
    return pos;
}

std::uint64_t project(std::uint64_t word, std::size_t n, const std::vector<std::size_t>& pos) {
    const std::size_t b = pos.size();
    std::uint64_t out = 0;
    for (std::size_t k = 0; k < b; ++k) {
        if ((word >> (n - 1 - pos[k])) & 1U) out |= site_bit(k, b);
    }
    return out;
}

struct LocalTables {
    std::vector<double> inner;  // beta * inner energy per sigma
    std::vector<double> f;      // f per sigma
};

LocalTables local_tables(const RegionLayout& layout, const Observable& f) {
    if (layout.lambda_size() > kMaxEnumerationSites) {
        throw GuardError("local enumeration over " + std::to_string(layout.lambda_size()) + " sites exceeds the cap of " +
                         std::to_string(kMaxEnumerationSites));
    }
    LocalTables t;
    t.f = tabulate_on_lambda(f, layout);
    t.inner.resize(t.f.size());
    for (std::uint64_t s = 0; s < t.inner.size(); ++s) t.inner[s] = layout.inner_energy(s);
    return t;
}

// Lambda sites touching the boundary with their external field for each spin.
struct Field {
    std::size_t k;
    double minus;
    double plus;
};

std::vector<Field> boundary_fields(const RegionLayout& layout, std::uint64_t eta) {
    std::vector<Field> out;
    for (std::size_t k = 0; k < layout.lambda_size(); ++k) {
        Field fld{k, 0.0, 0.0};
        bool touched = false;
        for (const auto& link : layout.links(k)) {
            if (link.in_lambda) continue;
            touched = true;
            const int t = layout.boundary_spin(eta, link.index);
            fld.minus += link.table(-1, t);
            fld.plus += link.table(1, t);
        }
        if (touched) {
            fld.minus *= layout.beta();
            fld.plus *= layout.beta();
            out.push_back(fld);
        }
    }
    return out;
}

double local_mean(const RegionLayout& layout, const LocalTables& t, std::uint64_t eta) {
    const auto fields = boundary_fields(layout, eta);
    const std::size_t m = layout.lambda_size();
    auto energy = [&](std::uint64_t s) {
        double e = t.inner[s];
        for (const Field& fld : fields) e += ((s >> (m - 1 - fld.k)) & 1U) ? fld.plus : fld.minus;
        return e;
    };
    double lo = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < t.inner.size(); ++s) lo = std::min(lo, energy(s));
    KahanSum z, zf;
    for (std::uint64_t s = 0; s < t.inner.size(); ++s) {
        const double w = std::exp(lo - energy(s));
        z.add(w);
        zf.add(w * t.f[s]);
    }
    return zf.value() / z.value();
}

}  // namespace

double partition_function(const SpinSystem& sys) {
    const FullEnumerator en(sys);
    const double lo = min_energy(en);
    KahanSum z;
    en.run([&](std::uint64_t, double e) { z.add(std::exp(lo - e)); });
    return std::log(z.value()) - lo;
}

double expectation(const SpinSystem& sys, const Observable& f) {
    const FullEnumerator en(sys);
    const auto pos = support_positions(f.support(), en.size());
    const double lo = min_energy(en);
    KahanSum z, zf;
    en.run([&](std::uint64_t w, double e) {
        const double p = std::exp(lo - e);
        z.add(p);
        zf.add(p * f.value_at(project(w, en.size(), pos)));
    });
    return zf.value() / z.value();
}

std::vector<double> exact_marginal(const SpinSystem& sys, const SiteList& sites) {
    const FullEnumerator en(sys);
    if (sites.size() > kMaxSupport) throw GuardError("marginal over too many sites");
    const auto pos = support_positions(sites, en.size());
    const double lo = min_energy(en);
    std::vector<KahanSum> acc(std::size_t{1} << sites.size());
    KahanSum z;
    en.run([&](std::uint64_t w, double e) {
        const double p = std::exp(lo - e);
        z.add(p);
        acc[project(w, en.size(), pos)].add(p);
    });
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value() / z.value();
    return out;
}

double local_gibbs_expectation(const SpinSystem& sys, const Region& region, const BoundaryCondition& eta,
                               const Observable& f) {
    if (!(eta.config().sites() == region.boundary())) {
        throw InputError("boundary condition does not cover the external boundary of the region");
    }
    const RegionLayout layout(sys, region);
    const LocalTables t = local_tables(layout, f);
    return local_mean(layout, t, eta.config().word());
}

BoundarySweep sweep_boundary_conditions(const SpinSystem& sys, const Region& region, const Observable& f) {
    const std::size_t nb = region.boundary().size();
    if (nb > kMaxBoundarySites) {
        throw GuardError("boundary of " + std::to_string(nb) + " sites exceeds the enumeration cap of " +
                         std::to_string(kMaxBoundarySites));
    }
    if (nb + region.lambda().size() > kMaxSweepBits) {
        throw GuardError("boundary sweep over " + std::to_string(nb + region.lambda().size()) +
                         " sites exceeds the budget of " + std::to_string(kMaxSweepBits));
    }
    const RegionLayout layout(sys, region);
    const LocalTables t = local_tables(layout, f);
    BoundarySweep out;
    out.min = std::numeric_limits<double>::infinity();
    out.max = -std::numeric_limits<double>::infinity();
    out.count = std::size_t{1} << nb;
    for (std::uint64_t eta = 0; eta < out.count; ++eta) {
        const double v = local_mean(layout, t, eta);
        if (v < out.min) {
            out.min = v;
            out.argmin = eta;
        }
        if (v > out.max) {
            out.max = v;
            out.argmax = eta;
        }
    }
    return out;
}

double boundary_gap(const SpinSystem& sys, const Region& region, const Observable& f) {
    const BoundarySweep s = sweep_boundary_conditions(sys, region, f);
    return s.max - s.min;
}

double transfer_matrix_expectation(const SpinSystem& sys, const Observable& f) {
    const Topology top = sys.topology();
    if (top != Topology::Chain && top != Topology::Cycle) {
        throw GuardError("transfer matrices need a chain or cycle, got " + std::string(to_string(top)));
    }
    const Observable prod = spin_product(f.support().sites());
    if (!std::equal(f.table().begin(), f.table().end(), prod.table().begin())) {
        throw GuardError("transfer matrix path handles spin products only");
    }
    const std::size_t n = sys.num_sites();
    const auto pos = support_positions(f.support(), n);
    std::vector<bool> marked(n, false);
    for (std::size_t p : pos) marked[p] = true;

    using Mat = std::array<std::array<double, 2>, 2>;
    const auto& edges = sys.edges();
    std::vector<Mat> tm;
    for (const Edge& e : edges) {
        const InteractionTable& h = sys.table(e.table);
        const auto& v = h.entries();
        const double hmin = *std::min_element(v.begin(), v.end());
        Mat m;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) m[a][b] = std::exp(-sys.beta() * (h(2 * a - 1, 2 * b - 1) - hmin));
        tm.push_back(m);
    }
    auto d = [&](std::size_t i, int a) { return marked[i] && a == 0 ? -1.0 : 1.0; };

    // returns (mantissa, log scale) of the weighted sum, with or without insertions
    auto weigh = [&](bool insert) -> std::pair<double, double> {
        double logscale = 0.0;
        auto dd = [&](std::size_t i, int a) { return insert ? d(i, a) : 1.0; };
        if (top == Topology::Chain) {
            std::array<double, 2> v{dd(0, 0), dd(0, 1)};
            for (std::size_t i = 0; i + 1 < n; ++i) {
                std::array<double, 2> nv{};
                for (int b = 0; b < 2; ++b) nv[b] = (v[0] * tm[i][0][b] + v[1] * tm[i][1][b]) * dd(i + 1, b);
                const double m = std::max(std::abs(nv[0]), std::abs(nv[1]));
                if (m == 0.0) return {0.0, 0.0};
                v = {nv[0] / m, nv[1] / m};
                logscale += std::log(m);
            }
            return {v[0] + v[1], logscale};
        }
        // cycle: edge i joins i and i+1, the last one joins n-1 and 0
        Mat acc{{{dd(0, 0), 0.0}, {0.0, dd(0, 1)}}};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t next = (i + 1) % n;
            Mat nm{};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const double s = acc[a][0] * tm[i][0][b] + acc[a][1] * tm[i][1][b];
                    nm[a][b] = next == 0 ? s : s * dd(next, b);
                }
            double m = 0.0;
            for (const auto& row : nm)
                for (double x : row) m = std::max(m, std::abs(x));
            if (m == 0.0) return {0.0, 0.0};
            for (auto& row : nm)
                for (double& x : row) x /= m;
            acc = nm;
            logscale += std::log(m);
        }
        return {acc[0][0] + acc[1][1], logscale};
    };
    const auto [num, lnum] = weigh(true);
    if (num == 0.0) return 0.0;
    const auto [den, lden] = weigh(false);
    return num / den * std::exp(lnum - lden);
}

}  // namespace gibbs
