#include "gibbs/lp_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <ostream>

#include "gibbs/error.hpp"

namespace gibbs {

LpProblem::LpProblem(std::size_t num_vars, Sense sense) : objective_(num_vars, 0.0), sense_(sense) {}

void LpProblem::add_row(std::vector<LpTerm> terms, double rhs) {
    std::sort(terms.begin(), terms.end(), [](const LpTerm& a, const LpTerm& b) { return a.col < b.col; });
    std::vector<LpTerm> merged;
    for (const LpTerm& t : terms) {
        if (!merged.empty() && merged.back().col == t.col) {
            merged.back().value += t.value;
        } else {
            merged.push_back(t);
        }
    }
    rows_.push_back(std::move(merged));
    rhs_.push_back(rhs);
}

void LpProblem::validate() const {
    for (double c : objective_) {
        if (!std::isfinite(c)) throw InputError("LP objective has a non-finite entry");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (!std::isfinite(rhs_[i])) throw InputError("LP right-hand side has a non-finite entry");
        for (const LpTerm& t : rows_[i]) {
            if (t.col >= num_vars()) throw InputError("LP row references column " + std::to_string(t.col));
            if (!std::isfinite(t.value)) throw InputError("LP matrix has a non-finite entry");
        }
    }
}

double LpProblem::primal_residual(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        long double s = 0.0L;
        for (const LpTerm& t : rows_[i]) s += static_cast<long double>(t.value) * x[t.col];
        worst = std::max(worst, double(std::abs(s - rhs_[i])));
    }
    return worst;
}

double LpProblem::objective_value(const std::vector<double>& x) const {
    long double s = 0.0L;
    for (std::size_t j = 0; j < objective_.size(); ++j) s += static_cast<long double>(objective_[j]) * x[j];
    return double(s);
}

double bound_violation(const std::vector<double>& x) {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, -v);
    return worst;
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "OPTIMAL";
        case LpStatus::Infeasible: return "INFEASIBLE";
        case LpStatus::Unbounded: return "UNBOUNDED";
    }
    return "?";
}

Preprocessed preprocess(const LpProblem& p) {
    p.validate();
    Preprocessed out;
    out.problem = LpProblem(p.num_vars(), p.sense());
    out.problem.objective() = p.objective();
    std::map<std::pair<std::vector<std::pair<std::size_t, double>>, double>, std::size_t> seen;
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        std::vector<LpTerm> terms;
        for (const LpTerm& t : p.row(i)) {
            if (t.value != 0.0) terms.push_back(t);
        }
        double rhs = p.rhs(i);
        if (terms.empty()) {
            ++out.zero_rows;
            if (rhs != 0.0) out.infeasible = true;
            continue;
        }
        double scale = 0.0;
        for (const LpTerm& t : terms) scale = std::max(scale, std::abs(t.value));
        // a row and its negation state the same equality
        if (terms.front().value < 0) scale = -scale;
        std::vector<std::pair<std::size_t, double>> key;
        for (LpTerm& t : terms) {
            t.value /= scale;
            key.emplace_back(t.col, t.value);
        }
        rhs /= scale;
        if (!seen.emplace(std::make_pair(std::move(key), rhs), i).second) {
            ++out.duplicate_rows;
            continue;
        }
        out.problem.add_row(std::move(terms), rhs);
        out.row_origin.push_back(i);
    }
    return out;
}

namespace {

// x_v = exp(logw_v) * x_parent(v)
class ScaledUnionFind {
public:
    explicit ScaledUnionFind(std::size_t n) : parent_(n), logw_(n, 0.0), zero_(n, false) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::pair<std::size_t, double> find(std::size_t v) {
        double acc = 0.0;
        std::size_t r = v;
        while (parent_[r] != r) {
            acc += logw_[r];
            r = parent_[r];
        }
        // compress
        double rest = acc;
        std::size_t u = v;
        while (parent_[u] != u) {
            const std::size_t next = parent_[u];
            const double lu = logw_[u];
            parent_[u] = r;
            logw_[u] = rest;
            rest -= lu;
            u = next;
        }
        return {r, acc};
    }

    // records x_j = s * x_k
    void link(std::size_t j, std::size_t k, double log_s) {
        const auto [rj, lj] = find(j);
        const auto [rk, lk] = find(k);
        if (rj == rk) {
            const double want = log_s + lk;
            if (std::abs(lj - want) > 1e-9 * std::max(1.0, std::abs(want))) zero_[rj] = true;
            return;
        }
        parent_[rj] = rk;
        logw_[rj] = log_s + lk - lj;
        zero_[rk] = zero_[rk] || zero_[rj];
    }

    void force_zero(std::size_t v) { zero_[find(v).first] = true; }
    bool zero(std::size_t root) const { return zero_[root]; }

private:
    std::vector<std::size_t> parent_;
    std::vector<double> logw_;
    std::vector<bool> zero_;
};

struct Reduction {
    std::vector<std::ptrdiff_t> column;  // reduced column per original var, -1 when fixed at zero
    std::vector<double> weight;          // x_v = weight_v * y_column
    std::size_t num_cols = 0;
    std::vector<std::vector<LpTerm>> rows;
    std::vector<double> rhs;
    std::vector<double> cost;  // minimisation costs
    bool infeasible = false;
};

Reduction reduce(const Preprocessed& pre, const LpOptions& opts) {
    const LpProblem& p = pre.problem;
    const std::size_t n = p.num_vars();
    ScaledUnionFind uf(n);
    std::vector<bool> consumed(p.num_rows(), false);
    if (opts.aggregate_doubletons) {
        for (std::size_t i = 0; i < p.num_rows(); ++i) {
            const auto& row = p.row(i);
            if (row.size() != 2 || p.rhs(i) != 0.0) continue;
            consumed[i] = true;
            const double a = row[0].value;
            const double b = row[1].value;
            if ((a > 0) == (b > 0)) {
                uf.force_zero(row[0].col);
                uf.force_zero(row[1].col);
            } else {
                uf.link(row[0].col, row[1].col, std::log(-b / a));
            }
        }
    }

    Reduction red;
    red.column.assign(n, -1);
    red.weight.assign(n, 0.0);
    std::vector<std::size_t> root(n);
    std::vector<double> logw(n);
    std::map<std::size_t, double> top;  // root -> max log weight
    for (std::size_t v = 0; v < n; ++v) {
        const auto [r, l] = uf.find(v);
        root[v] = r;
        logw[v] = l;
        if (uf.zero(r)) continue;
        auto [it, fresh] = top.emplace(r, l);
        if (!fresh) it->second = std::max(it->second, l);
    }
    std::map<std::size_t, std::size_t> index;
    for (const auto& [r, l] : top) index.emplace(r, index.size());
    red.num_cols = index.size();
    for (std::size_t v = 0; v < n; ++v) {
        if (uf.zero(root[v])) continue;
        red.column[v] = std::ptrdiff_t(index.at(root[v]));
        red.weight[v] = std::exp(logw[v] - top.at(root[v]));
    }

    const double sign = p.sense() == Sense::Max ? -1.0 : 1.0;
    red.cost.assign(red.num_cols, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        if (red.column[v] >= 0) red.cost[std::size_t(red.column[v])] += sign * p.objective()[v] * red.weight[v];
    }
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        if (consumed[i]) continue;
        std::map<std::size_t, double> acc;
        for (const LpTerm& t : p.row(i)) {
            if (red.column[t.col] >= 0) acc[std::size_t(red.column[t.col])] += t.value * red.weight[t.col];
        }
        std::vector<LpTerm> terms;
        for (const auto& [c, v] : acc) {
            if (v != 0.0) terms.push_back({c, v});
        }
        if (terms.empty()) {
            if (std::abs(p.rhs(i)) > opts.feas_tol) red.infeasible = true;
            continue;
        }
        red.rows.push_back(std::move(terms));
        red.rhs.push_back(p.rhs(i));
    }
    return red;
}

enum class Outcome { Optimal, Infeasible, Unbounded };

// Entries below this (after scaling) count as zero when deciding that an
// artificial row is redundant.
constexpr double kRedundantTol = 1e-7;
constexpr double kPerturbation = 1e-7;

// Dense tableau simplex on min c.y, A y = b, y >= 0. Artificial columns are
// implicit: once an artificial leaves the basis it is never priced again.
class Tableau {
public:
    Tableau(const std::vector<std::vector<LpTerm>>& rows, const std::vector<double>& rhs, std::size_t n,
            const LpOptions& opts)
        : m_(rows.size()), n_(n), opts_(opts), t_(m_ * n_, 0.0), b_(rhs), basis_(m_), basic_(n_, false), dead_(m_, false) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (const LpTerm& term : rows[i]) at(i, term.col) = term.value;
            if (b_[i] < 0) {
                b_[i] = -b_[i];
                for (std::size_t j = 0; j < n_; ++j) at(i, j) = -at(i, j);
            }
            basis_[i] = n_ + i;
        }
        cap_ = opts.iteration_factor * (m_ + n_ + 1);
    }

    Outcome run(const std::vector<double>& cost) {
        // phase 1
        d_.assign(n_, 0.0);
        z_ = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) d_[j] -= at(i, j);
            z_ += b_[i];
        }
        iterate();
        if (z_ > opts_.feas_tol) return Outcome::Infeasible;
        drive_out_artificials();

        // phase 2
        d_ = cost;
        z_ = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < n_; ++j) d_[j] -= cb * at(i, j);
            z_ += cb * b_[i];
        }
        return iterate() ? Outcome::Optimal : Outcome::Unbounded;
    }

    std::vector<double> point() const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) y[basis_[i]] = b_[i];
        }
        return y;
    }

    const std::vector<std::size_t>& basis() const { return basis_; }
    const std::vector<std::size_t>& live_rows() const { return live_; }
    std::size_t iterations() const { return iterations_; }

private:
    double& at(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }

    // false when unbounded
    bool iterate() {
        const bool ok = iterate_perturbed();
        if (perturbed_) unperturb();
        return ok;
    }

    // Stalls are broken first by shifting the right-hand side by small
    // distinct amounts, then by Bland's rule if the perturbed problem stalls too.
    bool iterate_perturbed() {
        std::size_t degenerate = 0;
        bool bland = false;
        for (;;) {
            std::ptrdiff_t q = -1;
            double best = -opts_.opt_tol;
            for (std::size_t j = 0; j < n_; ++j) {
                if (basic_[j] || d_[j] >= best) continue;
                q = std::ptrdiff_t(j);
                if (bland) break;
                best = d_[j];
            }
            if (q < 0) return true;
            const std::size_t col = std::size_t(q);

            std::ptrdiff_t p = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, col);
                if (a <= opts_.pivot_tol || dead_[i]) continue;
                if (a < kRedundantTol && basis_[i] >= n_ && redundant(i)) {
                    // an artificial row that is numerically a combination of
                    // the others; pivoting on its roundoff corrupts the basis
                    dead_[i] = true;
                    continue;
                }
                const double r = b_[i] / a;
                bool take = false;
                if (p < 0 || r < ratio - 1e-12 * std::max(1.0, ratio)) {
                    take = true;
                } else if (r <= ratio + 1e-12 * std::max(1.0, ratio)) {
                    const std::size_t cur = std::size_t(p);
                    if (bland) {
                        take = basis_[i] < basis_[cur];
                    } else {
                        const bool art_i = basis_[i] >= n_;
                        const bool art_c = basis_[cur] >= n_;
                        take = art_i != art_c ? art_i : a > at(cur, col);
                    }
                }
                if (take) {
                    p = std::ptrdiff_t(i);
                    ratio = std::min(ratio, r);
                }
            }
            if (p < 0) return false;
            if (++iterations_ > cap_) {
                throw SolverError("simplex iteration cap of " + std::to_string(cap_) + " exceeded");
            }
            const bool degen = b_[std::size_t(p)] <= 1e-13;
            pivot(std::size_t(p), col);
            if (degen) {
                if (++degenerate > 50) {
                    if (!perturbed_) {
                        perturb();
                        degenerate = 0;
                    } else {
                        bland = true;
                    }
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    void perturb() {
        exact_b_ = b_;
        std::mt19937_64 rng(0x5eedULL + iterations_);
        std::uniform_real_distribution<double> u(0.5, 1.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (!dead_[i]) b_[i] += kPerturbation * u(rng) * std::max(1.0, b_[i]);
        }
        perturbed_ = true;
    }

    // Back to the true right-hand side carried alongside. The basis stays
    // dual feasible; roundoff-sized negatives are clipped and the final
    // point is re-verified against the original problem anyway.
    void unperturb() {
        b_ = exact_b_;
        for (double& v : b_)
            if (v < 0 && v > -kPerturbation) v = 0.0;
        z_ = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= n_) z_ += b_[i];
        }
        perturbed_ = false;
    }

    bool redundant(std::size_t i) const {
        for (std::size_t j = 0; j < n_; ++j) {
            if (!basic_[j] && std::abs(at(i, j)) > kRedundantTol) return false;
        }
        return true;
    }

    void pivot(std::size_t p, std::size_t q) {
        double* rp = &t_[p * n_];
        const double inv = 1.0 / rp[q];
        for (std::size_t j = 0; j < n_; ++j) rp[j] *= inv;
        rp[q] = 1.0;
        b_[p] *= inv;
        if (perturbed_) exact_b_[p] *= inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == p) continue;
            double* ri = &t_[i * n_];
            const double f = ri[q];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n_; ++j) ri[j] -= f * rp[j];
            ri[q] = 0.0;
            b_[i] -= f * b_[p];
            if (b_[i] < 0 && b_[i] > -1e-11) b_[i] = 0.0;
            if (perturbed_) exact_b_[i] -= f * exact_b_[p];
        }
        const double f = d_[q];
        if (f != 0.0) {
            for (std::size_t j = 0; j < n_; ++j) d_[j] -= f * rp[j];
            d_[q] = 0.0;
            z_ += f * b_[p];
        }
        if (basis_[p] < n_) basic_[basis_[p]] = false;
        basis_[p] = q;
        basic_[q] = true;
    }

    void drive_out_artificials() {
        live_.clear();
        std::vector<bool> drop(m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            std::ptrdiff_t q = -1;
            double best = kRedundantTol;
            for (std::size_t j = 0; j < n_; ++j) {
                if (!basic_[j] && std::abs(at(i, j)) > best) {
                    best = std::abs(at(i, j));
                    q = std::ptrdiff_t(j);
                }
            }
            if (q >= 0) {
                pivot(i, std::size_t(q));
            } else {
                drop[i] = true;  // redundant row
            }
        }
        std::size_t w = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (drop[i]) continue;
            if (w != i) {
                std::copy_n(&t_[i * n_], n_, &t_[w * n_]);
                b_[w] = b_[i];
                basis_[w] = basis_[i];
            }
            live_.push_back(origin(i));
            ++w;
        }
        m_ = w;
        t_.resize(m_ * n_);
        b_.resize(m_);
        basis_.resize(m_);
        dead_.assign(m_, false);
        origin_ = live_;
    }

    std::size_t origin(std::size_t i) const { return origin_.empty() ? i : origin_[i]; }

    std::size_t m_;
    std::size_t n_;
    LpOptions opts_;
    std::vector<double> t_;
    std::vector<double> b_;
    std::vector<std::size_t> basis_;
    std::vector<bool> basic_;
    std::vector<bool> dead_;
    std::vector<double> exact_b_;
    bool perturbed_ = false;
    std::vector<double> d_;
    double z_ = 0.0;
    std::size_t iterations_ = 0;
    std::size_t cap_ = 0;
    std::vector<std::size_t> live_;
    std::vector<std::size_t> origin_;
};

// Recomputes basic values from the scaled data with a fresh dense LU.
std::vector<double> refine(const std::vector<std::vector<LpTerm>>& rows, const std::vector<double>& rhs,
                           std::size_t n, const std::vector<std::size_t>& live, const std::vector<std::size_t>& basis) {
    const std::size_t m = basis.size();
    std::vector<double> y(n, 0.0);
    if (m == 0) return y;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t k = 0; k < m; ++k) slot[basis[k]] = std::ptrdiff_t(k);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
    Eigen::VectorXd rb = Eigen::VectorXd::Zero(Eigen::Index(m));
    for (std::size_t r = 0; r < m; ++r) {
        for (const LpTerm& t : rows[live[r]]) {
            if (slot[t.col] >= 0) B(Eigen::Index(r), slot[t.col]) = t.value;
        }
        rb(Eigen::Index(r)) = rhs[live[r]];
    }
    const Eigen::VectorXd sol = B.partialPivLu().solve(rb);
    for (std::size_t k = 0; k < m; ++k) y[basis[k]] = sol(Eigen::Index(k));
    return y;
}

}  // namespace

LpSolution solve(const LpProblem& p, double feas_tol) {
    LpOptions opts;
    opts.feas_tol = feas_tol;
    return solve(p, opts);
}

LpSolution solve(const LpProblem& p, const LpOptions& opts) {
    const Preprocessed pre = preprocess(p);
    LpSolution sol;
    if (pre.infeasible) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    Reduction red = reduce(pre, opts);
    if (red.infeasible) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }

    // column then row scaling of the reduced system
    const std::size_t n = red.num_cols;
    std::vector<double> colscale(n, 0.0);
    for (const auto& row : red.rows)
        for (const LpTerm& t : row) colscale[t.col] = std::max(colscale[t.col], std::abs(t.value));
    for (double& s : colscale) s = s > 0 ? s : 1.0;
    for (std::size_t i = 0; i < red.rows.size(); ++i) {
        double mx = 0.0;
        for (LpTerm& t : red.rows[i]) {
            t.value /= colscale[t.col];
            mx = std::max(mx, std::abs(t.value));
        }
        for (LpTerm& t : red.rows[i]) t.value /= mx;
        red.rhs[i] /= mx;
    }
    for (std::size_t j = 0; j < n; ++j) red.cost[j] /= colscale[j];

    sol.reduced_rows = red.rows.size();
    sol.reduced_cols = n;
    if (sol.reduced_rows * n > opts.max_dense_entries) {
        throw GuardError("reduced LP of " + std::to_string(sol.reduced_rows) + " x " + std::to_string(n) +
                         " exceeds the dense simplex budget");
    }

    Tableau tab(red.rows, red.rhs, n, opts);
    const Outcome outcome = tab.run(red.cost);
    sol.iterations = tab.iterations();
    if (outcome == Outcome::Infeasible) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    if (outcome == Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    auto lift = [&](const std::vector<double>& y) {
        std::vector<double> x(p.num_vars(), 0.0);
        for (std::size_t v = 0; v < x.size(); ++v) {
            if (red.column[v] >= 0) {
                const std::size_t c = std::size_t(red.column[v]);
                x[v] = red.weight[v] * y[c] / colscale[c];
            }
        }
        return x;
    };
    auto badness = [&](const std::vector<double>& x) {
        return std::max(p.primal_residual(x), bound_violation(x));
    };
    std::vector<double> x = lift(tab.point());
    const std::vector<double> xr = lift(refine(red.rows, red.rhs, n, tab.live_rows(), tab.basis()));
    if (badness(xr) < badness(x)) x = xr;

    sol.status = LpStatus::Optimal;
    sol.point = x;
    sol.value = p.objective_value(x);
    sol.primal_residual = p.primal_residual(x);
    sol.bound_violation = bound_violation(x);
    if (sol.primal_residual > opts.feas_tol || sol.bound_violation > opts.feas_tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "simplex point fails verification: residual %.3g, bound violation %.3g",
                      sol.primal_residual, sol.bound_violation);
        throw SolverError(buf);
    }
    return sol;
}

void write_mps(const LpProblem& p, std::ostream& os, const std::string& name) {
    char line[128];
    os << "NAME          " << name << '\n';
    if (p.sense() == Sense::Max) os << "OBJSENSE\n    MAX\n";
    os << "ROWS\n N  OBJ\n";
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        std::snprintf(line, sizeof line, " E  R%zu\n", i);
        os << line;
    }
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(p.num_vars());
    for (std::size_t i = 0; i < p.num_rows(); ++i)
        for (const LpTerm& t : p.row(i)) cols[t.col].emplace_back(i, t.value);
    os << "COLUMNS\n";
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        char cname[32];
        std::snprintf(cname, sizeof cname, "X%zu", j);
        if (p.objective()[j] != 0.0) {
            std::snprintf(line, sizeof line, "    %-8s  %-8s  %.15g\n", cname, "OBJ", p.objective()[j]);
            os << line;
        }
        for (const auto& [i, v] : cols[j]) {
            char rname[32];
            std::snprintf(rname, sizeof rname, "R%zu", i);
            std::snprintf(line, sizeof line, "    %-8s  %-8s  %.15g\n", cname, rname, v);
            os << line;
        }
    }
    os << "RHS\n";
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        if (p.rhs(i) == 0.0) continue;
        char rname[32];
        std::snprintf(rname, sizeof rname, "R%zu", i);
        std::snprintf(line, sizeof line, "    %-8s  %-8s  %.15g\n", "RHS", rname, p.rhs(i));
        os << line;
    }
    os << "ENDATA\n";
}

}  // namespace gibbs
