#include "cli_runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gibbs/dlr_hierarchy.hpp"
#include "gibbs/exact_oracle.hpp"
#include "gibbs/glauber_sampler.hpp"
#include "gibbs/mc_hierarchy.hpp"
#include "model_io.hpp"

namespace gibbs::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Region ball_for(const SpinSystem& sys, const Observable& f, std::size_t r) {
    if (f.support().empty()) throw InputError("the observable has empty support; there is no ball to build");
    return ball_region(sys, f.support().sites(), r);
}

std::string fmt(double v, int digits = 12) {
    std::ostringstream ss;
    ss << std::setprecision(digits) << v;
    return ss.str();
}

std::string dist_text(const std::optional<std::size_t>& d) { return d ? std::to_string(*d) : "inf"; }

std::string sites_text(const SiteList& s) {
    std::string out = "{";
    for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
    return out + "}";
}

void header(std::ostream& out, const std::string& command, const SpinSystem& sys, const Observable& f) {
    const double mix = double(sys.max_degree()) * std::tanh(sys.beta() * sys.max_effective_coupling());
    out << "command: " << command << '\n'
        << "model: " << sys.describe() << '\n'
        << "observable: " << (f.label().empty() ? "f" : f.label()) << " on " << sites_text(f.support()) << '\n'
        << "beta: " << fmt(sys.beta()) << '\n'
        << "fast_mixing: Delta*tanh(beta*J_max) = " << fmt(mix, 6) << (sys.fast_mixing_flag() ? " < 1 (yes)" : " >= 1 (no)")
        << '\n';
}

void tolerances(std::ostream& out, const LpOptions& lp, bool strict) {
    out << "tolerances: feas_tol=" << fmt(lp.feas_tol) << " opt_tol=" << fmt(lp.opt_tol)
        << " pivot_tol=" << fmt(lp.pivot_tol) << " strict=" << (strict ? "on" : "off") << '\n';
}

std::vector<Hierarchy> hierarchies(Which w) {
    switch (w) {
        case Which::Dlr: return {Hierarchy::Dlr};
        case Which::Mc: return {Hierarchy::Mc};
        case Which::Both: break;
    }
    return {Hierarchy::Dlr, Hierarchy::Mc};
}

Which parse_which(const std::string& s) {
    if (s == "dlr") return Which::Dlr;
    if (s == "mc") return Which::Mc;
    if (s == "both") return Which::Both;
    throw InputError("--hierarchy must be dlr, mc or both");
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::Auto, Method::RawLp, Method::Reduced, Method::PolicyIteration}) {
        if (s == to_string(m)) return m;
    }
    throw InputError("--method must be auto, raw_lp, reduced or policy_iteration");
}

SweepRow run_cell(const SpinSystem& sys, const Observable& f, Hierarchy h, std::size_t r, const BoundSettings& s) {
    SweepRow row;
    row.r = r;
    row.hierarchy = h;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Region region = ball_for(sys, f, r);
        row.lambda_size = region.lambda().size();
        row.boundary_size = region.boundary().size();
        row.dist = distance_to_complement(sys, region, f.support().sites());
        const CertifiedInterval ci = bound_at_radius(sys, f, h, r, s);
        row.p_min = ci.lower;
        row.p_max = ci.upper;
        row.width = ci.width();
        row.residual = ci.residual;
    } catch (const Error& e) {
        row.p_min = row.p_max = row.width = row.residual = kNaN;
        row.error = e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

void print_interval(std::ostream& out, const CertifiedInterval& ci, double wall_ms) {
    out << '[' << to_string(ci.hierarchy) << "] interval: [" << fmt(ci.lower, 15) << ", " << fmt(ci.upper, 15)
        << "]  width: " << fmt(ci.width()) << '\n'
        << "  method: " << to_string(ci.method) << "  lambda_size: " << ci.lambda_size
        << "  boundary_size: " << ci.boundary_size << "  dist: " << dist_text(ci.dist) << '\n'
        << "  residual: " << fmt(ci.residual) << "  widening: " << fmt(ci.residual_widening)
        << "  solver_gap: " << fmt(ci.solver_gap) << "  iterations: " << ci.iterations
        << "  wall_ms: " << fmt(wall_ms, 6) << '\n';
}

void dump_lps(const SpinSystem& sys, const Observable& f, const Region& region, Which w, const std::string& prefix,
              std::ostream& out) {
    for (Hierarchy h : hierarchies(w)) {
        const LpProblem lp = h == Hierarchy::Dlr ? build_dlr_lp(sys, region, f, Sense::Max)
                                                 : build_mc_lp(sys, region, f, Sense::Max);
        const std::string path = prefix + "." + to_string(h) + ".mps";
        std::ofstream os(path);
        if (!os) throw InputError("cannot write " + path);
        write_mps(lp, os, h == Hierarchy::Dlr ? "DLR" : "MC");
        out << "wrote " << path << " (" << lp.num_rows() << " rows, " << lp.num_vars() << " columns)\n";
    }
}

struct Args {
    std::string model;
    std::string observable;
    std::string hierarchy = "both";
    std::string method = "auto";
    std::size_t radius = 2;
    std::size_t r_min = 1;
    std::size_t r_max = 4;
    bool strict = false;
    bool parallel = false;
    std::uint64_t seed = 1;
    std::uint64_t burn_in = 0;
    std::size_t samples = 100000;
    std::uint64_t thin = 0;
    std::string out_path;
    std::string dump_lp;
};

int cmd_bound(const Args& a, std::ostream& out) {
    const SpinSystem sys = load_model(a.model);
    const Observable f = load_observable(a.observable, sys);
    BoundSettings s{parse_which(a.hierarchy), parse_method(a.method), a.strict, {}};
    header(out, "bound", sys, f);
    tolerances(out, s.lp, s.strict);
    out << "radius: " << a.radius << '\n';
    if (!a.dump_lp.empty()) dump_lps(sys, f, ball_for(sys, f, a.radius), s.which, a.dump_lp, out);
    for (Hierarchy h : hierarchies(s.which)) {
        const auto t0 = std::chrono::steady_clock::now();
        const CertifiedInterval ci = bound_at_radius(sys, f, h, a.radius, s);
        print_interval(out, ci, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return 0;
}

int cmd_sweep(const Args& a, std::ostream& out, std::ostream& err) {
    if (a.r_min > a.r_max) throw InputError("--rmin must not exceed --rmax");
    const SpinSystem sys = load_model(a.model);
    const Observable f = load_observable(a.observable, sys);
    BoundSettings s{parse_which(a.hierarchy), parse_method(a.method), a.strict, {}};
    const std::vector<SweepRow> rows = sweep(sys, f, a.r_min, a.r_max, s, a.parallel);

    // without --out the CSV owns stdout and the report moves to stderr
    std::ostream& report = a.out_path.empty() ? err : out;
    if (a.out_path.empty()) {
        write_csv(rows, out);
    } else {
        std::ofstream os(a.out_path);
        if (!os) throw InputError("cannot write " + a.out_path);
        write_csv(rows, os);
    }
    header(report, "sweep", sys, f);
    tolerances(report, s.lp, s.strict);
    report << "radii: " << a.r_min << ".." << a.r_max << (a.parallel ? " (parallel)" : "") << '\n';
    if (!a.out_path.empty()) report << "csv: " << a.out_path << '\n';
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) report << "failed: r=" << r.r << ' ' << to_string(r.hierarchy) << ": " << r.error << '\n';
    }
    for (Hierarchy h : hierarchies(s.which)) {
        const auto slope = fitted_log_width_slope(rows, h);
        report << "fitted_log_width_slope[" << to_string(h) << "]: " << (slope ? fmt(*slope, 6) : "n/a") << '\n';
    }
    return 0;
}

int cmd_exact(const Args& a, std::ostream& out) {
    const SpinSystem sys = load_model(a.model);
    const Observable f = load_observable(a.observable, sys);
    header(out, "exact", sys, f);
    const bool line = sys.topology() == Topology::Chain || sys.topology() == Topology::Cycle;
    if (line && sys.num_sites() > kMaxEnumerationSites) {
        out << "method: transfer_matrix\n"
            << "expectation: " << fmt(transfer_matrix_expectation(sys, f), 15) << '\n';
        return 0;
    }
    if (!sys.is_finite()) {
        throw GuardError("exact expectations need a finite system; " + std::string(to_string(sys.topology())) +
                         " is an implicit lattice");
    }
    const double mean = expectation(sys, f);
    out << "method: enumeration\n"
        << "log_partition_function: " << fmt(partition_function(sys), 15) << '\n'
        << "expectation: " << fmt(mean, 15) << '\n';
    return 0;
}

int cmd_sample(const Args& a, std::ostream& out) {
    const SpinSystem sys = load_model(a.model);
    const Observable f = load_observable(a.observable, sys);
    if (!sys.is_finite()) throw GuardError("the sampler runs on finite systems only");
    const std::uint64_t n = sys.num_sites();
    const std::uint64_t burn = a.burn_in ? a.burn_in : 1000 * n;
    const std::uint64_t thin = a.thin ? a.thin : n;
    const Estimate e = estimate(sys, f, burn, a.samples, thin, a.seed);
    header(out, "sample", sys, f);
    out << "seed: " << e.seed << "  burn_in: " << e.burn_in << "  samples: " << e.samples << "  thin: " << e.thin
        << "  batches: " << e.batches << '\n'
        << "estimate: " << fmt(e.mean, 15) << "  std_error: " << fmt(e.std_error) << '\n'
        << "acceptance: " << fmt(e.acceptance, 6) << '\n';
    return 0;
}

}  // namespace

CertifiedInterval bound_at_radius(const SpinSystem& sys, const Observable& f, Hierarchy h, std::size_t r,
                                  const BoundSettings& s) {
    const Region region = ball_for(sys, f, r);
    if (h == Hierarchy::Dlr) {
        DlrOptions o;
        o.method = s.method == Method::PolicyIteration ? Method::Auto : s.method;
        o.strict = s.strict;
        o.lp = s.lp;
        return solve_dlr(sys, region, f, o);
    }
    McOptions o;
    o.method = s.method == Method::Reduced ? Method::Auto : s.method;
    o.strict = s.strict;
    o.lp = s.lp;
    return solve_mc(sys, region, f, o);
}

std::vector<SweepRow> sweep(const SpinSystem& sys, const Observable& f, std::size_t r_min, std::size_t r_max,
                            const BoundSettings& s, bool parallel) {
    std::vector<std::pair<std::size_t, Hierarchy>> cells;
    for (std::size_t r = r_min; r <= r_max; ++r)
        for (Hierarchy h : hierarchies(s.which)) cells.emplace_back(r, h);

    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    if (!parallel) {
        for (const auto& [r, h] : cells) rows.push_back(run_cell(sys, f, h, r, s));
        return rows;
    }
    std::vector<std::future<SweepRow>> jobs;
    for (const auto& [r, h] : cells) {
        jobs.push_back(std::async(std::launch::async, [&sys, &f, &s, r = r, h = h] { return run_cell(sys, f, h, r, s); }));
    }
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << kCsvHeader << '\n';
    const auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt(v, 17); };
    for (const SweepRow& r : rows) {
        os << r.r << ',' << dist_text(r.dist) << ',' << r.lambda_size << ',' << r.boundary_size << ','
           << to_string(r.hierarchy) << ',' << num(r.p_min) << ',' << num(r.p_max) << ',' << num(r.width) << ','
           << num(r.residual) << ',' << fmt(r.wall_ms, 6) << '\n';
    }
}

std::optional<double> fitted_log_width_slope(const std::vector<SweepRow>& rows, Hierarchy h) {
    std::vector<std::pair<double, double>> pts;
    for (const SweepRow& r : rows) {
        if (r.hierarchy != h || !r.dist || !r.error.empty() || !(r.width > 0.0) || !std::isfinite(r.width)) continue;
        pts.emplace_back(double(*r.dist), std::log(r.width));
    }
    if (pts.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= double(pts.size());
    my /= double(pts.size());
    double sxy = 0, sxx = 0;
    for (const auto& [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<char*> argv;
    std::string prog = "gibbs-certify";
    argv.push_back(prog.data());
    std::vector<std::string> copy = args;
    for (auto& s : copy) argv.push_back(s.data());
    return main_entry(int(argv.size()), argv.data(), out, err);
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified bounds on Gibbs expectations of local observables", "gibbs-certify"};
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--model", a.model, "model JSON file")->required();
        sub->add_option("--observable", a.observable, "observable JSON file")->required();
    };
    auto hier = [&](CLI::App* sub) {
        sub->add_option("--hierarchy", a.hierarchy, "dlr, mc or both")->check(CLI::IsMember({"dlr", "mc", "both"}));
        sub->add_option("--method", a.method, "auto, raw_lp, reduced or policy_iteration")
            ->check(CLI::IsMember({"auto", "raw_lp", "reduced", "policy_iteration"}));
        sub->add_flag("--strict", a.strict, "widen each bound by residual * |c|_1");
    };

    CLI::App* bound = app.add_subcommand("bound", "interval at one radius");
    common(bound);
    hier(bound);
    bound->add_option("--radius", a.radius, "ball radius around supp(f)");
    bound->add_option("--dump-lp", a.dump_lp, "write the max-sense LPs to PREFIX.<hierarchy>.mps");

    CLI::App* sw = app.add_subcommand("sweep", "intervals over a range of radii, as CSV");
    common(sw);
    hier(sw);
    sw->add_option("--rmin", a.r_min, "first radius");
    sw->add_option("--rmax", a.r_max, "last radius");
    sw->add_option("--out", a.out_path, "CSV path (default: stdout, report on stderr)");
    sw->add_flag("--parallel", a.parallel, "run radii concurrently; output order is unchanged");

    CLI::App* ex = app.add_subcommand("exact", "brute-force or transfer-matrix expectation");
    common(ex);

    CLI::App* sm = app.add_subcommand("sample", "heat-bath Glauber estimate");
    common(sm);
    sm->add_option("--seed", a.seed, "RNG seed");
    sm->add_option("--burn-in", a.burn_in, "burn-in steps (default 1000 n)");
    sm->add_option("--samples", a.samples, "number of samples");
    sm->add_option("--thin", a.thin, "steps between samples (default n)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*bound) return cmd_bound(a, out);
        if (*sw) return cmd_sweep(a, out, err);
        if (*ex) return cmd_exact(a, out);
        if (*sm) return cmd_sample(a, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return 1;
    } catch (const GuardError& e) {
        err << "guard violation: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    }
    return 1;
}

}  // namespace gibbs::cli
