#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_runner.hpp"
#include "model_io.hpp"
#include "oracles.hpp"

using namespace gibbs;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("gibbs_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

struct Out {
    int code;
    std::string out;
    std::string err;
};

Out run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    return {code, o.str(), e.str()};
}

std::string chain_model(std::size_t n, double beta) {
    return R"({"lattice": {"type": "chain", "n": )" + std::to_string(n) + R"(}, "model": {"type": "ising_ferro", "beta": )" +
           std::to_string(beta) + "}}";
}

double field(const std::string& text, const std::string& key) {
    const auto at = text.find(key);
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + key.size()));
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("model files") {
    const SpinSystem g = cli::parse_model(R"({"lattice": {"type": "grid2d", "dims": [3, 4]},
        "model": {"type": "table", "beta": 0.5, "tables": [0.1, -0.2, -0.2, 0.3]}})");
    CHECK(g.num_sites() == 12);
    CHECK(g.table(0) == InteractionTable(0.1, -0.2, -0.2, 0.3));
    const Observable f = cli::parse_observable(R"({"type": "spin_product", "sites": [[1, 2], [2, 3]]})", g);
    CHECK(f.support().sites() == std::vector<Site>{6, 11});

    const SpinSystem e = cli::parse_model(R"({"lattice": {"type": "explicit", "edges": [[0, 1], [1, 3]]},
        "model": {"type": "ising_antiferro", "beta": 1}})");
    CHECK(e.num_sites() == 4);
    CHECK(e.table(0) == InteractionTable::ising(-1.0));

    const SpinSystem plane = cli::parse_model(R"({"lattice": {"type": "infinite_grid2d"},
        "model": {"type": "ising_ferro", "beta": 0.2}})");
    CHECK(!plane.is_finite());
    const Observable p = cli::parse_observable(R"({"type": "spin_product", "sites": [[-3, 5]]})", plane);
    CHECK(p.support()[0] == infinite_grid_site(-3, 5));

    const Observable t = cli::parse_observable(R"({"type": "table", "support": [1, 2], "values": [1, 2, 3, 4]})", g);
    CHECK(t.value_at(2) == 3.0);

    CHECK_THROWS_AS(cli::parse_model(R"({"lattice": {"type": "chain", "n": 3}, "model": {"type": "ising_ferro", "beta": 1}, "x": 1})"),
                    InputError);
    CHECK_THROWS_AS(cli::parse_model(R"({"lattice": {"type": "chain", "n": 3, "dims": [1, 3]}, "model": {"type": "ising_ferro", "beta": 1}})"),
                    InputError);
    CHECK_THROWS_AS(cli::parse_model(R"({"lattice": {"type": "ring", "n": 3}, "model": {"type": "ising_ferro", "beta": 1}})"),
                    InputError);
    CHECK_THROWS_AS(cli::parse_model(R"({"lattice": {"type": "chain", "n": 3}, "model": {"type": "table", "beta": 1, "tables": [[0, 1, 2, 0]]}})"),
                    InputError);
    CHECK_THROWS_AS(cli::parse_observable(R"({"type": "spin_product", "sites": [99]})", g), InputError);
    CHECK_THROWS_AS(cli::parse_observable(R"({"type": "table", "support": [2, 1], "values": [1, 2, 3, 4]})", g), InputError);
    CHECK_THROWS_AS(cli::parse_observable(R"({"type": "table", "support": [1], "values": [1, 2, 3]})", g), InputError);
    try {
        cli::parse_model("{\n  \"lattice\": {\n    \"type\": \"chain\",, \"n\": 3}\n}");
        FAIL("no error");
    } catch (const InputError& err) {
        CHECK(std::string(err.what()).find("line 3, column") != std::string::npos);
    }
}

TEST_CASE("bound command") {
    Scratch s;
    const std::string obs = s.file("f.json", R"({"type": "spin_product", "sites": [3, 4]})");
    const Out free = run({"bound", "--model", s.file("m0.json", chain_model(8, 0.0)), "--observable", obs, "--radius", "1",
                          "--hierarchy", "dlr"});
    CHECK(free.code == 0);
    CHECK(free.out.find("interval: [0, 0]  width: 0\n") != std::string::npos);
    CHECK(free.out.find("feas_tol=") != std::string::npos);
    CHECK(free.out.find("fast_mixing:") != std::string::npos);
    CHECK(free.out.find("beta: 0") != std::string::npos);

    // radius 10 covers the whole chain
    const SpinSystem sys = SpinSystem::chain(8, {InteractionTable::ising(1.0)}, 0.7);
    const double mu = oracle::expectation(sys, spin_product({3, 4}));
    const Out full = run({"bound", "--model", s.file("m1.json", chain_model(8, 0.7)), "--observable", obs, "--radius", "10"});
    CHECK(full.code == 0);
    const auto dlr_at = full.out.find("[dlr]");
    const auto mc_at = full.out.find("[mc]");
    REQUIRE(mc_at != std::string::npos);
    for (auto at : {dlr_at, mc_at}) {
        const std::string part = full.out.substr(at);
        const double lo = field(part, "interval: [");
        const double hi = field(part, ", ");
        CHECK(hi - lo <= 1e-7);
        CHECK(std::abs(0.5 * (lo + hi) - mu) <= 1e-7);
        CHECK(part.find("dist: inf") != std::string::npos);
    }

    const Out dump = run({"bound", "--model", s.file("m2.json", chain_model(8, 0.7)), "--observable", obs, "--radius", "1",
                          "--dump-lp", (s.dir / "lp").string()});
    CHECK(dump.code == 0);
    CHECK(fs::exists(s.dir / "lp.dlr.mps"));
    CHECK(fs::exists(s.dir / "lp.mc.mps"));
}

TEST_CASE("strict mode widens by residual times the objective norm") {
    const SpinSystem sys = SpinSystem::chain(7, {InteractionTable(0.2, -0.5, -0.5, 0.4)}, 1.3);
    const Observable f = spin_product({3});
    cli::BoundSettings loose;
    loose.method = Method::RawLp;
    cli::BoundSettings strict = loose;
    strict.strict = true;
    for (Hierarchy h : {Hierarchy::Dlr, Hierarchy::Mc}) {
        const CertifiedInterval a = cli::bound_at_radius(sys, f, h, 1, loose);
        const CertifiedInterval b = cli::bound_at_radius(sys, f, h, 1, strict);
        const double l1 = double(std::size_t{1} << (b.lambda_size + b.boundary_size));  // |f| = 1 everywhere
        CHECK(b.residual_widening == doctest::Approx(b.residual * l1));
        CHECK(b.lower == doctest::Approx(a.lower - b.residual_widening));
        CHECK(b.upper == doctest::Approx(a.upper + b.residual_widening));
    }
}

TEST_CASE("sweep command") {
    Scratch s;
    const std::string obs = s.file("f.json", R"({"type": "spin_product", "sites": [5, 6]})");
    const std::string model = s.file("m.json", chain_model(12, 0.3));
    const std::string csv = (s.dir / "out.csv").string();
    const Out r = run({"sweep", "--model", model, "--observable", obs, "--rmin", "1", "--rmax", "4", "--out", csv});
    CHECK(r.code == 0);
    std::ifstream in(csv);
    std::stringstream text;
    text << in.rdbuf();
    const auto rows = csv_rows(text.str());
    REQUIRE(rows.size() == 9);
    CHECK(text.str().rfind(std::string(cli::kCsvHeader) + "\n", 0) == 0);
    double prev = 1e9;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        REQUIRE(rows[k].size() == 10);
        CHECK(std::stoul(rows[k][1]) == std::stoul(rows[k][0]) + 1);
        if (rows[k][4] == "dlr") {
            const double w = std::stod(rows[k][7]);
            CHECK(w <= prev + 1e-12);
            prev = w;
        }
    }
    CHECK(field(r.out, "fitted_log_width_slope[dlr]: ") < 0.0);
    CHECK(field(r.out, "fitted_log_width_slope[mc]: ") < 0.0);

    // beta = 0: every width is zero
    const SpinSystem free = SpinSystem::chain(12, {InteractionTable::ising(1.0)}, 0.0);
    for (const cli::SweepRow& row : cli::sweep(free, spin_product({5, 6}), 1, 3, {}, false)) {
        CHECK(row.error.empty());
        CHECK(std::abs(row.width) <= 1e-12);
    }
    CHECK(!cli::fitted_log_width_slope(cli::sweep(free, spin_product({5, 6}), 1, 3, {}, false), Hierarchy::Dlr));
}

TEST_CASE("sweep records per-radius failures and parallel runs keep the order") {
    const SpinSystem sys = SpinSystem::chain(30, {InteractionTable::ising(1.0)}, 0.4);
    const Observable f = spin_product({15});
    cli::BoundSettings raw;
    raw.which = cli::Which::Dlr;
    raw.method = Method::RawLp;
    const auto rows = cli::sweep(sys, f, 5, 8, raw, false);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].error.empty());
    CHECK(!rows[3].error.empty());  // closure of 19 sites is past the raw-LP guard
    CHECK(std::isnan(rows[3].width));
    CHECK(rows[3].lambda_size == 17);
    std::ostringstream os;
    cli::write_csv(rows, os);
    CHECK(os.str().find(",nan,") != std::string::npos);

    const auto seq = cli::sweep(sys, f, 1, 4, {}, false);
    const auto par = cli::sweep(sys, f, 1, 4, {}, true);
    REQUIRE(seq.size() == par.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        CHECK(seq[k].r == par[k].r);
        CHECK(seq[k].hierarchy == par[k].hierarchy);
        CHECK(seq[k].p_min == par[k].p_min);
        CHECK(seq[k].p_max == par[k].p_max);
    }
}

TEST_CASE("exact and sample commands") {
    Scratch s;
    const std::string edge = s.file("e.json", chain_model(2, 0.5));
    const std::string obs = s.file("f.json", R"({"type": "spin_product", "sites": [0, 1]})");
    const Out ex = run({"exact", "--model", edge, "--observable", obs});
    CHECK(ex.code == 0);
    CHECK(field(ex.out, "expectation: ") == doctest::Approx(std::tanh(0.5)).epsilon(1e-13));

    // long chains go through the transfer matrix
    const Out longer = run({"exact", "--model", s.file("l.json", chain_model(60, 0.5)), "--observable", obs});
    CHECK(longer.code == 0);
    CHECK(longer.out.find("transfer_matrix") != std::string::npos);

    const std::string m = s.file("m.json", chain_model(6, 0.4));
    const Out a = run({"sample", "--model", m, "--observable", obs, "--seed", "9", "--samples", "2000"});
    const Out b = run({"sample", "--model", m, "--observable", obs, "--seed", "9", "--samples", "2000"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    const std::string inf = s.file("inf.json", R"({"lattice": {"type": "infinite_chain"}, "model": {"type": "ising_ferro", "beta": 0.3}})");
    const Out bad = run({"exact", "--model", inf, "--observable", obs});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("implicit lattice") != std::string::npos);
}

TEST_CASE("exit codes") {
    Scratch s;
    const std::string obs = s.file("f.json", R"({"type": "spin_product", "sites": [0]})");
    const Out malformed = run({"exact", "--model", s.file("m.json", "{\"lattice\": {\"type\": \"chain\",\n\"n\": 4,}}"), "--observable", obs});
    CHECK(malformed.code == 1);
    CHECK(malformed.err.find("line 2, column") != std::string::npos);

    CHECK(run({"exact", "--model", (s.dir / "missing.json").string(), "--observable", obs}).code == 1);
    CHECK(run({"bound"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);

    // guard: enumeration past its budget
    const std::string big = s.file("big.json", R"({"lattice": {"type": "grid2d", "dims": [6, 6]}, "model": {"type": "ising_ferro", "beta": 0.1}})");
    CHECK(run({"exact", "--model", big, "--observable", obs}).code == 2);
    CHECK(run({"bound", "--model", big, "--observable", obs, "--radius", "4", "--hierarchy", "dlr", "--method", "raw_lp"}).code == 2);
}
