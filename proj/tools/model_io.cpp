#include "model_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gibbs::cli {

namespace {

using json = nlohmann::json;

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line / column
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << origin << ": malformed JSON at line " << line << ", column " << col << ": " << e.what();
        throw InputError(msg.str());
    }
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + " must be a JSON object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw InputError(where + ": unknown key '" + k + "'");
    }
}

const json& need(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw InputError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

std::int64_t as_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw InputError(what + " must be an integer");
    return v.get<std::int64_t>();
}

std::size_t as_count(const json& v, const std::string& what) {
    const std::int64_t x = as_int(v, what);
    if (x <= 0) throw InputError(what + " must be positive");
    return std::size_t(x);
}

double as_real(const json& v, const std::string& what) {
    if (!v.is_number()) throw InputError(what + " must be a number");
    return v.get<double>();
}

InteractionTable as_table(const json& v) {
    if (!v.is_array() || v.size() != 4) {
        throw InputError("interaction tables are arrays [h(-,-), h(-,+), h(+,-), h(+,+)]");
    }
    return InteractionTable(as_real(v[0], "table entry"), as_real(v[1], "table entry"), as_real(v[2], "table entry"),
                            as_real(v[3], "table entry"));
}

Site as_site(const json& v, const SpinSystem& sys) {
    if (v.is_array()) {
        if (v.size() != 2) throw InputError("grid sites are written [row, col]");
        const std::int64_t r = as_int(v[0], "row");
        const std::int64_t c = as_int(v[1], "column");
        if (sys.topology() == Topology::InfiniteGrid2D) return infinite_grid_site(r, c);
        if (sys.topology() != Topology::Grid2D) throw InputError("[row, col] sites need a grid lattice");
        const auto dims = sys.grid_dims();
        if (r < 0 || c < 0 || std::size_t(r) >= dims[0] || std::size_t(c) >= dims[1]) {
            throw InputError("grid site [" + std::to_string(r) + ", " + std::to_string(c) + "] is outside the grid");
        }
        return Site(std::size_t(r) * dims[1] + std::size_t(c));
    }
    const Site s = as_int(v, "site");
    if (!sys.contains(s)) throw InputError("site " + std::to_string(s) + " is not in the system");
    return s;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

SpinSystem parse_model(const std::string& text, const std::string& origin) {
    const json doc = parse_text(text, origin);
    only_keys(doc, {"lattice", "model"}, origin);
    const json& lat = need(doc, "lattice", origin);
    const json& mod = need(doc, "model", origin);
    only_keys(lat, {"type", "n", "dims", "edges"}, origin + ".lattice");
    only_keys(mod, {"type", "beta", "tables"}, origin + ".model");

    const json& mtype = need(mod, "type", origin + ".model");
    if (!mtype.is_string()) throw InputError("model.type must be a string");
    const std::string kind = mtype.get<std::string>();
    const double beta = as_real(need(mod, "beta", origin + ".model"), "model.beta");
    std::vector<InteractionTable> tables;
    if (kind == "ising_ferro" || kind == "ising_antiferro") {
        if (mod.contains("tables")) throw InputError("model.tables is only allowed with type 'table'");
        tables.push_back(InteractionTable::ising(kind == "ising_ferro" ? 1.0 : -1.0));
    } else if (kind == "table") {
        const json& t = need(mod, "tables", origin + ".model");
        if (!t.is_array() || t.empty()) throw InputError("model.tables must be a nonempty array");
        // a single flat table is accepted as shorthand for one shared table
        if (t.size() == 4 && t[0].is_number()) {
            tables.push_back(as_table(t));
        } else {
            for (const json& e : t) tables.push_back(as_table(e));
        }
    } else {
        throw InputError("unknown model.type '" + kind + "'");
    }

    const json& ltype = need(lat, "type", origin + ".lattice");
    if (!ltype.is_string()) throw InputError("lattice.type must be a string");
    const std::string topo = ltype.get<std::string>();
    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (lat.contains(k)) throw InputError("lattice type '" + topo + "' does not take '" + k + "'");
    };
    if (topo == "chain" || topo == "cycle") {
        forbid({"dims", "edges"});
        const std::size_t n = as_count(need(lat, "n", origin + ".lattice"), "lattice.n");
        return topo == "chain" ? SpinSystem::chain(n, tables, beta) : SpinSystem::cycle(n, tables, beta);
    }
    if (topo == "grid2d") {
        forbid({"n", "edges"});
        const json& d = need(lat, "dims", origin + ".lattice");
        if (!d.is_array() || d.size() != 2) throw InputError("lattice.dims must be [rows, cols]");
        return SpinSystem::grid2d(as_count(d[0], "rows"), as_count(d[1], "cols"), tables, beta);
    }
    if (topo == "explicit") {
        forbid({"dims"});
        const json& e = need(lat, "edges", origin + ".lattice");
        if (!e.is_array()) throw InputError("lattice.edges must be an array of [i, j] pairs");
        std::vector<std::pair<Site, Site>> edges;
        for (const json& p : e) {
            if (!p.is_array() || p.size() != 2) throw InputError("lattice.edges entries must be [i, j] pairs");
            edges.emplace_back(as_int(p[0], "edge endpoint"), as_int(p[1], "edge endpoint"));
        }
        // without n the vertex set is 0..max endpoint
        std::size_t n = 0;
        for (const auto& [a, b] : edges) n = std::max<std::size_t>(n, std::size_t(std::max<Site>({a, b, 0})) + 1);
        if (lat.contains("n")) n = as_count(lat.at("n"), "lattice.n");
        return SpinSystem::explicit_graph(n, edges, tables, beta);
    }
    if (topo == "infinite_chain" || topo == "infinite_grid2d") {
        forbid({"n", "dims", "edges"});
        if (tables.size() != 1) throw InputError("implicit lattices take exactly one interaction table");
        return topo == "infinite_chain" ? SpinSystem::infinite_chain(tables[0], beta)
                                        : SpinSystem::infinite_grid2d(tables[0], beta);
    }
    throw InputError("unknown lattice.type '" + topo + "'");
}

Observable parse_observable(const std::string& text, const SpinSystem& sys, const std::string& origin) {
    const json doc = parse_text(text, origin);
    if (!doc.is_object()) throw InputError(origin + " must be a JSON object");
    const json& t = need(doc, "type", origin);
    if (!t.is_string()) throw InputError("observable type must be a string");
    const std::string kind = t.get<std::string>();
    std::string label = doc.contains("label") && doc.at("label").is_string() ? doc.at("label").get<std::string>() : "";
    if (kind == "spin_product") {
        only_keys(doc, {"type", "sites", "label"}, origin);
        const json& s = need(doc, "sites", origin);
        if (!s.is_array()) throw InputError("observable sites must be an array");
        std::vector<Site> sites;
        for (const json& v : s) sites.push_back(as_site(v, sys));
        Observable f = spin_product(sites);
        return label.empty() ? f : Observable(f.support().sites(), {f.table().begin(), f.table().end()}, label);
    }
    if (kind == "table") {
        only_keys(doc, {"type", "support", "values", "label"}, origin);
        const json& s = need(doc, "support", origin);
        const json& v = need(doc, "values", origin);
        if (!s.is_array() || !v.is_array()) throw InputError("observable support and values must be arrays");
        std::vector<Site> support;
        for (const json& x : s) support.push_back(as_site(x, sys));
        for (std::size_t k = 1; k < support.size(); ++k) {
            if (support[k] <= support[k - 1]) {
                throw InputError("observable support must list distinct sites in increasing site order");
            }
        }
        std::vector<double> values;
        for (const json& x : v) values.push_back(as_real(x, "observable value"));
        return Observable(std::move(support), std::move(values), label.empty() ? "table" : label);
    }
    throw InputError("unknown observable type '" + kind + "'");
}

SpinSystem load_model(const std::string& path) { return parse_model(slurp(path), path); }

Observable load_observable(const std::string& path, const SpinSystem& sys) {
    return parse_observable(slurp(path), sys, path);
}

}  // namespace gibbs::cli
