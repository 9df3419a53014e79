#pragma once

#include "latinapprox/amalgam.hpp"
#include "latinapprox/latin.hpp"
#include "latinapprox/partition.hpp"
#include "latinapprox/pipeline.hpp"
#include "latinapprox/tensor.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace latinapprox {

using nlohmann::json;

// Exact values serialize as {"exact": "p/q", "value": double} so denominators
// survive round trips while the reports stay human-readable.
inline json rational_json(const Rational& q) {
    return json{{"exact", rat_str(q)}, {"value", to_double(q)}};
}

inline Rational rational_from_json(const json& j) {
    if (j.is_object()) return parse_rational(j.at("exact").get<std::string>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw ConfigError("expected a rational value");
}

// ---------------------------------------------------------------------------
// Latin squares: CSV row-major, 0-indexed, -1 = empty
// ---------------------------------------------------------------------------

template <typename Square>
inline std::string square_to_csv(const Square& sq) {
    std::ostringstream out;
    for (int r = 0; r < sq.order; ++r) {
        for (int c = 0; c < sq.order; ++c) {
            if (c) out << ',';
            out << sq.at(r, c);
        }
        out << '\n';
    }
    return out.str();
}

inline PartialLatinSquare partial_from_csv(const std::string& text) {
    std::vector<std::vector<int>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<int> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stoi(cell));
        rows.push_back(std::move(row));
    }
    PartialLatinSquare p;
    p.order = static_cast<int>(rows.size());
    for (auto& r : rows) {
        if (static_cast<int>(r.size()) != p.order) throw ConfigError("CSV square is not square");
        p.table.insert(p.table.end(), r.begin(), r.end());
    }
    if (!p.valid()) throw ConfigError("CSV does not encode a valid (partial) Latin square");
    return p;
}

inline LatinSquare square_from_csv(const std::string& text) {
    PartialLatinSquare p = partial_from_csv(text);
    LatinSquare sq;
    sq.order = p.order;
    sq.table = p.table;
    if (!sq.valid()) throw ConfigError("CSV does not encode a complete Latin square");
    return sq;
}

inline json square_to_json(const LatinSquare& sq, const GroupedPartition* g = nullptr) {
    json j{{"order", sq.order}, {"table", sq.table}};
    if (g) j["groups"] = json{{"count", g->group_count}, {"size", g->group_size}};
    return j;
}

// ---------------------------------------------------------------------------
// Tensor JSON: entries flattened with i fastest, then j, then k
// ---------------------------------------------------------------------------

inline json tensor_to_json(const WTensor& w) {
    json j;
    j["n"] = w.n;
    j["mode"] = w.mode == TensorMode::exact ? "exact" : "montecarlo";
    j["window_measure_sq"] = rat_str(w.window_measure_sq);
    j["layout"] = "i-fastest";
    if (w.mode == TensorMode::exact) {
        json entries = json::array();
        for (const Rational& q : w.exact) entries.push_back(rat_str(q));
        j["entries"] = std::move(entries);
    } else {
        j["entries"] = w.est;
        j["stddev"] = w.sd;
    }
    return j;
}

inline WTensor tensor_from_json(const json& j) {
    WTensor w;
    w.n = j.at("n").get<int>();
    w.window_measure_sq = parse_rational(j.at("window_measure_sq").get<std::string>());
    const std::string mode = j.at("mode").get<std::string>();
    const size_t n3 = static_cast<size_t>(w.n) * w.n * w.n;
    if (mode == "exact") {
        w.mode = TensorMode::exact;
        for (const auto& e : j.at("entries")) w.exact.push_back(parse_rational(e.get<std::string>()));
        if (w.exact.size() != n3) throw ConfigError("tensor entry count mismatch");
    } else if (mode == "montecarlo") {
        w.mode = TensorMode::montecarlo;
        w.est = j.at("entries").get<std::vector<double>>();
        if (j.contains("stddev")) w.sd = j.at("stddev").get<std::vector<double>>();
        if (w.est.size() != n3) throw ConfigError("tensor entry count mismatch");
    } else {
        throw ConfigError("unknown tensor mode: " + mode);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Amalgam JSON
// ---------------------------------------------------------------------------

inline json amalgam_to_json(const IntegerAmalgam& m) {
    json j;
    j["n"] = m.n;
    j["t"] = m.t;
    j["layout"] = "i-fastest";
    j["entries"] = m.e;
    j["mask"] = std::vector<int>(m.mask.begin(), m.mask.end());
    j["required_S"] = std::vector<int>(m.reqS.begin(), m.reqS.end());
    j["required_Sp"] = std::vector<int>(m.reqSp.begin(), m.reqSp.end());
    j["required_Spp"] = std::vector<int>(m.reqSpp.begin(), m.reqSpp.end());
    return j;
}

inline IntegerAmalgam amalgam_from_json(const json& j) {
    IntegerAmalgam m;
    m.n = j.at("n").get<int>();
    m.t = j.at("t").get<std::int64_t>();
    m.e = j.at("entries").get<std::vector<std::int64_t>>();
    const size_t n3 = static_cast<size_t>(m.n) * m.n * m.n;
    const size_t nn = static_cast<size_t>(m.n) * m.n;
    if (m.e.size() != n3) throw ConfigError("amalgam entry count mismatch");
    auto mask_field = [&](const char* key, std::vector<char>& dst, size_t len, char dflt) {
        if (j.contains(key)) {
            auto v = j.at(key).get<std::vector<int>>();
            if (v.size() != len) throw ConfigError(std::string("bad length for ") + key);
            dst.assign(v.begin(), v.end());
        } else {
            dst.assign(len, dflt);
        }
    };
    mask_field("mask", m.mask, n3, 0);
    if (!j.contains("mask"))
        for (size_t x = 0; x < n3; ++x) m.mask[x] = m.e[x] > 0;
    mask_field("required_S", m.reqS, nn, 1);
    mask_field("required_Sp", m.reqSp, nn, 1);
    mask_field("required_Spp", m.reqSpp, nn, 1);
    return m;
}

// ---------------------------------------------------------------------------
// Partition JSON
// ---------------------------------------------------------------------------

inline json partition_to_json(const Partition& p) {
    json cells = json::array();
    for (int i = 0; i < p.size(); ++i) {
        const Cell& c = p.cells[i];
        json jc;
        jc["id"] = i;
        if (c.bounds) {
            json axes = json::array();
            for (const auto& [lo, hi] : c.bounds->axes)
                axes.push_back(json::array({rat_str(lo), rat_str(hi)}));
            jc["bounds"] = std::move(axes);
        } else if (c.element >= 0) {
            jc["element"] = c.element;
        } else {
            jc["atom_ids"] = c.atom_ids;
        }
        json rep = json::array();
        for (const Rational& q : c.representative.coords) rep.push_back(rat_str(q));
        jc["representative"] = std::move(rep);
        jc["measure"] = rat_str(c.measure);
        cells.push_back(std::move(jc));
    }
    return json{{"cells", std::move(cells)}, {"cell_measure", rat_str(p.cell_measure)}};
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json report_to_json(const ApproximationReport& r) {
    json j;
    j["density_ok"] = r.density_ok;
    j["pair_count"] = r.pair_count;
    j["epsilon_bound"] = rational_json(r.epsilon_bound);
    j["max_product_error"] = rational_json(r.max_product_error);
    j["mean_product_error"] = rational_json(r.mean_product_error);
    if (r.q0 >= 0) {
        j["q0"] = r.q0;
        j["unit_laws_ok"] = r.unit_laws_ok;
        j["a_displacement"] = rational_json(r.a_displacement);
        j["b_displacement"] = rational_json(r.b_displacement);
    }
    return j;
}

inline json run_to_json(const PipelineRun& run) {
    json j;
    j["n_cells"] = run.partition.size();
    j["t"] = run.t_used;
    j["order"] = run.map.square.order;
    j["report"] = report_to_json(run.report);
    return j;
}

inline json probe_to_json(const ProbeReport& r) {
    json lines = json::array();
    for (const auto& l : r.lines)
        lines.push_back(json{{"i", l.i}, {"j", l.j}, {"sum", l.sum}, {"stddev", l.stddev}});
    return json{{"exact", r.exact},
                {"line_count", r.line_count},
                {"median", r.median},
                {"max_abs_disparity", r.max_abs_disparity},
                {"max_rel_disparity", r.max_rel_disparity},
                {"max_sigma_ratio", r.max_sigma_ratio},
                {"exceeds_noise", r.exceeds_noise},
                {"lines", std::move(lines)}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace latinapprox
