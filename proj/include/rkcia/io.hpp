#ifndef RKCIA_IO_HPP
#define RKCIA_IO_HPP

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "rkcia/algorithm.hpp"
#include "rkcia/graph.hpp"
#include "rkcia/harness.hpp"
#include "rkcia/indep.hpp"

namespace rkcia {

using json = nlohmann::ordered_json;

class ParseError : public Error {
public:
    using Error::Error;
};

namespace detail {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError(fmt::format("{}: missing field \"{}\"", where, key));
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(fmt::format("{}: field \"{}\" has the wrong type", where, key));
    }
}

inline const json& array_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_array())
        throw ParseError(fmt::format("{}: field \"{}\" must be an array", where, key));
    return obj.at(key);
}

inline std::vector<Variable> parse_nodes(const json& doc) {
    std::vector<Variable> nodes;
    const json& arr = array_field(doc, "nodes", "graph");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = fmt::format("nodes[{}]", i);
        Variable v;
        v.index = field<std::size_t>(arr[i], "index", where);
        v.name = field<std::string>(arr[i], "name", where);
        v.arity = arr[i].contains("arity") ? field<int>(arr[i], "arity", where) : 2;
        v.hidden = arr[i].contains("hidden") ? field<bool>(arr[i], "hidden", where) : false;
        nodes.push_back(std::move(v));
    }
    std::sort(nodes.begin(), nodes.end(), [](const Variable& a, const Variable& b) { return a.index < b.index; });
    try {
        validate_variables(nodes);
    } catch (const InvalidGraph& e) {
        throw ParseError(fmt::format("nodes: {}", e.what()));
    }
    return nodes;
}

struct RawEdge {
    NodeId a, b;
    Mark mark_a, mark_b;
};

inline std::vector<RawEdge> parse_edges(const json& doc, std::size_t n) {
    std::vector<RawEdge> out;
    const json& arr = array_field(doc, "edges", "graph");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = fmt::format("edges[{}]", i);
        RawEdge e{field<std::size_t>(arr[i], "a", where), field<std::size_t>(arr[i], "b", where), Mark::Tail,
                  Mark::Arrow};
        const auto ma = parse_mark(field<std::string>(arr[i], "mark_a", where));
        const auto mb = parse_mark(field<std::string>(arr[i], "mark_b", where));
        if (!ma || !mb)
            throw ParseError(where + ": marks must be \"tail\", \"arrow\" or \"circle\"");
        if (e.a >= n || e.b >= n || e.a == e.b)
            throw ParseError(where + ": endpoints must be distinct node indices");
        e.mark_a = *ma;
        e.mark_b = *mb;
        out.push_back(e);
    }
    return out;
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

inline json nodes_to_json(const std::vector<Variable>& nodes) {
    json arr = json::array();
    for (const auto& v : nodes)
        arr.push_back({{"index", v.index}, {"name", v.name}, {"arity", v.arity}, {"hidden", v.hidden}});
    return arr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph JSON: {"nodes":[...], "edges":[{"a","b","mark_a","mark_b"}], "constraints":[[a,b,c]]}

inline json to_json(const MixedGraph& g) {
    json doc;
    doc["nodes"] = detail::nodes_to_json(g.nodes());
    json edges = json::array();
    for (const Edge& e : g.edges())
        edges.push_back({{"a", e.a}, {"b", e.b}, {"mark_a", mark_name(e.mark_a)}, {"mark_b", mark_name(e.mark_b)}});
    doc["edges"] = std::move(edges);
    json cons = json::array();
    for (const Constraint& c : g.constraints())
        cons.push_back({c.a, c.mid, c.c});
    doc["constraints"] = std::move(cons);
    return doc;
}

inline json to_json(const Dag& g) {
    json doc;
    doc["nodes"] = detail::nodes_to_json(g.nodes());
    json edges = json::array();
    for (auto [p, c] : g.edges())
        edges.push_back({{"a", p}, {"b", c}, {"mark_a", "tail"}, {"mark_b", "arrow"}});
    doc["edges"] = std::move(edges);
    doc["constraints"] = json::array();
    return doc;
}

inline MixedGraph mixed_graph_from_json(const json& doc) {
    MixedGraph g(detail::parse_nodes(doc));
    try {
        for (const auto& e : detail::parse_edges(doc, g.size()))
            g.add_edge(e.a, e.b, e.mark_a, e.mark_b);
        if (doc.contains("constraints")) {
            const json& arr = detail::array_field(doc, "constraints", "graph");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_array() || arr[i].size() != 3)
                    throw ParseError(fmt::format("constraints[{}]: expected [a, b, c]", i));
                const auto t = arr[i].get<std::vector<std::size_t>>();
                if (std::any_of(t.begin(), t.end(), [&](std::size_t v) { return v >= g.size(); }))
                    throw ParseError(fmt::format("constraints[{}]: node index out of range", i));
                g.add_constraint(t[0], t[1], t[2]);
            }
        }
    } catch (const InvalidGraph& e) {
        throw ParseError(fmt::format("graph: {}", e.what()));
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("graph: {}", e.what()));
    }
    return g;
}

/// Every edge must be tail/arrow; the result must be acyclic.
inline Dag dag_from_json(const json& doc) {
    Dag g(detail::parse_nodes(doc));
    try {
        for (const auto& e : detail::parse_edges(doc, g.size())) {
            if (e.mark_a == Mark::Tail && e.mark_b == Mark::Arrow)
                g.add_edge(e.a, e.b);
            else if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Tail)
                g.add_edge(e.b, e.a);
            else
                throw ParseError(fmt::format("edge {}-{} is not a directed edge", e.a, e.b));
        }
    } catch (const InvalidGraph& e) {
        throw ParseError(fmt::format("graph: {}", e.what()));
    }
    return g;
}

/// Reads either kind of graph document as a mixed graph over visible nodes;
/// documents with hidden nodes are read as DAGs and projected.
inline MixedGraph any_graph_from_json(const json& doc) {
    const auto nodes = detail::parse_nodes(doc);
    const bool has_hidden = std::any_of(nodes.begin(), nodes.end(), [](const Variable& v) { return v.hidden; });
    return has_hidden ? to_mixed(dag_from_json(doc)) : mixed_graph_from_json(doc);
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline const char* dot_arrow(Mark m) {
    switch (m) {
    case Mark::Tail: return "none";
    case Mark::Arrow: return "normal";
    case Mark::Circle: return "odot";
    }
    return "none";
}

inline std::string dot_nodes(const std::vector<Variable>& nodes) {
    std::string out;
    for (const auto& v : nodes)
        out += fmt::format("  {}{};\n", quote(v.name), v.hidden ? " [style=dashed]" : "");
    return out;
}

}  // namespace detail

/// -> becomes a plain directed edge, <-> uses dir=both, circle ends are
/// drawn as odot arrowheads.
inline std::string to_dot(const MixedGraph& g, const std::string& name = "poipg") {
    std::string out = fmt::format("digraph {} {{\n", detail::quote(name));
    out += detail::dot_nodes(g.nodes());
    for (const Edge& e : g.edges()) {
        const auto a = detail::quote(g.node(e.a).name), b = detail::quote(g.node(e.b).name);
        if (e.mark_a == Mark::Tail && e.mark_b == Mark::Arrow)
            out += fmt::format("  {} -> {};\n", a, b);
        else if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Tail)
            out += fmt::format("  {} -> {};\n", b, a);
        else if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Arrow)
            out += fmt::format("  {} -> {} [dir=both];\n", a, b);
        else
            out += fmt::format("  {} -> {} [dir=both, arrowtail={}, arrowhead={}];\n", a, b,
                               detail::dot_arrow(e.mark_a), detail::dot_arrow(e.mark_b));
    }
    return out + "}\n";
}

inline std::string to_dot(const Dag& g, const std::string& name = "dag") {
    std::string out = fmt::format("digraph {} {{\n", detail::quote(name));
    out += detail::dot_nodes(g.nodes());
    for (auto [p, c] : g.edges())
        out += fmt::format("  {} -> {};\n", detail::quote(g.node(p).name), detail::quote(g.node(c).name));
    return out + "}\n";
}

// ---------------------------------------------------------------------------
// Distribution JSON: {"variables":[{"name","arity"}], "probabilities":[...]},
// row-major with the last variable varying fastest.

inline std::vector<Variable> variables_from_json(const json& doc, const std::string& where) {
    std::vector<Variable> vars;
    const json& arr = detail::array_field(doc, "variables", where);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string w = fmt::format("{}: variables[{}]", where, i);
        Variable v{i, detail::field<std::string>(arr[i], "name", w), detail::field<int>(arr[i], "arity", w), false};
        if (v.arity < 2)
            throw ParseError(w + ": arity must be at least 2");
        vars.push_back(std::move(v));
    }
    return vars;
}

inline ExactDistribution distribution_from_json(const json& doc) {
    ExactDistribution d{variables_from_json(doc, "distribution"), {}};
    const json& probs = detail::array_field(doc, "probabilities", "distribution");
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!probs[i].is_number())
            throw ParseError(fmt::format("distribution: probabilities[{}] is not a number", i));
        d.table.push_back(probs[i].get<double>());
    }
    try {
        d.validate();
    } catch (const InvalidData& e) {
        throw ParseError(fmt::format("distribution: {}", e.what()));
    }
    return d;
}

inline json to_json(const ExactDistribution& d) {
    json doc;
    json vars = json::array();
    for (const auto& v : d.variables)
        vars.push_back({{"name", v.name}, {"arity", v.arity}});
    doc["variables"] = std::move(vars);
    doc["probabilities"] = d.table;
    return doc;
}

// ---------------------------------------------------------------------------
// CSV samples: header row of names, then one row of state indices per sample.

/// Arity per column is max+1 (at least 2) unless `schema` gives it.
inline DiscreteDataset read_csv(std::istream& in, const std::optional<std::vector<Variable>>& schema = std::nullopt) {
    const auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        return cells;
    };
    const auto trim = [](std::string s) {
        const auto not_space = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
        s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
        return s;
    };
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("csv line 1: missing header row");
    DiscreteDataset d;
    for (auto& name : split(line)) {
        name = trim(name);
        if (name.empty())
            throw ParseError("csv line 1: empty column name");
        d.variables.push_back({d.variables.size(), name, 2, false});
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto cells = split(line);
        if (cells.size() != d.variables.size())
            throw ParseError(fmt::format("csv line {}: expected {} cells, found {}", lineno, d.variables.size(),
                                         cells.size()));
        std::vector<int> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            std::size_t used = 0;
            int value = -1;
            try {
                value = std::stoi(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (cell.empty() || used != cell.size() || value < 0)
                throw ParseError(fmt::format("csv line {}, column '{}': '{}' is not a non-negative integer", lineno,
                                             d.variables[c].name, cell));
            row.push_back(value);
        }
        d.rows.push_back(std::move(row));
    }
    if (d.rows.empty())
        throw ParseError(fmt::format("csv: no data rows after header (line {})", lineno));
    if (schema) {
        if (schema->size() != d.variables.size())
            throw ParseError("csv schema lists a different number of variables than the header");
        for (std::size_t c = 0; c < d.variables.size(); ++c) {
            if ((*schema)[c].name != d.variables[c].name)
                throw ParseError(fmt::format("csv schema variable {} is '{}', header has '{}'", c, (*schema)[c].name,
                                             d.variables[c].name));
            d.variables[c].arity = (*schema)[c].arity;
        }
    } else {
        for (std::size_t c = 0; c < d.variables.size(); ++c) {
            int mx = 0;
            for (const auto& row : d.rows)
                mx = std::max(mx, row[c]);
            d.variables[c].arity = std::max(2, mx + 1);
        }
    }
    try {
        d.validate();
    } catch (const InvalidData& e) {
        throw ParseError(fmt::format("csv: {}", e.what()));
    }
    return d;
}

inline void write_csv(std::ostream& out, const DiscreteDataset& d) {
    for (std::size_t c = 0; c < d.variables.size(); ++c)
        out << (c ? "," : "") << d.variables[c].name;
    out << '\n';
    for (const auto& row : d.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const Metrics& m) {
    return {{"skeleton_precision", m.skeleton_precision},
            {"skeleton_recall", m.skeleton_recall},
            {"skeleton_f1", m.skeleton_f1},
            {"result_edges", m.result_edges},
            {"reference_edges", m.reference_edges},
            {"shared_edges", m.shared_edges},
            {"extra_edges", m.extra_edges},
            {"missing_edges", m.missing_edges},
            {"orientation_agreement", m.orientation_agreement}};
}

inline json to_json(const SepsetTable& t) {
    json arr = json::array();
    for (const auto& [pair, s] : t.entries())
        arr.push_back({{"a", pair.first}, {"b", pair.second}, {"sepset", s}});
    return arr;
}

/// Full serialization of a run; identical runs serialize identically.
inline json to_json(const RunResult& r) {
    return {{"k", r.k},
            {"backend", r.backend},
            {"skeleton", to_json(r.skeleton)},
            {"closure", to_json(r.closure)},
            {"poipg", to_json(r.poipg)},
            {"oriented", to_json(r.oriented)},
            {"dag", to_json(r.dag)},
            {"removal_order", r.removal_order},
            {"sepsets", to_json(r.sepsets)},
            {"trace", [&] {
                 json arr = json::array();
                 for (const auto& e : r.trace)
                     arr.push_back({{"step", e.step}, {"nodes", e.nodes}, {"before", e.before}, {"after", e.after}});
                 return arr;
             }()}};
}

}  // namespace rkcia

#endif
