#ifndef RKCIA_HARNESS_HPP
#define RKCIA_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rkcia/algorithm.hpp"
#include "rkcia/dsep.hpp"
#include "rkcia/graph.hpp"
#include "rkcia/indep.hpp"
#include "rkcia/paths.hpp"
#include "rkcia/subsets.hpp"

namespace rkcia {

class StateSpaceTooLarge : public Error {
public:
    using Error::Error;
};

class NodeSetMismatch : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Random models

enum class HiddenMode {
    ConfoundersOnly,  // hidden nodes are parentless with >= 2 visible children
    Unrestricted,     // hidden nodes are simply the last nodes of the forward DAG
};

struct RandomDagOptions {
    std::size_t n_visible = 5;
    std::size_t n_hidden = 0;
    double edge_prob = 0.3;
    std::uint64_t seed = 0;
    int arity = 2;
    HiddenMode hidden_mode = HiddenMode::ConfoundersOnly;
};

/// Visible nodes X0..X{n-1} come first, hidden nodes H0.. after them. Every
/// forward visible pair (i < j) gets i -> j with probability edge_prob.
inline Dag random_dag(const RandomDagOptions& opt) {
    if (opt.n_visible < 1)
        throw Error("random_dag needs at least one visible node");
    if (!(opt.edge_prob >= 0.0 && opt.edge_prob <= 1.0))
        throw Error("edge probability must lie in [0, 1]");
    std::mt19937_64 rng(opt.seed);
    std::bernoulli_distribution coin(opt.edge_prob);
    const std::size_t n = opt.n_visible + opt.n_hidden;
    std::vector<Variable> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        const bool hidden = i >= opt.n_visible;
        nodes.push_back({i, hidden ? fmt::format("H{}", i - opt.n_visible) : fmt::format("X{}", i), opt.arity, hidden});
    }
    Dag g(std::move(nodes));
    const std::size_t forward_nodes = opt.hidden_mode == HiddenMode::Unrestricted ? n : opt.n_visible;
    for (NodeId i = 0; i < forward_nodes; ++i)
        for (NodeId j = i + 1; j < forward_nodes; ++j)
            if (coin(rng))
                g.add_edge(i, j);
    if (opt.hidden_mode == HiddenMode::ConfoundersOnly) {
        for (NodeId h = opt.n_visible; h < n; ++h) {
            for (NodeId v = 0; v < opt.n_visible; ++v)
                if (coin(rng))
                    g.add_edge(h, v);
            const std::size_t want = std::min<std::size_t>(2, opt.n_visible);
            std::uniform_int_distribution<NodeId> pick(0, opt.n_visible - 1);
            while (g.children(h).size() < want) {
                const NodeId v = pick(rng);
                if (!g.has_edge(h, v))
                    g.add_edge(h, v);
            }
        }
    }
    return g;
}

/// Conditional probability table of one node. Rows are indexed by the
/// parent configuration (last parent fastest), each row has `arity` entries.
struct Cpt {
    NodeSet parents;
    int arity = 2;
    std::vector<double> probs;

    std::size_t row_index(const std::vector<int>& state, const std::vector<Variable>& vars) const {
        std::size_t r = 0;
        for (NodeId p : parents)
            r = r * vars[p].arity + state[p];
        return r;
    }
};

struct ParamDag {
    Dag dag;
    std::vector<Cpt> cpts;  // indexed by node
};

/// Rows drawn uniformly from the simplex, then mixed with the uniform row so
/// that every entry is at least min_prob.
inline ParamDag random_cpts(const Dag& dag, std::uint64_t seed, double min_prob = 0.05) {
    int max_arity = 0;
    for (const auto& v : dag.nodes())
        max_arity = std::max(max_arity, v.arity);
    if (!(min_prob >= 0.0) || min_prob * max_arity >= 1.0)
        throw Error(fmt::format("min_prob {} too large for arity {}", min_prob, max_arity));
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    ParamDag out{dag, {}};
    for (NodeId v = 0; v < dag.size(); ++v) {
        Cpt cpt{dag.parents(v), dag.node(v).arity, {}};
        std::size_t rows = 1;
        for (NodeId p : cpt.parents)
            rows *= dag.node(p).arity;
        const double spread = 1.0 - cpt.arity * min_prob;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(cpt.arity);
            double total = 0.0;
            for (double& x : row)
                total += (x = expo(rng));
            for (double& x : row)
                cpt.probs.push_back(min_prob + spread * x / total);
        }
        out.cpts.push_back(std::move(cpt));
    }
    return out;
}

inline constexpr std::size_t max_marginal_states = std::size_t{1} << 20;

/// Exact joint over the visible variables, by summing the full product of
/// CPTs over every hidden configuration.
inline ExactDistribution marginalize(const ParamDag& p) {
    const auto& vars = p.dag.nodes();
    std::size_t total = 1;
    for (const auto& v : vars) {
        total *= v.arity;
        if (total > max_marginal_states)
            throw StateSpaceTooLarge(fmt::format("joint state space exceeds {} states", max_marginal_states));
    }
    ExactDistribution out{visible_variables(p.dag), {}};
    const NodeSet vis = p.dag.visible();
    std::size_t vis_states = 1;
    for (NodeId v : vis)
        vis_states *= vars[v].arity;
    out.table.assign(vis_states, 0.0);
    std::vector<int> state(vars.size(), 0);
    for (std::size_t s = 0; s < total; ++s) {
        double prob = 1.0;
        for (NodeId v = 0; v < vars.size(); ++v) {
            const Cpt& cpt = p.cpts[v];
            prob *= cpt.probs[cpt.row_index(state, vars) * cpt.arity + state[v]];
        }
        std::size_t idx = 0;
        for (NodeId v : vis)
            idx = idx * vars[v].arity + state[v];
        out.table[idx] += prob;
        for (std::size_t i = vars.size(); i-- > 0;) {
            if (++state[i] < vars[i].arity)
                break;
            state[i] = 0;
        }
    }
    return out;
}

inline constexpr std::size_t max_brute_force_visible = 9;

inline constexpr double faithfulness_margin = 1e-6;
inline constexpr int max_cpt_retries = 3;

/// Describes the first d-connected query (a, b | S) whose conditional mutual
/// information in the exact visible margin is at most `margin`, i.e. a
/// dependence the parameters nearly cancel. Empty if there is none, or if
/// the model is too large to check.
inline std::optional<std::string> near_unfaithful_query(const ParamDag& p, double margin = faithfulness_margin) {
    const NodeSet vis = p.dag.visible();
    if (vis.size() > max_brute_force_visible)
        return std::nullopt;
    std::optional<ExactBackend> exact;
    try {
        exact.emplace(marginalize(p));
    } catch (const StateSpaceTooLarge&) {
        return std::nullopt;
    }
    const NodeSet all = [&] {
        NodeSet v(vis.size());
        for (NodeId i = 0; i < v.size(); ++i)
            v[i] = i;
        return v;
    }();
    for (NodeId a = 0; a < vis.size(); ++a)
        for (NodeId b = a + 1; b < vis.size(); ++b) {
            std::optional<std::string> found;
            first_subset(set_minus(all, {a, b}), vis.size(), [&](const NodeSet& s) {
                NodeSet mapped;
                for (NodeId v : s)
                    mapped.push_back(vis[v]);
                if (d_separated(p.dag, vis[a], vis[b], mapped))
                    return false;
                const double cmi = exact->conditional_mutual_information(a, b, s);
                if (cmi > margin)
                    return false;
                found = fmt::format("I({};{}|{}) = {:.3g} although d-connected", p.dag.node(vis[a]).name,
                                    p.dag.node(vis[b]).name, detail::format_set(s), cmi);
                return true;
            });
            if (found)
                return found;
        }
    return std::nullopt;
}

/// random_cpts, redrawn with a derived seed (at most max_cpt_retries
/// times) while the parameters nearly cancel a structural dependence.
inline ParamDag faithful_cpts(const Dag& dag, std::uint64_t seed, double min_prob = 0.05) {
    ParamDag p = random_cpts(dag, seed, min_prob);
    for (int retry = 1; retry <= max_cpt_retries; ++retry) {
        const auto why = near_unfaithful_query(p);
        if (!why)
            return p;
        const std::uint64_t next = seed + static_cast<std::uint64_t>(retry) * 0x9E3779B97F4A7C15ULL;
        spdlog::warn("CPT draw with seed {} is nearly unfaithful ({}); redrawing with seed {}", seed, *why, next);
        p = random_cpts(dag, next, min_prob);
    }
    if (const auto why = near_unfaithful_query(p))
        spdlog::warn("keeping a nearly unfaithful CPT draw after {} retries ({})", max_cpt_retries, *why);
    return p;
}

/// Ancestral sampling; hidden columns are dropped.
inline DiscreteDataset forward_sample(const ParamDag& p, std::size_t n, std::uint64_t seed) {
    const auto& vars = p.dag.nodes();
    const auto order = p.dag.topological_order();
    const NodeSet vis = p.dag.visible();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DiscreteDataset out{visible_variables(p.dag), {}};
    out.rows.reserve(n);
    std::vector<int> state(vars.size(), 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (NodeId v : order) {
            const Cpt& cpt = p.cpts[v];
            const double* row = &cpt.probs[cpt.row_index(state, vars) * cpt.arity];
            double u = unif(rng);
            int x = 0;
            while (x + 1 < cpt.arity && u >= row[x])
                u -= row[x++];
            state[v] = x;
        }
        std::vector<int> visible_row;
        visible_row.reserve(vis.size());
        for (NodeId v : vis)
            visible_row.push_back(state[v]);
        out.rows.push_back(std::move(visible_row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural comparison

struct Metrics {
    double skeleton_precision = 1.0;
    double skeleton_recall = 1.0;
    double skeleton_f1 = 1.0;
    std::size_t result_edges = 0;
    std::size_t reference_edges = 0;
    std::size_t shared_edges = 0;
    std::size_t extra_edges = 0;
    std::size_t missing_edges = 0;
    double orientation_agreement = 1.0;  // over shared edges, both marks equal
};

/// Projects a DAG onto its visible nodes. Visible-visible edges become
/// tail/arrow edges; every pair of visible children of a parentless hidden
/// node is joined by a bidirected edge unless already adjacent.
inline MixedGraph to_mixed(const Dag& d) {
    const NodeSet vis = d.visible();
    std::vector<NodeId> pos(d.size(), d.size());
    for (NodeId i = 0; i < vis.size(); ++i)
        pos[vis[i]] = i;
    MixedGraph g(visible_variables(d));
    for (auto [p, c] : d.edges())
        if (pos[p] < d.size() && pos[c] < d.size())
            g.add_edge(pos[p], pos[c], Mark::Tail, Mark::Arrow);
    for (NodeId h = 0; h < d.size(); ++h) {
        if (!d.node(h).hidden)
            continue;
        if (!d.parents(h).empty())
            throw InvalidGraph("only parentless hidden nodes can be projected to bidirected edges");
        NodeSet kids;
        for (NodeId c : d.children(h))
            if (pos[c] < d.size())
                kids.push_back(pos[c]);
        for (std::size_t i = 0; i < kids.size(); ++i)
            for (std::size_t j = i + 1; j < kids.size(); ++j)
                if (!g.adjacent(kids[i], kids[j]))
                    g.add_edge(kids[i], kids[j], Mark::Arrow, Mark::Arrow);
    }
    return g;
}

inline Metrics compare(const MixedGraph& result, const MixedGraph& reference) {
    if (result.size() != reference.size())
        throw NodeSetMismatch(fmt::format("result has {} nodes, reference has {}", result.size(), reference.size()));
    for (NodeId i = 0; i < result.size(); ++i)
        if (result.node(i).name != reference.node(i).name)
            throw NodeSetMismatch(fmt::format("node {} is '{}' in result but '{}' in reference", i,
                                              result.node(i).name, reference.node(i).name));
    Metrics m;
    std::size_t agree = 0;
    for (NodeId a = 0; a < result.size(); ++a)
        for (NodeId b = a + 1; b < result.size(); ++b) {
            const bool in_r = result.adjacent(a, b), in_ref = reference.adjacent(a, b);
            m.result_edges += in_r;
            m.reference_edges += in_ref;
            if (in_r && in_ref) {
                ++m.shared_edges;
                agree += result.mark(a, b) == reference.mark(a, b) && result.mark(b, a) == reference.mark(b, a);
            } else if (in_r) {
                ++m.extra_edges;
            } else if (in_ref) {
                ++m.missing_edges;
            }
        }
    const auto ratio = [](std::size_t num, std::size_t den) { return den == 0 ? 1.0 : double(num) / double(den); };
    m.skeleton_precision = ratio(m.shared_edges, m.result_edges);
    m.skeleton_recall = ratio(m.shared_edges, m.reference_edges);
    const double s = m.skeleton_precision + m.skeleton_recall;
    m.skeleton_f1 = s == 0.0 ? 0.0 : 2.0 * m.skeleton_precision * m.skeleton_recall / s;
    m.orientation_agreement = ratio(agree, m.shared_edges);
    return m;
}

inline Metrics compare(const Dag& result, const MixedGraph& reference) { return compare(to_mixed(result), reference); }

/// Aligned-column table; `label` names the row.
inline std::string metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
    std::string out = fmt::format("{:<12} {:>9} {:>9} {:>9} {:>6} {:>6} {:>7} {:>7} {:>11}\n", "run", "precision",
                                  "recall", "f1", "edges", "ref", "extra", "missing", "orientation");
    for (const auto& [label, m] : rows)
        out += fmt::format("{:<12} {:>9.4f} {:>9.4f} {:>9.4f} {:>6} {:>6} {:>7} {:>7} {:>11.4f}\n", label,
                           m.skeleton_precision, m.skeleton_recall, m.skeleton_f1, m.result_edges, m.reference_edges,
                           m.extra_edges, m.missing_edges, m.orientation_agreement);
    return out;
}

// ---------------------------------------------------------------------------
// Structural properties of the r(k)-including path graph

struct PropertyViolation {
    std::string property;
    std::vector<NodeId> witness;  // visible positions
    std::string detail;
};

struct PropertyReport {
    std::size_t k = 0;
    std::size_t edges = 0;
    std::vector<PropertyViolation> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks a candidate including path graph `pi` (over the visible nodes of
/// g) against g by brute force:
///  - edge-existence: adjacency iff no visible set of size <= k separates
///  - full-orientation: every edge is -> or <->
///  - directed-path: a -> b in pi implies a directed path a => b in g
///  - collider-sepset: a *-> b <-* c, a and c nonadjacent, implies no
///    separator of a, c of size <= k contains b
///  - noncollider-sepset: the same triple with b a non-collider implies no
///    separator of size <= k omits b
///  - acyclicity: the -> edges of pi form no directed cycle
inline PropertyReport check_properties(const Dag& g, const MixedGraph& pi, std::size_t k) {
    const NodeSet vis = g.visible();
    if (vis.size() > max_brute_force_visible)
        throw Error(fmt::format("brute-force property check supports at most {} visible nodes",
                                max_brute_force_visible));
    if (pi.size() != vis.size())
        throw NodeSetMismatch(fmt::format("graph has {} nodes, model has {} visible", pi.size(), vis.size()));
    PropertyReport rep;
    rep.k = k;
    rep.edges = pi.edge_count();
    const auto name = [&](NodeId i) { return pi.node(i).name; };
    const auto add = [&](std::string prop, std::vector<NodeId> w, std::string detail) {
        rep.violations.push_back({std::move(prop), std::move(w), std::move(detail)});
    };
    const auto names_of = [&](const NodeSet& dag_nodes) {
        std::vector<std::string> out;
        for (NodeId v : dag_nodes)
            out.push_back(g.node(v).name);
        return fmt::format("{{{}}}", fmt::join(out, ","));
    };

    for (NodeId a = 0; a < pi.size(); ++a)
        for (NodeId b = a + 1; b < pi.size(); ++b) {
            auto sep = find_separator(g, vis[a], vis[b], k, set_minus(vis, {vis[a], vis[b]}));
            if (pi.adjacent(a, b) && sep)
                add("edge-existence", {a, b},
                    fmt::format("{} and {} are adjacent but {} separates them", name(a), name(b), names_of(*sep)));
            else if (!pi.adjacent(a, b) && !sep)
                add("edge-existence", {a, b},
                    fmt::format("{} and {} are nonadjacent but no set of size <= {} separates them", name(a),
                                name(b), k));
        }

    for (const Edge& e : pi.edges()) {
        const bool marks_ok = (e.mark_a != Mark::Circle && e.mark_b != Mark::Circle) &&
                              !(e.mark_a == Mark::Tail && e.mark_b == Mark::Tail);
        if (!marks_ok)
            add("full-orientation", {e.a, e.b},
                fmt::format("edge {} {} {}", name(e.a), edge_glyphs(e.mark_a, e.mark_b), name(e.b)));
        for (auto [x, y] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            if (!is_directed_edge(pi, x, y))
                continue;
            if (!g.reaches(vis[x], vis[y]))
                add("directed-path", {x, y},
                    fmt::format("{} -> {} but no directed path in the model", name(x), name(y)));
            if (has_directed_path(pi, y, x))
                add("acyclicity", {x, y}, fmt::format("{} -> {} closes a directed cycle", name(x), name(y)));
        }
    }

    for (NodeId b = 0; b < pi.size(); ++b) {
        const NodeSet nb = pi.neighbors(b);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const NodeId a = nb[i], c = nb[j];
                if (pi.adjacent(a, c))
                    continue;
                const NodeSet rest = set_minus(vis, {vis[a], vis[b], vis[c]});
                if (is_collider(pi, a, b, c)) {
                    if (k == 0)
                        continue;
                    auto s = first_subset(rest, k - 1, [&](const NodeSet& s) {
                        NodeSet with_b = s;
                        with_b.insert(std::lower_bound(with_b.begin(), with_b.end(), vis[b]), vis[b]);
                        return d_separated(g, vis[a], vis[c], with_b);
                    });
                    if (s) {
                        s->insert(std::lower_bound(s->begin(), s->end(), vis[b]), vis[b]);
                        add("collider-sepset", {a, b, c},
                            fmt::format("{} is a collider between {} and {} but {} separates them", name(b), name(a),
                                        name(c), names_of(*s)));
                    }
                } else {
                    auto s = first_subset(rest, k, [&](const NodeSet& s) { return d_separated(g, vis[a], vis[c], s); });
                    if (s)
                        add("noncollider-sepset", {a, b, c},
                            fmt::format("{} is a non-collider between {} and {} but {} separates them without it",
                                        name(b), name(a), name(c), names_of(*s)));
                }
            }
    }
    return rep;
}

inline PropertyReport verify_structural_properties(const Dag& g, std::size_t k) {
    return check_properties(g, rk_including_path_graph(g, k), k);
}

inline std::string format_report(const PropertyReport& rep) {
    std::string out = fmt::format("k={} edges={} violations={}\n", rep.k, rep.edges, rep.violations.size());
    for (const auto& v : rep.violations)
        out += fmt::format("  [{}] {}\n", v.property, v.detail);
    return out;
}

}  // namespace rkcia

#endif
