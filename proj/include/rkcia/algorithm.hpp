#ifndef RKCIA_ALGORITHM_HPP
#define RKCIA_ALGORITHM_HPP

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rkcia/graph.hpp"
#include "rkcia/indep.hpp"
#include "rkcia/paths.hpp"
#include "rkcia/subsets.hpp"

namespace rkcia {

class MissingSepset : public Error {
public:
    MissingSepset(NodeId a, NodeId b)
        : Error(fmt::format("nonadjacent pair ({}, {}) has no recorded separator", a, b)) {}
};

/// Step F found no legally removable node. Carries the remaining graph.
class NoRemovableNode : public Error {
public:
    NoRemovableNode(MixedGraph remaining, NodeSet present)
        : Error(fmt::format("no legally removable node among {} remaining nodes", present.size())),
          remaining_(std::move(remaining)), present_(std::move(present)) {}

    const MixedGraph& remaining() const { return remaining_; }
    const NodeSet& present() const { return present_; }

private:
    MixedGraph remaining_;
    NodeSet present_;
};

/// Separators recorded when edges are removed, keyed by unordered pair.
class SepsetTable {
public:
    void record(NodeId a, NodeId b, NodeSet s) {
        std::sort(s.begin(), s.end());
        table_[key(a, b)] = std::move(s);
    }

    const NodeSet* find(NodeId a, NodeId b) const {
        auto it = table_.find(key(a, b));
        return it == table_.end() ? nullptr : &it->second;
    }

    const NodeSet& at(NodeId a, NodeId b) const {
        if (const NodeSet* s = find(a, b))
            return *s;
        throw MissingSepset(a, b);
    }

    bool separates_with(NodeId a, NodeId b, NodeId m) const { return contains(at(a, b), m); }

    std::size_t size() const { return table_.size(); }
    const std::map<std::pair<NodeId, NodeId>, NodeSet>& entries() const { return table_; }

    friend bool operator==(const SepsetTable&, const SepsetTable&) = default;

private:
    static std::pair<NodeId, NodeId> key(NodeId a, NodeId b) { return {std::min(a, b), std::max(a, b)}; }
    std::map<std::pair<NodeId, NodeId>, NodeSet> table_;
};

struct TraceEvent {
    std::string step;  // B, C, D1..D4, E, F
    std::vector<NodeId> nodes;
    std::string before;
    std::string after;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Optional per-rule log. Disabled traces drop events.
class Trace {
public:
    Trace() = default;
    Trace(const std::vector<Variable>* names, bool enabled) : names_(names), enabled_(enabled) {}

    bool enabled() const { return enabled_; }

    void add(std::string step, std::vector<NodeId> nodes, std::string before, std::string after) {
        if (enabled_)
            events_.push_back({std::move(step), std::move(nodes), std::move(before), std::move(after)});
    }

    std::string name(NodeId v) const { return names_ ? (*names_)[v].name : std::to_string(v); }

    std::string set_names(const NodeSet& s) const {
        std::vector<std::string> parts;
        for (NodeId v : s)
            parts.push_back(name(v));
        return fmt::format("{{{}}}", fmt::join(parts, ","));
    }

    std::vector<TraceEvent> take() { return std::move(events_); }

private:
    const std::vector<Variable>* names_ = nullptr;
    bool enabled_ = false;
    std::vector<TraceEvent> events_;
};

/// Tab-separated, one line per event: step, nodes, old marks, new marks.
inline std::string format_trace(const std::vector<TraceEvent>& events, const std::vector<Variable>& vars) {
    std::string out;
    for (const auto& e : events) {
        std::vector<std::string> names;
        for (NodeId v : e.nodes)
            names.push_back(vars.at(v).name);
        out += fmt::format("{}\t{}\t{}\t{}\n", e.step, fmt::join(names, ","), e.before, e.after);
    }
    return out;
}

struct SkeletonOptions {
    bool adjacency_restricted = false;
    unsigned jobs = 1;
};

struct Skeleton {
    MixedGraph graph;
    SepsetTable sepsets;
};

/// Steps A and B: start from the complete o-o graph over the backend's
/// variables and remove every edge whose endpoints are separated by some
/// set of at most k other variables. The first separator found (ascending
/// size, lexicographic) is recorded.
///
/// With `jobs > 1` the per-pair searches run concurrently; removals are
/// applied afterwards in canonical pair order, so the result does not depend
/// on scheduling. The adjacency-restricted mode draws candidates from the
/// current neighbourhoods and is inherently sequential.
inline Skeleton step_ab_skeleton(const IndependenceBackend& backend, std::size_t k, const SkeletonOptions& opts,
                                 Trace& trace) {
    const auto& vars = backend.variables();
    Skeleton out{MixedGraph::complete(vars), {}};
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId a = 0; a < vars.size(); ++a)
        for (NodeId b = a + 1; b < vars.size(); ++b)
            pairs.emplace_back(a, b);

    NodeSet all(vars.size());
    for (NodeId i = 0; i < all.size(); ++i)
        all[i] = i;

    const auto search = [&](NodeId a, NodeId b, const NodeSet& candidates) {
        return first_subset(candidates, k, [&](const NodeSet& s) { return backend.independent(a, b, s); });
    };
    const auto remove = [&](NodeId a, NodeId b, NodeSet s) {
        trace.add("B", {a, b}, "o-o", "removed sepset=" + trace.set_names(s));
        out.graph.remove_edge(a, b);
        out.sepsets.record(a, b, std::move(s));
    };

    if (opts.adjacency_restricted) {
        for (auto [a, b] : pairs) {
            NodeSet cand;
            for (NodeId v = 0; v < vars.size(); ++v)
                if (v != a && v != b && (out.graph.adjacent(a, v) || out.graph.adjacent(b, v)))
                    cand.push_back(v);
            if (auto s = search(a, b, cand))
                remove(a, b, std::move(*s));
        }
        return out;
    }

    std::vector<std::optional<NodeSet>> found(pairs.size());
    const auto work = [&](std::size_t i) {
        auto [a, b] = pairs[i];
        found[i] = search(a, b, set_minus(all, {a, b}));
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(pairs.size())));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        for (unsigned j = 0; j < jobs; ++j)
            workers.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < pairs.size();)
                    work(i);
            });
    }
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (found[i])
            remove(pairs[i].first, pairs[i].second, std::move(*found[i]));
    return out;
}

namespace detail {

inline std::string triple_marks(const MixedGraph& g, NodeId a, NodeId b, NodeId c) {
    return edge_glyphs(*g.mark(a, b), *g.mark(b, a)) + "," + edge_glyphs(*g.mark(b, c), *g.mark(c, b));
}

inline std::string pair_marks(const MixedGraph& g, NodeId a, NodeId b) { return edge_glyphs(*g.mark(a, b), *g.mark(b, a)); }

struct MarkChange {
    NodeId at;
    NodeId toward;
    Mark mark;
};

// Applies all changes or none. A change that would overwrite a Tail/Arrow
// is a conflict: thrown in strict mode, otherwise the instance is skipped.
inline bool apply_changes(MixedGraph& g, const std::vector<MarkChange>& changes, bool strict, const char* rule) {
    bool any = false;
    for (const auto& c : changes) {
        const Mark cur = *g.mark(c.at, c.toward);
        if (cur == c.mark)
            continue;
        if (cur != Mark::Circle) {
            const auto msg = fmt::format("{}: cannot change {} at {} on edge {}-{} to {}", rule, mark_name(cur),
                                         g.node(c.at).name, g.node(c.at).name, g.node(c.toward).name,
                                         mark_name(c.mark));
            if (strict)
                throw IllegalRemark(msg);
            spdlog::warn("{} (conflicting instance skipped)", msg);
            return false;
        }
        any = true;
    }
    for (const auto& c : changes)
        g.set_mark(c.at, c.toward, c.mark);
    return any;
}

}  // namespace detail

/// Step C: for every unshielded triple a-b-c, orient a *-> b <-* c when b is
/// outside Sepset(a, c), otherwise record the non-collider constraint.
inline void step_c_colliders(MixedGraph& g, const SepsetTable& sepsets, Trace& trace) {
    for (NodeId b = 0; b < g.size(); ++b) {
        const NodeSet nb = g.neighbors(b);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const NodeId a = nb[i], c = nb[j];
                if (g.adjacent(a, c))
                    continue;
                const std::string before = detail::triple_marks(g, a, b, c);
                if (!sepsets.separates_with(a, c, b)) {
                    g.set_mark(b, a, Mark::Arrow);
                    g.set_mark(b, c, Mark::Arrow);
                    trace.add("C", {a, b, c}, before, detail::triple_marks(g, a, b, c));
                } else {
                    g.add_constraint(a, b, c);
                    trace.add("C", {a, b, c}, before, before + " noncollider");
                }
            }
        }
    }
}

namespace detail {

// Each rule applies its first applicable instance in canonical order and
// reports whether the graph changed.

// D1: directed path a => b and edge a *-* b gives an arrowhead at b.
inline bool rule_d1(MixedGraph& g, bool strict, Trace& trace) {
    for (NodeId a = 0; a < g.size(); ++a)
        for (NodeId b : g.neighbors(a)) {
            if (g.mark(b, a) == Mark::Arrow || !has_directed_path(g, a, b))
                continue;
            const auto before = pair_marks(g, a, b);
            if (apply_changes(g, {{b, a, Mark::Arrow}}, strict, "D1")) {
                trace.add("D1", {a, b}, before, pair_marks(g, a, b));
                return true;
            }
        }
    return false;
}

// D2: collider a *-> b <-* c with a, c nonadjacent, d adjacent to b and
// constraint a-d-c: orient b <-* d.
inline bool rule_d2(MixedGraph& g, bool strict, Trace& trace) {
    for (NodeId b = 0; b < g.size(); ++b) {
        const NodeSet nb = g.neighbors(b);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const NodeId a = nb[i], c = nb[j];
                if (g.adjacent(a, c) || !is_collider(g, a, b, c))
                    continue;
                for (NodeId d : nb) {
                    if (d == a || d == c || !g.has_constraint(a, d, c) || g.mark(b, d) == Mark::Arrow)
                        continue;
                    const auto before = pair_marks(g, d, b);
                    if (apply_changes(g, {{b, d, Mark::Arrow}}, strict, "D2")) {
                        trace.add("D2", {a, b, c, d}, before, pair_marks(g, d, b));
                        return true;
                    }
                }
            }
    }
    return false;
}

// D3: definite discriminating path between a and b for m, with p and r the
// neighbours of m on the path forming a triangle.
inline bool rule_d3(MixedGraph& g, const SepsetTable& sepsets, bool strict, Trace& trace) {
    for (NodeId a = 0; a < g.size(); ++a)
        for (NodeId b = a + 1; b < g.size(); ++b) {
            if (g.adjacent(a, b))
                continue;
            for (NodeId m = 0; m < g.size(); ++m) {
                if (m == a || m == b)
                    continue;
                for (const Path& u : find_definite_discriminating_paths(g, a, b, m)) {
                    const auto pos = std::find(u.begin(), u.end(), m) - u.begin();
                    const NodeId p = u[pos - 1], r = u[pos + 1];
                    if (!g.adjacent(p, r))
                        continue;
                    const auto before = triple_marks(g, p, m, r);
                    if (sepsets.separates_with(a, b, m)) {
                        if (g.has_constraint(p, m, r))
                            continue;
                        if (is_collider(g, p, m, r)) {
                            const auto msg = fmt::format("D3: {} is already a collider between {} and {}",
                                                         g.node(m).name, g.node(p).name, g.node(r).name);
                            if (strict)
                                throw IllegalRemark(msg);
                            spdlog::warn("{} (conflicting instance skipped)", msg);
                            continue;
                        }
                        g.add_constraint(p, m, r);
                        trace.add("D3", {p, m, r}, before, before + " noncollider");
                        return true;
                    }
                    if (g.has_constraint(p, m, r)) {
                        const auto msg = fmt::format("D3: {} is constrained non-collider between {} and {}",
                                                     g.node(m).name, g.node(p).name, g.node(r).name);
                        if (strict)
                            throw IllegalRemark(msg);
                        spdlog::warn("{} (conflicting instance skipped)", msg);
                        continue;
                    }
                    if (apply_changes(g, {{m, p, Mark::Arrow}, {m, r, Mark::Arrow}}, strict, "D3")) {
                        trace.add("D3", {p, m, r}, before, triple_marks(g, p, m, r));
                        return true;
                    }
                }
            }
        }
    return false;
}

// D4: p *-> m, m constrained non-collider between p and r: orient m -> r.
inline bool rule_d4(MixedGraph& g, bool strict, Trace& trace) {
    for (NodeId m = 0; m < g.size(); ++m) {
        const NodeSet nb = g.neighbors(m);
        for (NodeId p : nb) {
            if (g.mark(m, p) != Mark::Arrow)
                continue;
            for (NodeId r : nb) {
                if (r == p || !g.has_constraint(p, m, r))
                    continue;
                if (g.mark(m, r) == Mark::Tail && g.mark(r, m) == Mark::Arrow)
                    continue;
                const auto before = triple_marks(g, p, m, r);
                if (apply_changes(g, {{m, r, Mark::Tail}, {r, m, Mark::Arrow}}, strict, "D4")) {
                    trace.add("D4", {p, m, r}, before, triple_marks(g, p, m, r));
                    return true;
                }
            }
        }
    }
    return false;
}

}  // namespace detail

/// Step D: applies D1..D4 in priority order, restarting from D1 after every
/// change, until a full scan changes nothing.
inline void step_d_closure(MixedGraph& g, const SepsetTable& sepsets, Trace& trace, bool strict = true) {
    while (detail::rule_d1(g, strict, trace) || detail::rule_d2(g, strict, trace) ||
           detail::rule_d3(g, sepsets, strict, trace) || detail::rule_d4(g, strict, trace)) {
    }
}

/// Step E: every a o-> b becomes a -> b.
inline void step_e(MixedGraph& g, Trace& trace) {
    for (const Edge& e : g.edges()) {
        const auto before = edge_glyphs(e.mark_a, e.mark_b);
        if (e.mark_a == Mark::Circle && e.mark_b == Mark::Arrow)
            g.set_mark(e.a, e.b, Mark::Tail);
        else if (e.mark_b == Mark::Circle && e.mark_a == Mark::Arrow)
            g.set_mark(e.b, e.a, Mark::Tail);
        else
            continue;
        trace.add("E", {e.a, e.b}, before, detail::pair_marks(g, e.a, e.b));
    }
}

/// No non-collider constraint has `a` as its midpoint and no edge leaves
/// `a` with an arrowhead at the far end.
inline bool legally_removable(const MixedGraph& g, NodeId a) {
    if (g.is_constraint_midpoint(a))
        return false;
    for (NodeId b : g.neighbors(a))
        if (g.mark(b, a) == Mark::Arrow)
            return false;
    return true;
}

/// Expands every a <-> b into a fresh parentless hidden node H_i with
/// H_i -> a and H_i -> b. Requires a graph without circle marks.
inline Dag to_dag(const MixedGraph& g) {
    Dag d(g.nodes());
    std::size_t hidden = 0;
    for (const Edge& e : g.edges()) {
        if (e.mark_a == Mark::Tail && e.mark_b == Mark::Arrow)
            d.add_edge(e.a, e.b);
        else if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Tail)
            d.add_edge(e.b, e.a);
        else if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Arrow) {
            const NodeId h = d.add_node({0, fmt::format("H_{}", hidden++), 2, true});
            d.add_edge(h, e.a);
            d.add_edge(h, e.b);
        } else {
            throw InvalidGraph(fmt::format("edge {} {} {} is not fully oriented", g.node(e.a).name,
                                           edge_glyphs(e.mark_a, e.mark_b), g.node(e.b).name));
        }
    }
    return d;
}

struct Extension {
    MixedGraph oriented;               // pi with every circle resolved
    std::vector<NodeId> removal_order;  // reverse topological order
    Dag dag;                            // bidirected edges expanded
};

/// Step F: repeatedly remove the lowest-index legally removable node from a
/// working copy; each o-o edge removed with node a is oriented a <- b in the
/// result. Bidirected edges stand for hidden common causes, not edges out of
/// either endpoint, so they are left out of the working copy.
inline Extension step_f_extend(const MixedGraph& pi, Trace& trace) {
    Extension out{pi, {}, {}};
    MixedGraph work = pi;
    for (const Edge& e : pi.edges())
        if (e.mark_a == Mark::Arrow && e.mark_b == Mark::Arrow)
            work.remove_edge(e.a, e.b);
    NodeSet present(pi.size());
    for (NodeId i = 0; i < present.size(); ++i)
        present[i] = i;
    while (!present.empty()) {
        auto it = std::find_if(present.begin(), present.end(), [&](NodeId a) { return legally_removable(work, a); });
        if (it == present.end())
            throw NoRemovableNode(work, present);
        const NodeId a = *it;
        for (NodeId b : work.neighbors(a)) {
            if (work.mark(a, b) == Mark::Circle && work.mark(b, a) == Mark::Circle) {
                const auto before = detail::pair_marks(out.oriented, a, b);
                out.oriented.set_mark(a, b, Mark::Arrow);
                out.oriented.set_mark(b, a, Mark::Tail);
                trace.add("F", {a, b}, before, detail::pair_marks(out.oriented, a, b));
            }
        }
        trace.add("F", {a}, "present", "removed");
        work.isolate(a);
        present.erase(it);
        out.removal_order.push_back(a);
    }
    out.dag = to_dag(out.oriented);
    return out;
}

struct RunConfig {
    std::size_t k = 1;
    bool adjacency_restricted = false;
    bool trace = false;
    unsigned jobs = 1;
    // Throw on conflicting orientations; otherwise log and skip them.
    bool strict = true;
};

struct RunResult {
    std::size_t k = 0;
    std::string backend;
    MixedGraph skeleton;  // after step B
    MixedGraph closure;   // after step D
    MixedGraph poipg;     // after step E
    MixedGraph oriented;  // after step F, bidirected edges kept
    Dag dag;              // after step F, bidirected edges expanded
    std::vector<NodeId> removal_order;
    SepsetTable sepsets;
    std::vector<TraceEvent> trace;
};

/// Largest meaningful separator bound for n variables (unrestricted CI).
inline std::size_t unbounded_k(std::size_t n) { return n >= 2 ? n - 2 : 0; }

/// Runs steps A through F with separator sets of at most config.k members.
inline RunResult run(const RunConfig& config, const IndependenceBackend& backend) {
    MemoizedBackend memo(backend);
    const auto& vars = backend.variables();
    Trace trace(&vars, config.trace);
    RunResult r;
    r.k = config.k;
    r.backend = backend.descriptor();

    auto skel = step_ab_skeleton(memo, config.k, {config.adjacency_restricted, config.jobs}, trace);
    r.skeleton = skel.graph;
    r.sepsets = std::move(skel.sepsets);

    MixedGraph g = std::move(skel.graph);
    step_c_colliders(g, r.sepsets, trace);
    step_d_closure(g, r.sepsets, trace, config.strict);
    r.closure = g;
    step_e(g, trace);
    r.poipg = g;

    auto ext = step_f_extend(r.poipg, trace);
    r.oriented = std::move(ext.oriented);
    r.dag = std::move(ext.dag);
    r.removal_order = std::move(ext.removal_order);
    r.trace = trace.take();
    return r;
}

/// The unrestricted CI variant: k = |V| - 2.
inline RunResult run_ci(RunConfig config, const IndependenceBackend& backend) {
    config.k = unbounded_k(backend.variables().size());
    return run(config, backend);
}

}  // namespace rkcia

#endif
