#ifndef RKCIA_DSEP_HPP
#define RKCIA_DSEP_HPP

#include <deque>
#include <optional>
#include <vector>

#include "rkcia/graph.hpp"
#include "rkcia/subsets.hpp"

namespace rkcia {

/// Nodes of `s` together with all their ancestors, as a membership mask.
inline std::vector<bool> ancestral_mask(const Dag& g, const NodeSet& s) {
    std::vector<bool> mask(g.size());
    std::vector<NodeId> stack(s.begin(), s.end());
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (mask[v])
            continue;
        mask[v] = true;
        for (NodeId p : g.parents(v))
            stack.push_back(p);
    }
    return mask;
}

namespace detail {

struct Reach {
    std::vector<bool> via_parent;  // arrived along an edge pointing into the node
    std::vector<bool> via_child;   // arrived along an edge leaving the node
};

// Bayes-ball reachability from `from` given `s`. Trails never pass through
// `from` or `stop` as interior vertices. Colliders are open iff they are in
// An(s); non-colliders are open iff they are outside s.
inline Reach reach(const Dag& g, NodeId from, NodeId stop, const NodeSet& s) {
    const auto in_s = [&](NodeId v) { return contains(s, v); };
    const auto anc = ancestral_mask(g, s);
    Reach r{std::vector<bool>(g.size()), std::vector<bool>(g.size())};
    // (node, arrived_via_parent)
    std::deque<std::pair<NodeId, bool>> queue;
    const auto push = [&](NodeId v, bool down) {
        if (v == from)
            return;
        auto& seen = down ? r.via_parent : r.via_child;
        if (seen[v])
            return;
        seen[v] = true;
        if (v != stop)
            queue.emplace_back(v, down);
    };
    for (NodeId c : g.children(from))
        push(c, true);
    for (NodeId p : g.parents(from))
        push(p, false);
    while (!queue.empty()) {
        auto [v, down] = queue.front();
        queue.pop_front();
        if (down) {
            if (!in_s(v))
                for (NodeId c : g.children(v))
                    push(c, true);
            if (anc[v])
                for (NodeId p : g.parents(v))
                    push(p, false);
        } else if (!in_s(v)) {
            for (NodeId p : g.parents(v))
                push(p, false);
            for (NodeId c : g.children(v))
                push(c, true);
        }
    }
    return r;
}

}  // namespace detail

/// True iff every trail between a and b is blocked by s.
inline bool d_separated(const Dag& g, NodeId a, NodeId b, const NodeSet& s) {
    auto r = detail::reach(g, a, b, s);
    return !r.via_parent[b] && !r.via_child[b];
}

/// True iff some trail from `from` to `to`, active given s, ends with an
/// edge pointing into `to`.
inline bool active_trail_into(const Dag& g, NodeId from, NodeId to, const NodeSet& s) {
    return detail::reach(g, from, to, s).via_parent[to];
}

/// First separator of a and b drawn from `candidates` with at most k
/// members, enumerated by ascending size then lexicographically.
inline std::optional<NodeSet> find_separator(const Dag& g, NodeId a, NodeId b, std::size_t k,
                                             const NodeSet& candidates) {
    return first_subset(candidates, k, [&](const NodeSet& s) { return d_separated(g, a, b, s); });
}

/// Positions of the visible variables, re-indexed 0..m-1 in original order.
inline std::vector<Variable> visible_variables(const Dag& g) {
    std::vector<Variable> out;
    for (NodeId v : g.visible()) {
        Variable var = g.node(v);
        var.index = out.size();
        out.push_back(std::move(var));
    }
    return out;
}

/// Brute-force r(k)-including path graph over the visible variables of g.
/// A and B are adjacent iff no visible set of size <= k d-separates them.
/// The end at A is a tail iff some visible set S' of size <= k-1 (excluding
/// A and B) blocks every trail from B that enters A; otherwise an arrow.
inline MixedGraph rk_including_path_graph(const Dag& g, std::size_t k) {
    const NodeSet vis = g.visible();
    MixedGraph pi(visible_variables(g));
    const auto tail_at = [&](NodeId at, NodeId other) {
        if (k == 0)
            return false;
        const NodeSet cand = set_minus(vis, {at, other});
        return first_subset(cand, k - 1, [&](const NodeSet& s) { return !active_trail_into(g, other, at, s); })
            .has_value();
    };
    for (NodeId i = 0; i < vis.size(); ++i) {
        for (NodeId j = i + 1; j < vis.size(); ++j) {
            const NodeId a = vis[i], b = vis[j];
            if (find_separator(g, a, b, k, set_minus(vis, {a, b})))
                continue;
            pi.add_edge(i, j, tail_at(a, b) ? Mark::Tail : Mark::Arrow, tail_at(b, a) ? Mark::Tail : Mark::Arrow);
        }
    }
    return pi;
}

}  // namespace rkcia

#endif
