// Test-only oracles. Everything here is written independently of the
// library's algorithms: exhaustive enumeration instead of reachability,
// matrix closure instead of search.
#ifndef RKCIA_TESTS_SUPPORT_HPP
#define RKCIA_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "rkcia/graph.hpp"
#include "rkcia/paths.hpp"

namespace rkcia::testing {

inline std::vector<Variable> make_vars(std::size_t n, bool hidden_tail = false, std::size_t n_hidden = 0) {
    std::vector<Variable> v;
    for (std::size_t i = 0; i < n; ++i) {
        const bool hidden = hidden_tail && i >= n - n_hidden;
        v.push_back({i, std::string(1, static_cast<char>('A' + i)), 2, hidden});
    }
    return v;
}

inline Dag make_dag(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges,
                    std::initializer_list<NodeId> hidden = {}) {
    auto vars = make_vars(n);
    for (NodeId h : hidden)
        vars[h].hidden = true;
    Dag g(vars);
    for (auto [p, c] : edges)
        g.add_edge(p, c);
    return g;
}

/// Random DAG over n nodes with edges i -> j (i < j) after a random
/// relabelling, so index order is not topological.
inline Dag random_test_dag(std::mt19937_64& rng, std::size_t n, double p) {
    std::vector<NodeId> perm(n);
    for (NodeId i = 0; i < n; ++i)
        perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(p);
    Dag g(make_vars(n));
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (coin(rng))
                g.add_edge(perm[i], perm[j]);
    return g;
}

inline MixedGraph random_mixed_graph(std::mt19937_64& rng, std::size_t n, double p) {
    std::bernoulli_distribution coin(p);
    std::uniform_int_distribution<int> mark(0, 2);
    MixedGraph g(make_vars(n));
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (coin(rng))
                g.add_edge(a, b, static_cast<Mark>(mark(rng)), static_cast<Mark>(mark(rng)));
    return g;
}

// --- d-separation by exhaustive trail enumeration --------------------------

inline std::vector<bool> descendants_or_self(const Dag& g, NodeId v) {
    std::vector<bool> d(g.size());
    std::function<void(NodeId)> go = [&](NodeId x) {
        if (d[x])
            return;
        d[x] = true;
        for (NodeId c : g.children(x))
            go(c);
    };
    go(v);
    return d;
}

inline bool adjacent_in(const Dag& g, NodeId x, NodeId y) { return g.has_edge(x, y) || g.has_edge(y, x); }

/// Calls visit(trail) for every simple trail from a to b in the skeleton.
inline void for_each_trail(const Dag& g, NodeId a, NodeId b, const std::function<void(const Path&)>& visit) {
    Path path{a};
    std::vector<bool> used(g.size());
    used[a] = true;
    std::function<void()> go = [&] {
        NodeId v = path.back();
        for (NodeId w = 0; w < g.size(); ++w) {
            if (used[w] || !adjacent_in(g, v, w))
                continue;
            path.push_back(w);
            if (w == b) {
                visit(path);
            } else {
                used[w] = true;
                go();
                used[w] = false;
            }
            path.pop_back();
        }
    };
    go();
}

inline bool trail_active(const Dag& g, const Path& t, const NodeSet& s) {
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const NodeId u = t[i - 1], v = t[i], w = t[i + 1];
        const bool collider = g.has_edge(u, v) && g.has_edge(w, v);
        if (collider) {
            const auto desc = descendants_or_self(g, v);
            if (std::none_of(s.begin(), s.end(), [&](NodeId x) { return desc[x]; }))
                return false;
        } else if (std::find(s.begin(), s.end(), v) != s.end()) {
            return false;
        }
    }
    return true;
}

inline bool brute_d_separated(const Dag& g, NodeId a, NodeId b, const NodeSet& s) {
    bool active = false;
    for_each_trail(g, a, b, [&](const Path& t) { active = active || trail_active(g, t, s); });
    return !active;
}

inline bool brute_active_trail_into(const Dag& g, NodeId from, NodeId to, const NodeSet& s) {
    bool found = false;
    for_each_trail(g, from, to, [&](const Path& t) {
        found = found || (g.has_edge(t[t.size() - 2], to) && trail_active(g, t, s));
    });
    return found;
}

/// All subsets of `items` as sorted vectors, via bitmasks.
inline std::vector<NodeSet> all_subsets(const NodeSet& items) {
    std::vector<NodeSet> out;
    for (std::uint32_t mask = 0; mask < (1u << items.size()); ++mask) {
        NodeSet s;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (mask & (1u << i))
                s.push_back(items[i]);
        out.push_back(std::move(s));
    }
    return out;
}

// --- directed-path closure --------------------------------------------------

/// Transitive closure of the -> relation by repeated boolean matrix squaring.
inline std::vector<std::vector<bool>> arrow_closure(const MixedGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = 0; b < n; ++b)
            r[a][b] = a != b && g.mark(a, b) == Mark::Tail && g.mark(b, a) == Mark::Arrow;
    for (std::size_t step = 1; step < n; step *= 2) {
        auto next = r;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId m = 0; m < n; ++m)
                if (r[a][m])
                    for (NodeId b = 0; b < n; ++b)
                        if (r[m][b])
                            next[a][b] = true;
        r = std::move(next);
    }
    return r;
}

// --- definite discriminating paths -----------------------------------------

/// Whole-path check of the definite-discriminating-path definition.
inline bool is_ddp(const MixedGraph& g, const Path& u, NodeId m) {
    if (u.size() < 3)
        return false;
    const NodeId a = u.front(), b = u.back();
    if (g.adjacent(a, b))
        return false;
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        if (!g.adjacent(u[i], u[i + 1]))
            return false;
    const auto it = std::find(u.begin() + 1, u.end() - 1, m);
    if (it == u.end() - 1)
        return false;
    const std::size_t j = it - u.begin();
    const auto arrow = [&](NodeId at, NodeId from) { return g.mark(at, from) == Mark::Arrow; };
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        if (i == j)
            continue;
        const NodeId prev = u[i - 1], v = u[i], next = u[i + 1];
        const bool toward_m_from_prev = i < j;
        // arrowhead at v from the neighbour farther from m
        if (toward_m_from_prev ? !arrow(v, prev) : !arrow(v, next))
            return false;
        const bool collider = arrow(v, prev) && arrow(v, next);
        const bool noncollider = g.has_constraint(prev, v, next) || g.mark(v, prev) == Mark::Tail ||
                                 g.mark(v, next) == Mark::Tail;
        const NodeId far = i < j ? b : a;
        if (collider) {
            if (!(g.mark(v, far) == Mark::Tail && g.mark(far, v) == Mark::Arrow))
                return false;
        } else if (noncollider) {
            if (g.mark(v, far) != Mark::Arrow)
                return false;
        } else {
            return false;
        }
    }
    return true;
}

/// Every simple path from a to b, in no particular order.
inline std::vector<Path> all_simple_paths(const MixedGraph& g, NodeId a, NodeId b) {
    std::vector<Path> out;
    Path path{a};
    std::vector<bool> used(g.size());
    used[a] = true;
    std::function<void()> go = [&] {
        for (NodeId w = 0; w < g.size(); ++w) {
            if (used[w] || !g.adjacent(path.back(), w))
                continue;
            path.push_back(w);
            if (w == b) {
                out.push_back(path);
            } else {
                used[w] = true;
                go();
                used[w] = false;
            }
            path.pop_back();
        }
    };
    go();
    return out;
}

}  // namespace rkcia::testing

#endif
