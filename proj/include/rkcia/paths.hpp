#ifndef RKCIA_PATHS_HPP
#define RKCIA_PATHS_HPP

#include <deque>
#include <optional>
#include <vector>

#include "rkcia/graph.hpp"

namespace rkcia {

using Path = std::vector<NodeId>;

inline std::optional<Mark> get_mark(const MixedGraph& g, NodeId at, NodeId toward) { return g.mark(at, toward); }

inline NodeSet neighbors(const MixedGraph& g, NodeId a) { return g.neighbors(a); }

inline bool has_arrow_at(const MixedGraph& g, NodeId at, NodeId from) { return g.mark(at, from) == Mark::Arrow; }

/// Edge from -> to with a tail at `from` and an arrow at `to`.
inline bool is_directed_edge(const MixedGraph& g, NodeId from, NodeId to) {
    return g.mark(from, to) == Mark::Tail && g.mark(to, from) == Mark::Arrow;
}

inline bool is_collider(const MixedGraph& g, NodeId a, NodeId b, NodeId c) {
    return has_arrow_at(g, b, a) && has_arrow_at(g, b, c);
}

/// Witnessed by a stored constraint or by a tail at `b` on either edge.
inline bool is_definite_noncollider(const MixedGraph& g, NodeId a, NodeId b, NodeId c) {
    if (!g.adjacent(a, b) || !g.adjacent(b, c))
        return false;
    return g.has_constraint(a, b, c) || g.mark(b, a) == Mark::Tail || g.mark(b, c) == Mark::Tail;
}

/// Path of fully oriented edges a -> ... -> b. Partially oriented edges do
/// not count.
inline bool has_directed_path(const MixedGraph& g, NodeId a, NodeId b) {
    std::vector<bool> seen(g.size());
    std::deque<NodeId> queue{a};
    seen[a] = true;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId w : g.neighbors(v)) {
            if (seen[w] || !is_directed_edge(g, v, w))
                continue;
            if (w == b)
                return true;
            seen[w] = true;
            queue.push_back(w);
        }
    }
    return false;
}

namespace detail {

// Depth-first enumeration of definite discriminating paths from `a` to `b`
// for `m`. Vertices between a and m must be entered with an arrowhead from
// the a side; vertices between m and b with an arrowhead from the b side.
// Each such vertex is a collider (and then a parent of the far endpoint) or
// a definite non-collider (and then has an arrowhead from the far endpoint).
class DdpSearch {
public:
    DdpSearch(const MixedGraph& g, NodeId a, NodeId b, NodeId m) : g_(g), a_(a), b_(b), m_(m), on_path_(g.size()) {}

    std::vector<Path> run() {
        if (g_.adjacent(a_, b_))
            return {};
        path_.push_back(a_);
        on_path_[a_] = true;
        extend();
        return std::move(found_);
    }

private:
    bool passed_m() const { return on_path_[m_]; }

    // Status of interior vertex v (not m) once both its path neighbours are known.
    bool interior_ok(NodeId prev, NodeId v, NodeId next, bool before_m) const {
        NodeId far = before_m ? b_ : a_;
        if (!g_.adjacent(v, far))
            return false;
        if (is_collider(g_, prev, v, next))
            return is_directed_edge(g_, v, far);
        return is_definite_noncollider(g_, prev, v, next) && has_arrow_at(g_, v, far);
    }

    void extend() {
        NodeId v = path_.back();
        for (NodeId w : g_.neighbors(v)) {
            if (on_path_[w])
                continue;
            if (w == b_ && !passed_m())
                continue;
            if (path_.size() >= 2) {
                NodeId prev = path_[path_.size() - 2];
                if (v != m_) {
                    bool before_m = !passed_m();
                    if (!before_m && !has_arrow_at(g_, v, w))
                        continue;
                    if (!interior_ok(prev, v, w, before_m))
                        continue;
                }
            }
            if (!passed_m() && w != m_) {
                // Between a and m: arrowhead at w from the a side, and w
                // must touch b.
                if (!has_arrow_at(g_, w, v) || !g_.adjacent(w, b_))
                    continue;
            } else if (passed_m() && w != b_) {
                if (!g_.adjacent(w, a_))
                    continue;
            }
            path_.push_back(w);
            if (w == b_) {
                found_.push_back(path_);
            } else {
                on_path_[w] = true;
                extend();
                on_path_[w] = false;
            }
            path_.pop_back();
        }
    }

    const MixedGraph& g_;
    NodeId a_, b_, m_;
    std::vector<bool> on_path_;
    Path path_;
    std::vector<Path> found_;
};

}  // namespace detail

/// All definite discriminating paths between a and b for m, in depth-first
/// discovery order with ascending neighbour iteration.
inline std::vector<Path> find_definite_discriminating_paths(const MixedGraph& g, NodeId a, NodeId b, NodeId m) {
    if (a == b || m == a || m == b)
        return {};
    return detail::DdpSearch(g, a, b, m).run();
}

}  // namespace rkcia

#endif
