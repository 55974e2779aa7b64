#ifndef RKCIA_GRAPH_HPP
#define RKCIA_GRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace rkcia {

using NodeId = std::size_t;

// Sorted ascending, no duplicates.
using NodeSet = std::vector<NodeId>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
public:
    using Error::Error;
};

class EdgeAbsent : public Error {
public:
    EdgeAbsent(NodeId a, NodeId b)
        : Error("no edge between nodes " + std::to_string(a) + " and " + std::to_string(b)) {}
};

class IllegalRemark : public Error {
public:
    using Error::Error;
};

struct Variable {
    NodeId index = 0;
    std::string name;
    int arity = 2;
    bool hidden = false;

    friend bool operator==(const Variable&, const Variable&) = default;
};

inline void validate_variables(const std::vector<Variable>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].index != i)
            throw InvalidGraph("node indices must be contiguous from 0; node '" + nodes[i].name +
                               "' has index " + std::to_string(nodes[i].index) + " at position " +
                               std::to_string(i));
        if (nodes[i].arity < 2)
            throw InvalidGraph("node '" + nodes[i].name + "' has arity < 2");
    }
}

/// Directed acyclic graph over visible and hidden variables. Used both for
/// ground-truth models and for the learned network.
class Dag {
public:
    Dag() = default;

    explicit Dag(std::vector<Variable> nodes)
        : nodes_(std::move(nodes)), parents_(nodes_.size()), children_(nodes_.size()) {
        validate_variables(nodes_);
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Variable>& nodes() const { return nodes_; }
    const Variable& node(NodeId i) const { return nodes_.at(i); }

    NodeId add_node(Variable v) {
        v.index = nodes_.size();
        nodes_.push_back(std::move(v));
        parents_.emplace_back();
        children_.emplace_back();
        return nodes_.back().index;
    }

    /// Rejects self-loops, duplicates and edges that would close a cycle.
    void add_edge(NodeId parent, NodeId child) {
        check(parent);
        check(child);
        if (parent == child)
            throw InvalidGraph("self-loop on node " + nodes_[parent].name);
        if (has_edge(parent, child))
            throw InvalidGraph("duplicate edge " + nodes_[parent].name + " -> " + nodes_[child].name);
        if (reaches(child, parent))
            throw InvalidGraph("edge " + nodes_[parent].name + " -> " + nodes_[child].name +
                               " would create a directed cycle");
        insert_sorted(parents_[child], parent);
        insert_sorted(children_[parent], child);
    }

    bool has_edge(NodeId parent, NodeId child) const {
        return std::binary_search(children_.at(parent).begin(), children_.at(parent).end(), child);
    }

    const NodeSet& parents(NodeId i) const { return parents_.at(i); }
    const NodeSet& children(NodeId i) const { return children_.at(i); }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& c : children_)
            n += c.size();
        return n;
    }

    /// (parent, child) pairs ordered by parent then child.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (NodeId p = 0; p < size(); ++p)
            for (NodeId c : children_[p])
                out.emplace_back(p, c);
        return out;
    }

    /// Kahn's algorithm, lowest index first among ready nodes.
    std::vector<NodeId> topological_order() const {
        std::vector<std::size_t> indeg(size());
        for (NodeId i = 0; i < size(); ++i)
            indeg[i] = parents_[i].size();
        std::set<NodeId> ready;
        for (NodeId i = 0; i < size(); ++i)
            if (indeg[i] == 0)
                ready.insert(i);
        std::vector<NodeId> order;
        while (!ready.empty()) {
            NodeId v = *ready.begin();
            ready.erase(ready.begin());
            order.push_back(v);
            for (NodeId c : children_[v])
                if (--indeg[c] == 0)
                    ready.insert(c);
        }
        if (order.size() != size())
            throw InvalidGraph("graph contains a directed cycle");
        return order;
    }

    bool is_acyclic() const {
        try {
            topological_order();
            return true;
        } catch (const InvalidGraph&) {
            return false;
        }
    }

    NodeSet visible() const {
        NodeSet out;
        for (const auto& v : nodes_)
            if (!v.hidden)
                out.push_back(v.index);
        return out;
    }

    bool reaches(NodeId from, NodeId to) const {
        std::vector<bool> seen(size());
        std::vector<NodeId> stack{from};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (v == to)
                return true;
            if (seen[v])
                continue;
            seen[v] = true;
            for (NodeId c : children_[v])
                stack.push_back(c);
        }
        return false;
    }

    friend bool operator==(const Dag& x, const Dag& y) {
        return x.nodes_ == y.nodes_ && x.children_ == y.children_;
    }

private:
    void check(NodeId i) const {
        if (i >= size())
            throw InvalidGraph("node index " + std::to_string(i) + " out of range");
    }

    static void insert_sorted(NodeSet& s, NodeId v) { s.insert(std::lower_bound(s.begin(), s.end(), v), v); }

    std::vector<Variable> nodes_;
    std::vector<NodeSet> parents_;
    std::vector<NodeSet> children_;
};

using TrueDag = Dag;

enum class Mark : std::uint8_t { Tail, Arrow, Circle };

inline const char* mark_name(Mark m) {
    switch (m) {
    case Mark::Tail: return "tail";
    case Mark::Arrow: return "arrow";
    case Mark::Circle: return "circle";
    }
    return "?";
}

inline std::optional<Mark> parse_mark(std::string_view s) {
    if (s == "tail") return Mark::Tail;
    if (s == "arrow") return Mark::Arrow;
    if (s == "circle") return Mark::Circle;
    return std::nullopt;
}

/// Glyph for the mark at the left (`left == true`) or right end of an edge:
/// tail `-`, arrow `<` / `>`, circle `o`.
inline char mark_glyph(Mark m, bool left) {
    switch (m) {
    case Mark::Tail: return '-';
    case Mark::Arrow: return left ? '<' : '>';
    case Mark::Circle: return 'o';
    }
    return '?';
}

inline std::optional<Mark> mark_from_glyph(char c, bool left) {
    if (c == '-') return Mark::Tail;
    if (c == 'o') return Mark::Circle;
    if (c == (left ? '<' : '>')) return Mark::Arrow;
    return std::nullopt;
}

/// Three-character rendering such as "o->", "<->", "-->".
inline std::string edge_glyphs(Mark at_left, Mark at_right) {
    return {mark_glyph(at_left, true), '-', mark_glyph(at_right, false)};
}

struct Edge {
    NodeId a = 0;  // a < b
    NodeId b = 0;
    Mark mark_a = Mark::Circle;
    Mark mark_b = Mark::Circle;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Non-collider ("underline") constraint: the edges a-mid and mid-c may not
/// meet head to head at mid. Stored with a < c.
struct Constraint {
    NodeId a = 0;
    NodeId mid = 0;
    NodeId c = 0;

    static Constraint make(NodeId x, NodeId mid, NodeId y) {
        return x < y ? Constraint{x, mid, y} : Constraint{y, mid, x};
    }

    friend auto operator<=>(const Constraint&, const Constraint&) = default;
};

/// Partially oriented including path graph: edges carry a mark at each end,
/// plus a set of non-collider constraints.
class MixedGraph {
public:
    MixedGraph() = default;

    explicit MixedGraph(std::vector<Variable> nodes) : nodes_(std::move(nodes)), ends_(nodes_.size() * nodes_.size()) {
        validate_variables(nodes_);
    }

    static MixedGraph complete(std::vector<Variable> nodes, Mark m = Mark::Circle) {
        MixedGraph g(std::move(nodes));
        for (NodeId a = 0; a < g.size(); ++a)
            for (NodeId b = a + 1; b < g.size(); ++b)
                g.add_edge(a, b, m, m);
        return g;
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Variable>& nodes() const { return nodes_; }
    const Variable& node(NodeId i) const { return nodes_.at(i); }

    bool adjacent(NodeId a, NodeId b) const { return a != b && end(a, b).has_value(); }

    /// Mark at endpoint `at` of edge {at, toward}; empty when nonadjacent.
    std::optional<Mark> mark(NodeId at, NodeId toward) const {
        if (at == toward)
            return std::nullopt;
        return end(at, toward);
    }

    /// Refines one endpoint. Only a Circle may change; re-setting the
    /// current mark is a no-op. Returns whether anything changed.
    bool set_mark(NodeId at, NodeId toward, Mark m) {
        auto& slot = end(at, toward);
        if (!slot)
            throw EdgeAbsent(at, toward);
        if (*slot == m)
            return false;
        if (*slot != Mark::Circle)
            throw IllegalRemark("cannot change mark " + std::string(mark_name(*slot)) + " at " +
                                nodes_[at].name + " on edge " + nodes_[at].name + "-" + nodes_[toward].name +
                                " to " + mark_name(m));
        slot = m;
        return true;
    }

    void add_edge(NodeId a, NodeId b, Mark mark_a, Mark mark_b) {
        if (a == b)
            throw InvalidGraph("self-loop on node " + std::to_string(a));
        if (adjacent(a, b))
            throw InvalidGraph("duplicate edge " + nodes_.at(a).name + "-" + nodes_.at(b).name);
        end(a, b) = mark_a;
        end(b, a) = mark_b;
    }

    void remove_edge(NodeId a, NodeId b) {
        if (!adjacent(a, b))
            throw EdgeAbsent(a, b);
        end(a, b).reset();
        end(b, a).reset();
    }

    NodeSet neighbors(NodeId a) const {
        NodeSet out;
        for (NodeId b = 0; b < size(); ++b)
            if (adjacent(a, b))
                out.push_back(b);
        return out;
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (NodeId a = 0; a < size(); ++a)
            for (NodeId b = a + 1; b < size(); ++b)
                if (adjacent(a, b))
                    out.push_back({a, b, *end(a, b), *end(b, a)});
        return out;
    }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (NodeId a = 0; a < size(); ++a)
            for (NodeId b = a + 1; b < size(); ++b)
                n += adjacent(a, b);
        return n;
    }

    /// Returns false if the constraint was already present.
    bool add_constraint(NodeId x, NodeId mid, NodeId y) {
        if (x == y || !adjacent(x, mid) || !adjacent(mid, y))
            throw InvalidGraph("constraint " + std::to_string(x) + "-" + std::to_string(mid) + "-" +
                               std::to_string(y) + " needs both edges present");
        return constraints_.insert(Constraint::make(x, mid, y)).second;
    }

    bool has_constraint(NodeId x, NodeId mid, NodeId y) const {
        return constraints_.count(Constraint::make(x, mid, y)) > 0;
    }

    bool is_constraint_midpoint(NodeId mid) const {
        return std::any_of(constraints_.begin(), constraints_.end(),
                           [mid](const Constraint& c) { return c.mid == mid; });
    }

    const std::set<Constraint>& constraints() const { return constraints_; }

    /// Drops every edge and constraint touching `a`; the node itself stays
    /// in the index space.
    void isolate(NodeId a) {
        for (NodeId b = 0; b < size(); ++b)
            if (adjacent(a, b))
                remove_edge(a, b);
        std::erase_if(constraints_, [a](const Constraint& c) { return c.a == a || c.mid == a || c.c == a; });
    }

    friend bool operator==(const MixedGraph& x, const MixedGraph& y) {
        return x.nodes_ == y.nodes_ && x.ends_ == y.ends_ && x.constraints_ == y.constraints_;
    }

private:
    const std::optional<Mark>& end(NodeId at, NodeId toward) const {
        if (at >= size() || toward >= size())
            throw InvalidGraph("node index out of range");
        return ends_[at * size() + toward];
    }
    std::optional<Mark>& end(NodeId at, NodeId toward) {
        return const_cast<std::optional<Mark>&>(std::as_const(*this).end(at, toward));
    }

    std::vector<Variable> nodes_;
    std::vector<std::optional<Mark>> ends_;
    std::set<Constraint> constraints_;
};

inline bool contains(const NodeSet& s, NodeId v) { return std::binary_search(s.begin(), s.end(), v); }

}  // namespace rkcia

#endif
