#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rkcia/graph.hpp"
#include "rkcia/paths.hpp"
#include "test_support.hpp"

using namespace rkcia;
using rkcia::testing::make_vars;

namespace {

constexpr NodeId A = 0, B = 1, C = 2, D = 3, M = 4;

MixedGraph directed(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
    MixedGraph g(make_vars(n));
    for (auto [x, y] : edges)
        g.add_edge(x, y, Mark::Tail, Mark::Arrow);
    return g;
}

}  // namespace

TEST(Mark, GlyphsRoundTrip) {
    for (Mark m : {Mark::Tail, Mark::Arrow, Mark::Circle}) {
        EXPECT_EQ(mark_from_glyph(mark_glyph(m, true), true), m);
        EXPECT_EQ(mark_from_glyph(mark_glyph(m, false), false), m);
        EXPECT_EQ(parse_mark(mark_name(m)), m);
    }
    EXPECT_EQ(edge_glyphs(Mark::Circle, Mark::Arrow), "o->");
    EXPECT_EQ(edge_glyphs(Mark::Arrow, Mark::Arrow), "<->");
    EXPECT_EQ(edge_glyphs(Mark::Tail, Mark::Arrow), "-->");
    EXPECT_FALSE(parse_mark("head").has_value());
}

TEST(Dag, RejectsCyclesSelfLoopsAndDuplicates) {
    Dag g(make_vars(3));
    g.add_edge(A, B);
    g.add_edge(B, C);
    EXPECT_THROW(g.add_edge(C, A), InvalidGraph);
    EXPECT_THROW(g.add_edge(A, A), InvalidGraph);
    EXPECT_THROW(g.add_edge(A, B), InvalidGraph);
    EXPECT_EQ(g.topological_order(), (std::vector<NodeId>{A, B, C}));
}

TEST(Variable, RejectsBadIndicesAndArity) {
    auto vars = make_vars(2);
    vars[1].index = 5;
    EXPECT_THROW(Dag{vars}, InvalidGraph);
    vars = make_vars(2);
    vars[0].arity = 1;
    EXPECT_THROW(MixedGraph{vars}, InvalidGraph);
}

TEST(MixedGraph, GetMarkOnCompleteGraph) {
    auto g = MixedGraph::complete(make_vars(3));
    EXPECT_EQ(get_mark(g, A, B), Mark::Circle);
    g.remove_edge(A, C);
    EXPECT_FALSE(get_mark(g, A, C).has_value());
    EXPECT_FALSE(get_mark(g, A, A).has_value());
}

TEST(MixedGraph, SetMarkRefinesCirclesOnly) {
    auto g = MixedGraph::complete(make_vars(2));
    EXPECT_TRUE(g.set_mark(B, A, Mark::Arrow));  // o->
    EXPECT_EQ(g.mark(A, B), Mark::Circle);
    EXPECT_TRUE(g.set_mark(A, B, Mark::Tail));  // ->
    EXPECT_EQ(g.mark(A, B), Mark::Tail);
    EXPECT_EQ(g.mark(B, A), Mark::Arrow);
    EXPECT_FALSE(g.set_mark(A, B, Mark::Tail));
    EXPECT_THROW(g.set_mark(A, B, Mark::Circle), IllegalRemark);
    EXPECT_THROW(g.set_mark(B, A, Mark::Tail), IllegalRemark);

    MixedGraph h(make_vars(3));
    EXPECT_THROW(h.set_mark(A, B, Mark::Arrow), EdgeAbsent);
}

TEST(MixedGraph, Neighbors) {
    auto g = MixedGraph::complete(make_vars(3));
    EXPECT_EQ(neighbors(g, B), (NodeSet{A, C}));
    g.remove_edge(A, B);
    EXPECT_EQ(neighbors(g, A), (NodeSet{C}));
    MixedGraph h(make_vars(2));
    EXPECT_TRUE(neighbors(h, A).empty());
}

TEST(MixedGraph, OneEdgePerPair) {
    MixedGraph g(make_vars(2));
    g.add_edge(A, B, Mark::Circle, Mark::Circle);
    EXPECT_THROW(g.add_edge(B, A, Mark::Tail, Mark::Arrow), InvalidGraph);
}

TEST(MixedGraph, ConstraintsAreSymmetricAndNeedEdges) {
    auto g = MixedGraph::complete(make_vars(3));
    g.remove_edge(A, C);
    EXPECT_TRUE(g.add_constraint(A, B, C));
    EXPECT_TRUE(g.has_constraint(C, B, A));
    EXPECT_FALSE(g.add_constraint(C, B, A));
    EXPECT_TRUE(g.is_constraint_midpoint(B));
    EXPECT_FALSE(g.is_constraint_midpoint(A));
    EXPECT_THROW(g.add_constraint(B, A, C), InvalidGraph);
    g.isolate(A);
    EXPECT_TRUE(g.constraints().empty());
    EXPECT_TRUE(g.adjacent(B, C));
}

TEST(Paths, IsCollider) {
    MixedGraph g(make_vars(3));
    g.add_edge(A, B, Mark::Circle, Mark::Arrow);
    g.add_edge(B, C, Mark::Arrow, Mark::Arrow);
    EXPECT_TRUE(is_collider(g, A, B, C));
    EXPECT_TRUE(is_collider(g, C, B, A));

    auto chain = directed(3, {{A, B}, {B, C}});
    EXPECT_FALSE(is_collider(chain, A, B, C));

    MixedGraph open(make_vars(3));
    open.add_edge(A, B, Mark::Tail, Mark::Arrow);
    EXPECT_FALSE(is_collider(open, A, B, C));
}

TEST(Paths, DirectedPathUsesOnlyFullyOrientedEdges) {
    auto g = directed(3, {{A, B}, {B, C}});
    EXPECT_TRUE(has_directed_path(g, A, C));
    EXPECT_FALSE(has_directed_path(g, C, A));

    MixedGraph h(make_vars(3));
    h.add_edge(A, B, Mark::Circle, Mark::Arrow);
    h.add_edge(B, C, Mark::Tail, Mark::Arrow);
    EXPECT_FALSE(has_directed_path(h, A, C));
    EXPECT_TRUE(has_directed_path(h, B, C));
}

TEST(Paths, DirectedPathMatchesMatrixClosure) {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + trial % 9;
        const auto g = rkcia::testing::random_mixed_graph(rng, n, 0.4);
        const auto closure = rkcia::testing::arrow_closure(g);
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = 0; b < n; ++b)
                if (a != b)
                    ASSERT_EQ(has_directed_path(g, a, b), closure[a][b]) << "trial " << trial;
    }
}

// A *-> D <-* M, D -> B, M - B, A and B nonadjacent: path A, D, M, B.
TEST(Paths, MinimalDefiniteDiscriminatingPath) {
    MixedGraph g(make_vars(5));
    g.add_edge(A, D, Mark::Circle, Mark::Arrow);
    g.add_edge(D, M, Mark::Arrow, Mark::Circle);
    g.add_edge(D, B, Mark::Tail, Mark::Arrow);
    g.add_edge(M, B, Mark::Circle, Mark::Circle);
    const auto paths = find_definite_discriminating_paths(g, A, B, M);
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(paths[0], (Path{A, D, M, B}));
    EXPECT_TRUE(rkcia::testing::is_ddp(g, paths[0], M));

    // D no longer a parent of B: no path qualifies.
    MixedGraph h(make_vars(5));
    h.add_edge(A, D, Mark::Circle, Mark::Arrow);
    h.add_edge(D, M, Mark::Arrow, Mark::Circle);
    h.add_edge(D, B, Mark::Arrow, Mark::Arrow);
    h.add_edge(M, B, Mark::Circle, Mark::Circle);
    EXPECT_TRUE(find_definite_discriminating_paths(h, A, B, M).empty());
}

TEST(Paths, NoDiscriminatingPathOnChainOrAdjacentEnds) {
    auto chain = directed(4, {{A, B}, {B, C}, {C, D}});
    for (NodeId m : {B, C})
        EXPECT_TRUE(find_definite_discriminating_paths(chain, A, D, m).empty());

    MixedGraph g(make_vars(5));
    g.add_edge(A, D, Mark::Circle, Mark::Arrow);
    g.add_edge(D, M, Mark::Arrow, Mark::Circle);
    g.add_edge(D, B, Mark::Tail, Mark::Arrow);
    g.add_edge(M, B, Mark::Circle, Mark::Circle);
    g.add_edge(A, B, Mark::Circle, Mark::Circle);
    EXPECT_TRUE(find_definite_discriminating_paths(g, A, B, M).empty());
}

TEST(Paths, DiscriminatingPathsMatchExhaustiveEnumeration) {
    std::mt19937_64 rng(77);
    std::discrete_distribution<int> mark_dist({3, 6, 1});  // tail, arrow, circle
    std::bernoulli_distribution edge(0.5), cons(0.3);
    std::size_t nonempty = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 4 + trial % 4;
        MixedGraph g(make_vars(n));
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (edge(rng))
                    g.add_edge(a, b, static_cast<Mark>(mark_dist(rng)), static_cast<Mark>(mark_dist(rng)));
        for (NodeId mid = 0; mid < n; ++mid) {
            const auto nb = g.neighbors(mid);
            for (std::size_t i = 0; i < nb.size(); ++i)
                for (std::size_t j = i + 1; j < nb.size(); ++j)
                    if (cons(rng))
                        g.add_constraint(nb[i], mid, nb[j]);
        }
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = 0; b < n; ++b)
                for (NodeId m = 0; m < n; ++m) {
                    if (a == b || m == a || m == b)
                        continue;
                    auto found = find_definite_discriminating_paths(g, a, b, m);
                    std::vector<Path> expected;
                    for (const auto& p : rkcia::testing::all_simple_paths(g, a, b))
                        if (rkcia::testing::is_ddp(g, p, m))
                            expected.push_back(p);
                    std::sort(found.begin(), found.end());
                    std::sort(expected.begin(), expected.end());
                    ASSERT_EQ(found, expected) << "trial " << trial << " a=" << a << " b=" << b << " m=" << m;
                    nonempty += !found.empty();
                }
    }
    EXPECT_GT(nonempty, 20u);
}
