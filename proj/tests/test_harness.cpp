#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "rkcia/harness.hpp"
#include "test_support.hpp"

using namespace rkcia;
using rkcia::testing::make_dag;
using rkcia::testing::make_vars;

namespace {

RandomDagOptions options(std::size_t nv, std::size_t nh, double p, std::uint64_t seed) {
    RandomDagOptions o;
    o.n_visible = nv;
    o.n_hidden = nh;
    o.edge_prob = p;
    o.seed = seed;
    return o;
}

ParamDag with_cpts(Dag g, std::vector<std::vector<double>> tables) {
    ParamDag p{g, {}};
    for (NodeId v = 0; v < g.size(); ++v)
        p.cpts.push_back({g.parents(v), g.node(v).arity, tables[v]});
    return p;
}

}  // namespace

TEST(RandomDag, EdgeProbabilityExtremes) {
    EXPECT_EQ(random_dag(options(5, 0, 0.0, 1)).edge_count(), 0u);
    const auto full = random_dag(options(3, 0, 1.0, 1));
    EXPECT_EQ(full.edge_count(), 3u);
    EXPECT_TRUE(full.has_edge(0, 1) && full.has_edge(0, 2) && full.has_edge(1, 2));
}

TEST(RandomDag, SeededAndNamed) {
    const auto a = random_dag(options(6, 2, 0.4, 42));
    EXPECT_EQ(a, random_dag(options(6, 2, 0.4, 42)));
    EXPECT_EQ(a.node(0).name, "X0");
    EXPECT_EQ(a.node(6).name, "H0");
    EXPECT_TRUE(a.node(7).hidden);
    EXPECT_THROW(random_dag(options(0, 0, 0.3, 1)), Error);
    EXPECT_THROW(random_dag(options(3, 0, 1.5, 1)), Error);
}

TEST(RandomDag, ConfoundersAreParentlessWithTwoVisibleChildren) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto g = random_dag(options(5, 3, 0.1, seed));
        for (NodeId h = 5; h < 8; ++h) {
            EXPECT_TRUE(g.parents(h).empty());
            EXPECT_GE(g.children(h).size(), 2u);
            for (NodeId c : g.children(h))
                EXPECT_FALSE(g.node(c).hidden);
        }
    }
}

TEST(RandomDag, UnrestrictedModeUsesForwardOrder) {
    auto o = options(4, 2, 1.0, 3);
    o.hidden_mode = HiddenMode::Unrestricted;
    const auto g = random_dag(o);
    EXPECT_EQ(g.edge_count(), 15u);
    EXPECT_FALSE(g.parents(5).empty());
}

TEST(RandomCpts, RowsAreFlooredDistributions) {
    const auto g = random_dag(options(5, 1, 0.5, 7));
    const auto p = random_cpts(g, 11, 0.05);
    EXPECT_EQ(p.cpts.size(), g.size());
    for (const auto& c : p.cpts) {
        ASSERT_EQ(c.probs.size() % c.arity, 0u);
        for (std::size_t r = 0; r < c.probs.size(); r += c.arity) {
            const double sum = std::accumulate(c.probs.begin() + r, c.probs.begin() + r + c.arity, 0.0);
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
        for (double x : c.probs)
            EXPECT_GE(x, 0.05);
    }
    const auto q = random_cpts(g, 11, 0.05);
    for (NodeId v = 0; v < g.size(); ++v)
        EXPECT_EQ(p.cpts[v].probs, q.cpts[v].probs);
    EXPECT_THROW(random_cpts(g, 1, 0.5), Error);
}

TEST(Marginalize, SingleNode) {
    const auto d = marginalize(with_cpts(make_dag(1, {}), {{0.3, 0.7}}));
    ASSERT_EQ(d.table.size(), 2u);
    EXPECT_DOUBLE_EQ(d.table[0], 0.3);
    EXPECT_DOUBLE_EQ(d.table[1], 0.7);
}

TEST(Marginalize, DeterministicConfounder) {
    // A <- H -> B with H at index 2, A = H, B = H.
    const auto g = make_dag(3, {{2, 0}, {2, 1}}, {2});
    const auto d = marginalize(with_cpts(g, {{1, 0, 0, 1}, {1, 0, 0, 1}, {0.5, 0.5}}));
    ASSERT_EQ(d.variables.size(), 2u);
    EXPECT_EQ(d.table, (std::vector<double>{0.5, 0.0, 0.0, 0.5}));
}

TEST(Marginalize, SumsToOneAndIsPositive) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = random_dag(options(6, 2, 0.4, seed));
        const auto d = marginalize(random_cpts(g, seed));
        EXPECT_NEAR(std::accumulate(d.table.begin(), d.table.end(), 0.0), 1.0, 1e-12);
        for (double x : d.table)
            EXPECT_GT(x, 0.0);
        EXPECT_NO_THROW(d.validate());
    }
}

TEST(Marginalize, RefusesHugeStateSpaces) {
    const auto g = random_dag(options(21, 0, 0.0, 1));
    EXPECT_THROW(marginalize(random_cpts(g, 1)), StateSpaceTooLarge);
}

TEST(ForwardSample, MarginalsConvergeToExact) {
    const auto g = random_dag(options(5, 1, 0.5, 9));
    const auto p = random_cpts(g, 10);
    const auto exact = marginalize(p);
    const std::size_t n = 100000;
    const auto data = forward_sample(p, n, 12);
    ASSERT_EQ(data.rows.size(), n);
    ASSERT_EQ(data.variables.size(), 5u);
    // exact single-variable marginals, last variable fastest in the table
    for (NodeId v = 0; v < 5; ++v) {
        const std::size_t stride = 1u << (4 - v);
        double p1 = 0.0;
        for (std::size_t i = 0; i < exact.table.size(); ++i)
            if ((i / stride) % 2 == 1)
                p1 += exact.table[i];
        double count = 0.0;
        for (const auto& row : data.rows)
            count += row[v];
        EXPECT_NEAR(count / n, p1, 4.0 / std::sqrt(double(n))) << "variable " << v;
    }
    EXPECT_EQ(forward_sample(p, 50, 3).rows, forward_sample(p, 50, 3).rows);
}

TEST(FaithfulCpts, DetectsCancellation) {
    // A -> B with identical rows: a d-connected pair with zero dependence.
    const auto g = make_dag(2, {{0, 1}});
    const auto flat = with_cpts(g, {{0.5, 0.5}, {0.3, 0.7, 0.3, 0.7}});
    EXPECT_TRUE(near_unfaithful_query(flat).has_value());
    const auto ok = with_cpts(g, {{0.5, 0.5}, {0.3, 0.7, 0.7, 0.3}});
    EXPECT_FALSE(near_unfaithful_query(ok).has_value());
    const auto p = faithful_cpts(random_dag(options(5, 1, 0.4, 2)), 3);
    EXPECT_FALSE(near_unfaithful_query(p).has_value());
}

TEST(Compare, IdenticalAndEmpty) {
    const auto ref = to_mixed(make_dag(3, {{0, 1}, {1, 2}}));
    const auto same = compare(ref, ref);
    EXPECT_EQ(same.skeleton_precision, 1.0);
    EXPECT_EQ(same.skeleton_recall, 1.0);
    EXPECT_EQ(same.orientation_agreement, 1.0);
    const auto empty = compare(MixedGraph(ref.nodes()), ref);
    EXPECT_EQ(empty.skeleton_recall, 0.0);
    EXPECT_EQ(empty.missing_edges, 2u);
}

TEST(Compare, OneExtraEdgeGivesThreeQuartersPrecision) {
    const auto ref = to_mixed(make_dag(4, {{0, 1}, {1, 2}, {2, 3}}));
    const auto res = to_mixed(make_dag(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
    const auto m = compare(res, ref);
    EXPECT_DOUBLE_EQ(m.skeleton_precision, 0.75);
    EXPECT_DOUBLE_EQ(m.skeleton_recall, 1.0);
    EXPECT_EQ(m.extra_edges, 1u);
    EXPECT_EQ(m.shared_edges, 3u);
}

TEST(Compare, SwapExchangesPrecisionAndRecall) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = to_mixed(random_dag(options(6, 0, 0.4, seed)));
        const auto b = to_mixed(random_dag(options(6, 0, 0.4, seed + 100)));
        const auto ab = compare(a, b), ba = compare(b, a);
        EXPECT_DOUBLE_EQ(ab.skeleton_precision, ba.skeleton_recall);
        EXPECT_DOUBLE_EQ(ab.skeleton_recall, ba.skeleton_precision);
        EXPECT_EQ(ab.extra_edges, ba.missing_edges);
        EXPECT_EQ(ab.shared_edges, ba.shared_edges);
    }
}

TEST(Compare, NodeSetsMustMatch) {
    const auto a = to_mixed(make_dag(3, {}));
    const auto b = to_mixed(make_dag(4, {}));
    EXPECT_THROW(compare(a, b), NodeSetMismatch);
}

TEST(Compare, DagResultsProjectHiddenParents) {
    const auto dag = make_dag(3, {{2, 0}, {2, 1}}, {2});
    const auto mixed = to_mixed(dag);
    ASSERT_TRUE(mixed.adjacent(0, 1));
    EXPECT_EQ(mixed.mark(0, 1), Mark::Arrow);
    EXPECT_EQ(mixed.mark(1, 0), Mark::Arrow);
    EXPECT_EQ(compare(dag, mixed).orientation_agreement, 1.0);
}

TEST(Properties, ChainAndConfounderPass) {
    const auto chain = make_dag(3, {{0, 1}, {1, 2}});
    for (std::size_t k : {0u, 1u})
        EXPECT_TRUE(verify_structural_properties(chain, k).ok()) << format_report(verify_structural_properties(chain, k));
    const auto conf = make_dag(3, {{2, 0}, {2, 1}}, {2});
    const auto rep = verify_structural_properties(conf, 1);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.edges, 1u);
}

TEST(Properties, FlippedMarkIsReported) {
    const auto chain = make_dag(3, {{0, 1}, {1, 2}});
    auto pi = rk_including_path_graph(chain, 1);
    // 1 -> 2 becomes 1 <- 2
    MixedGraph bad(pi.nodes());
    for (const Edge& e : pi.edges()) {
        const bool flip = e.a == 1 && e.b == 2;
        bad.add_edge(e.a, e.b, flip ? e.mark_b : e.mark_a, flip ? e.mark_a : e.mark_b);
    }
    const auto rep = check_properties(chain, bad, 1);
    std::set<std::string> props;
    for (const auto& v : rep.violations)
        props.insert(v.property);
    EXPECT_EQ(props, (std::set<std::string>{"collider-sepset", "directed-path"})) << format_report(rep);
}

TEST(Properties, MissingEdgeAndCircleAreReported) {
    const auto g = make_dag(2, {{0, 1}});
    MixedGraph none(rk_including_path_graph(g, 1).nodes());
    EXPECT_EQ(check_properties(g, none, 1).violations.at(0).property, "edge-existence");
    MixedGraph circle(none.nodes());
    circle.add_edge(0, 1, Mark::Circle, Mark::Arrow);
    EXPECT_EQ(check_properties(g, circle, 1).violations.at(0).property, "full-orientation");
    MixedGraph backwards(none.nodes());
    backwards.add_edge(0, 1, Mark::Arrow, Mark::Tail);
    EXPECT_EQ(check_properties(g, backwards, 1).violations.at(0).property, "directed-path");
}

TEST(Properties, RandomModelsPass) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto g = random_dag(options(5 + seed % 3, seed % 4, 0.3, seed));
        for (std::size_t k : {1u, 2u}) {
            const auto rep = verify_structural_properties(g, k);
            EXPECT_TRUE(rep.ok()) << "seed " << seed << "\n" << format_report(rep);
        }
    }
}
