#include <gtest/gtest.h>

#include <random>

#include "cqw/width.hpp"

using namespace cqw;

namespace {

Hypergraph example2() {
    return Hypergraph::from_names({{"X", "Y", "W"}, {"X", "Y", "L"}, {"X", "Z"}, {"Y", "Z"}, {"Z", "W", "L"}});
}

WidthOptions mode(WidthMode m) {
    WidthOptions o;
    o.mode = m;
    return o;
}

void expect_report_invariants(const Hypergraph& H, const WidthReport& r, const Rat& omega) {
    EXPECT_FALSE(check_polymatroid(r.witness).has_value());
    EXPECT_TRUE(is_edge_dominated(r.witness, H));
    if (r.classic)
        EXPECT_EQ(best_td_plan(H, r.witness).value, r.width);
    else
        EXPECT_EQ(osubw_lower_bound(H, omega, r.witness), r.width);
    EXPECT_EQ(r.plan.value, r.width);
}

}  // namespace

TEST(WidthLp, RowLayout) {
    auto T = clique_hypergraph(3);
    auto w = build_width_lp(T, {join_info(T.vertices())}, Rat(0));
    EXPECT_EQ(w.lp.num_vars, 8);
    EXPECT_EQ(w.lp.constraints.size(), 1u + 9u + 3u);
    auto sol = solve_lp(w.lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_EQ(sol.value, Rat(3, 2));  // h(V) <= rho* on the triangle
    EXPECT_FALSE(verify_certificate(w.lp, sol).has_value());
}

TEST(Subw, Examples) {
    EXPECT_EQ(subw(clique_hypergraph(3)).width, Rat(3, 2));
    EXPECT_EQ(subw(cycle_hypergraph(4)).width, Rat(3, 2));
    EXPECT_EQ(subw(Hypergraph::from_names({{"X", "Y"}})).width, Rat(1));
    auto r = subw(cycle_hypergraph(4));
    expect_report_invariants(cycle_hypergraph(4), r, Rat(3));
}

TEST(Osubw, Triangle) {
    auto T = clique_hypergraph(3);
    for (Rat w : {Rat(2), Rat(9, 4), Rat(19, 8), Rat(5, 2), Rat(3)}) {
        auto r = osubw(T, w);
        EXPECT_EQ(r.width, Rat(2) * w / (w + 1)) << w;
        expect_report_invariants(T, r, w);
    }
}

TEST(Osubw, FourCycle) {
    auto C = cycle_hypergraph(4);
    for (Rat w : {Rat(2), Rat(5, 2), Rat(3)}) {
        auto r = osubw(C, w);
        EXPECT_EQ(r.width, closed_form("cycle4", {}, w)) << w;
        expect_report_invariants(C, r, w);
    }
}

TEST(Osubw, FourClique) {
    auto K = clique_hypergraph(4);
    auto r = osubw(K, Rat(5, 2));
    EXPECT_EQ(r.width, Rat(7, 4));
    expect_report_invariants(K, r, Rat(5, 2));
}

TEST(Osubw, ThreePyramid) {
    auto P = pyramid_hypergraph(3);
    for (Rat w : {Rat(2), Rat(3)}) {
        auto r = osubw(P, w);
        EXPECT_EQ(r.width, closed_form("pyramid3", {}, w)) << w;
        expect_report_invariants(P, r, w);
    }
}

TEST(OsubwClique, DistributedCount) {
    auto K = clique_hypergraph(4);
    auto e = osubw_clique_expr(K, Rat(2));
    EXPECT_EQ(e.groups.size(), 11u);
    EXPECT_EQ(e.distributed_size(), mpz_class(59049));
    auto r = osubw_clique(K, Rat(2));
    EXPECT_EQ(r.distributed_terms, mpz_class(59049));
    EXPECT_EQ(r.width, Rat(3, 2));
    EXPECT_THROW(osubw_clique(cycle_hypergraph(4), Rat(2)), std::invalid_argument);
}

TEST(ClosedForm, Examples) {
    EXPECT_EQ(closed_form("cliqueK", {6}, Rat(2)), Rat(2));
    EXPECT_EQ(closed_form("pyramidK", {3}, Rat(2)), Rat(3, 2));
    for (Rat w : {Rat(2), Rat(9, 4), Rat(5, 2), Rat(3)}) EXPECT_EQ(closed_form("pyramidK", {3}, w), closed_form("pyramid3", {}, w));
    EXPECT_EQ(closed_form("example2", {}, Rat(3)), Rat(9, 5));
    EXPECT_EQ(closed_form("clique", {3}, Rat(2)), Rat(4, 3));
    EXPECT_EQ(closed_form("clique", {5}, Rat(2)), Rat(2));
    EXPECT_THROW(closed_form("nope", {}, Rat(2)), std::invalid_argument);
}

TEST(FracEdgeCover, Examples) {
    EXPECT_EQ(frac_edge_cover(Hypergraph::from_names({{"X", "Y"}})), Rat(1));
    EXPECT_EQ(frac_edge_cover(clique_hypergraph(3)), Rat(3, 2));
    EXPECT_EQ(frac_edge_cover(clique_hypergraph(5)), Rat(5, 2));
}

TEST(SquareCycle, Examples) {
    EXPECT_EQ(square_omega(Rat(1), Rat(1), Rat(1), Rat(5, 2)), Rat(5, 2));
    Rat step(1, 20);
    Rat v2 = square_cycle_exponent(4, Rat(2), step);
    EXPECT_LE((v2 - Rat(7, 5)).abs(), step) << v2;
    Rat v3 = square_cycle_exponent(4, Rat(3), step);
    EXPECT_GE(v3 + step, Rat(3, 2)) << v3;
}

namespace {

std::vector<Hypergraph> small_family() {
    return {clique_hypergraph(3), cycle_hypergraph(4), clique_hypergraph(4), pyramid_hypergraph(3),
            Hypergraph::from_names({{"A", "B", "C"}, {"A", "B", "D"}, {"C", "D"}}),
            Hypergraph::from_names({{"A", "B"}, {"B", "C"}, {"C", "D"}})};
}

Polymatroid pyramid3_witness(const Hypergraph& P, const Rat& w) {
    Polymatroid h(4);
    VertexSet y = VertexSet::single(P.index_of("Y"));
    for (std::uint32_t s = 1; s < 16; ++s) {
        VertexSet S(s);
        int c = (S - y).size();
        bool hasy = S.contains(P.index_of("Y"));
        Rat v;
        if (c == 0) v = Rat(1) - Rat(1) / w;
        else if (c == 1) v = hasy ? Rat(1) : Rat(1) / w;
        else if (c == 2) v = hasy ? (w + 1) / w : Rat(2) / w;
        else v = hasy ? Rat(2) - Rat(1) / w : Rat(1);
        h[S] = v;
    }
    return h;
}

}  // namespace

TEST(Osubw, PrunedAgreesWithExhaustive) {
    for (const auto& H : small_family())
        for (Rat w : {Rat(2), Rat(9, 4), Rat(5, 2), Rat(11, 4), Rat(3)}) {
            auto a = osubw(H, w, mode(WidthMode::Exhaustive));
            auto b = osubw(H, w, mode(WidthMode::Pruned));
            EXPECT_EQ(a.width, b.width) << H.str() << " omega=" << w;
            expect_report_invariants(H, b, w);
        }
}

TEST(Osubw, ClassicBoundAndEqualityAtThree) {
    for (const auto& H : small_family()) {
        Rat s = subw(H).width;
        EXPECT_EQ(osubw(H, Rat(3)).width, s) << H.str();
        Rat prev;
        for (Rat w : {Rat(2), Rat(9, 4), Rat(5, 2), Rat(11, 4), Rat(3)}) {
            Rat v = osubw(H, w).width;
            EXPECT_LE(v, s);
            EXPECT_GE(v, prev) << H.str() << " omega=" << w;
            prev = v;
        }
    }
}

TEST(Osubw, LowerBoundIsSound) {
    std::mt19937_64 rng(21);
    for (const auto& H : small_family()) {
        Rat w(19, 8);
        Rat width = osubw(H, w).width;
        for (int it = 0; it < 40; ++it) {
            auto h = normalize_to_edges(random_polymatroid(H.num_names(), rng), H);
            EXPECT_LE(osubw_lower_bound(H, w, h), width);
        }
    }
}

TEST(Osubw, LowerBoundExamples) {
    auto K5 = clique_hypergraph(5);
    auto half5 = modular_polymatroid(std::vector<Rat>(5, Rat(1, 2)));
    EXPECT_EQ(osubw_lower_bound(K5, Rat(5, 2), half5), Rat(9, 4));
    auto P = pyramid_hypergraph(3);
    EXPECT_EQ(osubw_lower_bound(P, Rat(2), pyramid3_witness(P, Rat(2))), Rat(3, 2));
    EXPECT_EQ(osubw_lower_bound(P, Rat(3), pyramid3_witness(P, Rat(3))), Rat(5, 3));
    EXPECT_EQ(osubw_lower_bound(K5, Rat(2), Polymatroid(5)), Rat(0));
    EXPECT_THROW(osubw_lower_bound(K5, Rat(2), modular_polymatroid(std::vector<Rat>(5, Rat(1)))), std::invalid_argument);
}

TEST(OsubwClique, FiveAndSix) {
    EXPECT_EQ(osubw_clique(clique_hypergraph(5), Rat(2)).width, Rat(2));
    EXPECT_EQ(osubw_clique(clique_hypergraph(5), Rat(5, 2)).width, Rat(9, 4));
    EXPECT_EQ(osubw_clique(clique_hypergraph(6), Rat(2)).width, Rat(2));
}

TEST(Osubw, ExampleTwoBelowUpperBound) {
    auto H = example2();
    for (Rat w : {Rat(2), Rat(3)}) EXPECT_LE(osubw(H, w).width, closed_form("example2", {}, w));
    EXPECT_EQ(osubw(H, Rat(3)).width, Rat(9, 5));
}

TEST(Clustered, SubwIsEdgeCover) {
    for (const auto& H : {clique_hypergraph(4), clique_hypergraph(5), pyramid_hypergraph(3)}) {
        ASSERT_TRUE(is_clustered(H));
        for_each_gveo(H.vertices(), [&](const Gveo& g) { EXPECT_EQ(elimination_trace(H, g).unions[0], H.vertices()); });
        EXPECT_EQ(subw(H).width, frac_edge_cover(H)) << H.str();
    }
}

TEST(Properties, EntropyOfAllBelowEdgeCover) {
    std::mt19937_64 rng(5);
    for (const auto& H : small_family()) {
        Rat rho = frac_edge_cover(H);
        for (int it = 0; it < 1000; ++it) {
            auto h = normalize_to_edges(random_polymatroid(H.num_names(), rng, 4, 3), H);
            EXPECT_LE(h(H.vertices()), rho);
        }
    }
}

TEST(Properties, SubwWithGeneralizedOrders) {
    for (const auto& H : small_family()) {
        MinMaxExpr e;
        e.gamma = 1;
        for_each_gveo(H.vertices(), [&](const Gveo& g) {
            auto tr = elimination_trace(H, g);
            MinMaxGroup grp;
            for (int i : tr.trimmed) grp.items.push_back(MinMaxItem{{MinMaxAtom{{e.intern(join_info(tr.unions[i]))}}}});
            e.groups.push_back(grp);
        });
        EXPECT_EQ(solve_minmax(H, e, {}).width, subw(H).width) << H.str();
    }
}

TEST(Width, Budget) {
    std::vector<std::vector<std::string>> edges;
    for (int i = 0; i < 7; ++i) edges.push_back({std::string(1, 'A' + i), std::string(1, 'A' + (i + 1) % 7)});
    auto big = Hypergraph::from_names(edges);
    EXPECT_THROW(subw(big), BudgetError);
    EXPECT_THROW(osubw(big, Rat(2)), BudgetError);
    EXPECT_THROW(square_cycle_exponent(8, Rat(2), Rat(1, 20)), BudgetError);
    EXPECT_THROW(osubw(clique_hypergraph(3), Rat(7, 2)), std::invalid_argument);
}
