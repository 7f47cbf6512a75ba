#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"

using namespace cqw;
using namespace cqw::testing;

namespace {

Relation rel(std::vector<std::string> schema, std::vector<Tuple> rows) { return Relation("R", std::move(schema), std::move(rows)); }

DenseMatrix random_matrix(int r, int c, std::mt19937_64& rng, int lo = -9, int hi = 9) {
    DenseMatrix M(r, c);
    std::uniform_int_distribution<int> d(lo, hi);
    for (auto& e : M.entries) e = d(rng);
    return M;
}

Database triangle_db(std::vector<Tuple> r, std::vector<Tuple> s, std::vector<Tuple> t) {
    Database db;
    db.add(Relation("R", {"X", "Y"}, std::move(r)));
    db.add(Relation("S", {"Y", "Z"}, std::move(s)));
    db.add(Relation("T", {"X", "Z"}, std::move(t)));
    return db;
}

}  // namespace

// ---------------------------------------------------------------- relations

TEST(Relation, DegreeExamples) {
    Relation R = rel({"X", "Y"}, {{1, 10}, {1, 11}, {2, 10}});
    EXPECT_EQ(degree(R, {"Y"}, {"X"}), 2u);
    EXPECT_EQ(degree_at(R, {"Y"}, {"X"}, {2}), 1u);
    EXPECT_EQ(degree(R, {"X", "Y"}, {}), 3u);
    EXPECT_THROW(degree(R, {"Z"}, {"X"}), std::invalid_argument);
}

TEST(Relation, RejectsRepeatedVariablesAndBadArity) {
    EXPECT_THROW(rel({"X", "X"}, {}), std::invalid_argument);
    EXPECT_THROW(rel({"X"}, {{1, 2}}), std::invalid_argument);
}

TEST(Relation, PartitionExamples) {
    Relation R = rel({"X", "Y"}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 1}, {2, 1}, {3, 1}});
    auto p = partition_by_degree(R, {"Y"}, {"X"}, 2);
    EXPECT_EQ(p.heavy.size(), 1u);
    EXPECT_EQ(project(p.light, {"X"}).size(), 3u);
    auto q = partition_by_degree(R, {"Y"}, {"X"}, 5);
    EXPECT_TRUE(q.heavy.empty());
    EXPECT_EQ(q.light.rows, R.rows);
    EXPECT_THROW(partition_by_degree(R, {"Y"}, {"X"}, 0), std::invalid_argument);
}

TEST(Relation, PartitionTilesXValues) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 100; ++it) {
        Database db = random_db(make_query({{"R", {"X", "Y"}}}), rng, 2 + it % 20, 0.3);
        const Relation& R = db.at("R");
        std::size_t delta = 1 + it % 6;
        auto p = partition_by_degree(R, {"Y"}, {"X"}, delta);
        Relation lx = project(p.light, {"X"});
        EXPECT_TRUE(intersect(lx, p.heavy).empty());
        EXPECT_EQ(unite(lx, p.heavy).rows, project(R, {"X"}).rows);
        EXPECT_LE(p.heavy.size() * delta, R.size() + delta);
        for (const auto& h : p.heavy.rows) EXPECT_GT(degree_at(R, {"Y"}, {"X"}, h), delta);
    }
}

TEST(Relation, BucketBands) {
    Relation uniform = rel({"X", "Y"}, {{0, 1}, {0, 2}, {1, 1}, {1, 3}});
    EXPECT_EQ(bucket_by_degree(uniform, {"Y"}, {"X"}).size(), 1u);
    Relation mixed = rel({"X", "Y"}, {{0, 1}, {1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}, {2, 4}});
    EXPECT_EQ(bucket_by_degree(mixed, {"Y"}, {"X"}).size(), 3u);
}

TEST(Relation, BucketProductBound) {
    std::mt19937_64 rng(12);
    for (int it = 0; it < 100; ++it) {
        Database db = random_db(make_query({{"R", {"X", "Y", "Z"}}}), rng, 2 + it % 7, 0.05 + 0.01 * (it % 30));
        const Relation& R = db.at("R");
        auto bs = bucket_by_degree(R, {"Y", "Z"}, {"X"});
        std::size_t total = 0;
        for (const auto& b : bs) {
            total += b.bucket.size();
            std::size_t d = degree(b.bucket, {"Y", "Z"}, {"X"});
            EXPECT_GE(d, b.lo);
            EXPECT_LT(d, b.hi);
            EXPECT_LE(project(b.bucket, {"X"}).size() * d, 2 * R.size());
        }
        EXPECT_EQ(total, R.size());
        EXPECT_LE(bs.size(), static_cast<std::size_t>(std::bit_width(R.size() + 1)));
    }
}

TEST(Relation, AlgebraExamples) {
    Relation R = rel({"X", "Y"}, {{1, 5}});
    Relation S = Relation("S", {"Y", "Z"}, {{5, 7}});
    Relation J = join(R, S);
    EXPECT_EQ(J.schema, (std::vector<std::string>{"X", "Y", "Z"}));
    EXPECT_EQ(J.rows, (std::vector<Tuple>{{1, 5, 7}}));
    EXPECT_TRUE(semijoin(R, Relation("S", {"Y", "Z"})).empty());
    EXPECT_EQ(project(rel({"X", "Y"}, {{1, 5}, {1, 6}}), {"X"}).rows, (std::vector<Tuple>{{1}}));
    Relation A = rel({"X", "Y"}, {{1, 2}, {3, 4}});
    Relation B = Relation("B", {"Y", "X"}, {{2, 1}, {9, 9}});
    EXPECT_EQ(intersect(A, B).rows, (std::vector<Tuple>{{1, 2}}));
    EXPECT_EQ(unite(A, B).size(), 3u);
}

TEST(Relation, JoinMatchesNestedLoop) {
    std::mt19937_64 rng(13);
    Query Q = make_query({{"A", {"X", "Y"}}, {"B", {"Y", "Z"}}});
    for (int it = 0; it < 50; ++it) {
        Database db = random_db(Q, rng, 2 + it % 8, 0.3);
        EXPECT_EQ(join(db.at("A"), db.at("B")).rows, brute_force_join(Q, db).rows);
    }
}

TEST(Relation, BruteForceExamples) {
    Query one = make_query({{"R", {"X"}}});
    Database db;
    db.add(Relation("R", {"X"}, {{1}}));
    EXPECT_TRUE(brute_force(one, db));
    Database tri = triangle_db({{1, 2}}, {{2, 3}}, {{1, 3}});
    EXPECT_TRUE(brute_force(triangle_query(), tri));
    Database emp = triangle_db({{1, 2}}, {}, {{1, 3}});
    EXPECT_FALSE(brute_force(triangle_query(), emp));
    EXPECT_EQ(tri.N, 3u);
}

TEST(Relation, EdgeRelationsIntersectParallelAtoms) {
    Query Q = make_query({{"R", {"X", "Y"}}, {"S", {"Y", "X"}}});
    Database db;
    db.add(Relation("R", {"X", "Y"}, {{1, 2}, {3, 4}}));
    db.add(Relation("S", {"Y", "X"}, {{2, 1}}));
    auto e = edge_relations(Q, db);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e.begin()->second.rows, (std::vector<Tuple>{{1, 2}}));
}

// ------------------------------------------------------------------ matmul

TEST(Matmul, IdentityTimesM) {
    std::mt19937_64 rng(1);
    DenseMatrix I(2, 2);
    I.at(0, 0) = I.at(1, 1) = 1;
    for (int it = 0; it < 10; ++it) {
        DenseMatrix M = random_matrix(2, 2, rng);
        for (auto a : {MatmulAlgo::Naive, MatmulAlgo::Strassen, MatmulAlgo::BlockedRect}) EXPECT_TRUE(matmul(I, M, a) == M);
    }
}

TEST(Matmul, KernelsAgreeWithNaive) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> dim(1, 20);
    for (int it = 0; it < 200; ++it) {
        int a = dim(rng), b = dim(rng), c = dim(rng);
        DenseMatrix A = random_matrix(a, b, rng), B = random_matrix(b, c, rng);
        DenseMatrix ref = matmul(A, B, MatmulAlgo::Naive);
        EXPECT_TRUE(matmul(A, B, MatmulAlgo::Strassen, 2) == ref);
        EXPECT_TRUE(matmul(A, B, MatmulAlgo::BlockedRect, 2) == ref);
    }
}

TEST(Matmul, BlockedRectangular) {
    std::mt19937_64 rng(3);
    DenseMatrix A = random_matrix(8, 4, rng), B = random_matrix(4, 16, rng);
    MatmulStats st;
    EXPECT_TRUE(matmul(A, B, MatmulAlgo::BlockedRect, 1, &st) == matmul(A, B, MatmulAlgo::Naive));
    EXPECT_GT(st.strassen_calls, 0);
}

TEST(Matmul, PathExistence) {
    std::mt19937_64 rng(4);
    DenseMatrix A = random_matrix(8, 8, rng, 0, 1), B = random_matrix(8, 8, rng, 0, 1);
    DenseMatrix C = matmul(A, B, MatmulAlgo::Strassen, 2);
    for (int i = 0; i < 8; ++i)
        for (int k = 0; k < 8; ++k) {
            bool path = false;
            for (int j = 0; j < 8; ++j) path = path || (A.at(i, j) && B.at(j, k));
            EXPECT_EQ(C.nonzero(i, k), path);
        }
}

TEST(Matmul, WideFallbackIsExact) {
    DenseMatrix A(2, 2), B(2, 2);
    for (auto& e : A.entries) e = std::int64_t{1} << 40;
    for (auto& e : B.entries) e = std::int64_t{1} << 40;
    DenseMatrix C = matmul(A, B);
    ASSERT_TRUE(C.is_wide());
    mpz_class want = mpz_class(1) << 81;
    EXPECT_EQ(C.value(0, 0), want);
}

TEST(Matmul, DimensionMismatchThrows) {
    EXPECT_THROW(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), std::invalid_argument);
}

// -------------------------------------------------------------- group_by_mm

TEST(GroupMm, TriangleHeavyShape) {
    Relation M1("M1", {"X", "Y"}, {{1, 2}, {1, 3}});
    Relation M2("M2", {"Y", "Z"}, {{3, 7}});
    GroupMmStats st;
    Relation out = group_by_mm(M1, M2, {"Y"}, MatmulAlgo::Strassen, Rat(3), &st);
    EXPECT_EQ(out.schema, (std::vector<std::string>{"X", "Z"}));
    EXPECT_EQ(out.rows, (std::vector<Tuple>{{1, 7}}));
    EXPECT_EQ(st.groups, 1);
}

TEST(GroupMm, EmptyAndSingleton) {
    Relation E("E", {"X", "Y", "G"});
    Relation M("M", {"Y", "Z", "G"}, {{1, 1, 1}});
    EXPECT_TRUE(group_by_mm(E, M, {"Y"}).empty());
    Relation S("S", {"X", "Y", "G"}, {{5, 1, 1}});
    Relation out = group_by_mm(S, M, {"Y"});
    EXPECT_EQ(out.schema, (std::vector<std::string>{"X", "Z", "G"}));
    EXPECT_EQ(out.rows, (std::vector<Tuple>{{5, 1, 1}}));
}

TEST(GroupMm, MatchesExistentialJoin) {
    std::mt19937_64 rng(5);
    Query Q = make_query({{"A", {"X", "Y", "G"}}, {"B", {"Y", "Z", "G"}}});
    for (int it = 0; it < 60; ++it) {
        Database db = random_db(Q, rng, 2 + it % 6, 0.2);
        Relation got = group_by_mm(db.at("A"), db.at("B"), {"Y"}, MatmulAlgo::BlockedRect);
        Relation want = project(join(db.at("A"), db.at("B")), {"X", "Z", "G"});
        EXPECT_EQ(got.rows, want.rows);
    }
}

// ----------------------------------------------------------------- triangle

TEST(Triangle, Examples) {
    EXPECT_TRUE(evaluate_triangle(triangle_db({{1, 2}}, {{2, 3}}, {{1, 3}}), Rat(2)));
    // Bipartite: X, Z on one side, Y on the other; no X-Z edges.
    EXPECT_FALSE(evaluate_triangle(triangle_db({{1, 2}, {3, 2}}, {{2, 4}}, {}), Rat(2)));
    Database bad;
    bad.add(Relation("R", {"Y", "X"}, {}));
    bad.add(Relation("S", {"Y", "Z"}, {}));
    bad.add(Relation("T", {"X", "Z"}, {}));
    EXPECT_THROW(evaluate_triangle(bad, Rat(2)), std::invalid_argument);
}

TEST(Triangle, MatchesOracleAndLedger) {
    std::mt19937_64 rng(6);
    Query Q = triangle_query();
    for (int it = 0; it < 300; ++it) {
        Database db = swept_db(Q, rng, it);
        Rat w = it % 3 == 0 ? Rat(2) : it % 3 == 1 ? Rat(19, 8) : Rat(3);
        TriangleLedger L;
        EXPECT_EQ(evaluate_triangle(db, w, &L, it % 2 ? MatmulAlgo::Strassen : MatmulAlgo::BlockedRect), brute_force(Q, db));
        for (int i = 0; i < 3; ++i) {
            EXPECT_LE(L.light_work[i], L.N * L.delta);
            EXPECT_LE(L.heavy_dims[i] * L.delta, L.N);
        }
    }
}

// -------------------------------------------------------------------- PANDA

TEST(Panda, EmptyDatabaseGivesEmptyOutputs) {
    Query Q = triangle_query();
    Database db = triangle_db({}, {}, {});
    const auto& plan = cached_plan(Q.hypergraph(), Rat(2));
    auto E = edge_relations(Q, db);
    for (const auto& c : plan.certificates) {
        std::vector<Relation> t;
        for (const auto& r : c.rhs) t.push_back(E.at(r.Y.bits));
        OutputTables o = panda_ddr(Q.hypergraph(), c, t, db.N);
        EXPECT_EQ(largest_output(o), 0u);
    }
}

TEST(Panda, RejectsNonIntegralCertificate) {
    Hypergraph H = Hypergraph::from_names({{"X", "Y"}});
    OmegaShannonInequality q;
    q.k = 2;
    q.lhs_plain.push_back({Rat(1, 2), VertexSet(3)});
    q.rhs.push_back({Rat(1, 2), VertexSet(3), {}});
    q = certified(q);
    EXPECT_THROW(panda_ddr(H, q, {Relation("R", {"X", "Y"})}, 1), std::invalid_argument);
}

TEST(Panda, CoverageOnRandomInstances) {
    std::mt19937_64 rng(7);
    for (const Query& Q : {triangle_query(), cycle4_query()}) {
        Hypergraph H = Q.hypergraph();
        const auto vars = Q.variables();
        for (Rat w : {Rat(2), Rat(19, 8)}) {
            const auto& plan = cached_plan(H, w);
            for (int it = 0; it < 15; ++it) {
                Database db = swept_db(Q, rng, it);
                Relation full = brute_force_join(Q, db);
                auto E = edge_relations(Q, db);
                for (const auto& c : plan.certificates) {
                    std::vector<Relation> t;
                    for (const auto& r : c.rhs) t.push_back(E.at(r.Y.bits));
                    OutputTables o = panda_ddr(H, c, t, db.N);
                    for (const auto& row : full.rows) ASSERT_TRUE(covered(o, vars, row));
                    for (const auto& tr : o.triples) {
                        EXPECT_TRUE(omega_dominant(tr.a, tr.b, tr.z, w));
                        auto G = names_of(H, tr.part.G);
                        EXPECT_EQ(project(tr.S, G).rows, project(tr.T, G).rows);
                        EXPECT_EQ(project(tr.S, G).rows, project(tr.W, G).rows);
                    }
                }
            }
        }
    }
}

// --------------------------------------------------------------- evaluation

TEST(Evaluate, PlanUsesCompleteFamily) {
    const auto& plan = cached_plan(cycle4_query().hypergraph(), Rat(2));
    EXPECT_GT(plan.certificates.size(), 1u);
    EXPECT_EQ(plan.orders.size(), 75u);
    for (const auto& c : plan.certificates) {
        EXPECT_TRUE(c.is_integral());
        EXPECT_FALSE(validate(c).has_value());
    }
}

TEST(Evaluate, MatchesBruteForce) {
    struct Case {
        Query Q;
        Rat w;
        int n;
    };
    std::vector<Case> cases = {{triangle_query(), Rat(2), 100}, {triangle_query(), Rat(19, 8), 100}, {triangle_query(), Rat(3), 100},
                               {cycle4_query(), Rat(2), 40},    {cycle4_query(), Rat(3), 40},       {clique4_query(), Rat(3), 20},
                               {clique4_query(), Rat(2), 10}};
    std::mt19937_64 rng(8);
    for (const auto& c : cases)
        for (int it = 0; it < c.n; ++it) {
            Database db = swept_db(c.Q, rng, it);
            ASSERT_EQ(evaluate(c.Q, db, c.w), brute_force(c.Q, db)) << "omega " << c.w.str() << " instance " << it;
        }
}

TEST(Evaluate, AgreesWithTrianglePipeline) {
    std::mt19937_64 rng(9);
    Query Q = triangle_query();
    for (int it = 0; it < 60; ++it) {
        Database db = swept_db(Q, rng, it);
        EXPECT_EQ(evaluate(Q, db, Rat(19, 8)), evaluate_triangle(db, Rat(19, 8)));
    }
}

TEST(Evaluate, RejectsBadOmega) {
    Database db = triangle_db({{1, 2}}, {{2, 3}}, {{1, 3}});
    EXPECT_THROW(evaluate(triangle_query(), db, Rat(7, 2)), std::invalid_argument);
}
