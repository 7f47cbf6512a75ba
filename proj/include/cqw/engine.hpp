#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

#include "cqw/hypergraph.hpp"
#include "cqw/rational.hpp"
#include "cqw/shannon.hpp"

namespace cqw {

using Tuple = std::vector<int>;

// Set of tuples over named variables.  Rows are kept sorted and unique.
struct Relation {
    std::string name;
    std::vector<std::string> schema;
    std::vector<Tuple> rows;

    Relation() = default;
    Relation(std::string name, std::vector<std::string> schema, std::vector<Tuple> rows = {});

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    int arity() const { return static_cast<int>(schema.size()); }
    int column(const std::string& v) const;  // -1 when absent
    bool has(const std::string& v) const { return column(v) >= 0; }
    bool contains(const Tuple& t) const;
    // Sorts and removes duplicates; throws on arity mismatch.
    void canonicalize();
};

// Relation with no columns: one empty row for true, none for false.
Relation nullary(bool value);

struct Dictionary {
    std::vector<std::string> values;
    std::unordered_map<std::string, int> ids;
    int intern(const std::string& v);
};

struct QueryAtom {
    std::string name;
    std::vector<std::string> vars;
};

// Boolean conjunctive query Q() :- R1(..), R2(..), ...
struct Query {
    std::string name = "Q";
    std::vector<QueryAtom> atoms;

    // Vertex ids follow the order of first appearance.
    Hypergraph hypergraph() const;
    std::vector<std::string> variables() const;
};

struct Database {
    std::map<std::string, Relation> relations;
    Dictionary dict;
    std::size_t N = 0;

    void add(Relation r);  // keeps N in sync
    const Relation& at(const std::string& atom) const;
};

// --------------------------------------------------------------- degrees

std::size_t degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X);
std::size_t degree_at(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X, const Tuple& x);

struct DegreePartition {
    Relation heavy;  // over X
    Relation light;  // over schema(R)
};
DegreePartition partition_by_degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X,
                                    std::size_t delta);

struct DegreeBucket {
    Relation bucket;
    std::size_t lo = 1, hi = 2;  // degrees in [lo, hi)
};
std::vector<DegreeBucket> bucket_by_degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X);

// ----------------------------------------------------- relational algebra

Relation project(const Relation& R, const std::vector<std::string>& vars);
Relation join(const Relation& R, const Relation& S);
Relation semijoin(const Relation& R, const Relation& S);
// Same variable set, any column order; result uses R's order.
Relation intersect(const Relation& R, const Relation& S);
Relation unite(const Relation& R, const Relation& S);
// Columns reordered to `vars` (a permutation of the schema).
Relation reorder(const Relation& R, const std::vector<std::string>& vars);

// --------------------------------------------------------------- matrices

struct DenseMatrix {
    int rows = 0, cols = 0;
    std::vector<std::int64_t> entries;  // row-major
    std::vector<mpz_class> wide;        // used instead of entries after overflow
    std::map<Tuple, int> row_index, col_index;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, 0) {}
    std::int64_t& at(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
    std::int64_t at(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }
    mpz_class value(int i, int j) const;
    bool nonzero(int i, int j) const;
    bool is_wide() const { return !wide.empty(); }
    bool operator==(const DenseMatrix& o) const;  // compares dimensions and values only
};

enum class MatmulAlgo { Naive, Strassen, BlockedRect };
std::string to_string(MatmulAlgo a);

struct MatmulStats {
    long long scalar_mults = 0;
    long long strassen_calls = 0;
};

// Exact integer product.  Strassen pads to a power of two and recurses down
// to `cutoff`; blocked_rect cuts both operands into d x d blocks with d the
// smallest dimension.
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B, MatmulAlgo algo = MatmulAlgo::Strassen, int cutoff = 64,
                   MatmulStats* stats = nullptr);

struct GroupMmStats {
    long long groups = 0;
    long long max_dim = 0;
    double modeled_work = 0;  // sum over groups of max(dim)^omega
};

// M1 over (Y, X, G) and M2 over (X, Z, G) with X = `contract`; G is the rest
// of their shared variables.  For each g multiplies the slices Y x X and
// X x Z and keeps the nonzero (y, z) pairs.  Output schema: Y, Z, G.
Relation group_by_mm(const Relation& M1, const Relation& M2, const std::vector<std::string>& contract,
                     MatmulAlgo algo = MatmulAlgo::Strassen, const Rat& omega = Rat(3), GroupMmStats* stats = nullptr);

// ----------------------------------------------------------- triangle

struct TriangleLedger {
    std::size_t N = 0;
    std::size_t delta = 0;
    std::size_t light_work[3] = {0, 0, 0};  // tuples produced by each light join
    std::size_t heavy_dims[3] = {0, 0, 0};  // |R_h|, |S_h|, |T_h|
    std::size_t linear_work = 0;            // scans, partitions, final joins
    double mm_work = 0;                     // modeled: max(dim)^omega
    double total() const;
};

// db holds R(X,Y), S(Y,Z), T(X,Z) under those atom names.
bool evaluate_triangle(const Database& db, const Rat& omega, TriangleLedger* ledger = nullptr,
                       MatmulAlgo algo = MatmulAlgo::Strassen);

// ----------------------------------------------------------- PANDA

struct PTable {
    VertexSet U;
    Relation R;
};

// Tables for one MM part.  A dimension whose exponent is zero gets only the
// G-table (`*_free`, schema G): its own variables are unconstrained.
struct TripleTable {
    MmPart part;  // dimensions and final coefficients
    Relation S, T, W;
    bool s_free = false, t_free = false, w_free = false;
    Rat a, b, z;  // omega-dominant exponents alpha/kappa, beta/kappa, zeta/kappa
};

struct PandaStats {
    long long branches = 0;
    long long steps = 0;
    long long resets = 0;
    long long bound_misses = 0;  // triples emitted although the degree-product check failed
    std::size_t max_table = 0;
    Rat opt;
};

struct OutputTables {
    std::vector<PTable> P;
    std::vector<TripleTable> triples;
    PandaStats stats;
};

// Tables are over vertex names of H; rhs_tables[i] serves rhs term i.
// obj = opt * log2(N) with opt the certificate ratio.
OutputTables panda_ddr(const Hypergraph& H, const OmegaShannonInequality& cert, const std::vector<Relation>& rhs_tables,
                       std::size_t N, long long step_budget = 5'000'000);
// atom_map[i] names the atom serving rhs term i.
OutputTables panda_ddr(const Query& Q, const Database& db, const OmegaShannonInequality& cert,
                       const std::vector<std::string>& atom_map);

// ----------------------------------------------------------- evaluation

// Certificates for (H, omega): one per minimal certificate support of the
// complete LP family, each integral and well-behaved.
struct OrderPlan {
    Gveo sigma;
    EliminationTrace trace;
    std::vector<std::vector<MmTerm>> mm;  // per index: EMM arguments (Z eliminated)
};

struct EvaluationPlan {
    Hypergraph H;
    Rat omega;
    std::vector<OmegaShannonInequality> certificates;
    long long lp_count = 0;
    long long family_size = 0;  // LP instances including symmetric images
    std::vector<OrderPlan> orders;
};

EvaluationPlan prepare_evaluation(const Hypergraph& H, const Rat& omega);
// Memoized on (H, omega).
const EvaluationPlan& cached_plan(const Hypergraph& H, const Rat& omega);

struct EvalStats {
    long long panda_branches = 0;
    std::size_t max_panda_table = 0;
    long long orders_tried = 0;
};

bool evaluate(const Query& Q, const Database& db, const Rat& omega, EvalStats* stats = nullptr);
bool evaluate(const Query& Q, const Database& db, const EvaluationPlan& plan, EvalStats* stats = nullptr);

// Nested-loop join in atom order.
bool brute_force(const Query& Q, const Database& db);
// Every satisfying assignment, columns in Query::variables() order.
Relation brute_force_join(const Query& Q, const Database& db);

// Relation per hyperedge of Q's hypergraph: atoms on the same variable set
// are intersected; columns follow ascending vertex id.
std::map<std::uint32_t, Relation> edge_relations(const Query& Q, const Database& db);

std::vector<std::string> names_of(const Hypergraph& H, VertexSet s);

}  // namespace cqw
