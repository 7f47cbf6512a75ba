#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

#include "cqw/entropy.hpp"
#include "cqw/lp.hpp"

namespace cqw {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Where a linear form of the width LP came from.  Branch forms are stored
// with gamma on term.Z: h(X|G) + h(Y|G) + gamma*h(Z|G) + h(G).
struct FormInfo {
    bool join = true;
    VertexSet U;  // join forms: h(U)
    MmTerm term;  // branch forms
};

FormInfo join_info(VertexSet U);
// Branch b of t, rotated so that the gamma-weighted dimension is Z.
FormInfo branch_info(const MmTerm& t, int branch);
LinearForm form_of(const FormInfo& info, const Rat& gamma);

// max t  s.t.  t <= f (f in forms), elemental inequalities, h(E) <= 1.
// Variable h(S) has index S.bits - 1; t is the last variable.  Rows are laid
// out as forms, then elementals, then edges.
struct WidthLp {
    int k = 0;
    Rat gamma;
    std::vector<FormInfo> forms;
    std::vector<Elemental> elementals;
    EdgeList edges;
    LinearProgram lp;

    int t_var() const { return (1 << k) - 1; }
    static int var(VertexSet s) { return static_cast<int>(s.bits) - 1; }
    std::size_t elemental_row(std::size_t e) const { return forms.size() + e; }
    std::size_t edge_row(std::size_t e) const { return forms.size() + elementals.size() + e; }
};

WidthLp build_width_lp(const Hypergraph& H, std::vector<FormInfo> forms, const Rat& gamma);
Polymatroid witness_of(const WidthLp& w, const LpSolution& sol);

// min over groups, max over items, min over atoms, max over forms.  Each
// form index refers to MinMaxExpr::forms.  This is the shape obtained from
// the width definitions once every min-of-max pair is spelled out.
struct MinMaxAtom {
    std::vector<int> forms;
};
struct MinMaxItem {
    std::vector<MinMaxAtom> atoms;
};
struct MinMaxGroup {
    std::vector<MinMaxItem> items;
};

struct MinMaxExpr {
    Rat gamma;
    std::vector<FormInfo> info;
    std::vector<LinearForm> forms;
    std::vector<MinMaxGroup> groups;

    int intern(const FormInfo& fi);
    std::vector<Rat> form_values(const Polymatroid& h) const;
    Rat eval(const Polymatroid& h) const;
    // Product over atoms of their sizes, summed over items, multiplied over
    // groups: the number of LPs a literal distribution would produce.
    mpz_class distributed_size() const;

private:
    std::unordered_multimap<std::size_t, int> lookup_;
};

enum class WidthMode { Auto, Exhaustive, Pruned };
std::string to_string(WidthMode m);

struct WidthOptions {
    WidthMode mode = WidthMode::Auto;
    bool keep_leaves = false;
    long long node_budget = 4'000'000;
    // Keep every LP needed so that each term of the literal distribution
    // contains some kept LP's constraint set (exhaustive mode only).  Item
    // dominance is skipped and pick dominance uses plain containment.
    bool complete_family = false;
};

struct PlanChoice {
    int index = 0;  // 0-based step of the order
    VertexSet U;
    bool join = true;
    MmTerm term;  // when !join; Z is the eliminated block
    Rat value;
};

struct Plan {
    Gveo order;
    std::vector<PlanChoice> choices;  // one per trimmed index
    Rat value;
};

// A solved LP whose constraint set is one term of the distributed min-max.
// `images` lists vertex permutations mapping it onto other terms that were
// folded into it (identity first).
struct WidthLeaf {
    WidthLp lp;
    LpSolution sol;
    std::vector<std::vector<int>> images;
};

struct WidthReport {
    Rat width;
    Polymatroid witness;
    int argmax_lp = -1;
    Plan plan;
    long long lp_count = 0;
    mpz_class distributed_terms;  // LP count of the literal distribution
    long long nodes = 0;
    WidthMode mode = WidthMode::Exhaustive;
    bool classic = false;
    std::vector<WidthLeaf> leaves;
};

// Expression builders.
MinMaxExpr subw_expr(const Hypergraph& H);
MinMaxExpr osubw_expr(const Hypergraph& H, const Rat& omega);
MinMaxExpr osubw_clique_expr(const Hypergraph& H, const Rat& omega);

// max over edge-dominated polymatroids of expr.
WidthReport solve_minmax(const Hypergraph& H, MinMaxExpr expr, const WidthOptions& opt);

WidthReport subw(const Hypergraph& H, const WidthOptions& opt = {});
WidthReport osubw(const Hypergraph& H, const Rat& omega, const WidthOptions& opt = {});
WidthReport osubw_clique(const Hypergraph& H, const Rat& omega, const WidthOptions& opt = {});

// Per-order value max over trimmed i of min(h(U_i), EMM_i) with the choices
// that realize it.
Plan evaluate_order(const Hypergraph& H, const Gveo& sigma, const Polymatroid& h, const Rat& gamma);
// Best order for h (lowest value, first in enumeration order on ties).
Plan best_plan(const Hypergraph& H, const Polymatroid& h, const Rat& omega);
// Best tree decomposition plan for h (all choices are joins).
Plan best_td_plan(const Hypergraph& H, const Polymatroid& h);

Rat osubw_lower_bound(const Hypergraph& H, const Rat& omega, const Polymatroid& witness);

Rat closed_form(const std::string& family, const std::vector<int>& params, const Rat& omega);

// Cycle exponent obtained from square matrix multiplication, maximized over
// degree vectors on a grid of the given step.  literal_min replaces the max
// over the two sub-paths and the product cost with a min.
Rat square_omega(const Rat& a, const Rat& b, const Rat& c, const Rat& omega);
Rat square_cycle_exponent(int k, const Rat& omega, const Rat& grid_step, bool literal_min = false);

Rat frac_edge_cover(const Hypergraph& H);

}  // namespace cqw
