#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cqw/hypergraph.hpp"
#include "cqw/rational.hpp"

namespace cqw {

// Sparse linear combination of set-function values h(S), S non-empty.
// Kept sorted by subset bits with no zero coefficients.
struct LinearForm {
    std::vector<std::pair<std::uint32_t, Rat>> terms;

    void add(VertexSet s, const Rat& c);
    void add(const LinearForm& o, const Rat& scale);
    bool empty() const { return terms.empty(); }
    bool operator==(const LinearForm& o) const { return terms == o.terms; }
    std::size_t hash() const;
    std::string str(const Hypergraph& H) const;
};

LinearForm entropy_of(VertexSet s);                          // h(S)
LinearForm conditional_form(VertexSet y, VertexSet x);      // h(Y|X) = h(XY) - h(X)
LinearForm mutual_form(VertexSet y, VertexSet z, VertexSet x);  // h(Y;Z|X)

class Polymatroid {
public:
    Polymatroid() = default;
    explicit Polymatroid(int k) : k_(k), v_(std::size_t{1} << k) {}
    Polymatroid(int k, std::vector<Rat> values);

    int k() const { return k_; }
    const Rat& operator()(VertexSet s) const { return v_[s.bits]; }
    Rat& operator[](VertexSet s) { return v_[s.bits]; }
    const std::vector<Rat>& values() const { return v_; }
    Rat eval(const LinearForm& f) const;
    bool operator==(const Polymatroid& o) const { return k_ == o.k_ && v_ == o.v_; }

private:
    int k_ = 0;
    std::vector<Rat> v_;
};

Rat conditional(const Polymatroid& h, VertexSet y, VertexSet x);

// Elemental Shannon inequality: either h(x | V - x) >= 0 (monotone) or
// h(x ; y | A) >= 0 (submodular).
struct Elemental {
    enum Kind { Monotone, Submodular } kind;
    int x = 0;
    int y = -1;
    VertexSet A;
    LinearForm form(VertexSet V) const;
    std::string str(const Hypergraph& H, VertexSet V) const;
};

std::vector<Elemental> elemental_constraints(int k);
std::vector<Elemental> elemental_constraints(VertexSet V);

struct PolymatroidViolation {
    std::string what;  // "h(empty) != 0", "monotonicity", "submodularity", "negative"
    std::string detail;
};
std::optional<PolymatroidViolation> check_polymatroid(const Polymatroid& h);

// One h(Z) <= 1 bound per hyperedge.
std::vector<VertexSet> ed_constraints(const Hypergraph& H);
bool is_edge_dominated(const Polymatroid& h, const Hypergraph& H);

// MM(X;Y;Z|G).  Z is the eliminated (shared) dimension in EMM usage.
struct MmTerm {
    VertexSet X, Y, Z, G;
    auto operator<=>(const MmTerm&) const = default;
    std::string str(const Hypergraph& H) const;
};

// Branch b of the MM expression puts gamma on dimension Z (b=0), Y (b=1) or X (b=2).
LinearForm mm_branch_form(const MmTerm& t, int branch, const Rat& gamma);
Rat mm_branch_value(const Polymatroid& h, const MmTerm& t, int branch, const Rat& gamma);
Rat mm_value(const Polymatroid& h, const MmTerm& t, const Rat& gamma);

// Non-trivial MM terms admissible for eliminating X from H, with duplicate
// dimension assignments (including swapped first/second dims) removed.
std::vector<MmTerm> emm_terms(const Hypergraph& H, VertexSet X);

// nullopt stands for "no MM term available" (an infinite cost).
std::optional<Rat> emm_value(const Polymatroid& h, const Hypergraph& H, VertexSet X, const Rat& gamma);

// Weighted coverage functions are polymatroids; used as random test inputs.
Polymatroid random_polymatroid(int k, std::mt19937_64& rng, int atoms = 6, int max_weight = 4);
// Scales h so the largest edge value is exactly 1 (all-zero h is returned as is).
Polymatroid normalize_to_edges(const Polymatroid& h, const Hypergraph& H);
// h(S) = sum of per-vertex weights.
Polymatroid modular_polymatroid(const std::vector<Rat>& weights);

}  // namespace cqw
