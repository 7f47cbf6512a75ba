#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "cqw/entropy.hpp"
#include "cqw/width.hpp"

namespace cqw {

struct NotShannonError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DefectError : std::logic_error {
    using std::logic_error::logic_error;
};

// Formal sum of c * h(Y|X).  Keys keep Y disjoint from X; terms with empty Y
// or zero coefficient are dropped.
class TermMultiset {
public:
    using Key = std::pair<std::uint32_t, std::uint32_t>;  // (Y bits, X bits)

    void add(const Rat& c, VertexSet y, VertexSet x);
    Rat coeff(VertexSet y, VertexSet x) const;
    const std::map<Key, Rat>& terms() const { return t_; }
    bool empty() const { return t_.empty(); }
    LinearForm form() const;
    Rat eval(const Polymatroid& h) const { return h.eval(form()); }
    // First key whose coefficient in `other` exceeds ours.
    std::optional<Key> first_deficit(const TermMultiset& other) const;
    std::string str(const Hypergraph& H) const;
    bool operator==(const TermMultiset& o) const { return t_ == o.t_; }

private:
    std::map<Key, Rat> t_;
};

std::string cond_str(const Hypergraph& H, VertexSet y, VertexSet x);  // "h(Y|X)"

struct PlainTerm {
    Rat lambda;
    VertexSet U;
};
struct MmPart {
    Rat alpha, beta, zeta, kappa;
    VertexSet X, Y, Z, G;
};
struct RhsTerm {
    Rat w;
    VertexSet Y, X;
};

struct MonoTerm {
    Rat m;
    VertexSet Y, X;  // m * h(Y|X)
};
struct SubTerm {
    Rat s;
    VertexSet Y, Z, X;  // s * h(Y;Z|X)
};
struct FarkasWitness {
    std::vector<MonoTerm> m;
    std::vector<SubTerm> s;
    bool empty() const { return m.empty() && s.empty(); }
    LinearForm form() const;  // sum m h(Y|X) + sum s h(Y;Z|X)
};

using CKey = std::pair<std::uint32_t, std::uint32_t>;                  // (Y, X)
using SKey = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;  // (Y, Z, X)

inline CKey ckey(VertexSet y, VertexSet x) { return {(y - x).bits, x.bits}; }

inline SKey skey(VertexSet y, VertexSet z, VertexSet x) {
    y -= x;
    z -= x;
    if (z < y) std::swap(y, z);
    return {y.bits, z.bits, x.bits};
}

// Witness keyed for lookup: m(Y|X) by (Y-X, X), s(Y;Z|X) with Y < Z.
struct WitnessMaps {
    std::map<CKey, Rat> m;
    std::map<SKey, Rat> s;

    void add_m(VertexSet y, VertexSet x, const Rat& c) {
        if ((y - x).empty() || c.is_zero()) return;
        Rat& r = m[ckey(y, x)];
        r += c;
        if (r.is_zero()) m.erase(ckey(y, x));
    }
    void add_s(VertexSet y, VertexSet z, VertexSet x, const Rat& c) {
        if (c.is_zero()) return;
        Rat& r = s[skey(y, z, x)];
        r += c;
        if (r.is_zero()) s.erase(skey(y, z, x));
    }

    static WitnessMaps of(const FarkasWitness& w) {
        WitnessMaps out;
        for (const auto& t : w.m) out.add_m(t.Y, t.X, t.m);
        for (const auto& t : w.s) out.add_s(t.Y, t.Z, t.X, t.s);
        return out;
    }
    FarkasWitness to_witness() const {
        FarkasWitness w;
        for (const auto& [k, c] : m) w.m.push_back({c, VertexSet(k.first), VertexSet(k.second)});
        for (const auto& [k, c] : s) w.s.push_back({c, VertexSet(std::get<0>(k)), VertexSet(std::get<1>(k)), VertexSet(std::get<2>(k))});
        return w;
    }

    // Case 2 partner: m-term with X_p Y_p = W.
    std::optional<CKey> mono_partner(VertexSet W) const {
        for (const auto& [k, c] : m)
            if ((k.first | k.second) == W.bits && c.sign() > 0) return k;
        return std::nullopt;
    }
    // Case 3 partner: s-term with X_q Y_q = W, returned oriented as (Y, Z, X).
    std::optional<std::pair<SKey, std::tuple<VertexSet, VertexSet, VertexSet>>> sub_partner(VertexSet W) const {
        for (const auto& [k, c] : s) {
            if (c.sign() <= 0) continue;
            auto [y, z, x] = k;
            if ((y | x) == W.bits) return {{k, {VertexSet(y), VertexSet(z), VertexSet(x)}}};
            if ((z | x) == W.bits) return {{k, {VertexSet(z), VertexSet(y), VertexSet(x)}}};
        }
        return std::nullopt;
    }
};

struct OmegaShannonInequality {
    int k = 0;
    Rat omega{3};
    std::vector<PlainTerm> lhs_plain;
    std::vector<MmPart> lhs_mm;
    std::vector<RhsTerm> rhs;
    std::optional<FarkasWitness> witness;

    LinearForm lhs_form() const;
    LinearForm rhs_form() const;
    TermMultiset lhs_terms() const;
    TermMultiset rhs_terms() const;
    Rat mass() const;               // |lambda|_1 + |kappa|_1
    Rat unconditional_rhs() const;  // sum of w_i with X_i empty
    Rat rhs_mass() const;           // |w|_1
    Rat ratio() const;              // |w|_1 / mass, 0 when mass is 0
    bool is_integral() const;
    std::string str(const Hypergraph& H) const;
};

bool omega_dominant(const Rat& a, const Rat& b, const Rat& z, const Rat& omega);

// Shape check: signs, positive kappa, dominance of every triple.
std::optional<std::string> check_shape(const OmegaShannonInequality& ineq);
// Exact symbolic check of LHS = RHS - witness.
std::optional<std::string> verify_witness(const OmegaShannonInequality& ineq, const FarkasWitness& w);
// Shape, witness presence and identity.
std::optional<std::string> validate(const OmegaShannonInequality& ineq);

// Dual multipliers of a width LP turned into an inequality (witness attached).
OmegaShannonInequality from_dual(const WidthLp& lp, const LpSolution& sol);

// Exact feasibility LP over elemental measures.  Throws NotShannonError.
FarkasWitness find_farkas(const OmegaShannonInequality& ineq);
// Attaches a witness found by find_farkas.
OmegaShannonInequality certified(OmegaShannonInequality ineq);

// Scale by one global factor so that every coefficient and the witness are
// integers.
OmegaShannonInequality integralize(const OmegaShannonInequality& ineq);

std::optional<std::string> check_unconditional_mass(const OmegaShannonInequality& ineq);

// Lowers alpha, beta, zeta to at most kappa, moving the excess into the
// witness.  Proof sequences require this form.
OmegaShannonInequality normalize_well_behaved(const OmegaShannonInequality& ineq);

// Drops one unit of the unconditional RHS term i0 while the LHS mass drops by
// at most one.  Requires an integral inequality with an integral witness.
OmegaShannonInequality reset(const OmegaShannonInequality& ineq, std::size_t i0);

struct ProofStep {
    enum Kind { Decomposition, Composition, Monotonicity, Submodularity } kind;
    VertexSet X, Y, Z;
    std::string str(const Hypergraph& H) const;
};
std::string to_string(ProofStep::Kind k);

std::vector<ProofStep> build_proof_sequence(const OmegaShannonInequality& ineq);

struct ReplayViolation {
    long index = -1;  // -1: final domination check
    std::string what;
};
// Applies steps to the RHS multiset; the result must dominate the LHS.
std::optional<ReplayViolation> replay_sequence(const OmegaShannonInequality& ineq, const std::vector<ProofStep>& steps);
// Applies one step in place; returns an error description when inapplicable.
std::optional<std::string> apply_step(TermMultiset& t, const ProofStep& s);

OmegaShannonInequality permute(const OmegaShannonInequality& ineq, const std::vector<int>& perm);

std::string render_sequence(const Hypergraph& H, const std::vector<ProofStep>& steps);

}  // namespace cqw
