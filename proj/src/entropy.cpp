#include "cqw/entropy.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cqw {

void LinearForm::add(VertexSet s, const Rat& c) {
    if (s.empty() || c.is_zero()) return;
    auto it = std::lower_bound(terms.begin(), terms.end(), s.bits, [](const auto& p, std::uint32_t b) { return p.first < b; });
    if (it != terms.end() && it->first == s.bits) {
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    } else {
        terms.insert(it, {s.bits, c});
    }
}

void LinearForm::add(const LinearForm& o, const Rat& scale) {
    for (const auto& [b, c] : o.terms) add(VertexSet(b), c * scale);
}

std::size_t LinearForm::hash() const {
    std::size_t h = terms.size();
    for (const auto& [b, c] : terms) h = h * 1000003u ^ (std::hash<std::uint32_t>{}(b) * 31u + c.hash());
    return h;
}

std::string LinearForm::str(const Hypergraph& H) const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [b, c] : terms) {
        Rat a = c;
        if (!first) os << (a.sign() < 0 ? " - " : " + ");
        else if (a.sign() < 0) os << "-";
        a = a.abs();
        if (a != Rat(1)) os << a << "*";
        os << "h(" << H.fmt(VertexSet(b)) << ")";
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

LinearForm entropy_of(VertexSet s) {
    LinearForm f;
    f.add(s, 1);
    return f;
}

LinearForm conditional_form(VertexSet y, VertexSet x) {
    LinearForm f;
    f.add(x | y, 1);
    f.add(x, -1);
    return f;
}

LinearForm mutual_form(VertexSet y, VertexSet z, VertexSet x) {
    LinearForm f;
    f.add(x | y, 1);
    f.add(x | z, 1);
    f.add(x, -1);
    f.add(x | y | z, -1);
    return f;
}

Polymatroid::Polymatroid(int k, std::vector<Rat> values) : k_(k), v_(std::move(values)) {
    if (v_.size() != (std::size_t{1} << k)) throw std::invalid_argument("polymatroid table must have 2^k entries");
}

Rat Polymatroid::eval(const LinearForm& f) const {
    Rat s;
    for (const auto& [b, c] : f.terms) s += c * v_[b];
    return s;
}

Rat conditional(const Polymatroid& h, VertexSet y, VertexSet x) { return h(x | y) - h(x); }

LinearForm Elemental::form(VertexSet V) const {
    if (kind == Monotone) return conditional_form(VertexSet::single(x), V - VertexSet::single(x));
    return mutual_form(VertexSet::single(x), VertexSet::single(y), A);
}

std::string Elemental::str(const Hypergraph& H, VertexSet V) const {
    if (kind == Monotone) return "h(" + H.fmt(VertexSet::single(x)) + "|" + H.fmt(V - VertexSet::single(x)) + ") >= 0";
    return "h(" + H.fmt(VertexSet::single(x)) + ";" + H.fmt(VertexSet::single(y)) + "|" + H.fmt(A) + ") >= 0";
}

std::vector<Elemental> elemental_constraints(VertexSet V) {
    std::vector<Elemental> out;
    auto m = V.members();
    for (int x : m) out.push_back({Elemental::Monotone, x, -1, {}});
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            VertexSet rest = V - VertexSet::single(m[i]) - VertexSet::single(m[j]);
            for_each_subset(rest, [&](VertexSet A) { out.push_back({Elemental::Submodular, m[i], m[j], A}); });
        }
    return out;
}

std::vector<Elemental> elemental_constraints(int k) {
    if (k < 0 || k > kMaxVertices) throw std::invalid_argument("vertex count out of range");
    return elemental_constraints(VertexSet::full(k));
}

std::optional<PolymatroidViolation> check_polymatroid(const Polymatroid& h) {
    if (!h(VertexSet()).is_zero()) return PolymatroidViolation{"h(empty) != 0", h(VertexSet()).str()};
    VertexSet V = VertexSet::full(h.k());
    for (const auto& e : elemental_constraints(V)) {
        Rat v = h.eval(e.form(V));
        if (v.sign() < 0) {
            std::ostringstream os;
            if (e.kind == Elemental::Monotone)
                os << "h(V) - h(V - {" << e.x << "}) = " << v;
            else
                os << "elemental {" << e.x << "," << e.y << "} given bits " << e.A.bits << " = " << v;
            return PolymatroidViolation{e.kind == Elemental::Monotone ? "monotonicity" : "submodularity", os.str()};
        }
    }
    return std::nullopt;
}

std::vector<VertexSet> ed_constraints(const Hypergraph& H) { return H.edges(); }

bool is_edge_dominated(const Polymatroid& h, const Hypergraph& H) {
    return std::all_of(H.edges().begin(), H.edges().end(), [&](VertexSet e) { return h(e) <= Rat(1); });
}

std::string MmTerm::str(const Hypergraph& H) const {
    std::string s = "MM(" + H.fmt(X) + ";" + H.fmt(Y) + ";" + H.fmt(Z);
    if (!G.empty()) s += "|" + H.fmt(G);
    return s + ")";
}

LinearForm mm_branch_form(const MmTerm& t, int branch, const Rat& gamma) {
    if (branch < 0 || branch > 2) throw std::invalid_argument("MM branch must be 0, 1 or 2");
    Rat cx = branch == 2 ? gamma : Rat(1);
    Rat cy = branch == 1 ? gamma : Rat(1);
    Rat cz = branch == 0 ? gamma : Rat(1);
    LinearForm f;
    f.add(conditional_form(t.X, t.G), cx);
    f.add(conditional_form(t.Y, t.G), cy);
    f.add(conditional_form(t.Z, t.G), cz);
    f.add(t.G, 1);
    return f;
}

Rat mm_branch_value(const Polymatroid& h, const MmTerm& t, int branch, const Rat& gamma) {
    return h.eval(mm_branch_form(t, branch, gamma));
}

Rat mm_value(const Polymatroid& h, const MmTerm& t, const Rat& gamma) {
    Rat best = mm_branch_value(h, t, 0, gamma);
    for (int b = 1; b < 3; ++b) best = max(best, mm_branch_value(h, t, b, gamma));
    return best;
}

std::vector<MmTerm> emm_terms(const Hypergraph& H, VertexSet X) {
    Incidence inc = incidence(H, X);
    const auto& d = inc.boundary;
    const int m = static_cast<int>(d.size());
    if (m > 20) throw std::invalid_argument("emm_terms: boundary too large");
    std::set<MmTerm> out;
    std::vector<VertexSet> unions(std::size_t{1} << m);
    for (std::uint32_t s = 1; s < unions.size(); ++s) {
        int low = std::countr_zero(s);
        unions[s] = unions[s & (s - 1)] | d[low];
    }
    const std::uint32_t all = static_cast<std::uint32_t>(unions.size() - 1);
    for (std::uint32_t a = 1; a <= all; ++a) {
        // b must contain every edge missing from a; any subset of a may be added.
        std::uint32_t forced = all & ~a;
        for_each_subset(VertexSet(a), [&](VertexSet extra) {
            std::uint32_t b = forced | extra.bits;
            if (b == 0) return;
            VertexSet A = unions[a], B = unions[b];
            if (!X.subset_of(A & B)) return;
            VertexSet lo = (A & B) - X, hi = (A | B) - X;
            for_each_subset(hi - lo, [&](VertexSet free) {
                VertexSet G = lo | free;
                VertexSet p = (A - B) - G, q = (B - A) - G;
                if (p.empty() || q.empty()) return;
                if (q < p) std::swap(p, q);
                out.insert(MmTerm{p, q, X, G});
            });
        });
    }
    return {out.begin(), out.end()};
}

std::optional<Rat> emm_value(const Polymatroid& h, const Hypergraph& H, VertexSet X, const Rat& gamma) {
    std::optional<Rat> best;
    for (const auto& t : emm_terms(H, X)) {
        Rat v = mm_value(h, t, gamma);
        if (!best || v < *best) best = v;
    }
    return best;
}

Polymatroid random_polymatroid(int k, std::mt19937_64& rng, int atoms, int max_weight) {
    // h(S) = total weight of atoms touched by S, each vertex touching a random atom subset.
    std::uniform_int_distribution<int> w(0, max_weight), coin(0, 2);
    std::vector<Rat> weight(atoms);
    for (auto& x : weight) x = Rat(w(rng), 1 + w(rng));
    std::vector<std::uint32_t> touch(k);
    for (int v = 0; v < k; ++v)
        for (int a = 0; a < atoms; ++a)
            if (coin(rng) == 0) touch[v] |= 1u << a;
    Polymatroid h(k);
    for (std::uint32_t s = 1; s < (1u << k); ++s) {
        std::uint32_t cover = 0;
        for (int v = 0; v < k; ++v)
            if ((s >> v) & 1u) cover |= touch[v];
        Rat total;
        for (int a = 0; a < atoms; ++a)
            if ((cover >> a) & 1u) total += weight[a];
        h[VertexSet(s)] = total;
    }
    return h;
}

Polymatroid normalize_to_edges(const Polymatroid& h, const Hypergraph& H) {
    Rat top;
    for (VertexSet e : H.edges()) top = max(top, h(e));
    if (top.is_zero()) return h;
    Polymatroid out(h.k());
    for (std::uint32_t s = 0; s < h.values().size(); ++s) out[VertexSet(s)] = h(VertexSet(s)) / top;
    return out;
}

Polymatroid modular_polymatroid(const std::vector<Rat>& weights) {
    int k = static_cast<int>(weights.size());
    Polymatroid h(k);
    for (std::uint32_t s = 1; s < (1u << k); ++s) {
        Rat t;
        for (int v = 0; v < k; ++v)
            if ((s >> v) & 1u) t += weights[v];
        h[VertexSet(s)] = t;
    }
    return h;
}

}  // namespace cqw
