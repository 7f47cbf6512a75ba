#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqw {

inline constexpr int kMaxVertices = 16;

struct VertexSet {
    std::uint32_t bits = 0;

    constexpr VertexSet() = default;
    constexpr explicit VertexSet(std::uint32_t b) : bits(b) {}
    static constexpr VertexSet single(int v) { return VertexSet(1u << v); }
    static constexpr VertexSet full(int k) { return VertexSet(k >= 32 ? ~0u : ((1u << k) - 1)); }

    constexpr bool empty() const { return bits == 0; }
    constexpr int size() const { return std::popcount(bits); }
    constexpr bool contains(int v) const { return (bits >> v) & 1u; }
    constexpr bool subset_of(VertexSet o) const { return (bits & ~o.bits) == 0; }
    constexpr bool intersects(VertexSet o) const { return (bits & o.bits) != 0; }
    constexpr int lowest() const { return std::countr_zero(bits); }

    constexpr VertexSet operator|(VertexSet o) const { return VertexSet(bits | o.bits); }
    constexpr VertexSet operator&(VertexSet o) const { return VertexSet(bits & o.bits); }
    constexpr VertexSet operator-(VertexSet o) const { return VertexSet(bits & ~o.bits); }
    VertexSet& operator|=(VertexSet o) { bits |= o.bits; return *this; }
    VertexSet& operator&=(VertexSet o) { bits &= o.bits; return *this; }
    VertexSet& operator-=(VertexSet o) { bits &= ~o.bits; return *this; }
    constexpr auto operator<=>(const VertexSet&) const = default;

    std::vector<int> members() const {
        std::vector<int> out;
        for (std::uint32_t b = bits; b; b &= b - 1) out.push_back(std::countr_zero(b));
        return out;
    }
};

// Calls f(S) for every subset S of `of` (including empty and `of`), ascending.
template <class F>
void for_each_subset(VertexSet of, F&& f) {
    std::uint32_t s = 0;
    for (;;) {
        f(VertexSet(s));
        if (s == of.bits) break;
        s = (s - of.bits) & of.bits;
    }
}

VertexSet permute(VertexSet s, const std::vector<int>& perm);

using EdgeList = std::vector<VertexSet>;

class Hypergraph {
public:
    Hypergraph() = default;
    // Edges are canonicalized (sorted, duplicates dropped).  Throws
    // std::invalid_argument on empty edges or isolated vertices.
    Hypergraph(std::vector<std::string> names, EdgeList edges);
    static Hypergraph from_names(const std::vector<std::vector<std::string>>& edges);

    const std::vector<std::string>& names() const { return names_; }
    int num_names() const { return static_cast<int>(names_.size()); }
    VertexSet vertices() const { return vertices_; }
    const EdgeList& edges() const { return edges_; }
    bool has_edge(VertexSet e) const;
    int index_of(const std::string& name) const;
    VertexSet set_of(const std::vector<std::string>& names) const;
    // "ABC" when every member name is one character, "{X1,X2}" otherwise.
    std::string fmt(VertexSet s) const;
    std::string str() const;

    bool operator==(const Hypergraph& o) const { return vertices_ == o.vertices_ && edges_ == o.edges_; }

private:
    friend Hypergraph make_reduced(const Hypergraph&, VertexSet, EdgeList);
    std::vector<std::string> names_;
    VertexSet vertices_;
    EdgeList edges_;
};

struct Incidence {
    EdgeList boundary;
    VertexSet U;
    VertexSet N;
};

Incidence incidence(const Hypergraph& H, VertexSet X);
Hypergraph eliminate(const Hypergraph& H, VertexSet X);

using Gveo = std::vector<VertexSet>;

struct EliminationTrace {
    std::vector<Hypergraph> hypergraphs;  // H_1 = H, ... (one per block)
    std::vector<EdgeList> boundaries;
    std::vector<VertexSet> unions;
    std::vector<VertexSet> neighbors;
    std::vector<int> trimmed;  // 0-based indices i with U_i not inside any earlier U_j
};

void check_gveo(VertexSet V, const Gveo& sigma);
EliminationTrace elimination_trace(const Hypergraph& H, const Gveo& sigma);

// Every ordered set partition of V, first block chosen in ascending bit order.
void for_each_gveo(VertexSet V, const std::function<void(const Gveo&)>& f);
std::vector<Gveo> enumerate_gveos(int k);
std::vector<Gveo> enumerate_gveos(VertexSet V);
// Orders with singleton blocks only.
std::vector<Gveo> enumerate_veos(VertexSet V);

struct TreeDecomposition {
    std::vector<VertexSet> bags;
    std::vector<std::pair<int, int>> tree_edges;
};

TreeDecomposition td_from_veo(const Hypergraph& H, const Gveo& sigma);

struct TdViolation {
    enum Kind { NotATree, EdgeCover, RunningIntersection } kind;
    std::string detail;
};
std::optional<TdViolation> validate_td(const Hypergraph& H, const TreeDecomposition& td);

// Vertex permutations (perm[v] = image) that map the edge set onto itself.
// Falls back to the identity alone when the vertex count exceeds 8.
std::vector<std::vector<int>> automorphisms(const Hypergraph& H);

// Every pair of vertices shares an edge.
bool is_clustered(const Hypergraph& H);
bool is_clique(const Hypergraph& H);

// Named families used by tests and the command line.
Hypergraph clique_hypergraph(int k);
Hypergraph cycle_hypergraph(int k);
Hypergraph pyramid_hypergraph(int k);

}  // namespace cqw
