#include "cqw/hypergraph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace cqw {

VertexSet permute(VertexSet s, const std::vector<int>& perm) {
    VertexSet out;
    for (std::uint32_t b = s.bits; b; b &= b - 1) out |= VertexSet::single(perm[std::countr_zero(b)]);
    return out;
}

namespace {

EdgeList canonical(EdgeList edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace

Hypergraph make_reduced(const Hypergraph& base, VertexSet V, EdgeList edges) {
    Hypergraph h;
    h.names_ = base.names_;
    h.vertices_ = V;
    h.edges_ = canonical(std::move(edges));
    return h;
}

Hypergraph::Hypergraph(std::vector<std::string> names, EdgeList edges) : names_(std::move(names)) {
    const int k = static_cast<int>(names_.size());
    if (k > kMaxVertices) throw std::invalid_argument("too many vertices (max 16)");
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (names_[i] == names_[j]) throw std::invalid_argument("duplicate vertex name " + names_[i]);
    vertices_ = VertexSet::full(k);
    VertexSet covered;
    for (VertexSet e : edges) {
        if (e.empty()) throw std::invalid_argument("empty hyperedge");
        if (!e.subset_of(vertices_)) throw std::invalid_argument("hyperedge outside vertex set");
        covered |= e;
    }
    if (covered != vertices_) throw std::invalid_argument("isolated vertex " + fmt(vertices_ - covered));
    edges_ = canonical(std::move(edges));
}

Hypergraph Hypergraph::from_names(const std::vector<std::vector<std::string>>& edges) {
    std::vector<std::string> names;
    for (const auto& e : edges)
        for (const auto& v : e)
            if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
    EdgeList es;
    for (const auto& e : edges) {
        VertexSet s;
        for (const auto& v : e) s |= VertexSet::single(static_cast<int>(std::find(names.begin(), names.end(), v) - names.begin()));
        es.push_back(s);
    }
    return Hypergraph(std::move(names), std::move(es));
}

bool Hypergraph::has_edge(VertexSet e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

int Hypergraph::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::invalid_argument("unknown vertex " + name);
    return static_cast<int>(it - names_.begin());
}

VertexSet Hypergraph::set_of(const std::vector<std::string>& names) const {
    VertexSet s;
    for (const auto& n : names) s |= VertexSet::single(index_of(n));
    return s;
}

std::string Hypergraph::fmt(VertexSet s) const {
    auto m = s.members();
    bool short_names = std::all_of(m.begin(), m.end(), [&](int v) { return v < num_names() && names_[v].size() == 1; });
    std::string out;
    if (short_names) {
        for (int v : m) out += names_[v];
        return out.empty() ? "{}" : out;
    }
    out = "{";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ",";
        out += m[i] < num_names() ? names_[m[i]] : "v" + std::to_string(m[i]);
    }
    return out + "}";
}

std::string Hypergraph::str() const {
    std::string out = "(" + fmt(vertices_) + "; ";
    for (std::size_t i = 0; i < edges_.size(); ++i) out += (i ? " " : "") + fmt(edges_[i]);
    return out + ")";
}

Incidence incidence(const Hypergraph& H, VertexSet X) {
    if (X.empty() || !X.subset_of(H.vertices())) throw std::invalid_argument("incidence: X must be a non-empty subset of the vertices");
    Incidence inc;
    for (VertexSet e : H.edges())
        if (e.intersects(X)) {
            inc.boundary.push_back(e);
            inc.U |= e;
        }
    inc.N = inc.U - X;
    return inc;
}

Hypergraph eliminate(const Hypergraph& H, VertexSet X) {
    Incidence inc = incidence(H, X);
    EdgeList rest;
    for (VertexSet e : H.edges())
        if (!e.intersects(X)) rest.push_back(e);
    if (!inc.N.empty()) rest.push_back(inc.N);
    return make_reduced(H, H.vertices() - X, std::move(rest));
}

void check_gveo(VertexSet V, const Gveo& sigma) {
    VertexSet seen;
    for (VertexSet b : sigma) {
        if (b.empty()) throw std::invalid_argument("elimination order has an empty block");
        if (b.intersects(seen)) throw std::invalid_argument("elimination order blocks overlap");
        seen |= b;
    }
    if (seen != V) throw std::invalid_argument("elimination order does not partition the vertices");
}

EliminationTrace elimination_trace(const Hypergraph& H, const Gveo& sigma) {
    check_gveo(H.vertices(), sigma);
    EliminationTrace tr;
    Hypergraph cur = H;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        Incidence inc = incidence(cur, sigma[i]);
        tr.hypergraphs.push_back(cur);
        tr.boundaries.push_back(inc.boundary);
        tr.unions.push_back(inc.U);
        tr.neighbors.push_back(inc.N);
        bool keep = true;
        for (std::size_t j = 0; j < i && keep; ++j)
            if (inc.U.subset_of(tr.unions[j])) keep = false;
        if (keep) tr.trimmed.push_back(static_cast<int>(i));
        cur = eliminate(cur, sigma[i]);
    }
    return tr;
}

namespace {

void gveo_rec(VertexSet rest, Gveo& prefix, const std::function<void(const Gveo&)>& f) {
    if (rest.empty()) {
        f(prefix);
        return;
    }
    for_each_subset(rest, [&](VertexSet s) {
        if (s.empty()) return;
        prefix.push_back(s);
        gveo_rec(rest - s, prefix, f);
        prefix.pop_back();
    });
}

}  // namespace

void for_each_gveo(VertexSet V, const std::function<void(const Gveo&)>& f) {
    Gveo prefix;
    if (V.empty()) return;
    gveo_rec(V, prefix, f);
}

std::vector<Gveo> enumerate_gveos(VertexSet V) {
    std::vector<Gveo> out;
    for_each_gveo(V, [&](const Gveo& g) { out.push_back(g); });
    return out;
}

std::vector<Gveo> enumerate_gveos(int k) {
    if (k < 1 || k > kMaxVertices) throw std::invalid_argument("enumerate_gveos: k out of range");
    return enumerate_gveos(VertexSet::full(k));
}

std::vector<Gveo> enumerate_veos(VertexSet V) {
    std::vector<int> m = V.members();
    std::vector<Gveo> out;
    do {
        Gveo g;
        for (int v : m) g.push_back(VertexSet::single(v));
        out.push_back(g);
    } while (std::next_permutation(m.begin(), m.end()));
    return out;
}

TreeDecomposition td_from_veo(const Hypergraph& H, const Gveo& sigma) {
    for (VertexSet b : sigma)
        if (b.size() != 1) throw std::invalid_argument("td_from_veo: order must have singleton blocks");
    EliminationTrace tr = elimination_trace(H, sigma);
    const int n = static_cast<int>(sigma.size());
    // Bag i hangs below the first later step that eliminates part of N_i.
    std::vector<int> parent(n, -1);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j)
            if (tr.neighbors[i].intersects(sigma[j])) {
                parent[i] = j;
                break;
            }
        if (parent[i] < 0 && i + 1 < n) parent[i] = n - 1;  // disconnected piece: attach anywhere
    }
    std::vector<VertexSet> bags = tr.unions;
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        if (parent[i] >= 0 && parent[i] != i) {
            adj[i].push_back(parent[i]);
            adj[parent[i]].push_back(i);
        }
    std::vector<bool> alive(n, true);
    // Contract any tree edge whose one side is contained in the other.
    for (bool changed = true; changed;) {
        changed = false;
        for (int a = 0; a < n && !changed; ++a) {
            if (!alive[a]) continue;
            for (int b : adj[a]) {
                if (!bags[a].subset_of(bags[b])) continue;
                for (int c : adj[a]) {
                    if (c == b) continue;
                    std::replace(adj[c].begin(), adj[c].end(), a, b);
                    adj[b].push_back(c);
                }
                adj[b].erase(std::remove(adj[b].begin(), adj[b].end(), a), adj[b].end());
                adj[a].clear();
                alive[a] = false;
                changed = true;
                break;
            }
        }
    }
    TreeDecomposition td;
    std::vector<int> id(n, -1);
    for (int i = 0; i < n; ++i)
        if (alive[i]) {
            id[i] = static_cast<int>(td.bags.size());
            td.bags.push_back(bags[i]);
        }
    for (int i = 0; i < n; ++i)
        for (int j : adj[i])
            if (alive[i] && alive[j] && i < j) td.tree_edges.emplace_back(id[i], id[j]);
    return td;
}

std::optional<TdViolation> validate_td(const Hypergraph& H, const TreeDecomposition& td) {
    const int n = static_cast<int>(td.bags.size());
    if (n == 0) return TdViolation{TdViolation::NotATree, "no bags"};
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : td.tree_edges) {
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) return TdViolation{TdViolation::NotATree, "bad tree edge"};
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    auto components = [&](const std::vector<bool>& keep) {
        std::vector<int> comp(n, -1);
        int c = 0;
        for (int s = 0; s < n; ++s) {
            if (!keep[s] || comp[s] >= 0) continue;
            std::vector<int> st{s};
            comp[s] = c;
            while (!st.empty()) {
                int u = st.back();
                st.pop_back();
                for (int v : adj[u])
                    if (keep[v] && comp[v] < 0) {
                        comp[v] = c;
                        st.push_back(v);
                    }
            }
            ++c;
        }
        return c;
    };
    if (static_cast<int>(td.tree_edges.size()) != n - 1 || components(std::vector<bool>(n, true)) != 1)
        return TdViolation{TdViolation::NotATree, "bags do not form a tree"};
    for (VertexSet e : H.edges()) {
        bool covered = std::any_of(td.bags.begin(), td.bags.end(), [&](VertexSet b) { return e.subset_of(b); });
        if (!covered) return TdViolation{TdViolation::EdgeCover, "edge " + H.fmt(e) + " is in no bag"};
    }
    for (int v : H.vertices().members()) {
        std::vector<bool> keep(n);
        bool any = false;
        for (int i = 0; i < n; ++i) any |= (keep[i] = td.bags[i].contains(v));
        if (any && components(keep) != 1)
            return TdViolation{TdViolation::RunningIntersection, "bags containing " + H.names()[v] + " are disconnected"};
    }
    return std::nullopt;
}

std::vector<std::vector<int>> automorphisms(const Hypergraph& H) {
    const int k = H.num_names();
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    if (k > 8) {
        out.push_back(perm);
        return out;
    }
    std::vector<int> verts = H.vertices().members();
    // Permute only the live vertices; eliminated names stay fixed.
    std::vector<int> img = verts;
    do {
        std::vector<int> p = perm;
        for (std::size_t i = 0; i < verts.size(); ++i) p[verts[i]] = img[i];
        EdgeList mapped;
        for (VertexSet e : H.edges()) mapped.push_back(permute(e, p));
        std::sort(mapped.begin(), mapped.end());
        if (mapped == H.edges()) out.push_back(p);
    } while (std::next_permutation(img.begin(), img.end()));
    return out;
}

bool is_clustered(const Hypergraph& H) {
    auto m = H.vertices().members();
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            VertexSet p = VertexSet::single(m[i]) | VertexSet::single(m[j]);
            bool found = std::any_of(H.edges().begin(), H.edges().end(), [&](VertexSet e) { return p.subset_of(e); });
            if (!found) return false;
        }
    return true;
}

bool is_clique(const Hypergraph& H) {
    int k = H.vertices().size();
    if (static_cast<int>(H.edges().size()) != k * (k - 1) / 2) return false;
    return std::all_of(H.edges().begin(), H.edges().end(), [](VertexSet e) { return e.size() == 2; });
}

namespace {

std::vector<std::string> letters(int k, const std::vector<std::string>& preferred) {
    if (k <= static_cast<int>(preferred.size())) return {preferred.begin(), preferred.begin() + k};
    std::vector<std::string> out;
    for (int i = 0; i < k; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

}  // namespace

Hypergraph clique_hypergraph(int k) {
    if (k < 2 || k > kMaxVertices) throw std::invalid_argument("clique size out of range");
    auto names = letters(k, {"X", "Y", "Z", "W", "L", "M"});
    EdgeList es;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) es.push_back(VertexSet::single(i) | VertexSet::single(j));
    return Hypergraph(names, es);
}

Hypergraph cycle_hypergraph(int k) {
    if (k < 3 || k > kMaxVertices) throw std::invalid_argument("cycle length out of range");
    auto names = letters(k, {});
    EdgeList es;
    for (int i = 0; i < k; ++i) es.push_back(VertexSet::single(i) | VertexSet::single((i + 1) % k));
    return Hypergraph(names, es);
}

Hypergraph pyramid_hypergraph(int k) {
    if (k < 2 || k + 1 > kMaxVertices) throw std::invalid_argument("pyramid size out of range");
    std::vector<std::string> names{"Y"};
    for (int i = 1; i <= k; ++i) names.push_back("X" + std::to_string(i));
    EdgeList es;
    VertexSet base;
    for (int i = 1; i <= k; ++i) {
        es.push_back(VertexSet::single(0) | VertexSet::single(i));
        base |= VertexSet::single(i);
    }
    es.push_back(base);
    return Hypergraph(names, es);
}

}  // namespace cqw
