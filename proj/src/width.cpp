#include "cqw/width.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

namespace cqw {

FormInfo join_info(VertexSet U) {
    FormInfo f;
    f.join = true;
    f.U = U;
    return f;
}

FormInfo branch_info(const MmTerm& t, int branch) {
    MmTerm r = t;
    if (branch == 1) r = MmTerm{t.X, t.Z, t.Y, t.G};
    else if (branch == 2) r = MmTerm{t.Y, t.Z, t.X, t.G};
    else if (branch != 0) throw std::invalid_argument("MM branch must be 0, 1 or 2");
    if (r.Y < r.X) std::swap(r.X, r.Y);
    FormInfo f;
    f.join = false;
    f.term = r;
    f.U = r.X | r.Y | r.Z | r.G;
    return f;
}

LinearForm form_of(const FormInfo& info, const Rat& gamma) {
    return info.join ? entropy_of(info.U) : mm_branch_form(info.term, 0, gamma);
}

WidthLp build_width_lp(const Hypergraph& H, std::vector<FormInfo> forms, const Rat& gamma) {
    WidthLp w;
    w.k = H.num_names();
    w.gamma = gamma;
    w.forms = std::move(forms);
    const VertexSet V = VertexSet::full(w.k);
    w.elementals = elemental_constraints(V);
    w.edges = H.edges();
    const int n = 1 << w.k;
    w.lp = LinearProgram(n);
    w.lp.objective[w.t_var()] = 1;
    auto row_of = [&](const LinearForm& f, const Rat& scale) {
        std::vector<Rat> a(n);
        for (const auto& [b, c] : f.terms) a[b - 1] = c * scale;
        return a;
    };
    for (const auto& fi : w.forms) {
        auto a = row_of(form_of(fi, gamma), Rat(-1));
        a[w.t_var()] = 1;
        w.lp.add(std::move(a), Rel::Le, Rat(0));
    }
    for (const auto& e : w.elementals) w.lp.add(row_of(e.form(V), Rat(-1)), Rel::Le, Rat(0));
    for (VertexSet e : w.edges) w.lp.add(row_of(entropy_of(e), Rat(1)), Rel::Le, Rat(1));
    return w;
}

Polymatroid witness_of(const WidthLp& w, const LpSolution& sol) {
    Polymatroid h(w.k);
    for (std::uint32_t s = 1; s < (1u << w.k); ++s) h[VertexSet(s)] = sol.primal[s - 1];
    return h;
}

int MinMaxExpr::intern(const FormInfo& fi) {
    LinearForm f = form_of(fi, gamma);
    std::size_t key = f.hash();
    auto [lo, hi] = lookup_.equal_range(key);
    for (auto it = lo; it != hi; ++it)
        if (forms[it->second] == f) return it->second;
    int id = static_cast<int>(forms.size());
    forms.push_back(std::move(f));
    info.push_back(fi);
    lookup_.emplace(key, id);
    return id;
}

std::vector<Rat> MinMaxExpr::form_values(const Polymatroid& h) const {
    std::vector<Rat> v(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i) v[i] = h.eval(forms[i]);
    return v;
}

namespace {

Rat atom_value(const MinMaxAtom& a, const std::vector<Rat>& v) {
    Rat best = v[a.forms[0]];
    for (int f : a.forms) best = max(best, v[f]);
    return best;
}

Rat item_value(const MinMaxItem& it, const std::vector<Rat>& v) {
    Rat best = atom_value(it.atoms[0], v);
    for (const auto& a : it.atoms) best = min(best, atom_value(a, v));
    return best;
}

Rat group_value(const MinMaxGroup& g, const std::vector<Rat>& v) {
    Rat best = item_value(g.items[0], v);
    for (const auto& it : g.items) best = max(best, item_value(it, v));
    return best;
}

Rat expr_value(const MinMaxExpr& e, const std::vector<Rat>& v) {
    Rat best = group_value(e.groups[0], v);
    for (const auto& g : e.groups) best = min(best, group_value(g, v));
    return best;
}

}  // namespace

Rat MinMaxExpr::eval(const Polymatroid& h) const { return expr_value(*this, form_values(h)); }

mpz_class MinMaxExpr::distributed_size() const {
    mpz_class total = 1;
    for (const auto& g : groups) {
        mpz_class sum = 0;
        for (const auto& it : g.items) {
            mpz_class prod = 1;
            for (const auto& a : it.atoms) prod *= static_cast<unsigned long>(a.forms.size());
            sum += prod;
        }
        total *= sum;
    }
    return total;
}

std::string to_string(WidthMode m) {
    switch (m) {
        case WidthMode::Auto: return "auto";
        case WidthMode::Exhaustive: return "exhaustive";
        case WidthMode::Pruned: return "pruned";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Expression builders

namespace {

constexpr int kMaxWidthVertices = 6;

void check_size(const Hypergraph& H) {
    if (H.num_names() > kMaxWidthVertices)
        throw BudgetError("width computation supports at most 6 vertices, got " + std::to_string(H.num_names()));
}

Rat gamma_of(const Rat& omega) {
    if (omega < Rat(2) || omega > Rat(3)) throw std::invalid_argument("omega must lie in [2, 3]");
    return omega - 2;
}

MinMaxAtom mm_atom(MinMaxExpr& e, const MmTerm& t) {
    MinMaxAtom a;
    for (int b = 0; b < 3; ++b) a.forms.push_back(e.intern(branch_info(t, b)));
    return a;
}

MinMaxAtom join_atom(MinMaxExpr& e, VertexSet U) { return MinMaxAtom{{e.intern(join_info(U))}}; }

}  // namespace

MinMaxExpr subw_expr(const Hypergraph& H) {
    check_size(H);
    MinMaxExpr e;
    e.gamma = 1;
    for (const auto& veo : enumerate_veos(H.vertices())) {
        MinMaxGroup g;
        for (VertexSet bag : td_from_veo(H, veo).bags) g.items.push_back(MinMaxItem{{join_atom(e, bag)}});
        e.groups.push_back(std::move(g));
    }
    return e;
}

MinMaxExpr osubw_expr(const Hypergraph& H, const Rat& omega) {
    check_size(H);
    MinMaxExpr e;
    e.gamma = gamma_of(omega);
    for (const auto& sigma : enumerate_gveos(H.vertices())) {
        auto tr = elimination_trace(H, sigma);
        MinMaxGroup g;
        for (int i : tr.trimmed) {
            MinMaxItem it;
            it.atoms.push_back(join_atom(e, tr.unions[i]));
            for (const auto& t : emm_terms(tr.hypergraphs[i], sigma[i])) it.atoms.push_back(mm_atom(e, t));
            g.items.push_back(std::move(it));
        }
        e.groups.push_back(std::move(g));
    }
    return e;
}

MinMaxExpr osubw_clique_expr(const Hypergraph& H, const Rat& omega) {
    if (!is_clique(H)) throw std::invalid_argument("osubw_clique requires a clique hypergraph");
    check_size(H);
    MinMaxExpr e;
    e.gamma = gamma_of(omega);
    e.groups.push_back(MinMaxGroup{{MinMaxItem{{join_atom(e, H.vertices())}}}});
    // MM is symmetric in its three dimensions, so terms are keyed by the
    // unordered triple of dimensions plus G.
    std::set<std::pair<std::vector<std::uint32_t>, std::uint32_t>> seen;
    for_each_subset(H.vertices(), [&](VertexSet X) {
        if (X.empty()) return;
        for (const auto& t : emm_terms(H, X)) {
            std::vector<std::uint32_t> dims{t.X.bits, t.Y.bits, t.Z.bits};
            std::sort(dims.begin(), dims.end());
            if (!seen.insert({dims, t.G.bits}).second) continue;
            e.groups.push_back(MinMaxGroup{{MinMaxItem{{mm_atom(e, t)}}}});
        }
    });
    return e;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

using FormSet = std::vector<int>;  // sorted form ids

std::vector<int> identity_perm(int k) {
    std::vector<int> p(k);
    for (int i = 0; i < k; ++i) p[i] = i;
    return p;
}

struct FormSetHash {
    std::size_t operator()(const FormSet& s) const {
        std::size_t h = s.size();
        for (int x : s) h = h * 1000003u ^ static_cast<std::size_t>(x);
        return h;
    }
};

class Solver {
public:
    Solver(const Hypergraph& H, MinMaxExpr& e, const WidthOptions& opt) : H_(H), e_(e), opt_(opt) {
        root_ = e_.intern(join_info(H.vertices()));
        refresh_lower_sets();
    }

    // g <= f on every polymatroid (sufficient syntactic test).
    bool le(int g, int f) const {
        if (g == f) return true;
        const FormInfo& a = e_.info[g];
        return a.join && a.U.subset_of(lower_[f]);
    }

    bool implied(int f, const FormSet& S) const {
        return std::any_of(S.begin(), S.end(), [&](int g) { return le(g, f); });
    }

    // Drops every member implied by another member.
    FormSet minimal(FormSet S) const {
        std::sort(S.begin(), S.end());
        S.erase(std::unique(S.begin(), S.end()), S.end());
        FormSet out;
        for (int f : S) {
            bool red = false;
            for (int g : S)
                if (g != f && le(g, f)) {
                    red = true;
                    break;
                }
            if (!red) out.push_back(f);
        }
        return out;
    }

    void reduce();
    WidthReport exhaustive();
    WidthReport pruned();

private:
    void refresh_lower_sets() {
        lower_.resize(e_.forms.size());
        for (std::size_t f = 0; f < e_.forms.size(); ++f) {
            const FormInfo& fi = e_.info[f];
            if (fi.join) {
                lower_[f] = fi.U;
            } else {
                VertexSet L = fi.term.X | fi.term.Y | fi.term.G;
                if (e_.gamma >= Rat(1)) L |= fi.term.Z;
                lower_[f] = L;
            }
        }
    }

    bool atom_le(const MinMaxAtom& a, const MinMaxAtom& b) const {
        for (int f : a.forms)
            if (std::none_of(b.forms.begin(), b.forms.end(), [&](int g) { return le(f, g); })) return false;
        return true;
    }
    bool item_le(const MinMaxItem& a, const MinMaxItem& b) const {
        for (const auto& beta : b.atoms)
            if (std::none_of(a.atoms.begin(), a.atoms.end(), [&](const MinMaxAtom& alpha) { return atom_le(alpha, beta); }))
                return false;
        return true;
    }
    bool group_le(const MinMaxGroup& a, const MinMaxGroup& b) const {
        for (const auto& ia : a.items)
            if (std::none_of(b.items.begin(), b.items.end(), [&](const MinMaxItem& ib) { return item_le(ia, ib); }))
                return false;
        return true;
    }

    bool atom_sat(const MinMaxAtom& a, const FormSet& S) const {
        return std::any_of(a.forms.begin(), a.forms.end(), [&](int f) { return implied(f, S); });
    }
    bool item_sat(const MinMaxItem& it, const FormSet& S) const {
        return std::all_of(it.atoms.begin(), it.atoms.end(), [&](const MinMaxAtom& a) { return atom_sat(a, S); });
    }
    bool group_sat(const MinMaxGroup& g, const FormSet& S) const {
        return std::any_of(g.items.begin(), g.items.end(), [&](const MinMaxItem& it) { return item_sat(it, S); });
    }

    std::vector<FormSet> clauses(const MinMaxGroup& g, const FormSet& S) const;
    int permute_form(std::size_t p, int f);
    FormSet permute_set(std::size_t p, const FormSet& S);

    WidthReport finish(WidthReport rep);

    const Hypergraph& H_;
    MinMaxExpr& e_;
    WidthOptions opt_;
    int root_ = 0;
    std::vector<VertexSet> lower_;
    std::vector<std::vector<int>> perms_;
    std::vector<std::unordered_map<int, int>> perm_cache_;
};

template <class T, class Less>
void dedup_by(std::vector<T>& v, Less key) {
    std::vector<T> out;
    std::set<decltype(key(v[0]))> seen;
    for (auto& x : v)
        if (seen.insert(key(x)).second) out.push_back(std::move(x));
    v = std::move(out);
}

std::vector<int> atom_key(const MinMaxAtom& a) { return a.forms; }
std::vector<std::vector<int>> item_key(const MinMaxItem& it) {
    std::vector<std::vector<int>> k;
    for (const auto& a : it.atoms) k.push_back(a.forms);
    return k;
}
std::vector<std::vector<std::vector<int>>> group_key(const MinMaxGroup& g) {
    std::vector<std::vector<std::vector<int>>> k;
    for (const auto& it : g.items) k.push_back(item_key(it));
    return k;
}

void Solver::reduce() {
    for (auto& g : e_.groups) {
        for (auto& it : g.items) {
            for (auto& a : it.atoms) {
                std::sort(a.forms.begin(), a.forms.end());
                a.forms.erase(std::unique(a.forms.begin(), a.forms.end()), a.forms.end());
                std::vector<int> keep;
                for (int f : a.forms)
                    if (std::none_of(a.forms.begin(), a.forms.end(), [&](int g2) { return g2 != f && le(f, g2); }))
                        keep.push_back(f);
                a.forms = keep;
            }
            std::sort(it.atoms.begin(), it.atoms.end(), [](const auto& x, const auto& y) { return x.forms < y.forms; });
            dedup_by(it.atoms, atom_key);
            std::vector<MinMaxAtom> keep;
            for (std::size_t i = 0; i < it.atoms.size(); ++i) {
                bool red = false;
                for (std::size_t j = 0; j < it.atoms.size() && !red; ++j) red = j != i && atom_le(it.atoms[j], it.atoms[i]);
                if (!red) keep.push_back(it.atoms[i]);
            }
            it.atoms = keep;
        }
        std::sort(g.items.begin(), g.items.end(), [](const auto& x, const auto& y) { return item_key(x) < item_key(y); });
        dedup_by(g.items, item_key);
        std::vector<MinMaxItem> keep;
        for (std::size_t i = 0; i < g.items.size(); ++i) {
            bool red = false;
            for (std::size_t j = 0; j < g.items.size() && !red && !opt_.complete_family; ++j)
                red = j != i && item_le(g.items[i], g.items[j]);
            if (!red) keep.push_back(g.items[i]);
        }
        g.items = keep;
    }
    dedup_by(e_.groups, group_key);
    std::vector<MinMaxGroup> keep;
    for (std::size_t i = 0; i < e_.groups.size(); ++i) {
        bool red = false;
        for (std::size_t j = 0; j < e_.groups.size() && !red; ++j) red = j != i && group_le(e_.groups[j], e_.groups[i]);
        if (!red) keep.push_back(e_.groups[i]);
    }
    e_.groups = keep;
}

// Residual-minimal clauses of g at S: one per way of picking an item and a
// form from each of its atoms, keeping only the forms S does not imply, and
// discarding picks whose constraints are implied by another pick.
std::vector<FormSet> Solver::clauses(const MinMaxGroup& g, const FormSet& S) const {
    std::set<FormSet> raw;
    for (const auto& it : g.items) {
        std::vector<const MinMaxAtom*> open;
        for (const auto& a : it.atoms)
            if (!atom_sat(a, S)) open.push_back(&a);
        std::vector<std::size_t> idx(open.size(), 0);
        while (true) {
            FormSet r;
            for (std::size_t i = 0; i < open.size(); ++i) r.push_back(open[i]->forms[idx[i]]);
            raw.insert(minimal(r));
            std::size_t pos = 0;
            while (pos < open.size() && ++idx[pos] == open[pos]->forms.size()) idx[pos++] = 0;
            if (pos == open.size()) break;
        }
    }
    std::vector<FormSet> all(raw.begin(), raw.end());
    std::vector<FormSet> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        FormSet ctx = S;
        ctx.insert(ctx.end(), all[i].begin(), all[i].end());
        auto in_ctx = [&](int f, const FormSet& c) {
            return opt_.complete_family ? std::find(c.begin(), c.end(), f) != c.end() : implied(f, c);
        };
        bool dominated = false;
        for (std::size_t j = 0; j < all.size() && !dominated; ++j) {
            if (j == i) continue;
            bool covers = std::all_of(all[j].begin(), all[j].end(), [&](int f) { return in_ctx(f, ctx); });
            if (!covers) continue;
            // Mutual implication keeps the lower index only.
            FormSet ctx2 = S;
            ctx2.insert(ctx2.end(), all[j].begin(), all[j].end());
            bool back = std::all_of(all[i].begin(), all[i].end(), [&](int f) { return in_ctx(f, ctx2); });
            dominated = !back || j < i;
        }
        if (!dominated) out.push_back(all[i]);
    }
    return out;
}

int Solver::permute_form(std::size_t p, int f) {
    auto& cache = perm_cache_[p];
    if (auto it = cache.find(f); it != cache.end()) return it->second;
    const auto& perm = perms_[p];
    FormInfo fi = e_.info[f];
    if (fi.join) {
        fi.U = permute(fi.U, perm);
    } else {
        MmTerm t{permute(fi.term.X, perm), permute(fi.term.Y, perm), permute(fi.term.Z, perm), permute(fi.term.G, perm)};
        fi = branch_info(t, 0);
    }
    int id = e_.intern(fi);
    if (lower_.size() < e_.forms.size()) refresh_lower_sets();
    cache[f] = id;
    return id;
}

FormSet Solver::permute_set(std::size_t p, const FormSet& S) {
    FormSet out;
    for (int f : S) out.push_back(permute_form(p, f));
    std::sort(out.begin(), out.end());
    return out;
}

WidthReport Solver::exhaustive() {
    perms_ = automorphisms(H_);
    perm_cache_.assign(perms_.size(), {});
    WidthReport rep;
    rep.mode = WidthMode::Exhaustive;

    std::unordered_set<FormSet, FormSetHash> visited;
    std::vector<FormSet> stack{FormSet{root_}};
    visited.insert(stack.back());
    std::map<FormSet, std::vector<std::vector<int>>> leaves;  // canonical -> images
    std::vector<FormSet> leaf_order;
    while (!stack.empty()) {
        FormSet S = std::move(stack.back());
        stack.pop_back();
        if (++rep.nodes > opt_.node_budget)
            throw BudgetError("exhaustive width search exceeded " + std::to_string(opt_.node_budget) + " nodes");
        // Pick the open group with the fewest raw choices.
        const MinMaxGroup* best = nullptr;
        double best_cost = 0;
        for (const auto& g : e_.groups) {
            if (group_sat(g, S)) continue;
            double cost = 0;
            for (const auto& it : g.items) {
                double p = 1;
                for (const auto& a : it.atoms)
                    if (!atom_sat(a, S)) p *= static_cast<double>(a.forms.size());
                cost += p;
            }
            if (!best || cost < best_cost) best = &g, best_cost = cost;
        }
        if (!best) {
            FormSet canon = S;
            for (std::size_t p = 1; p < perms_.size(); ++p) canon = std::min(canon, permute_set(p, S));
            if (!leaves.count(canon)) {
                std::vector<std::vector<int>> rel;
                std::vector<FormSet> seen;
                for (std::size_t p = 0; p < perms_.size(); ++p) {
                    FormSet img = permute_set(p, canon);
                    if (std::find(seen.begin(), seen.end(), img) != seen.end()) continue;
                    seen.push_back(img);
                    rel.push_back(perms_[p]);
                }
                leaves.emplace(canon, std::move(rel));
                leaf_order.push_back(canon);
            }
            continue;
        }
        for (auto& r : clauses(*best, S)) {
            FormSet child = S;
            child.insert(child.end(), r.begin(), r.end());
            child = minimal(child);
            if (visited.insert(child).second) stack.push_back(std::move(child));
        }
    }

    rep.distributed_terms = e_.distributed_size();
    int idx = 0;
    for (const auto& key : leaf_order) {
        std::vector<FormInfo> fi;
        for (int f : key) fi.push_back(e_.info[f]);
        WidthLeaf leaf;
        leaf.lp = build_width_lp(H_, std::move(fi), e_.gamma);
        leaf.sol = solve_lp(leaf.lp.lp);
        ++rep.lp_count;
        if (leaf.sol.status != LpStatus::Optimal) throw std::logic_error("width LP not optimal: " + to_string(leaf.sol.status));
        if (rep.argmax_lp < 0 || leaf.sol.value > rep.width) {
            rep.width = leaf.sol.value;
            rep.argmax_lp = idx;
            rep.witness = witness_of(leaf.lp, leaf.sol);
        }
        if (opt_.keep_leaves) {
            leaf.images = leaves[key];
            rep.leaves.push_back(std::move(leaf));
        }
        ++idx;
    }
    return rep;
}

WidthReport Solver::pruned() {
    WidthReport rep;
    rep.mode = WidthMode::Pruned;
    struct Node {
        FormSet S;
        std::vector<std::pair<int, int>> commits;  // (group, item)
    };
    auto committed = [](const Node& n, int g) {
        for (const auto& [gg, it] : n.commits)
            if (gg == g) return it;
        return -1;
    };
    bool have = false;
    Rat incumbent;
    std::vector<Node> stack{Node{FormSet{root_}, {}}};
    const int G = static_cast<int>(e_.groups.size());
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (++rep.nodes > opt_.node_budget)
            throw BudgetError("pruned width search exceeded " + std::to_string(opt_.node_budget) + " nodes");
        std::vector<FormInfo> fi;
        for (int f : node.S) fi.push_back(e_.info[f]);
        WidthLeaf leaf;
        leaf.lp = build_width_lp(H_, std::move(fi), e_.gamma);
        leaf.sol = solve_lp(leaf.lp.lp);
        ++rep.lp_count;
        if (leaf.sol.status != LpStatus::Optimal) throw std::logic_error("width LP not optimal");
        const Rat t = leaf.sol.value;
        auto close = [&] {
            if (opt_.keep_leaves) {
                leaf.images = {identity_perm(H_.num_names())};
                rep.leaves.push_back(std::move(leaf));
            }
        };
        if (have && t <= incumbent) {
            close();
            continue;
        }
        Polymatroid h = witness_of(leaf.lp, leaf.sol);
        auto vals = e_.form_values(h);
        Rat global = expr_value(e_, vals);
        if (!have || global > incumbent) {
            have = true;
            incumbent = global;
            rep.witness = h;
            rep.width = global;
            rep.argmax_lp = static_cast<int>(rep.lp_count - 1);
        }
        // Smallest branching among groups whose node-restricted value is below t.
        int best_g = -1;
        std::size_t best_cost = 0;
        std::vector<std::pair<int, int>> best_children;  // (item, atom)
        for (int g = 0; g < G; ++g) {
            const auto& grp = e_.groups[g];
            int c = committed(node, g);
            std::vector<std::pair<int, int>> kids;
            std::size_t cost = 0;
            bool violated = true;
            for (int i = 0; i < static_cast<int>(grp.items.size()); ++i) {
                if (c >= 0 && i != c) continue;
                const auto& it = grp.items[i];
                if (!(item_value(it, vals) < t)) {
                    violated = false;
                    break;
                }
                int pick = -1;
                for (int a = 0; a < static_cast<int>(it.atoms.size()); ++a)
                    if (atom_value(it.atoms[a], vals) < t && (pick < 0 || it.atoms[a].forms.size() < it.atoms[pick].forms.size()))
                        pick = a;
                kids.push_back({i, pick});
                cost += it.atoms[pick].forms.size();
            }
            if (!violated) continue;
            if (best_g < 0 || cost < best_cost) {
                best_g = g;
                best_cost = cost;
                best_children = kids;
            }
        }
        if (best_g < 0) {
            close();
            continue;
        }
        const auto& grp = e_.groups[best_g];
        bool single = grp.items.size() == 1;
        for (auto it = best_children.rbegin(); it != best_children.rend(); ++it) {
            const auto& atom = grp.items[it->first].atoms[it->second];
            for (auto f = atom.forms.rbegin(); f != atom.forms.rend(); ++f) {
                Node child = node;
                if (!single && committed(node, best_g) < 0) child.commits.push_back({best_g, it->first});
                child.S.push_back(*f);
                child.S = minimal(child.S);
                stack.push_back(std::move(child));
            }
        }
    }
    rep.distributed_terms = e_.distributed_size();
    return rep;
}

}  // namespace

WidthReport solve_minmax(const Hypergraph& H, MinMaxExpr expr, const WidthOptions& opt) {
    if (expr.groups.empty()) throw std::invalid_argument("empty min-max expression");
    mpz_class raw = expr.distributed_size();
    Solver s(H, expr, opt);
    s.reduce();
    WidthMode mode = opt.mode;
    if (mode == WidthMode::Auto) mode = H.num_names() <= 4 || opt.complete_family ? WidthMode::Exhaustive : WidthMode::Pruned;
    if (opt.complete_family && mode == WidthMode::Pruned) throw std::invalid_argument("complete LP family needs exhaustive mode");
    WidthReport rep = mode == WidthMode::Exhaustive ? s.exhaustive() : s.pruned();
    rep.distributed_terms = raw;
    return rep;
}

WidthReport subw(const Hypergraph& H, const WidthOptions& opt) {
    WidthReport rep = solve_minmax(H, subw_expr(H), opt);
    rep.classic = true;
    rep.plan = best_td_plan(H, rep.witness);
    return rep;
}

WidthReport osubw(const Hypergraph& H, const Rat& omega, const WidthOptions& opt) {
    WidthReport rep = solve_minmax(H, osubw_expr(H, omega), opt);
    rep.plan = best_plan(H, rep.witness, omega);
    return rep;
}

WidthReport osubw_clique(const Hypergraph& H, const Rat& omega, const WidthOptions& opt) {
    WidthReport rep = solve_minmax(H, osubw_clique_expr(H, omega), opt);
    rep.plan = best_plan(H, rep.witness, omega);
    return rep;
}

// ---------------------------------------------------------------------------
// Evaluation at a fixed polymatroid

Plan evaluate_order(const Hypergraph& H, const Gveo& sigma, const Polymatroid& h, const Rat& gamma) {
    auto tr = elimination_trace(H, sigma);
    Plan p;
    p.order = sigma;
    bool first = true;
    for (int i : tr.trimmed) {
        PlanChoice c;
        c.index = i;
        c.U = tr.unions[i];
        c.join = true;
        c.value = h(c.U);
        for (const auto& t : emm_terms(tr.hypergraphs[i], sigma[i])) {
            Rat v = mm_value(h, t, gamma);
            if (v < c.value) {
                c.value = v;
                c.join = false;
                c.term = t;
            }
        }
        if (first || c.value > p.value) p.value = c.value;
        first = false;
        p.choices.push_back(c);
    }
    return p;
}

Plan best_plan(const Hypergraph& H, const Polymatroid& h, const Rat& omega) {
    Rat gamma = gamma_of(omega);
    Plan best;
    bool have = false;
    for_each_gveo(H.vertices(), [&](const Gveo& sigma) {
        Plan p = evaluate_order(H, sigma, h, gamma);
        if (!have || p.value < best.value) {
            best = std::move(p);
            have = true;
        }
    });
    return best;
}

Plan best_td_plan(const Hypergraph& H, const Polymatroid& h) {
    Plan best;
    bool have = false;
    for (const auto& veo : enumerate_veos(H.vertices())) {
        auto tr = elimination_trace(H, veo);
        Plan p;
        p.order = veo;
        bool first = true;
        for (int i : tr.trimmed) {
            PlanChoice c;
            c.index = i;
            c.U = tr.unions[i];
            c.value = h(c.U);
            if (first || c.value > p.value) p.value = c.value;
            first = false;
            p.choices.push_back(c);
        }
        if (!have || p.value < best.value) {
            best = std::move(p);
            have = true;
        }
    }
    return best;
}

Rat osubw_lower_bound(const Hypergraph& H, const Rat& omega, const Polymatroid& witness) {
    if (witness.k() != H.num_names()) throw std::invalid_argument("witness has the wrong number of vertices");
    if (auto v = check_polymatroid(witness)) throw std::invalid_argument("witness is not a polymatroid: " + v->what);
    if (!is_edge_dominated(witness, H)) throw std::invalid_argument("witness is not edge-dominated");
    check_size(H);
    return best_plan(H, witness, omega).value;
}

// ---------------------------------------------------------------------------
// Reference formulas

namespace {

Rat clique_general(int k, const Rat& omega) {
    auto ceil_div = [](int a, int b) { return (a + b - 1) / b; };
    return Rat(ceil_div(k, 3), 2) + Rat(ceil_div(k - 1, 3), 2) + Rat(k / 3, 2) * (omega - 2);
}

int param(const std::vector<int>& p, const std::string& family) {
    if (p.empty()) throw std::invalid_argument(family + " needs a size parameter");
    return p[0];
}

}  // namespace

Rat closed_form(const std::string& family, const std::vector<int>& params, const Rat& omega) {
    if (family == "clique") {
        int k = param(params, family);
        if (k == 3) return Rat(2) * omega / (omega + 1);
        if (k == 4) return (omega + 1) / 2;
        if (k == 5) return omega / 2 + 1;
        if (k >= 6) return clique_general(k, omega);
        throw std::invalid_argument("clique formula needs k >= 3");
    }
    if (family == "cliqueK") {
        int k = param(params, family);
        if (k < 6) throw std::invalid_argument("cliqueK formula needs k >= 6");
        return clique_general(k, omega);
    }
    if (family == "cycle4") return Rat(2) - Rat(3) / (Rat(2) * min(omega, Rat(5, 2)) + 1);
    if (family == "pyramid3") return Rat(2) - Rat(1) / omega;
    if (family == "pyramidK") {
        int k = param(params, family);
        if (k < 3) throw std::invalid_argument("pyramidK formula needs k >= 3");
        return Rat(2) - Rat(2) / (omega * (k - 1) - k + 3);
    }
    if (family == "example2") return Rat(2) - Rat(1) / (Rat(2) * (omega - 2) + 3);
    throw std::invalid_argument("unknown family " + family);
}

Rat square_omega(const Rat& a, const Rat& b, const Rat& c, const Rat& omega) {
    Rat g = omega - 2;
    return max(a + b + g * c, max(a + g * b + c, g * a + b + c));
}

Rat square_cycle_exponent(int k, const Rat& omega, const Rat& grid_step, bool literal_min) {
    if (k < 3) throw std::invalid_argument("cycle length must be at least 3");
    if (grid_step.sign() <= 0 || grid_step > Rat(1)) throw std::invalid_argument("grid step must lie in (0, 1]");
    Rat inv = Rat(1) / grid_step;
    if (!inv.is_integer()) throw std::invalid_argument("grid step must divide 1");
    const long long steps = inv.num().get_si();
    double combos = 1;
    for (int i = 0; i < k; ++i) combos *= static_cast<double>(steps + 1);
    if (combos > 5e7) throw BudgetError("cycle exponent grid has " + std::to_string(static_cast<long long>(combos)) + " points");

    // Integer arithmetic in units of 1 / (steps * den(omega)).  Raising the
    // smaller of the two one-sided degrees at a vertex to the larger one never
    // lowers any path cost, so each vertex carries a single degree d_i.
    const long long D = omega.den().get_si();
    const long long W = omega.num().get_si();
    const long long one = steps * D;
    auto sq = [&](long long a, long long b, long long c) {  // inputs in grid units
        long long g = W - 2 * D;                              // gamma * D
        long long A = (steps - a), B = (steps - b), C = (steps - c);
        long long x = A * D + B * D + g * C;
        long long y = A * D + g * B + C * D;
        long long z = g * A + B * D + C * D;
        return std::max(x, std::max(y, z));
    };
    std::vector<long long> d(k, 0);
    long long best = -1;
    // P[start][len]: cheapest path cost from start forward by len edges.
    std::vector<std::vector<long long>> P(k, std::vector<long long>(k, 0));
    while (true) {
        for (int s = 0; s < k; ++s) P[s][1] = one;
        for (int len = 2; len < k; ++len)
            for (int s = 0; s < k; ++s) {
                int e = (s + len) % k;
                long long v = P[s][len - 1] + d[(e + k - 1) % k] * D;
                v = std::min(v, P[(s + 1) % k][len - 1] + d[(s + 1) % k] * D);
                for (int r = 1; r < len; ++r) {
                    int rv = (s + r) % k;
                    long long a = P[s][r], b = P[rv][len - r], c = sq(d[s], d[rv], d[e]);
                    long long m = literal_min ? std::min(a, std::min(b, c)) : std::max(a, std::max(b, c));
                    v = std::min(v, m);
                }
                P[s][len] = v;
            }
        long long val = -1;
        for (int i = 0; i < k; ++i) {
            long long x = 2 * one - d[i] * D;
            if (val < 0 || x < val) val = x;
        }
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                long long x = std::max(P[i][j - i], P[j][k - (j - i)]);
                val = std::min(val, x);
            }
        best = std::max(best, val);
        int pos = 0;
        while (pos < k && ++d[pos] > steps) d[pos++] = 0;
        if (pos == k) break;
    }
    return Rat(best, one);
}

Rat frac_edge_cover(const Hypergraph& H) {
    const auto& E = H.edges();
    LinearProgram lp(static_cast<int>(E.size()));
    for (auto& c : lp.objective) c = -1;
    for (int v : H.vertices().members()) {
        std::vector<Rat> a(E.size());
        for (std::size_t e = 0; e < E.size(); ++e)
            if (E[e].contains(v)) a[e] = 1;
        lp.add(std::move(a), Rel::Ge, Rat(1));
    }
    auto sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) throw std::logic_error("edge cover LP not optimal");
    return -sol.value;
}

}  // namespace cqw
