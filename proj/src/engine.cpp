#include <algorithm>
#include <set>
#include <stdexcept>

#include "cqw/engine.hpp"

namespace cqw {

// ================================================================= PANDA

namespace {

struct Hat {
    Rat a, b, z, k;
    std::optional<Relation> tx, ty, tz, tg;
};

struct WEntry {
    Rat c;
    Relation R;
};

struct State {
    std::vector<PlainTerm> plain;
    std::vector<MmPart> mm;
    std::vector<Hat> hats;
    std::map<CKey, WEntry> w;
    WitnessMaps wm;
};

Rat res_max(const MmPart& t, const Hat& h) { return max(t.alpha - h.a, max(t.beta - h.b, t.zeta - h.z)); }

bool full(const MmPart& t, const Hat& h) { return h.a == t.alpha && h.b == t.beta && h.z == t.zeta && h.k == t.kappa; }

unsigned long as_ulong(const Rat& r) {
    if (r.sign() < 0 || r.den() != 1) throw DefectError("PANDA: expected a non-negative integer coefficient");
    return r.num().get_ui();
}

mpz_class power(const mpz_class& b, unsigned long e) {
    mpz_class out;
    mpz_pow_ui(out.get_mpz_t(), b.get_mpz_t(), e);
    return out;
}

class Panda {
public:
    Panda(const Hypergraph& H, const OmegaShannonInequality& cert, std::size_t N, long long budget)
        : H_(H), omega_(cert.omega), budget_(budget) {
        out_.stats.opt = cert.ratio();
        p_ = as_ulong(Rat(mpq_class(out_.stats.opt.num())));
        q_ = as_ulong(Rat(mpq_class(out_.stats.opt.den())));
        N_ = static_cast<unsigned long>(std::max<std::size_t>(N, 1));
        Np_ = power(N_, p_);
    }

    OutputTables run(const OmegaShannonInequality& cert, const std::vector<Relation>& tables) {
        State s0;
        std::vector<std::optional<Relation>> t(tables.begin(), tables.end());
        load(s0, cert, t);
        stack_.push_back(std::move(s0));
        while (!stack_.empty()) {
            State s = std::move(stack_.back());
            stack_.pop_back();
            ++out_.stats.branches;
            run_branch(s);
        }
        return std::move(out_);
    }

private:
    std::vector<std::string> nm(VertexSet s) const { return names_of(H_, s); }

    // x <= 2^obj, i.e. x^q <= N^p.
    bool small(const mpz_class& x) const { return power(x, q_) <= Np_; }

    void note(const Relation& R) { out_.stats.max_table = std::max(out_.stats.max_table, R.size()); }

    Relation merge(const Relation& a, const Relation& b) const {
        VertexSet sa = H_.set_of(a.schema), sb = H_.set_of(b.schema);
        if (sa == sb) return intersect(a, b);
        if (sa.subset_of(sb)) return semijoin(b, a);
        if (sb.subset_of(sa)) return semijoin(a, b);
        return a.size() <= b.size() ? a : b;
    }

    void add_w(State& s, VertexSet y, VertexSet x, Relation R, const Rat& c = Rat(1)) {
        y -= x;
        if (y.empty() || c.is_zero()) return;
        if (x.empty()) R = project(R, nm(y));
        R.name = "w";
        note(R);
        auto k = ckey(y, x);
        auto it = s.w.find(k);
        if (it == s.w.end()) {
            s.w.emplace(k, WEntry{c, std::move(R)});
        } else {
            it->second.c += c;
            it->second.R = merge(it->second.R, R);
        }
    }

    void dec_w(State& s, CKey k, const Rat& by = Rat(1)) {
        auto it = s.w.find(k);
        if (it == s.w.end() || it->second.c < by) throw DefectError("PANDA: decrement of a missing term");
        it->second.c -= by;
        if (it->second.c.sign() <= 0) s.w.erase(it);
    }

    void set_hat(std::optional<Relation>& slot, Relation R) {
        R.name = "hat";
        note(R);
        slot = slot ? merge(*slot, R) : std::move(R);
    }

    static void settle(State& s) {
        for (std::size_t j = 0; j < s.mm.size(); ++j)
            if (s.mm[j].G.empty()) s.hats[j].k = s.mm[j].kappa - res_max(s.mm[j], s.hats[j]);
    }

    void load(State& s, const OmegaShannonInequality& q, const std::vector<std::optional<Relation>>& tables) {
        s.plain.clear();
        for (const auto& p : q.lhs_plain)
            if (p.lambda.sign() > 0) s.plain.push_back(p);
        s.mm = q.lhs_mm;
        s.hats.assign(s.mm.size(), Hat{Rat(0), Rat(0), Rat(0), Rat(0), {}, {}, {}, {}});
        s.w.clear();
        for (std::size_t i = 0; i < q.rhs.size(); ++i) {
            const auto& r = q.rhs[i];
            if (r.w.sign() <= 0) continue;
            if (!tables[i]) throw DefectError("PANDA: right-hand term without a table");
            add_w(s, r.Y, r.X, *tables[i], r.w);
        }
        s.wm = WitnessMaps::of(*q.witness);
        settle(s);
    }

    // Current state as an inequality; `extra` appends one tableless unit h(extra).
    OmegaShannonInequality snapshot(const State& s, std::vector<std::optional<Relation>>& tables, VertexSet extra) const {
        OmegaShannonInequality I;
        I.k = H_.num_names();
        I.omega = omega_;
        I.lhs_plain = s.plain;
        I.lhs_mm = s.mm;
        for (const auto& [k, e] : s.w) {
            I.rhs.push_back({e.c, VertexSet(k.first), VertexSet(k.second)});
            tables.push_back(e.R);
        }
        for (std::size_t j = 0; j < s.mm.size(); ++j) {
            const auto& t = s.mm[j];
            const auto& h = s.hats[j];
            auto put = [&](const Rat& c, VertexSet y, VertexSet x, const std::optional<Relation>& R) {
                if (c.sign() <= 0) return;
                I.rhs.push_back({c, y, x});
                tables.push_back(R);
            };
            if (!t.G.empty()) put(h.k, t.G, {}, h.tg);
            put(h.a, t.X, t.G, h.tx);
            put(h.b, t.Y, t.G, h.ty);
            put(h.z, t.Z, t.G, h.tz);
        }
        I.rhs.push_back({Rat(1), extra, {}});
        tables.push_back(std::nullopt);
        I.witness = s.wm.to_witness();
        return I;
    }

    void reset_extra(State& s, VertexSet Y) {
        std::vector<std::optional<Relation>> tables;
        OmegaShannonInequality I = snapshot(s, tables, Y);
        OmegaShannonInequality r = reset(I, I.rhs.size() - 1);
        ++out_.stats.resets;
        if (r.mass().is_zero()) throw DefectError("PANDA: reset exhausted the left-hand side");
        load(s, r, tables);
    }

    void ensure_small(State& s) {
        for (;;) {
            std::optional<CKey> big;
            for (const auto& [k, e] : s.w)
                if (k.second == 0 && !small(mpz_class(static_cast<unsigned long>(e.R.size())))) {
                    big = k;
                    break;
                }
            if (!big) return;
            dec_w(s, *big);
            reset_extra(s, VertexSet(big->first));
        }
    }

    void emit_triple(const State& s, std::size_t j) {
        const MmPart& t = s.mm[j];
        const Hat& h = s.hats[j];
        Relation g;
        if (t.G.empty())
            g = nullary(true);
        else if (h.tg)
            g = project(*h.tg, nm(t.G));
        else
            throw DefectError("PANDA: complete triple without a G-table");
        auto dim = [&](const std::optional<Relation>& tbl, VertexSet D, const Rat& e) {
            if (e.is_zero()) return g;
            if (!tbl) throw DefectError("PANDA: complete triple without a dimension table");
            return project(join(*tbl, g), nm(D | t.G));
        };
        Relation S = dim(h.tx, t.X, t.alpha), T = dim(h.ty, t.Y, t.beta), W = dim(h.tz, t.Z, t.zeta);
        Relation common = intersect(intersect(project(S, nm(t.G)), project(T, nm(t.G))), project(W, nm(t.G)));
        S = semijoin(S, common);
        T = semijoin(T, common);
        W = semijoin(W, common);
        if (common.empty()) return;
        note(S);
        note(T);
        note(W);

        // |pi_G S|^kappa * prod deg^exp <= N^(opt * kappa)
        const auto G = nm(t.G);
        mpz_class lhs = power(mpz_class(static_cast<unsigned long>(common.size())), as_ulong(t.kappa));
        auto deg = [&](const Relation& R, VertexSet D, const Rat& e) {
            if (!e.is_zero()) lhs *= power(mpz_class(static_cast<unsigned long>(degree(R, nm(D), G))), as_ulong(e));
        };
        deg(S, t.X, t.alpha);
        deg(T, t.Y, t.beta);
        deg(W, t.Z, t.zeta);
        if (power(lhs, q_) > power(Np_, as_ulong(t.kappa))) ++out_.stats.bound_misses;

        TripleTable tt;
        tt.part = t;
        tt.S = std::move(S);
        tt.T = std::move(T);
        tt.W = std::move(W);
        tt.s_free = t.alpha.is_zero();
        tt.t_free = t.beta.is_zero();
        tt.w_free = t.zeta.is_zero();
        tt.a = t.alpha / t.kappa;
        tt.b = t.beta / t.kappa;
        tt.z = t.zeta / t.kappa;
        out_.triples.push_back(std::move(tt));
    }

    // Applies f to s for the first bucket and to copies for the rest.
    template <class F>
    void branch(State& s, const Relation& R, VertexSet Y, VertexSet X, F&& f) {
        auto buckets = bucket_by_degree(R, nm(Y), nm(X));
        if (buckets.empty()) {
            f(s, R);
            return;
        }
        for (std::size_t b = buckets.size(); b-- > 1;) {
            State c = s;
            f(c, buckets[b].bucket);
            stack_.push_back(std::move(c));
        }
        f(s, buckets[0].bucket);
    }

    // Each step moves as many units as both sides allow, so it branches once.
    bool step(State& s) {
        for (const auto& [key, entry] : s.w) {
            if (key.second != 0) continue;
            const VertexSet W(key.first);
            const Relation R = entry.R;
            const Rat have = entry.c;

            // Pair with a dimension of an MM part: h(GD) = h(D|G) + h(G).
            for (std::size_t j = 0; j < s.mm.size(); ++j) {
                const MmPart t = s.mm[j];
                const VertexSet dims[3] = {t.X, t.Y, t.Z};
                const Rat fulls[3] = {t.alpha, t.beta, t.zeta};
                for (int d = 0; d < 3; ++d) {
                    Rat cur = d == 0 ? s.hats[j].a : d == 1 ? s.hats[j].b : s.hats[j].z;
                    if ((t.G | dims[d]) != W || cur >= fulls[d]) continue;
                    const Rat delta = min(have, fulls[d] - cur);
                    dec_w(s, key, delta);
                    auto apply = [this, j, d, t, delta](State& st, const Relation& B) {
                        Hat& h = st.hats[j];
                        (d == 0 ? h.a : d == 1 ? h.b : h.z) += delta;
                        set_hat(d == 0 ? h.tx : d == 1 ? h.ty : h.tz, B);
                        if (!t.G.empty()) add_w(st, t.G, {}, project(B, nm(t.G)), delta);
                        settle(st);
                    };
                    if (t.G.empty())
                        apply(s, R);
                    else
                        branch(s, R, dims[d], t.G, apply);
                    return true;
                }
            }

            // Pair with the G-part of an MM part.
            for (std::size_t j = 0; j < s.mm.size(); ++j) {
                const MmPart& t = s.mm[j];
                Hat& h = s.hats[j];
                const Rat room = t.kappa - h.k - res_max(t, h);
                if (t.G.empty() || t.G != W || room.sign() <= 0) continue;
                const Rat delta = min(have, room);
                dec_w(s, key, delta);
                h.k += delta;
                set_hat(h.tg, R);
                return true;
            }

            // Composition: h(W) + h(y|W) -> h(Wy).
            for (const auto& [k2, e2] : s.w) {
                if (k2.second != W.bits || k2.first == 0) continue;
                const VertexSet y(k2.first);
                const Relation S = e2.R;
                const CKey ck = k2;
                const Rat delta = min(have, e2.c);
                std::size_t d = degree(S, nm(y), nm(W));
                mpz_class work = mpz_class(static_cast<unsigned long>(R.size())) * static_cast<unsigned long>(d);
                if (small(work)) {
                    dec_w(s, key, delta);
                    dec_w(s, ck, delta);
                    add_w(s, W | y, {}, project(join(R, S), nm(W | y)), delta);
                } else {
                    dec_w(s, key);
                    dec_w(s, ck);
                    reset_extra(s, W | y);
                }
                return true;
            }

            // Monotonicity: cancel h(y|x) of the witness, keep h(x).
            if (auto m = s.wm.mono_partner(W)) {
                VertexSet y(m->first), x(m->second);
                const Rat delta = min(have, s.wm.m.at(*m));
                s.wm.add_m(y, x, -delta);
                dec_w(s, key, delta);
                if (!x.empty()) add_w(s, x, {}, project(R, nm(x)), delta);
                return true;
            }

            // Submodularity: h(xy) -> h(x) + h(y|xz).
            if (auto sp = s.wm.sub_partner(W)) {
                auto [y, z, x] = sp->second;
                const Rat delta = min(have, s.wm.s.at(sp->first));
                s.wm.add_s(y, z, x, -delta);
                dec_w(s, key, delta);
                if (x.empty()) {
                    add_w(s, y, z, R, delta);
                } else {
                    branch(s, R, y, x, [this, x = x, y = y, z = z, delta](State& st, const Relation& B) {
                        add_w(st, x, {}, project(B, nm(x)), delta);
                        add_w(st, y, x | z, B, delta);
                    });
                }
                return true;
            }
        }
        return false;
    }

    void run_branch(State& s) {
        for (;;) {
            if (++out_.stats.steps > budget_) throw BudgetError("PANDA step budget exceeded");
            ensure_small(s);
            for (const auto& p : s.plain) {
                auto it = s.w.find(ckey(p.U, {}));
                if (it != s.w.end()) {
                    out_.P.push_back({p.U, it->second.R});
                    return;
                }
            }
            for (std::size_t j = 0; j < s.mm.size(); ++j)
                if (full(s.mm[j], s.hats[j])) {
                    emit_triple(s, j);
                    return;
                }
            if (!step(s)) throw DefectError("PANDA: no applicable step");
        }
    }

    const Hypergraph& H_;
    Rat omega_;
    long long budget_;
    unsigned long p_ = 1, q_ = 1;
    mpz_class N_, Np_;
    std::vector<State> stack_;
    OutputTables out_;
};

}  // namespace

OutputTables panda_ddr(const Hypergraph& H, const OmegaShannonInequality& cert, const std::vector<Relation>& rhs_tables,
                       std::size_t N, long long step_budget) {
    if (!cert.witness) throw std::invalid_argument("panda_ddr: certificate has no witness");
    if (!cert.is_integral()) throw std::invalid_argument("panda_ddr: certificate is not integral");
    if (auto v = validate(cert)) throw std::invalid_argument("panda_ddr: " + *v);
    if (rhs_tables.size() != cert.rhs.size()) throw std::invalid_argument("panda_ddr: one table per right-hand term required");
    for (std::size_t i = 0; i < rhs_tables.size(); ++i)
        for (const auto& v : names_of(H, cert.rhs[i].Y - cert.rhs[i].X))
            if (!rhs_tables[i].has(v)) throw std::invalid_argument("panda_ddr: table " + std::to_string(i) + " lacks variable " + v);
    if (cert.mass().is_zero()) throw std::invalid_argument("panda_ddr: certificate has an empty left-hand side");
    Panda p(H, cert, N, step_budget);
    return p.run(cert, rhs_tables);
}

OutputTables panda_ddr(const Query& Q, const Database& db, const OmegaShannonInequality& cert, const std::vector<std::string>& atom_map) {
    Hypergraph H = Q.hypergraph();
    if (atom_map.size() != cert.rhs.size()) throw std::invalid_argument("panda_ddr: one atom per right-hand term required");
    std::vector<Relation> tables;
    for (const auto& a : atom_map) tables.push_back(db.at(a));
    return panda_ddr(H, cert, tables, db.N);
}

// ============================================================ evaluation

namespace {

using FKey = std::tuple<bool, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>;

FKey fkey(const FormInfo& f) {
    if (f.join) return {true, f.U.bits, 0, 0, 0, 0};
    return {false, f.U.bits, f.term.X.bits, f.term.Y.bits, f.term.Z.bits, f.term.G.bits};
}

FormInfo permuted(const FormInfo& f, const std::vector<int>& perm) {
    FormInfo o = f;
    o.U = permute(f.U, perm);
    if (!f.join) {
        o.term = MmTerm{permute(f.term.X, perm), permute(f.term.Y, perm), permute(f.term.Z, perm), permute(f.term.G, perm)};
        if (o.term.Y < o.term.X) std::swap(o.term.X, o.term.Y);
    }
    return o;
}

}  // namespace

EvaluationPlan prepare_evaluation(const Hypergraph& H, const Rat& omega) {
    WidthOptions opt;
    opt.mode = WidthMode::Exhaustive;
    opt.complete_family = true;
    opt.keep_leaves = true;
    WidthReport rep = osubw(H, omega, opt);
    const Rat gamma = omega - 2;

    EvaluationPlan plan;
    plan.H = H;
    plan.omega = omega;
    plan.lp_count = rep.lp_count;

    std::map<std::vector<FKey>, std::vector<FormInfo>> supports;
    for (const auto& leaf : rep.leaves) {
        std::vector<const FormInfo*> sup;
        for (std::size_t f = 0; f < leaf.lp.forms.size(); ++f)
            if (!leaf.sol.dual[f].is_zero()) sup.push_back(&leaf.lp.forms[f]);
        for (const auto& perm : leaf.images) {
            ++plan.family_size;
            std::map<FKey, FormInfo> forms;
            for (const FormInfo* f : sup) {
                FormInfo p = permuted(*f, perm);
                forms.emplace(fkey(p), p);
            }
            std::vector<FKey> keys;
            std::vector<FormInfo> infos;
            for (auto& [k, f] : forms) {
                keys.push_back(k);
                infos.push_back(f);
            }
            supports.emplace(std::move(keys), std::move(infos));
        }
    }
    for (const auto& [keys, infos] : supports) {
        bool minimal = true;
        for (const auto& [other, unused] : supports)
            if (other != keys && std::includes(keys.begin(), keys.end(), other.begin(), other.end())) {
                minimal = false;
                break;
            }
        if (!minimal) continue;
        WidthLp lp = build_width_lp(H, infos, gamma);
        LpSolution sol = solve_lp(lp.lp);
        if (sol.status != LpStatus::Optimal) throw DefectError("support LP is not optimal");
        plan.certificates.push_back(normalize_well_behaved(integralize(from_dual(lp, sol))));
    }

    for_each_gveo(H.vertices(), [&](const Gveo& sigma) {
        OrderPlan o;
        o.sigma = sigma;
        o.trace = elimination_trace(H, sigma);
        for (std::size_t i = 0; i < sigma.size(); ++i) o.mm.push_back(emm_terms(o.trace.hypergraphs[i], sigma[i]));
        plan.orders.push_back(std::move(o));
    });
    return plan;
}

const EvaluationPlan& cached_plan(const Hypergraph& H, const Rat& omega) {
    static std::map<std::string, EvaluationPlan> cache;
    std::string key = H.str() + "|" + omega.str();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, prepare_evaluation(H, omega)).first;
    return it->second;
}

namespace {

// Alternatives for one dimension constraint: a tuple passes if it lies in any.
using Alternatives = std::vector<Relation>;

void add_alternative(Alternatives& alts, const Relation& R) {
    for (auto& a : alts)
        if (a.schema == R.schema) {
            a = unite(a, R);
            return;
        }
    alts.push_back(R);
}

Relation filter_any(const Relation& R, const Alternatives& alts) {
    Relation out = R;
    out.rows.clear();
    for (const auto& a : alts) out = unite(out, semijoin(R, a));
    return out;
}

// Greedy join: start from the smallest, prefer relations sharing variables.
Relation join_all(std::vector<Relation> rs) {
    if (rs.empty()) return nullary(true);
    std::sort(rs.begin(), rs.end(), [](const Relation& a, const Relation& b) { return a.size() < b.size(); });
    Relation cur = rs.front();
    rs.erase(rs.begin());
    while (!rs.empty()) {
        std::size_t pick = 0;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            bool shares = std::any_of(rs[i].schema.begin(), rs[i].schema.end(), [&](const std::string& v) { return cur.has(v); });
            if (shares) {
                pick = i;
                break;
            }
        }
        cur = join(cur, rs[pick]);
        cur.name = "j";
        rs.erase(rs.begin() + static_cast<long>(pick));
        if (cur.empty()) break;
    }
    return cur;
}

class Evaluator {
public:
    Evaluator(const Query& Q, const Database& db, const EvaluationPlan& plan, EvalStats* stats)
        : plan_(plan), H_(plan.H), stats_(stats) {
        Hypergraph H = Q.hypergraph();
        if (!(H == plan.H) || H.names() != plan.H.names()) throw std::invalid_argument("evaluate: plan was prepared for another query shape");
        edges_ = edge_relations(Q, db);
        for (const auto& cert : plan.certificates) {
            std::vector<Relation> tables;
            for (const auto& r : cert.rhs) {
                auto it = edges_.find(r.Y.bits);
                if (!r.X.empty() || it == edges_.end()) throw DefectError("evaluate: certificate term is not an edge");
                tables.push_back(it->second);
            }
            OutputTables o = panda_ddr(H_, cert, tables, db.N);
            if (stats_) {
                stats_->panda_branches += o.stats.branches;
                stats_->max_panda_table = std::max(stats_->max_panda_table, o.stats.max_table);
            }
            for (auto& p : o.P) {
                auto it = P_.find(p.U.bits);
                if (it == P_.end())
                    P_.emplace(p.U.bits, p.R);
                else
                    it->second = unite(it->second, p.R);
            }
            for (auto& t : o.triples) {
                auto& m = tri_[MmTerm{t.part.X, t.part.Y, t.part.Z, t.part.G}];
                add_alternative(m[t.part.X.bits], t.S);
                add_alternative(m[t.part.Y.bits], t.T);
                add_alternative(m[t.part.Z.bits], t.W);
            }
        }
    }

    bool run() {
        for (const auto& op : plan_.orders) {
            if (!available(op)) continue;
            if (stats_) ++stats_->orders_tried;
            if (run_order(op)) return true;
        }
        return false;
    }

private:
    std::vector<std::string> nm(VertexSet s) const { return names_of(H_, s); }

    bool mm_ready(const MmTerm& t) const {
        for (int b = 0; b < 3; ++b)
            if (!tri_.count(branch_info(t, b).term)) return false;
        return true;
    }

    bool available(const OrderPlan& op) const {
        for (int i : op.trace.trimmed) {
            bool ok = P_.count(op.trace.unions[i].bits) > 0;
            for (const auto& t : op.mm[i])
                if (!ok && mm_ready(t)) ok = true;
            if (!ok) return false;
        }
        return true;
    }

    // Half of an MM elimination over dims D (kept), Z (contracted) and G.
    Relation mm_side(const MmTerm& t, VertexSet D, VertexSet other, const std::vector<const Relation*>& boundary,
                     const std::vector<VertexSet>& bedges) const {
        std::vector<Relation> parts;
        std::vector<Alternatives> filters;
        for (int b = 0; b < 3; ++b) {
            const auto& cons = tri_.at(branch_info(t, b).term);
            for (VertexSet dim : {D, t.Z}) {
                const Alternatives& alts = cons.at(dim.bits);
                const auto full = nm(dim | t.G);
                bool materialized = std::all_of(alts.begin(), alts.end(), [&](const Relation& a) { return a.schema == full; });
                if (materialized) {
                    Relation u = alts.front();
                    for (std::size_t k = 1; k < alts.size(); ++k) u = unite(u, alts[k]);
                    parts.push_back(std::move(u));
                } else {
                    filters.push_back(alts);
                }
            }
        }
        std::vector<Relation> far;
        for (std::size_t e = 0; e < bedges.size(); ++e) {
            if (!bedges[e].intersects(other)) parts.push_back(*boundary[e]);
            if (!bedges[e].intersects(D)) far.push_back(*boundary[e]);
        }
        Relation cur = join_all(std::move(parts));
        const VertexSet want = D | t.Z | t.G;
        if (cur.empty()) return Relation("m", nm(want));
        VertexSet missing = want - H_.set_of(cur.schema);
        if (!missing.empty() && !cur.empty()) {
            Relation f = join_all(std::move(far));
            cur = join(cur, project(f, nm(missing)));
        }
        for (const auto& alts : filters) cur = filter_any(cur, alts);
        return project(cur, nm(want));
    }

    bool run_order(const OrderPlan& op) {
        std::map<std::uint32_t, Relation> atoms = edges_;
        std::vector<std::optional<Relation>> derived(op.sigma.size());
        const auto& tr = op.trace;
        for (std::size_t i = 0; i < op.sigma.size(); ++i) {
            const VertexSet X = op.sigma[i], U = tr.unions[i], rest = U - X;
            std::vector<const Relation*> bnd;
            for (VertexSet e : tr.boundaries[i]) bnd.push_back(&atoms.at(e.bits));
            const auto out_names = nm(rest);

            std::optional<Relation> res;
            auto add_choice = [&](Relation r) {
                r = project(r, out_names);
                res = res ? unite(*res, r) : std::move(r);
            };
            auto via_table = [&](Relation r) {
                for (const Relation* a : bnd) r = semijoin(r, *a);
                add_choice(std::move(r));
            };
            const bool trimmed = std::find(tr.trimmed.begin(), tr.trimmed.end(), static_cast<int>(i)) != tr.trimmed.end();
            if (!trimmed) {
                std::size_t j = 0;
                while (!U.subset_of(tr.unions[j])) ++j;
                via_table(project(*derived[j], nm(U)));
            } else {
                if (auto it = P_.find(U.bits); it != P_.end()) via_table(it->second);
                for (const auto& t : op.mm[i]) {
                    if (!mm_ready(t)) continue;
                    Relation m1 = mm_side(t, t.X, t.Y, bnd, tr.boundaries[i]);
                    Relation m2 = mm_side(t, t.Y, t.X, bnd, tr.boundaries[i]);
                    add_choice(group_by_mm(m1, m2, nm(t.Z), MatmulAlgo::Strassen, plan_.omega));
                }
            }
            if (!res) return false;
            res->name = "e" + std::to_string(i);
            for (VertexSet e : tr.boundaries[i]) atoms.erase(e.bits);
            if (rest.empty()) {
                if (res->empty()) return false;
            } else {
                auto it = atoms.find(rest.bits);
                if (it == atoms.end())
                    atoms.emplace(rest.bits, *res);
                else
                    it->second = intersect(it->second, *res);
                if (atoms.at(rest.bits).empty()) return false;
            }
            derived[i] = std::move(res);
        }
        return true;
    }

    const EvaluationPlan& plan_;
    const Hypergraph& H_;
    EvalStats* stats_;
    std::map<std::uint32_t, Relation> edges_;
    std::map<std::uint32_t, Relation> P_;
    std::map<MmTerm, std::map<std::uint32_t, Alternatives>> tri_;
};

}  // namespace

bool evaluate(const Query& Q, const Database& db, const EvaluationPlan& plan, EvalStats* stats) {
    if (plan.omega < Rat(2) || plan.omega > Rat(3)) throw std::invalid_argument("omega must lie in [2, 3]");
    Evaluator e(Q, db, plan, stats);
    return e.run();
}

bool evaluate(const Query& Q, const Database& db, const Rat& omega, EvalStats* stats) {
    if (omega < Rat(2) || omega > Rat(3)) throw std::invalid_argument("omega must lie in [2, 3]");
    return evaluate(Q, db, cached_plan(Q.hypergraph(), omega), stats);
}

}  // namespace cqw
