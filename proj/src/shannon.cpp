#include "cqw/shannon.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "cqw/lp.hpp"

namespace cqw {

// ---------------------------------------------------------------- terms

void TermMultiset::add(const Rat& c, VertexSet y, VertexSet x) {
    y -= x;
    if (y.empty() || c.is_zero()) return;
    auto [it, fresh] = t_.try_emplace(Key{y.bits, x.bits}, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) t_.erase(it);
    }
}

Rat TermMultiset::coeff(VertexSet y, VertexSet x) const {
    y -= x;
    auto it = t_.find(Key{y.bits, x.bits});
    return it == t_.end() ? Rat(0) : it->second;
}

LinearForm TermMultiset::form() const {
    LinearForm f;
    for (const auto& [k, c] : t_) f.add(conditional_form(VertexSet(k.first), VertexSet(k.second)), c);
    return f;
}

std::optional<TermMultiset::Key> TermMultiset::first_deficit(const TermMultiset& other) const {
    for (const auto& [k, c] : other.t_) {
        auto it = t_.find(k);
        Rat mine = it == t_.end() ? Rat(0) : it->second;
        if (mine < c) return k;
    }
    return std::nullopt;
}

std::string cond_str(const Hypergraph& H, VertexSet y, VertexSet x) {
    if (x.empty()) return "h(" + H.fmt(y) + ")";
    return "h(" + H.fmt(y) + "|" + H.fmt(x) + ")";
}

namespace {

std::string coeff_prefix(const Rat& c) { return c == Rat(1) ? std::string() : c.str(); }

void join_terms(std::ostringstream& os, const std::vector<std::string>& parts) {
    if (parts.empty()) {
        os << "0";
        return;
    }
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? " + " : "") << parts[i];
}

}  // namespace

std::string TermMultiset::str(const Hypergraph& H) const {
    std::vector<std::string> parts;
    for (const auto& [k, c] : t_) parts.push_back(coeff_prefix(c) + cond_str(H, VertexSet(k.first), VertexSet(k.second)));
    std::ostringstream os;
    join_terms(os, parts);
    return os.str();
}

LinearForm FarkasWitness::form() const {
    LinearForm f;
    for (const auto& t : m) f.add(conditional_form(t.Y, t.X), t.m);
    for (const auto& t : s) f.add(mutual_form(t.Y, t.Z, t.X), t.s);
    return f;
}

// ---------------------------------------------------------------- inequality

LinearForm OmegaShannonInequality::lhs_form() const {
    LinearForm f;
    for (const auto& p : lhs_plain) f.add(p.U, p.lambda);
    for (const auto& j : lhs_mm) {
        f.add(conditional_form(j.X, j.G), j.alpha);
        f.add(conditional_form(j.Y, j.G), j.beta);
        f.add(conditional_form(j.Z, j.G), j.zeta);
        f.add(j.G, j.kappa);
    }
    return f;
}

LinearForm OmegaShannonInequality::rhs_form() const {
    LinearForm f;
    for (const auto& r : rhs) f.add(conditional_form(r.Y, r.X), r.w);
    return f;
}

TermMultiset OmegaShannonInequality::lhs_terms() const {
    TermMultiset t;
    for (const auto& p : lhs_plain) t.add(p.lambda, p.U, {});
    for (const auto& j : lhs_mm) {
        t.add(j.alpha, j.X, j.G);
        t.add(j.beta, j.Y, j.G);
        t.add(j.zeta, j.Z, j.G);
        t.add(j.kappa, j.G, {});
    }
    return t;
}

TermMultiset OmegaShannonInequality::rhs_terms() const {
    TermMultiset t;
    for (const auto& r : rhs) t.add(r.w, r.Y, r.X);
    return t;
}

Rat OmegaShannonInequality::mass() const {
    Rat m;
    for (const auto& p : lhs_plain) m += p.lambda;
    for (const auto& j : lhs_mm) m += j.kappa;
    return m;
}

Rat OmegaShannonInequality::unconditional_rhs() const {
    Rat m;
    for (const auto& r : rhs)
        if (r.X.empty()) m += r.w;
    return m;
}

Rat OmegaShannonInequality::rhs_mass() const {
    Rat m;
    for (const auto& r : rhs) m += r.w;
    return m;
}

Rat OmegaShannonInequality::ratio() const {
    Rat d = mass();
    return d.is_zero() ? Rat(0) : rhs_mass() / d;
}

bool OmegaShannonInequality::is_integral() const {
    for (const auto& p : lhs_plain)
        if (!p.lambda.is_integer()) return false;
    for (const auto& j : lhs_mm)
        if (!j.alpha.is_integer() || !j.beta.is_integer() || !j.zeta.is_integer() || !j.kappa.is_integer()) return false;
    for (const auto& r : rhs)
        if (!r.w.is_integer()) return false;
    if (witness) {
        for (const auto& t : witness->m)
            if (!t.m.is_integer()) return false;
        for (const auto& t : witness->s)
            if (!t.s.is_integer()) return false;
    }
    return true;
}

std::string OmegaShannonInequality::str(const Hypergraph& H) const {
    std::vector<std::string> lhs;
    for (const auto& p : lhs_plain)
        if (!p.lambda.is_zero()) lhs.push_back(coeff_prefix(p.lambda) + cond_str(H, p.U, {}));
    for (const auto& j : lhs_mm) {
        std::ostringstream g;
        g << "[" << coeff_prefix(j.alpha) << cond_str(H, j.X, j.G) << " + " << coeff_prefix(j.beta) << cond_str(H, j.Y, j.G);
        if (!j.zeta.is_zero()) g << " + " << coeff_prefix(j.zeta) << cond_str(H, j.Z, j.G);
        if (!j.G.empty()) g << " + " << coeff_prefix(j.kappa) << cond_str(H, j.G, {});
        g << "]";
        lhs.push_back(g.str());
    }
    std::vector<std::string> rhs_parts;
    for (const auto& r : rhs)
        if (!r.w.is_zero()) rhs_parts.push_back(coeff_prefix(r.w) + cond_str(H, r.Y, r.X));
    std::ostringstream os;
    join_terms(os, lhs);
    os << " <= ";
    join_terms(os, rhs_parts);
    return os.str();
}

bool omega_dominant(const Rat& a, const Rat& b, const Rat& z, const Rat& omega) {
    return a >= Rat(1) && b >= Rat(1) && z >= Rat(0) && a + b + z >= omega;
}

std::optional<std::string> check_shape(const OmegaShannonInequality& ineq) {
    for (std::size_t l = 0; l < ineq.lhs_plain.size(); ++l)
        if (ineq.lhs_plain[l].lambda.sign() < 0) return "negative lambda at " + std::to_string(l);
    for (std::size_t j = 0; j < ineq.lhs_mm.size(); ++j) {
        const auto& t = ineq.lhs_mm[j];
        if (t.kappa.sign() <= 0) return "non-positive kappa at " + std::to_string(j);
        if (t.alpha.sign() < 0 || t.beta.sign() < 0 || t.zeta.sign() < 0) return "negative coefficient in triple " + std::to_string(j);
        if (!omega_dominant(t.alpha / t.kappa, t.beta / t.kappa, t.zeta / t.kappa, ineq.omega))
            return "triple " + std::to_string(j) + " is not omega-dominant";
    }
    for (std::size_t i = 0; i < ineq.rhs.size(); ++i)
        if (ineq.rhs[i].w.sign() < 0) return "negative rhs weight at " + std::to_string(i);
    return std::nullopt;
}

std::optional<std::string> verify_witness(const OmegaShannonInequality& ineq, const FarkasWitness& w) {
    for (const auto& t : w.m)
        if (t.m.sign() < 0) return "negative monotonicity multiplier";
    for (const auto& t : w.s)
        if (t.s.sign() < 0) return "negative submodularity multiplier";
    LinearForm lhs = ineq.lhs_form();
    lhs.add(w.form(), Rat(1));
    if (!(lhs == ineq.rhs_form())) return "identity does not hold";
    return std::nullopt;
}

std::optional<std::string> validate(const OmegaShannonInequality& ineq) {
    if (auto v = check_shape(ineq)) return v;
    if (!ineq.witness) return "no witness";
    return verify_witness(ineq, *ineq.witness);
}

// ---------------------------------------------------------------- extraction

OmegaShannonInequality from_dual(const WidthLp& w, const LpSolution& sol) {
    if (sol.status != LpStatus::Optimal) throw std::invalid_argument("from_dual needs an optimal solution");
    if (sol.dual.size() != w.lp.constraints.size()) throw std::invalid_argument("dual vector does not match the LP");
    OmegaShannonInequality q;
    q.k = w.k;
    q.omega = w.gamma + 2;
    for (std::size_t f = 0; f < w.forms.size(); ++f) {
        const Rat& y = sol.dual[f];
        if (y.is_zero()) continue;
        const auto& fi = w.forms[f];
        if (fi.join)
            q.lhs_plain.push_back({y, fi.U});
        else
            q.lhs_mm.push_back({y, y, w.gamma * y, y, fi.term.X, fi.term.Y, fi.term.Z, fi.term.G});
    }
    for (std::size_t e = 0; e < w.edges.size(); ++e) {
        const Rat& y = sol.dual[w.edge_row(e)];
        if (!y.is_zero()) q.rhs.push_back({y, w.edges[e], {}});
    }
    return certified(std::move(q));
}

FarkasWitness find_farkas(const OmegaShannonInequality& ineq) {
    const VertexSet V = VertexSet::full(ineq.k);
    auto els = elemental_constraints(V);
    const int n = static_cast<int>(els.size());
    const int rows = (1 << ineq.k) - 1;
    LinearProgram lp(n);
    for (int e = 0; e < n; ++e) lp.objective[e] = -1;
    std::vector<std::vector<Rat>> a(rows, std::vector<Rat>(n));
    for (int e = 0; e < n; ++e)
        for (const auto& [b, c] : els[e].form(V).terms) a[b - 1][e] = c;
    LinearForm target = ineq.rhs_form();
    target.add(ineq.lhs_form(), Rat(-1));
    std::vector<Rat> rhs(rows);
    for (const auto& [b, c] : target.terms) {
        if (b >= (1u << ineq.k)) throw std::invalid_argument("inequality mentions vertices outside 0..k-1");
        rhs[b - 1] = c;
    }
    for (int r = 0; r < rows; ++r) lp.add(std::move(a[r]), Rel::Eq, rhs[r]);
    auto sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) throw NotShannonError("not a Shannon inequality: no Farkas witness exists");
    FarkasWitness w;
    for (int e = 0; e < n; ++e) {
        const Rat& c = sol.primal[e];
        if (c.is_zero()) continue;
        const auto& el = els[e];
        VertexSet x = VertexSet::single(el.x);
        if (el.kind == Elemental::Monotone)
            w.m.push_back({c, x, V - x});
        else
            w.s.push_back({c, x, VertexSet::single(el.y), el.A});
    }
    if (auto v = verify_witness(ineq, w)) throw DefectError("Farkas witness failed verification: " + *v);
    return w;
}

OmegaShannonInequality certified(OmegaShannonInequality ineq) {
    ineq.witness = find_farkas(ineq);
    return ineq;
}

namespace {

OmegaShannonInequality scaled(const OmegaShannonInequality& q, const Rat& f) {
    OmegaShannonInequality out = q;
    for (auto& p : out.lhs_plain) p.lambda *= f;
    for (auto& j : out.lhs_mm) {
        j.alpha *= f;
        j.beta *= f;
        j.zeta *= f;
        j.kappa *= f;
    }
    for (auto& r : out.rhs) r.w *= f;
    if (out.witness) {
        for (auto& t : out.witness->m) t.m *= f;
        for (auto& t : out.witness->s) t.s *= f;
    }
    return out;
}

mpz_class coefficient_lcm(const OmegaShannonInequality& q, bool with_witness) {
    mpz_class l = 1;
    for (const auto& p : q.lhs_plain) l = lcm_den(l, p.lambda);
    for (const auto& j : q.lhs_mm)
        for (const Rat* c : {&j.alpha, &j.beta, &j.zeta, &j.kappa}) l = lcm_den(l, *c);
    for (const auto& r : q.rhs) l = lcm_den(l, r.w);
    if (with_witness && q.witness) {
        for (const auto& t : q.witness->m) l = lcm_den(l, t.m);
        for (const auto& t : q.witness->s) l = lcm_den(l, t.s);
    }
    return l;
}

}  // namespace

OmegaShannonInequality integralize(const OmegaShannonInequality& ineq) {
    Rat f(mpq_class(coefficient_lcm(ineq, false)));
    OmegaShannonInequality out = scaled(ineq, f);
    if (out.witness && !out.is_integral()) {
        // A fresh witness for the scaled inequality is often integral already.
        auto w = find_farkas(out);
        OmegaShannonInequality alt = out;
        alt.witness = w;
        out = alt.is_integral() ? alt : scaled(out, Rat(mpq_class(coefficient_lcm(out, true))));
    }
    if (out.witness)
        if (auto v = verify_witness(out, *out.witness)) throw DefectError("integralized witness: " + *v);
    return out;
}

std::optional<std::string> check_unconditional_mass(const OmegaShannonInequality& ineq) {
    Rat lhs = ineq.mass(), rhs = ineq.unconditional_rhs();
    if (lhs > rhs) return "mass " + lhs.str() + " exceeds unconditional rhs weight " + rhs.str();
    return std::nullopt;
}

// ---------------------------------------------------------------- witness maps

namespace {

void require_integral_certificate(const OmegaShannonInequality& q, const char* who) {
    if (!q.witness) throw std::invalid_argument(std::string(who) + ": inequality has no witness");
    if (!q.is_integral()) throw std::invalid_argument(std::string(who) + ": inequality is not integral");
    if (auto v = validate(q)) throw std::invalid_argument(std::string(who) + ": " + *v);
}

}  // namespace

OmegaShannonInequality normalize_well_behaved(const OmegaShannonInequality& ineq) {
    OmegaShannonInequality out = ineq;
    std::optional<WitnessMaps> wm;
    if (out.witness) wm = WitnessMaps::of(*out.witness);
    for (auto& j : out.lhs_mm) {
        for (auto [c, set] : {std::pair{&j.alpha, j.X}, std::pair{&j.beta, j.Y}, std::pair{&j.zeta, j.Z}}) {
            if (*c <= j.kappa) continue;
            if (wm) wm->add_m(set, j.G, *c - j.kappa);
            *c = j.kappa;
        }
    }
    if (wm) out.witness = wm->to_witness();
    return out;
}

// ---------------------------------------------------------------- reset

OmegaShannonInequality reset(const OmegaShannonInequality& ineq, std::size_t i0) {
    require_integral_certificate(ineq, "reset");
    if (i0 >= ineq.rhs.size()) throw std::invalid_argument("reset: index out of range");
    if (!ineq.rhs[i0].X.empty() || ineq.rhs[i0].w.sign() <= 0)
        throw std::invalid_argument("reset: term must be unconditional with positive weight");

    OmegaShannonInequality q = ineq;
    WitnessMaps wm = WitnessMaps::of(*q.witness);
    VertexSet W = q.rhs[i0].Y;
    q.rhs[i0].w -= 1;

    auto drop_if_empty = [&](std::size_t j) {
        const auto& t = q.lhs_mm[j];
        if (!t.kappa.is_zero()) return;
        wm.add_m(t.X, t.G, t.alpha);
        wm.add_m(t.Y, t.G, t.beta);
        wm.add_m(t.Z, t.G, t.zeta);
        q.lhs_mm.erase(q.lhs_mm.begin() + static_cast<long>(j));
    };

    const long cap = 1'000'000;
    for (long it = 0;; ++it) {
        if (it > cap) throw DefectError("reset: cancellation loop did not terminate");
        if (W.empty()) break;
        bool done = false;
        for (auto& p : q.lhs_plain)
            if (p.U == W && p.lambda.sign() > 0) {
                p.lambda -= 1;
                done = true;
                break;
            }
        if (done) break;
        for (std::size_t j = 0; j < q.lhs_mm.size() && !done; ++j) {
            auto& t = q.lhs_mm[j];
            if (t.kappa.sign() <= 0) continue;
            Rat* c = nullptr;
            if ((t.G | t.X) == W && t.alpha.sign() > 0) c = &t.alpha;
            else if ((t.G | t.Y) == W && t.beta.sign() > 0) c = &t.beta;
            else if ((t.G | t.Z) == W && t.zeta.sign() > 0) c = &t.zeta;
            else if (t.G == W && t.kappa > max(t.alpha, max(t.beta, t.zeta))) c = nullptr, done = true;
            if (c) {
                *c -= 1;
                done = true;
            }
            if (done) {
                t.kappa -= 1;
                drop_if_empty(j);
            }
        }
        if (done) break;
        // Cancellation against the RHS of the identity.
        bool moved = false;
        for (std::size_t i = 0; i < q.rhs.size(); ++i) {
            auto& r = q.rhs[i];
            if (r.X == W && r.w.sign() > 0 && !(r.Y - W).empty()) {
                r.w -= 1;
                W = W | r.Y;
                moved = true;
                break;
            }
        }
        if (moved) continue;
        if (auto k = wm.mono_partner(W)) {
            wm.add_m(VertexSet(k->first), VertexSet(k->second), Rat(-1));
            W = VertexSet(k->second);
            continue;
        }
        if (auto s = wm.sub_partner(W)) {
            auto [y, z, x] = s->second;
            wm.add_s(y, z, x, Rat(-1));
            wm.add_m(z, x, Rat(1));
            W = x | y | z;
            continue;
        }
        throw DefectError("reset: no cancellation partner for h(" + std::to_string(W.bits) + ")");
    }
    q.witness = wm.to_witness();
    if (auto v = validate(q)) throw DefectError("reset produced an invalid inequality: " + *v);
    return q;
}

// ---------------------------------------------------------------- proof sequences

std::string to_string(ProofStep::Kind k) {
    switch (k) {
        case ProofStep::Decomposition: return "decomposition";
        case ProofStep::Composition: return "composition";
        case ProofStep::Monotonicity: return "monotonicity";
        case ProofStep::Submodularity: return "submodularity";
    }
    return "?";
}

std::string ProofStep::str(const Hypergraph& H) const {
    const std::string arrow = " \xe2\x86\x92 ";
    std::string xy = cond_str(H, X | Y, {});
    std::string x = X.empty() ? std::string("0") : cond_str(H, X, {});
    switch (kind) {
        case Decomposition: return xy + arrow + x + " + " + cond_str(H, Y, X) + "   [" + to_string(kind) + "]";
        case Composition: return x + " + " + cond_str(H, Y, X) + arrow + xy + "   [" + to_string(kind) + "]";
        case Monotonicity: return xy + arrow + x + "   [" + to_string(kind) + "]";
        case Submodularity: return cond_str(H, Y, X) + arrow + cond_str(H, Y, X | Z) + "   [" + to_string(kind) + "]";
    }
    return "?";
}

std::string render_sequence(const Hypergraph& H, const std::vector<ProofStep>& steps) {
    std::ostringstream os;
    for (std::size_t i = 0; i < steps.size(); ++i) os << (i + 1) << ". " << steps[i].str(H) << "\n";
    return os.str();
}

std::optional<std::string> apply_step(TermMultiset& t, const ProofStep& s) {
    auto take = [&](VertexSet y, VertexSet x) -> bool {
        if ((y - x).empty()) return true;  // h(Y|X) = 0 is always available
        if (t.coeff(y, x) < Rat(1)) return false;
        t.add(Rat(-1), y, x);
        return true;
    };
    const VertexSet none;
    switch (s.kind) {
        case ProofStep::Decomposition:
            if (!take(s.X | s.Y, none)) return "missing " + std::to_string((s.X | s.Y).bits);
            t.add(1, s.X, none);
            t.add(1, s.Y, s.X);
            return std::nullopt;
        case ProofStep::Composition:
            if (t.coeff(s.X, none) < Rat(1) && !s.X.empty()) return "missing h(X)";
            if (t.coeff(s.Y, s.X) < Rat(1) && !(s.Y - s.X).empty()) return "missing h(Y|X)";
            take(s.X, none);
            take(s.Y, s.X);
            t.add(1, s.X | s.Y, none);
            return std::nullopt;
        case ProofStep::Monotonicity:
            if (!take(s.X | s.Y, none)) return "missing h(XY)";
            t.add(1, s.X, none);
            return std::nullopt;
        case ProofStep::Submodularity:
            if (!take(s.Y, s.X)) return "missing h(Y|X)";
            t.add(1, s.Y, s.X | s.Z);
            return std::nullopt;
    }
    return "unknown step";
}

std::optional<ReplayViolation> replay_sequence(const OmegaShannonInequality& ineq, const std::vector<ProofStep>& steps) {
    TermMultiset t = ineq.rhs_terms();
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (auto e = apply_step(t, steps[i])) return ReplayViolation{static_cast<long>(i), to_string(steps[i].kind) + ": " + *e};
    if (auto k = t.first_deficit(ineq.lhs_terms()))
        return ReplayViolation{-1, "final terms do not cover h(" + std::to_string(k->first) + "|" + std::to_string(k->second) + ")"};
    return std::nullopt;
}

std::vector<ProofStep> build_proof_sequence(const OmegaShannonInequality& input) {
    require_integral_certificate(input, "build_proof_sequence");
    for (const auto& j : input.lhs_mm)
        if (j.alpha > j.kappa || j.beta > j.kappa || j.zeta > j.kappa)
            throw std::invalid_argument("build_proof_sequence: normalize_well_behaved first");

    const auto& q = input;
    std::vector<Rat> lam;
    for (const auto& p : q.lhs_plain) lam.push_back(p.lambda);
    struct Hat {
        Rat a, b, z, k;
    };
    std::vector<Hat> hat(q.lhs_mm.size());
    std::map<CKey, Rat> w;  // the un-paired part of the RHS
    for (const auto& r : q.rhs) {
        if ((r.Y - r.X).empty() || r.w.is_zero()) continue;
        w[ckey(r.Y, r.X)] += r.w;
    }
    WitnessMaps wm = WitnessMaps::of(*q.witness);
    std::vector<ProofStep> steps;

    auto add_w = [&](VertexSet y, VertexSet x, const Rat& c) {
        if ((y - x).empty()) return;
        Rat& r = w[ckey(y, x)];
        r += c;
        if (r.is_zero()) w.erase(ckey(y, x));
    };
    auto res_max = [&](std::size_t j) {
        const auto& t = q.lhs_mm[j];
        return max(t.alpha - hat[j].a, max(t.beta - hat[j].b, t.zeta - hat[j].z));
    };
    // h(empty) = 0, so an empty G is paired as soon as the condition allows.
    auto settle_empty_g = [&](std::size_t j) {
        if (q.lhs_mm[j].G.empty()) hat[j].k = q.lhs_mm[j].kappa - res_max(j);
    };
    auto residual = [&] {
        Rat r;
        for (const auto& l : lam) r += l;
        for (std::size_t j = 0; j < q.lhs_mm.size(); ++j) {
            const auto& t = q.lhs_mm[j];
            r += (t.alpha - hat[j].a) + (t.beta - hat[j].b) + (t.zeta - hat[j].z) + (t.kappa - hat[j].k);
        }
        return r;
    };
    for (std::size_t j = 0; j < q.lhs_mm.size(); ++j) settle_empty_g(j);

    const long cap = 10'000'000;
    for (long it = 0; residual().sign() > 0; ++it) {
        if (it > cap) throw DefectError("proof sequence construction did not terminate");
        auto i0 = std::find_if(w.begin(), w.end(), [](const auto& e) { return e.first.second == 0 && e.second.sign() > 0; });
        if (i0 == w.end()) throw DefectError("no unconditional RHS term left while LHS is not covered");
        const VertexSet W(i0->first.first);

        bool done = false;
        for (auto& l : lam)
            if (!done && l.sign() > 0) {
                std::size_t idx = static_cast<std::size_t>(&l - lam.data());
                if (q.lhs_plain[idx].U == W) {
                    l -= 1;
                    add_w(W, {}, -1);
                    done = true;
                }
            }
        if (done) continue;

        for (std::size_t j = 0; j < q.lhs_mm.size() && !done; ++j) {
            const auto& t = q.lhs_mm[j];
            auto try_dim = [&](VertexSet D, const Rat& full, Rat& h) {
                if (done || (t.G | D) != W || h >= full) return;
                add_w(W, {}, -1);
                if (!t.G.empty()) {
                    add_w(t.G, {}, 1);
                    steps.push_back({ProofStep::Decomposition, t.G, D, {}});
                }
                h += 1;
                settle_empty_g(j);
                done = true;
            };
            try_dim(t.X, t.alpha, hat[j].a);
            try_dim(t.Y, t.beta, hat[j].b);
            try_dim(t.Z, t.zeta, hat[j].z);
            if (!done && !t.G.empty() && t.G == W && t.kappa - hat[j].k > res_max(j)) {
                add_w(W, {}, -1);
                hat[j].k += 1;
                done = true;
            }
        }
        if (done) continue;

        // Case 1: composition with a conditional RHS term h(Y|W).
        for (auto& [k, c] : w)
            if (k.second == W.bits && c.sign() > 0) {
                VertexSet y(k.first);
                add_w(y, W, -1);
                add_w(W, {}, -1);
                add_w(W | y, {}, 1);
                steps.push_back({ProofStep::Composition, W, y, {}});
                done = true;
                break;
            }
        if (done) continue;
        // Case 2: monotonicity against m-term with X_p Y_p = W.
        if (auto k = wm.mono_partner(W)) {
            VertexSet y(k->first), x(k->second);
            wm.add_m(y, x, -1);
            add_w(W, {}, -1);
            add_w(x, {}, 1);
            steps.push_back({ProofStep::Monotonicity, x, y, {}});
            continue;
        }
        // Case 3: decomposition then submodularity against s-term.
        if (auto s = wm.sub_partner(W)) {
            auto [y, z, x] = s->second;
            wm.add_s(y, z, x, -1);
            add_w(W, {}, -1);
            if (!x.empty()) {
                add_w(x, {}, 1);
                steps.push_back({ProofStep::Decomposition, x, y, {}});
            }
            add_w(y, x | z, 1);
            steps.push_back({ProofStep::Submodularity, x, y, z});
            continue;
        }
        throw DefectError("proof sequence: h(W) has no cancellation partner");
    }
    return steps;
}

// ---------------------------------------------------------------- permute

OmegaShannonInequality permute(const OmegaShannonInequality& ineq, const std::vector<int>& perm) {
    OmegaShannonInequality out = ineq;
    auto p = [&](VertexSet s) { return permute(s, perm); };
    for (auto& t : out.lhs_plain) t.U = p(t.U);
    for (auto& j : out.lhs_mm) {
        j.X = p(j.X);
        j.Y = p(j.Y);
        j.Z = p(j.Z);
        j.G = p(j.G);
    }
    for (auto& r : out.rhs) {
        r.Y = p(r.Y);
        r.X = p(r.X);
    }
    if (out.witness) {
        for (auto& t : out.witness->m) {
            t.Y = p(t.Y);
            t.X = p(t.X);
        }
        for (auto& t : out.witness->s) {
            t.Y = p(t.Y);
            t.Z = p(t.Z);
            t.X = p(t.X);
        }
    }
    return out;
}

}  // namespace cqw
