#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "cqw/engine.hpp"

namespace cqw {

namespace {

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (int v : t) h ^= std::hash<int>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }
};

std::vector<int> columns(const Relation& R, const std::vector<std::string>& vars) {
    std::vector<int> c;
    c.reserve(vars.size());
    for (const auto& v : vars) {
        int i = R.column(v);
        if (i < 0) throw std::invalid_argument("variable " + v + " not in schema of " + R.name);
        c.push_back(i);
    }
    return c;
}

Tuple pick(const Tuple& row, const std::vector<int>& cols) {
    Tuple t;
    t.reserve(cols.size());
    for (int c : cols) t.push_back(row[c]);
    return t;
}

std::vector<std::string> shared_vars(const Relation& R, const Relation& S) {
    std::vector<std::string> out;
    for (const auto& v : R.schema)
        if (S.has(v)) out.push_back(v);
    return out;
}

std::vector<std::string> minus(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    for (const auto& v : a)
        if (std::find(b.begin(), b.end(), v) == b.end()) out.push_back(v);
    return out;
}

std::vector<std::string> inter_schema(const Relation& R, const std::vector<std::string>& X) {
    std::vector<std::string> out;
    for (const auto& v : X)
        if (R.has(v) && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

// Rows of R projected to key ++ val, sorted, so equal keys are adjacent.
struct Grouped {
    std::vector<Tuple> rows;  // key ++ val
    std::size_t klen = 0;
};

Grouped grouped(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X) {
    auto xs = inter_schema(R, X);
    auto ys = minus(Y, X);
    for (const auto& v : ys)
        if (!R.has(v)) throw std::invalid_argument("degree: variable " + v + " not in schema of " + R.name);
    std::vector<std::string> all = xs;
    for (const auto& v : ys)
        if (std::find(all.begin(), all.end(), v) == all.end()) all.push_back(v);
    Relation p = project(R, all);
    return {std::move(p.rows), xs.size()};
}

bool same_key(const Tuple& a, const Tuple& b, std::size_t k) { return std::equal(a.begin(), a.begin() + static_cast<long>(k), b.begin()); }

// Calls f(key, degree) for every distinct key.
template <class F>
void for_each_key_degree(const Grouped& g, F&& f) {
    std::size_t i = 0;
    while (i < g.rows.size()) {
        std::size_t j = i + 1;
        while (j < g.rows.size() && same_key(g.rows[i], g.rows[j], g.klen)) ++j;
        f(Tuple(g.rows[i].begin(), g.rows[i].begin() + static_cast<long>(g.klen)), j - i);
        i = j;
    }
}

}  // namespace

// ------------------------------------------------------------------ basics

Relation::Relation(std::string n, std::vector<std::string> s, std::vector<Tuple> r)
    : name(std::move(n)), schema(std::move(s)), rows(std::move(r)) {
    for (std::size_t i = 0; i < schema.size(); ++i)
        for (std::size_t j = i + 1; j < schema.size(); ++j)
            if (schema[i] == schema[j]) throw std::invalid_argument("repeated variable " + schema[i] + " in relation " + name);
    canonicalize();
}

int Relation::column(const std::string& v) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i] == v) return static_cast<int>(i);
    return -1;
}

bool Relation::contains(const Tuple& t) const { return std::binary_search(rows.begin(), rows.end(), t); }

void Relation::canonicalize() {
    for (const auto& r : rows)
        if (r.size() != schema.size()) throw std::invalid_argument("row arity does not match schema of " + name);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

Relation nullary(bool value) { return Relation("", {}, value ? std::vector<Tuple>{Tuple{}} : std::vector<Tuple>{}); }

int Dictionary::intern(const std::string& v) {
    auto [it, fresh] = ids.emplace(v, static_cast<int>(values.size()));
    if (fresh) values.push_back(v);
    return it->second;
}

Hypergraph Query::hypergraph() const {
    if (atoms.empty()) throw std::invalid_argument("query has no atoms");
    std::vector<std::vector<std::string>> edges;
    for (const auto& a : atoms) {
        if (a.vars.empty()) throw std::invalid_argument("atom " + a.name + " has no variables");
        edges.push_back(a.vars);
    }
    return Hypergraph::from_names(edges);
}

std::vector<std::string> Query::variables() const { return hypergraph().names(); }

void Database::add(Relation r) {
    auto it = relations.find(r.name);
    if (it != relations.end()) N -= it->second.size();
    N += r.size();
    relations[r.name] = std::move(r);
}

const Relation& Database::at(const std::string& atom) const {
    auto it = relations.find(atom);
    if (it == relations.end()) throw std::invalid_argument("no relation for atom " + atom);
    return it->second;
}

std::vector<std::string> names_of(const Hypergraph& H, VertexSet s) {
    std::vector<std::string> out;
    for (int v : s.members()) out.push_back(H.names()[v]);
    return out;
}

// --------------------------------------------------------------- degrees

std::size_t degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X) {
    Grouped g = grouped(R, Y, X);
    std::size_t best = 0;
    for_each_key_degree(g, [&](const Tuple&, std::size_t d) { best = std::max(best, d); });
    return best;
}

std::size_t degree_at(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X, const Tuple& x) {
    if (x.size() != X.size()) throw std::invalid_argument("degree_at: value tuple does not match X");
    auto ys = minus(Y, X);
    auto yc = columns(R, ys);
    std::vector<std::pair<int, int>> fix;  // (column, value)
    for (std::size_t i = 0; i < X.size(); ++i)
        if (int c = R.column(X[i]); c >= 0) fix.push_back({c, x[i]});
    std::vector<Tuple> seen;
    for (const auto& r : R.rows) {
        bool ok = std::all_of(fix.begin(), fix.end(), [&](const auto& f) { return r[f.first] == f.second; });
        if (ok) seen.push_back(pick(r, yc));
    }
    std::sort(seen.begin(), seen.end());
    return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

DegreePartition partition_by_degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X,
                                    std::size_t delta) {
    if (delta == 0) throw std::invalid_argument("partition_by_degree: threshold must be positive");
    Grouped g = grouped(R, Y, X);
    auto xs = inter_schema(R, X);
    std::vector<Tuple> heavy;
    for_each_key_degree(g, [&](const Tuple& key, std::size_t d) {
        if (d > delta) heavy.push_back(key);
    });
    DegreePartition out;
    out.heavy = Relation(R.name + "_h", xs, heavy);
    auto xc = columns(R, xs);
    std::vector<Tuple> light;
    for (const auto& r : R.rows)
        if (!out.heavy.contains(pick(r, xc))) light.push_back(r);
    out.light = Relation(R.name + "_l", R.schema, std::move(light));
    return out;
}

std::vector<DegreeBucket> bucket_by_degree(const Relation& R, const std::vector<std::string>& Y, const std::vector<std::string>& X) {
    Grouped g = grouped(R, Y, X);
    auto xs = inter_schema(R, X);
    std::map<Tuple, int> band;
    for_each_key_degree(g, [&](const Tuple& key, std::size_t d) { band[key] = std::bit_width(d) - 1; });
    std::map<int, std::vector<Tuple>> rows;
    auto xc = columns(R, xs);
    for (const auto& r : R.rows) rows[band.at(pick(r, xc))].push_back(r);
    std::vector<DegreeBucket> out;
    for (auto& [b, rs] : rows)
        out.push_back({Relation(R.name + "_b" + std::to_string(b), R.schema, std::move(rs)), std::size_t{1} << b, std::size_t{2} << b});
    return out;
}

// ----------------------------------------------------- relational algebra

Relation project(const Relation& R, const std::vector<std::string>& vars) {
    auto c = columns(R, vars);
    std::vector<Tuple> rows;
    rows.reserve(R.rows.size());
    for (const auto& r : R.rows) rows.push_back(pick(r, c));
    return Relation(R.name, vars, std::move(rows));
}

Relation reorder(const Relation& R, const std::vector<std::string>& vars) {
    if (vars.size() != R.schema.size()) throw std::invalid_argument("reorder: not a permutation of the schema");
    return project(R, vars);
}

Relation join(const Relation& R, const Relation& S) {
    auto sh = shared_vars(R, S);
    auto extra = minus(S.schema, R.schema);
    std::vector<std::string> schema = R.schema;
    schema.insert(schema.end(), extra.begin(), extra.end());
    auto rk = columns(R, sh), sk = columns(S, sh), se = columns(S, extra);
    std::unordered_map<Tuple, std::vector<const Tuple*>, TupleHash> index;
    for (const auto& s : S.rows) index[pick(s, sk)].push_back(&s);
    std::vector<Tuple> rows;
    for (const auto& r : R.rows) {
        auto it = index.find(pick(r, rk));
        if (it == index.end()) continue;
        for (const Tuple* s : it->second) {
            Tuple t = r;
            for (int c : se) t.push_back((*s)[c]);
            rows.push_back(std::move(t));
        }
    }
    return Relation(R.name + "*" + S.name, std::move(schema), std::move(rows));
}

Relation semijoin(const Relation& R, const Relation& S) {
    auto sh = shared_vars(R, S);
    Relation out = R;
    if (sh.empty()) {
        if (S.empty()) out.rows.clear();
        return out;
    }
    auto rk = columns(R, sh), sk = columns(S, sh);
    std::unordered_set<Tuple, TupleHash> keys;
    for (const auto& s : S.rows) keys.insert(pick(s, sk));
    out.rows.clear();
    for (const auto& r : R.rows)
        if (keys.count(pick(r, rk))) out.rows.push_back(r);
    return out;
}

Relation intersect(const Relation& R, const Relation& S) {
    Relation s = reorder(S, R.schema);
    Relation out = R;
    out.rows.clear();
    std::set_intersection(R.rows.begin(), R.rows.end(), s.rows.begin(), s.rows.end(), std::back_inserter(out.rows));
    return out;
}

Relation unite(const Relation& R, const Relation& S) {
    Relation s = reorder(S, R.schema);
    Relation out = R;
    out.rows.clear();
    std::set_union(R.rows.begin(), R.rows.end(), s.rows.begin(), s.rows.end(), std::back_inserter(out.rows));
    return out;
}

// ------------------------------------------------------------ brute force

namespace {

template <class F>
bool nested_loop(const Query& Q, const Database& db, F&& on_full) {
    const auto vars = Q.variables();
    std::vector<int> val(vars.size(), -1);
    struct AtomCols {
        const Relation* R;
        std::vector<int> var;  // per column: variable index
    };
    std::vector<AtomCols> atoms;
    for (const auto& a : Q.atoms) {
        const Relation& R = db.at(a.name);
        if (R.schema.size() != a.vars.size()) throw std::invalid_argument("arity mismatch for atom " + a.name);
        AtomCols ac{&R, {}};
        for (const auto& v : a.vars) ac.var.push_back(static_cast<int>(std::find(vars.begin(), vars.end(), v) - vars.begin()));
        atoms.push_back(std::move(ac));
    }
    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
        if (i == atoms.size()) return on_full(val);
        const auto& ac = atoms[i];
        for (const auto& row : ac.R->rows) {
            std::vector<int> bound;
            bool ok = true;
            for (std::size_t c = 0; c < row.size() && ok; ++c) {
                int& slot = val[ac.var[c]];
                if (slot < 0) {
                    slot = row[c];
                    bound.push_back(ac.var[c]);
                } else if (slot != row[c]) {
                    ok = false;
                }
            }
            if (ok && rec(i + 1)) return true;
            for (int v : bound) val[v] = -1;
        }
        return false;
    };
    return rec(0);
}

}  // namespace

bool brute_force(const Query& Q, const Database& db) {
    return nested_loop(Q, db, [](const std::vector<int>&) { return true; });
}

Relation brute_force_join(const Query& Q, const Database& db) {
    std::vector<Tuple> rows;
    nested_loop(Q, db, [&](const std::vector<int>& v) {
        rows.push_back(v);
        return false;
    });
    return Relation(Q.name, Q.variables(), std::move(rows));
}

std::map<std::uint32_t, Relation> edge_relations(const Query& Q, const Database& db) {
    Hypergraph H = Q.hypergraph();
    std::map<std::uint32_t, Relation> out;
    for (const auto& a : Q.atoms) {
        Relation R = db.at(a.name);
        if (R.schema != a.vars) throw std::invalid_argument("relation " + a.name + " does not match the atom's variables");
        VertexSet e = H.set_of(a.vars);
        R = reorder(R, names_of(H, e));
        R.name = a.name;
        auto it = out.find(e.bits);
        if (it == out.end())
            out.emplace(e.bits, std::move(R));
        else
            it->second = intersect(it->second, R);
    }
    return out;
}

}  // namespace cqw
