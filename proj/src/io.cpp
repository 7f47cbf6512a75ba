#include "cqw/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cqw {

ParseError::ParseError(const std::string& what, int l, int c)
    : std::invalid_argument(l > 0 ? what + " at line " + std::to_string(l) + ", column " + std::to_string(c) : what), line(l), col(c) {}

namespace {

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    void skip() {
        for (;;) {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
            if (i_ < s_.size() && s_[i_] == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') advance();
                continue;
            }
            return;
        }
    }

    bool at_end() {
        skip();
        return i_ >= s_.size();
    }

    [[noreturn]] void fail(const std::string& what) {
        skip();
        if (i_ >= s_.size()) throw ParseError(what + " (reached end of input)", line_, col_);
        throw ParseError(what, line_, col_);
    }

    std::string ident(const char* what) {
        skip();
        std::size_t b = i_;
        if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) advance();
        if (b == i_) fail(std::string("expected ") + what);
        return s_.substr(b, i_ - b);
    }

    void expect(const std::string& tok) {
        skip();
        if (s_.compare(i_, tok.size(), tok) != 0) fail("expected '" + tok + "'");
        for (std::size_t k = 0; k < tok.size(); ++k) advance();
    }

    bool accept(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            advance();
            return true;
        }
        return false;
    }

    int line() const { return line_; }
    int col() const { return col_; }

private:
    void advance() {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1, col_ = 1;
};

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, '\t')) out.push_back(cur);
    if (!line.empty() && line.back() == '\t') out.push_back("");
    return out;
}

}  // namespace

Query parse_query_text(const std::string& text) {
    Lexer lx(text);
    Query q;
    q.name = lx.ident("query name");
    lx.expect("(");
    lx.expect(")");
    lx.expect(":-");
    std::set<std::string> seen;
    do {
        lx.skip();
        int l = lx.line(), c = lx.col();
        QueryAtom a;
        a.name = lx.ident("atom name");
        if (!seen.insert(a.name).second) throw ParseError("duplicate atom name " + a.name, l, c);
        lx.expect("(");
        if (lx.accept(')')) throw ParseError("atom " + a.name + " has no variables", l, c);
        do {
            lx.skip();
            int vl = lx.line(), vc = lx.col();
            std::string v = lx.ident("variable");
            if (std::find(a.vars.begin(), a.vars.end(), v) != a.vars.end())
                throw ParseError("variable " + v + " repeated in atom " + a.name, vl, vc);
            a.vars.push_back(std::move(v));
        } while (lx.accept(','));
        lx.expect(")");
        q.atoms.push_back(std::move(a));
    } while (lx.accept(','));
    lx.expect(".");
    if (!lx.at_end()) lx.fail("unexpected text after the final '.'");
    if (q.hypergraph().num_names() > kMaxVertices) throw ParseError("too many variables", 0, 0);
    return q;
}

Query parse_query(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read query file " + path, 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_query_text(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0, 0);
    }
}

Database load_database(const std::string& dir, const Query& Q) {
    Database db;
    for (const auto& a : Q.atoms) {
        std::filesystem::path p = std::filesystem::path(dir) / (a.name + ".tsv");
        std::ifstream in(p);
        if (!in) throw ParseError("missing data file " + p.string(), 0, 0);
        std::string line;
        int ln = 0;
        bool header = false;
        std::vector<Tuple> rows;
        while (std::getline(in, line)) {
            ++ln;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() && header) continue;
            auto cells = split_tabs(line);
            if (!header) {
                if (cells != a.vars) {
                    std::string want;
                    for (const auto& v : a.vars) want += (want.empty() ? "" : "\t") + v;
                    throw ParseError(p.string() + ": header must be '" + want + "'", ln, 1);
                }
                header = true;
                continue;
            }
            if (cells.size() != a.vars.size())
                throw ParseError(p.string() + ": expected " + std::to_string(a.vars.size()) + " columns", ln, 1);
            Tuple t;
            for (const auto& c : cells) t.push_back(db.dict.intern(c));
            rows.push_back(std::move(t));
        }
        if (!header) throw ParseError(p.string() + ": missing header row", 1, 1);
        db.add(Relation(a.name, a.vars, std::move(rows)));
    }
    return db;
}

nlohmann::json width_json(const Query& Q, const Hypergraph& H, const Rat& omega, const WidthReport& r, double wall_ms) {
    nlohmann::json j;
    std::string q = Q.name + "() :- ";
    for (std::size_t i = 0; i < Q.atoms.size(); ++i) {
        q += (i ? ", " : "") + Q.atoms[i].name + "(";
        for (std::size_t v = 0; v < Q.atoms[i].vars.size(); ++v) q += (v ? "," : "") + Q.atoms[i].vars[v];
        q += ")";
    }
    j["query"] = q + ".";
    j["omega"] = omega.str();
    j["width"] = r.width.str();
    j["classic"] = r.classic;
    nlohmann::json w = nlohmann::json::object();
    const int k = H.num_names();
    for (std::uint32_t s = 1; s < (1u << k); ++s) {
        std::string bits;
        for (int b = k - 1; b >= 0; --b) bits += ((s >> b) & 1u) ? '1' : '0';
        w[bits] = r.witness(VertexSet(s)).str();
    }
    j["witness"] = w;
    nlohmann::json plan = nlohmann::json::array();
    for (const auto& c : r.plan.choices) {
        nlohmann::json e;
        e["index"] = c.index;
        e["U"] = H.fmt(c.U);
        e["choice"] = c.join ? "join" : "mm";
        if (!c.join) e["term"] = c.term.str(H);
        e["value"] = c.value.str();
        plan.push_back(e);
    }
    nlohmann::json order = nlohmann::json::array();
    for (VertexSet b : r.plan.order) order.push_back(H.fmt(b));
    j["order"] = order;
    j["plan"] = plan;
    j["lp_count"] = r.lp_count;
    j["mode"] = to_string(r.mode);
    j["wall_ms"] = wall_ms;
    return j;
}

Polymatroid witness_from_json(const nlohmann::json& w, int k) {
    Polymatroid h(k);
    for (const auto& [key, val] : w.items()) {
        if (static_cast<int>(key.size()) != k) throw ParseError("witness key " + key + " has the wrong length", 0, 0);
        std::uint32_t s = 0;
        for (char c : key) {
            if (c != '0' && c != '1') throw ParseError("witness key " + key + " is not a bitmask", 0, 0);
            s = (s << 1) | static_cast<std::uint32_t>(c - '0');
        }
        h[VertexSet(s)] = Rat::parse(val.get<std::string>());
    }
    return h;
}

}  // namespace cqw
