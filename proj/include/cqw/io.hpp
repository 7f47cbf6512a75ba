#pragma once

#include <stdexcept>
#include <string>

#include "cqw/engine.hpp"
#include "cqw/width.hpp"
#include "json.hpp"

namespace cqw {

// Input format error with a 1-based position (0 when not applicable).
struct ParseError : std::invalid_argument {
    int line = 0, col = 0;
    ParseError(const std::string& what, int l, int c);
};

// Grammar:  Name() :- Atom(v1,...,vk) {, Atom(...)} .   with # line comments.
Query parse_query_text(const std::string& text);
Query parse_query(const std::string& path);

// One `<Atom>.tsv` per atom in `dir`; the header row must equal the atom's
// variables in order.  Values are interned into db.dict.
Database load_database(const std::string& dir, const Query& Q);

// Width report: query, omega, width, classic, witness, plan, lp_count, mode, wall_ms.
nlohmann::json width_json(const Query& Q, const Hypergraph& H, const Rat& omega, const WidthReport& r, double wall_ms);
// Witness object {bitmask: "p/q"}: bit i of the binary string (rightmost = 0) is vertex i.
Polymatroid witness_from_json(const nlohmann::json& w, int k);

}  // namespace cqw
