#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqw/rational.hpp"

namespace cqw {

enum class Rel { Le, Eq, Ge };
enum class Bound { NonNeg, Free };

struct Constraint {
    std::vector<Rat> coeffs;
    Rel rel = Rel::Le;
    Rat rhs;
};

// maximize objective . x subject to constraints and per-variable lower bounds.
struct LinearProgram {
    int num_vars = 0;
    std::vector<Rat> objective;
    std::vector<Constraint> constraints;
    std::vector<Bound> bounds;  // empty means all NonNeg

    explicit LinearProgram(int n = 0) : num_vars(n), objective(n) {}
    Bound bound(int j) const { return bounds.empty() ? Bound::NonNeg : bounds[j]; }
    void add(std::vector<Rat> coeffs, Rel rel, Rat rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

// dual[i] pairs with constraints[i]: >= 0 for Le rows, <= 0 for Ge rows,
// free for Eq rows.  A^T y >= c on NonNeg columns, == c on Free columns.
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Rat value;
    std::vector<Rat> primal;
    std::vector<Rat> dual;
    int pivots = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

// Exact check of primal/dual feasibility, complementary slackness and
// objective equality.  Returns the first violation found.
std::optional<std::string> verify_certificate(const LinearProgram& lp, const LpSolution& sol);

std::string to_string(LpStatus s);

}  // namespace cqw
