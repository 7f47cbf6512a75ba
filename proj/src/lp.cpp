#include "cqw/lp.hpp"

#include <sstream>
#include <stdexcept>

namespace cqw {

void LinearProgram::add(std::vector<Rat> coeffs, Rel rel, Rat rhs) {
    if (static_cast<int>(coeffs.size()) != num_vars) throw std::invalid_argument("constraint width mismatch");
    constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

// Dictionary-form tableau.  Row i reads  sum_j T[i][j] x_{N[j]} + x_{B[i]} = T[i][rhs].
// Objective rows hold -c on nonbasic columns and the current value in rhs.
// Variable ids: structural 0..n-1, slacks n..n+m-1, artificial n+m.
class Tableau {
public:
    Tableau(int n, int m) : n_(n), m_(m), cols_(n + 1), T_(m + 2, std::vector<Rat>(n + 2)), N_(n + 1), B_(m) {
        for (int j = 0; j < n; ++j) N_[j] = j;
        N_[n] = n + m;  // artificial
        for (int i = 0; i < m; ++i) B_[i] = n + i;
    }

    Rat& at(int i, int j) { return T_[i][j]; }
    Rat& rhs(int i) { return T_[i][cols_]; }
    int obj_row(int phase) const { return phase == 1 ? m_ + 1 : m_; }

    void pivot(int r, int s) {
        ++pivots;
        Rat inv = T_[r][s].inverse();
        std::vector<int> nz;
        for (int j = 0; j <= cols_; ++j)
            if (j != s && !T_[r][j].is_zero()) nz.push_back(j);
        for (int i = 0; i < m_ + 2; ++i) {
            if (i == r || T_[i][s].is_zero()) continue;
            Rat f = T_[i][s] * inv;
            for (int j : nz) T_[i][j] -= f * T_[r][j];
            T_[i][s] = -f;
        }
        for (int j : nz) T_[r][j] *= inv;
        T_[r][s] = inv;
        std::swap(B_[r], N_[s]);
    }

    // Bland's rule: smallest variable id enters; ties in the ratio test go to
    // the smallest basic id.  Returns false when unbounded.
    bool run(int phase) {
        int z = obj_row(phase);
        for (;;) {
            int s = -1;
            for (int j = 0; j < cols_; ++j) {
                if (phase == 2 && N_[j] == n_ + m_) continue;
                if (T_[z][j].sign() < 0 && (s < 0 || N_[j] < N_[s])) s = j;
            }
            if (s < 0) return true;
            int r = -1;
            Rat best;
            for (int i = 0; i < m_; ++i) {
                if (T_[i][s].sign() <= 0) continue;
                Rat ratio = T_[i][cols_] / T_[i][s];
                int c = r < 0 ? -1 : cmp(ratio, best);
                if (c < 0 || (c == 0 && B_[i] < B_[r])) {
                    r = i;
                    best = std::move(ratio);
                }
            }
            if (r < 0) return false;
            pivot(r, s);
        }
    }

    int n_, m_, cols_;
    std::vector<std::vector<Rat>> T_;
    std::vector<int> N_, B_;
    int pivots = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const int nv = lp.num_vars;
    // Column expansion: free variables split into x+ and x-.
    std::vector<int> pos_col(nv), neg_col(nv, -1);
    int n = 0;
    for (int j = 0; j < nv; ++j) {
        pos_col[j] = n++;
        if (lp.bound(j) == Bound::Free) neg_col[j] = n++;
    }
    // Row expansion: every row becomes a <= row; equalities become two rows.
    struct RowRef {
        int orig;
        int sign;
    };
    std::vector<RowRef> rows;
    for (int i = 0; i < static_cast<int>(lp.constraints.size()); ++i) {
        const auto& c = lp.constraints[i];
        if (c.rel != Rel::Ge) rows.push_back({i, 1});
        if (c.rel != Rel::Le) rows.push_back({i, -1});
    }
    const int m = static_cast<int>(rows.size());

    Tableau tab(n, m);
    for (int r = 0; r < m; ++r) {
        const auto& c = lp.constraints[rows[r].orig];
        int sg = rows[r].sign;
        for (int j = 0; j < nv; ++j) {
            if (c.coeffs[j].is_zero()) continue;
            Rat v = sg > 0 ? c.coeffs[j] : -c.coeffs[j];
            if (neg_col[j] >= 0) tab.at(r, neg_col[j]) = -v;
            tab.at(r, pos_col[j]) = std::move(v);
        }
        tab.at(r, n) = Rat(-1);
        tab.rhs(r) = sg > 0 ? c.rhs : -c.rhs;
    }
    for (int j = 0; j < nv; ++j) {
        if (lp.objective[j].is_zero()) continue;
        tab.at(m, pos_col[j]) = -lp.objective[j];
        if (neg_col[j] >= 0) tab.at(m, neg_col[j]) = lp.objective[j];
    }
    tab.at(m + 1, n) = Rat(1);  // phase 1: maximize -x_art

    LpSolution sol;
    int worst = -1;
    for (int r = 0; r < m; ++r)
        if (tab.rhs(r).sign() < 0 && (worst < 0 || cmp(tab.rhs(r), tab.rhs(worst)) < 0)) worst = r;
    if (worst >= 0) {
        tab.pivot(worst, n);
        tab.run(1);
        if (tab.rhs(m + 1).sign() < 0) {
            sol.status = LpStatus::Infeasible;
            sol.pivots = tab.pivots;
            return sol;
        }
        for (int r = 0; r < m; ++r) {
            if (tab.B_[r] != n + m) continue;
            int s = -1;
            for (int j = 0; j <= n; ++j)
                if (!tab.at(r, j).is_zero() && tab.N_[j] != n + m && (s < 0 || tab.N_[j] < tab.N_[s])) s = j;
            if (s >= 0) tab.pivot(r, s);
            // otherwise the row is redundant and x_art stays basic at zero
        }
    }
    // The artificial column must never re-enter; zero it out when nonbasic.
    for (int j = 0; j <= n; ++j)
        if (tab.N_[j] == n + m)
            for (int i = 0; i < m + 2; ++i) tab.at(i, j) = Rat();
    if (!tab.run(2)) {
        sol.status = LpStatus::Unbounded;
        sol.pivots = tab.pivots;
        return sol;
    }

    std::vector<Rat> x(n);
    for (int r = 0; r < m; ++r)
        if (tab.B_[r] < n) x[tab.B_[r]] = tab.rhs(r);
    std::vector<Rat> y(m);
    for (int j = 0; j <= n; ++j) {
        int v = tab.N_[j];
        if (v >= n && v < n + m) y[v - n] = tab.at(m, j);
    }

    sol.status = LpStatus::Optimal;
    sol.value = tab.rhs(m);
    sol.primal.assign(nv, Rat());
    for (int j = 0; j < nv; ++j) {
        sol.primal[j] = x[pos_col[j]];
        if (neg_col[j] >= 0) sol.primal[j] -= x[neg_col[j]];
    }
    sol.dual.assign(lp.constraints.size(), Rat());
    for (int r = 0; r < m; ++r) {
        if (y[r].is_zero()) continue;
        if (rows[r].sign > 0)
            sol.dual[rows[r].orig] += y[r];
        else
            sol.dual[rows[r].orig] -= y[r];
    }
    sol.pivots = tab.pivots;
    return sol;
}

std::optional<std::string> verify_certificate(const LinearProgram& lp, const LpSolution& sol) {
    if (sol.status != LpStatus::Optimal) return "solution is not optimal";
    const int nv = lp.num_vars;
    const auto& rows = lp.constraints;
    if (static_cast<int>(sol.primal.size()) != nv || sol.dual.size() != rows.size()) return "size mismatch";
    std::ostringstream err;
    for (int j = 0; j < nv; ++j)
        if (lp.bound(j) == Bound::NonNeg && sol.primal[j].sign() < 0) {
            err << "primal x" << j << " below bound";
            return err.str();
        }
    Rat primal_obj, dual_obj;
    for (int j = 0; j < nv; ++j) primal_obj += lp.objective[j] * sol.primal[j];
    std::vector<Rat> aty(nv);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Rat lhs;
        for (int j = 0; j < nv; ++j)
            if (!rows[i].coeffs[j].is_zero()) lhs += rows[i].coeffs[j] * sol.primal[j];
        int c = cmp(lhs, rows[i].rhs);
        bool ok = rows[i].rel == Rel::Le ? c <= 0 : (rows[i].rel == Rel::Ge ? c >= 0 : c == 0);
        if (!ok) {
            err << "primal infeasible at row " << i;
            return err.str();
        }
        const Rat& y = sol.dual[i];
        if ((rows[i].rel == Rel::Le && y.sign() < 0) || (rows[i].rel == Rel::Ge && y.sign() > 0)) {
            err << "dual sign wrong at row " << i;
            return err.str();
        }
        if (!y.is_zero() && c != 0) {
            err << "complementary slackness fails at row " << i;
            return err.str();
        }
        if (y.is_zero()) continue;
        dual_obj += y * rows[i].rhs;
        for (int j = 0; j < nv; ++j)
            if (!rows[i].coeffs[j].is_zero()) aty[j] += rows[i].coeffs[j] * y;
    }
    for (int j = 0; j < nv; ++j) {
        int c = cmp(aty[j], lp.objective[j]);
        if (lp.bound(j) == Bound::Free ? c != 0 : c < 0) {
            err << "dual infeasible at column " << j;
            return err.str();
        }
        if (c != 0 && !sol.primal[j].is_zero()) {
            err << "complementary slackness fails at column " << j;
            return err.str();
        }
    }
    if (primal_obj != sol.value) return "reported value differs from primal objective";
    if (dual_obj != primal_obj) return "dual objective mismatch: " + dual_obj.str() + " vs " + primal_obj.str();
    return std::nullopt;
}

}  // namespace cqw
