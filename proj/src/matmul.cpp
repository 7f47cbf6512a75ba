#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cqw/engine.hpp"

namespace cqw {

std::string to_string(MatmulAlgo a) {
    switch (a) {
        case MatmulAlgo::Naive: return "naive";
        case MatmulAlgo::Strassen: return "strassen";
        case MatmulAlgo::BlockedRect: return "blocked_rect";
    }
    return "?";
}

mpz_class DenseMatrix::value(int i, int j) const {
    std::size_t p = static_cast<std::size_t>(i) * cols + j;
    if (is_wide()) return wide[p];
    return mpz_class(static_cast<long>(entries[p]));
}

bool DenseMatrix::nonzero(int i, int j) const {
    std::size_t p = static_cast<std::size_t>(i) * cols + j;
    return is_wide() ? wide[p] != 0 : entries[p] != 0;
}

bool DenseMatrix::operator==(const DenseMatrix& o) const {
    if (rows != o.rows || cols != o.cols) return false;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (value(i, j) != o.value(i, j)) return false;
    return true;
}

namespace {

using Mat = std::vector<std::int64_t>;  // square n x n, row-major

void naive_into(const std::int64_t* a, const std::int64_t* b, std::int64_t* c, int n, int m, int p, int lda, int ldb, int ldc,
                MatmulStats* st) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            std::int64_t x = a[static_cast<std::size_t>(i) * lda + j];
            if (x == 0) continue;
            const std::int64_t* brow = b + static_cast<std::size_t>(j) * ldb;
            std::int64_t* crow = c + static_cast<std::size_t>(i) * ldc;
            for (int k = 0; k < p; ++k) crow[k] += x * brow[k];
            if (st) st->scalar_mults += p;
        }
}

Mat add(const Mat& x, const Mat& y, int sign = 1) {
    Mat z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + sign * y[i];
    return z;
}

Mat quad(const Mat& x, int n, int qi, int qj) {
    int h = n / 2;
    Mat q(static_cast<std::size_t>(h) * h);
    for (int i = 0; i < h; ++i)
        std::copy_n(x.begin() + static_cast<long>((qi * h + i) * static_cast<std::size_t>(n) + qj * h), h,
                    q.begin() + static_cast<long>(i) * h);
    return q;
}

void put(Mat& x, int n, int qi, int qj, const Mat& q) {
    int h = n / 2;
    for (int i = 0; i < h; ++i)
        std::copy_n(q.begin() + static_cast<long>(i) * h, h, x.begin() + static_cast<long>((qi * h + i) * static_cast<std::size_t>(n) + qj * h));
}

Mat strassen_sq(const Mat& A, const Mat& B, int n, int cutoff, MatmulStats* st) {
    if (st) ++st->strassen_calls;
    if (n <= cutoff || n == 1) {
        Mat C(static_cast<std::size_t>(n) * n, 0);
        naive_into(A.data(), B.data(), C.data(), n, n, n, n, n, n, st);
        return C;
    }
    int h = n / 2;
    Mat a11 = quad(A, n, 0, 0), a12 = quad(A, n, 0, 1), a21 = quad(A, n, 1, 0), a22 = quad(A, n, 1, 1);
    Mat b11 = quad(B, n, 0, 0), b12 = quad(B, n, 0, 1), b21 = quad(B, n, 1, 0), b22 = quad(B, n, 1, 1);
    Mat m1 = strassen_sq(add(a11, a22), add(b11, b22), h, cutoff, st);
    Mat m2 = strassen_sq(add(a21, a22), b11, h, cutoff, st);
    Mat m3 = strassen_sq(a11, add(b12, b22, -1), h, cutoff, st);
    Mat m4 = strassen_sq(a22, add(b21, b11, -1), h, cutoff, st);
    Mat m5 = strassen_sq(add(a11, a12), b22, h, cutoff, st);
    Mat m6 = strassen_sq(add(a21, a11, -1), add(b11, b12), h, cutoff, st);
    Mat m7 = strassen_sq(add(a12, a22, -1), add(b21, b22), h, cutoff, st);
    Mat C(static_cast<std::size_t>(n) * n);
    put(C, n, 0, 0, add(add(m1, m4), add(m7, m5, -1)));
    put(C, n, 0, 1, add(m3, m5));
    put(C, n, 1, 0, add(m2, m4));
    put(C, n, 1, 1, add(add(m1, m2, -1), add(m3, m6)));
    return C;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

Mat padded(const DenseMatrix& M, int r0, int c0, int n) {
    Mat out(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n && r0 + i < M.rows; ++i)
        for (int j = 0; j < n && c0 + j < M.cols; ++j) out[static_cast<std::size_t>(i) * n + j] = M.at(r0 + i, c0 + j);
    return out;
}

std::int64_t max_abs(const DenseMatrix& M) {
    std::int64_t m = 0;
    for (auto v : M.entries) m = std::max(m, v < 0 ? -v : v);
    return m;
}

DenseMatrix wide_naive(const DenseMatrix& A, const DenseMatrix& B) {
    DenseMatrix C(A.rows, B.cols);
    C.entries.clear();
    C.wide.assign(static_cast<std::size_t>(A.rows) * B.cols, 0);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) {
            mpz_class x = A.value(i, j);
            if (x == 0) continue;
            for (int k = 0; k < B.cols; ++k) C.wide[static_cast<std::size_t>(i) * B.cols + k] += x * B.value(j, k);
        }
    return C;
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B, MatmulAlgo algo, int cutoff, MatmulStats* stats) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: dimension mismatch");
    if (cutoff < 1) throw std::invalid_argument("matmul: cutoff must be positive");
    DenseMatrix C(A.rows, B.cols);
    C.row_index = A.row_index;
    C.col_index = B.col_index;
    if (A.rows == 0 || B.cols == 0) return C;

    // Strassen sums double the operand range per level; stay below 2^62.
    int depth = std::bit_width(static_cast<unsigned>(next_pow2(std::max({A.rows, A.cols, B.cols}))));
    long double bound = static_cast<long double>(max_abs(A)) * max_abs(B) * std::max(A.cols, 1) * std::pow(4.0L, depth);
    if (A.is_wide() || B.is_wide() || bound > std::ldexp(1.0L, 62)) {
        DenseMatrix W = wide_naive(A, B);
        W.row_index = A.row_index;
        W.col_index = B.col_index;
        return W;
    }

    if (algo == MatmulAlgo::Naive) {
        naive_into(A.entries.data(), B.entries.data(), C.entries.data(), A.rows, A.cols, B.cols, A.cols, B.cols, B.cols, stats);
        return C;
    }
    if (algo == MatmulAlgo::Strassen) {
        int n = next_pow2(std::max({A.rows, A.cols, B.cols}));
        Mat c = strassen_sq(padded(A, 0, 0, n), padded(B, 0, 0, n), n, cutoff, stats);
        for (int i = 0; i < C.rows; ++i)
            for (int k = 0; k < C.cols; ++k) C.at(i, k) = c[static_cast<std::size_t>(i) * n + k];
        return C;
    }
    // Blocked: d x d blocks with d the smallest dimension, each block product
    // done by Strassen.
    const int d = std::max(1, std::min({A.rows, A.cols, B.cols}));
    const int n = next_pow2(d);
    for (int bi = 0; bi < A.rows; bi += d)
        for (int bk = 0; bk < B.cols; bk += d) {
            Mat acc(static_cast<std::size_t>(n) * n, 0);
            for (int bj = 0; bj < A.cols; bj += d) {
                Mat a = padded(A, bi, bj, d), b = padded(B, bj, bk, d);
                Mat pa(static_cast<std::size_t>(n) * n, 0), pb(static_cast<std::size_t>(n) * n, 0);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        pa[static_cast<std::size_t>(i) * n + j] = a[static_cast<std::size_t>(i) * d + j];
                        pb[static_cast<std::size_t>(i) * n + j] = b[static_cast<std::size_t>(i) * d + j];
                    }
                Mat c = strassen_sq(pa, pb, n, cutoff, stats);
                for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += c[x];
            }
            for (int i = 0; i < d && bi + i < C.rows; ++i)
                for (int k = 0; k < d && bk + k < C.cols; ++k) C.at(bi + i, bk + k) = acc[static_cast<std::size_t>(i) * n + k];
        }
    return C;
}

// ------------------------------------------------------------ group_by_mm

Relation group_by_mm(const Relation& M1, const Relation& M2, const std::vector<std::string>& contract, MatmulAlgo algo,
                     const Rat& omega, GroupMmStats* stats) {
    std::vector<std::string> X = contract, G, Y, Z;
    for (const auto& v : X)
        if (!M1.has(v) || !M2.has(v)) throw std::invalid_argument("group_by_mm: contracted variable " + v + " missing");
    auto in = [](const std::vector<std::string>& s, const std::string& v) { return std::find(s.begin(), s.end(), v) != s.end(); };
    for (const auto& v : M1.schema) {
        if (in(X, v)) continue;
        (M2.has(v) ? G : Y).push_back(v);
    }
    for (const auto& v : M2.schema)
        if (!in(X, v) && !M1.has(v)) Z.push_back(v);

    std::vector<std::string> k1 = G, k2 = G;
    k1.insert(k1.end(), Y.begin(), Y.end());
    k1.insert(k1.end(), X.begin(), X.end());
    k2.insert(k2.end(), X.begin(), X.end());
    k2.insert(k2.end(), Z.begin(), Z.end());
    Relation a = project(M1, k1), b = project(M2, k2);  // sorted: G-slices are contiguous

    std::vector<std::string> out_schema = Y;
    out_schema.insert(out_schema.end(), Z.begin(), Z.end());
    out_schema.insert(out_schema.end(), G.begin(), G.end());
    std::vector<Tuple> out;
    const std::size_t g = G.size(), y = Y.size(), x = X.size();
    auto slice_end = [g](const std::vector<Tuple>& rows, std::size_t i) {
        std::size_t j = i;
        while (j < rows.size() && std::equal(rows[i].begin(), rows[i].begin() + static_cast<long>(g), rows[j].begin())) ++j;
        return j;
    };
    std::size_t i = 0, j = 0;
    while (i < a.rows.size() && j < b.rows.size()) {
        Tuple ga(a.rows[i].begin(), a.rows[i].begin() + static_cast<long>(g));
        Tuple gb(b.rows[j].begin(), b.rows[j].begin() + static_cast<long>(g));
        if (ga < gb) {
            i = slice_end(a.rows, i);
            continue;
        }
        if (gb < ga) {
            j = slice_end(b.rows, j);
            continue;
        }
        std::size_t ie = slice_end(a.rows, i), je = slice_end(b.rows, j);
        std::map<Tuple, int> yi, xi, zi;
        for (std::size_t r = i; r < ie; ++r) {
            const auto& t = a.rows[r];
            yi.emplace(Tuple(t.begin() + static_cast<long>(g), t.begin() + static_cast<long>(g + y)), 0);
            xi.emplace(Tuple(t.begin() + static_cast<long>(g + y), t.end()), 0);
        }
        for (std::size_t r = j; r < je; ++r) {
            const auto& t = b.rows[r];
            zi.emplace(Tuple(t.begin() + static_cast<long>(g + x), t.end()), 0);
        }
        int c = 0;
        for (auto& [k, v] : yi) v = c++;
        c = 0;
        for (auto& [k, v] : xi) v = c++;
        c = 0;
        for (auto& [k, v] : zi) v = c++;
        DenseMatrix A(static_cast<int>(yi.size()), static_cast<int>(xi.size()));
        DenseMatrix B(static_cast<int>(xi.size()), static_cast<int>(zi.size()));
        A.row_index = yi;
        A.col_index = xi;
        B.row_index = xi;
        B.col_index = zi;
        for (std::size_t r = i; r < ie; ++r) {
            const auto& t = a.rows[r];
            A.at(yi.at(Tuple(t.begin() + static_cast<long>(g), t.begin() + static_cast<long>(g + y))),
                 xi.at(Tuple(t.begin() + static_cast<long>(g + y), t.end()))) = 1;
        }
        for (std::size_t r = j; r < je; ++r) {
            const auto& t = b.rows[r];
            auto xk = xi.find(Tuple(t.begin() + static_cast<long>(g), t.begin() + static_cast<long>(g + x)));
            if (xk == xi.end()) continue;
            B.at(xk->second, zi.at(Tuple(t.begin() + static_cast<long>(g + x), t.end()))) = 1;
        }
        DenseMatrix C = matmul(A, B, algo);
        if (stats) {
            long long m = std::max({A.rows, A.cols, B.cols});
            ++stats->groups;
            stats->max_dim = std::max(stats->max_dim, m);
            stats->modeled_work += std::pow(static_cast<double>(m), omega.to_double());
        }
        for (const auto& [yk, yv] : yi)
            for (const auto& [zk, zv] : zi)
                if (C.nonzero(yv, zv)) {
                    Tuple t = yk;
                    t.insert(t.end(), zk.begin(), zk.end());
                    t.insert(t.end(), ga.begin(), ga.end());
                    out.push_back(std::move(t));
                }
        i = ie;
        j = je;
    }
    return Relation(M1.name + "x" + M2.name, out_schema, std::move(out));
}

// ------------------------------------------------------------- triangle

double TriangleLedger::total() const {
    double t = static_cast<double>(linear_work) + mm_work;
    for (auto w : light_work) t += static_cast<double>(w);
    return t;
}

namespace {

// Smallest integer D with D >= N^e.
std::size_t ceil_power(std::size_t N, const Rat& e) {
    if (N <= 1) return 1;
    mpz_class p = e.num(), q = e.den();
    mpz_class target;
    mpz_pow_ui(target.get_mpz_t(), mpz_class(static_cast<unsigned long>(N)).get_mpz_t(), p.get_ui());
    auto guess = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(N), e.to_double())));
    guess = guess > 2 ? guess - 2 : 1;
    for (std::size_t D = guess;; ++D) {
        mpz_class d;
        mpz_pow_ui(d.get_mpz_t(), mpz_class(static_cast<unsigned long>(D)).get_mpz_t(), q.get_ui());
        if (d >= target) return D;
    }
}

const Relation& triangle_atom(const Database& db, const char* name, std::vector<std::string> vars) {
    const Relation& R = db.at(name);
    if (R.schema != vars) throw std::invalid_argument(std::string("triangle: relation ") + name + " must have schema (" + vars[0] + "," + vars[1] + ")");
    return R;
}

}  // namespace

bool evaluate_triangle(const Database& db, const Rat& omega, TriangleLedger* ledger, MatmulAlgo algo) {
    if (omega < Rat(2) || omega > Rat(3)) throw std::invalid_argument("omega must lie in [2, 3]");
    const Relation& R = triangle_atom(db, "R", {"X", "Y"});
    const Relation& S = triangle_atom(db, "S", {"Y", "Z"});
    const Relation& T = triangle_atom(db, "T", {"X", "Z"});
    TriangleLedger L;
    L.N = R.size() + S.size() + T.size();
    L.delta = ceil_power(L.N, (omega - 1) / (omega + 1));
    const std::size_t N = L.N, D = L.delta;

    // Light parts: partition, join with the neighbouring relation, check the third.
    auto pr = partition_by_degree(R, {"Y"}, {"X"}, D);
    auto ps = partition_by_degree(S, {"Z"}, {"Y"}, D);
    auto pt = partition_by_degree(T, {"X"}, {"Z"}, D);
    L.linear_work += 3 * N;
    Relation q1 = join(T, pr.light);
    Relation q2 = join(R, ps.light);
    Relation q3 = join(S, pt.light);
    L.light_work[0] = q1.size();
    L.light_work[1] = q2.size();
    L.light_work[2] = q3.size();
    q1 = semijoin(q1, S);
    q2 = semijoin(q2, T);
    q3 = semijoin(q3, R);
    L.linear_work += L.light_work[0] + L.light_work[1] + L.light_work[2];

    // Heavy part: all three heavy, via one multiplication.
    L.heavy_dims[0] = pr.heavy.size();
    L.heavy_dims[1] = ps.heavy.size();
    L.heavy_dims[2] = pt.heavy.size();
    Relation m1 = join(join(pr.heavy, ps.heavy), R);
    Relation m2 = join(join(ps.heavy, pt.heavy), S);
    L.linear_work += m1.size() + m2.size() + pr.heavy.size() * ps.heavy.size() + ps.heavy.size() * pt.heavy.size();
    GroupMmStats gs;
    Relation m = group_by_mm(m1, m2, {"Y"}, algo, omega, &gs);
    L.mm_work = gs.modeled_work;
    Relation qh = semijoin(m, T);
    L.linear_work += m.size();

    for (int i = 0; i < 3; ++i) {
        if (L.light_work[i] > N * D) throw DefectError("triangle: light join exceeded N * delta");
        if (L.heavy_dims[i] * D > N) throw DefectError("triangle: heavy part exceeded N / delta");
    }
    if (ledger) *ledger = L;
    return !q1.empty() || !q2.empty() || !q3.empty() || !qh.empty();
}

}  // namespace cqw
