#pragma once

// Symbolic matrices over expressions: determinants, Gauss-Jordan elimination
// with zero-test pivoting, inversion. Pivot decisions use is_zero verdicts;
// any numerically-labeled decision downgrades the confidence of the result.

#include "mvf/zero.hpp"

#include <optional>
#include <vector>

namespace mvf {

using ExprMatrix = std::vector<std::vector<Expr>>;

inline ExprMatrix identity_matrix(std::size_t n) {
    ExprMatrix a(n, std::vector<Expr>(n, Expr::num(0)));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = Expr::num(1);
    return a;
}

/// Laplace expansion with minor memoization on column masks; exact, no division.
inline Expr determinant(const ExprMatrix& a, const SimplifyConfig& cfg = {}) {
    std::size_t n = a.size();
    if (n == 0) return Expr::num(1);
    for (const auto& row : a)
        if (row.size() != n) throw Error("determinant of a non-square matrix");
    std::vector<std::optional<Expr>> memo(std::size_t(1) << n);
    // minor(row, mask): determinant of rows row..n-1 on the columns in mask.
    auto minor = [&](auto&& self, std::size_t row, unsigned mask) -> Expr {
        if (row == n) return Expr::num(1);
        if (memo[mask]) return *memo[mask];
        std::vector<Expr> terms;
        int pos = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!(mask & (1u << c))) continue;
            if (!a[row][c].is_zero_constant()) {
                Expr sub = self(self, row + 1, mask & ~(1u << c));
                Expr t = a[row][c] * sub;
                terms.push_back(pos % 2 == 0 ? t : -t);
            }
            ++pos;
        }
        Expr d = Expr::sum(std::move(terms));
        if (n <= 5) d = expand_normal(d, cfg);
        memo[mask] = d;
        return d;
    };
    return expand_normal(minor(minor, 0, (1u << n) - 1), cfg);
}

struct Elimination {
    ExprMatrix rows;              // reduced matrix (RREF on the lhs block)
    std::vector<int> pivot_cols;  // one per pivot row
    std::size_t rank = 0;
    Confidence confidence = Confidence::Proven;
};

/// Gauss-Jordan elimination on the first `lhs_cols` columns of `aug`.
/// Remaining columns ride along (right-hand sides, identity blocks, ...).
inline Elimination eliminate(ExprMatrix aug, std::size_t lhs_cols,
                             const SimplifyConfig& cfg = {}) {
    Elimination out;
    std::size_t nrows = aug.size();
    std::size_t prow = 0;
    for (std::size_t col = 0; col < lhs_cols && prow < nrows; ++col) {
        // Prefer a proven-nonzero pivot; fall back to numerically nonzero.
        std::size_t pivot = nrows;
        bool numeric_pivot = false;
        for (std::size_t r = prow; r < nrows; ++r) {
            Verdict v = is_zero(aug[r][col], cfg);
            if (v == Verdict::ProvenNonzero) {
                pivot = r;
                numeric_pivot = false;
                break;
            }
            if (v == Verdict::NumericallyNonzero && pivot == nrows) {
                pivot = r;
                numeric_pivot = true;
            }
            if (v == Verdict::NumericallyZero)
                out.confidence = Confidence::Numeric;
        }
        if (pivot == nrows) continue;
        if (numeric_pivot) out.confidence = Confidence::Numeric;
        std::swap(aug[prow], aug[pivot]);
        Expr p = aug[prow][col];
        for (std::size_t c = 0; c < aug[prow].size(); ++c)
            aug[prow][c] = expand_normal(aug[prow][c] / p, cfg);
        for (std::size_t r = 0; r < nrows; ++r) {
            if (r == prow) continue;
            Expr f = aug[r][col];
            if (is_zero(f, cfg) == Verdict::ProvenZero) continue;
            for (std::size_t c = 0; c < aug[r].size(); ++c)
                aug[r][c] = expand_normal(aug[r][c] - f * aug[prow][c], cfg);
        }
        out.pivot_cols.push_back(static_cast<int>(col));
        ++prow;
    }
    out.rank = prow;
    out.rows = std::move(aug);
    return out;
}

/// Symbolic inverse; nullopt when the matrix is not invertible as an
/// expression matrix (rank below n).
inline std::optional<ExprMatrix> invert(const ExprMatrix& a, const SimplifyConfig& cfg = {}) {
    std::size_t n = a.size();
    ExprMatrix aug = a;
    ExprMatrix id = identity_matrix(n);
    for (std::size_t i = 0; i < n; ++i)
        aug[i].insert(aug[i].end(), id[i].begin(), id[i].end());
    Elimination e = eliminate(std::move(aug), n, cfg);
    if (e.rank < n) return std::nullopt;
    ExprMatrix inv(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = e.rows[i][n + j];
    return inv;
}

inline std::vector<Expr> mat_vec(const ExprMatrix& a, const std::vector<Expr>& x,
                                 const SimplifyConfig& cfg = {}) {
    std::vector<Expr> out;
    out.reserve(a.size());
    for (const auto& row : a) {
        std::vector<Expr> parts;
        for (std::size_t j = 0; j < x.size(); ++j) parts.push_back(row[j] * x[j]);
        out.push_back(expand_normal(Expr::sum(std::move(parts)), cfg));
    }
    return out;
}

}  // namespace mvf
