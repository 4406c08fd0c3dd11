#ifndef PSATZ_LDLT_HPP
#define PSATZ_LDLT_HPP

#include <optional>
#include <vector>

#include "psatz/ratmat.hpp"

namespace psatz {

/// Exact LDL^T factorization with symmetric (diagonal) pivoting:
/// P*M*P^T = L*D*L^T with L unit lower triangular, D diagonal.
///
/// `complete` is false only when the factorization hits an all-zero diagonal
/// with nonzero off-diagonal remainder, which already certifies indefiniteness.
struct LdltResult {
    std::vector<int> perm;  // P row i of PMP^T is row perm[i] of M
    RatMat lower;           // unit lower triangular
    std::vector<Rat> diag;
    bool is_psd = false;
    bool complete = false;
    int rank = 0;
    Rat min_pivot = Rat(0);

    /// L*D*L^T, defined when complete.
    RatMat reconstruct() const {
        const int n = lower.rows();
        RatMat ld(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ld.at(i, j) = lower.at(i, j) * diag[static_cast<size_t>(j)];
        return ld * lower.transpose();
    }

    /// P*M*P^T for the stored permutation.
    RatMat permuted(const RatMat& m) const {
        const int n = m.rows();
        RatMat r(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r.at(i, j) = m.at(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
        return r;
    }
};

inline LdltResult psd_ldlt(const RatMat& m_in) {
    if (!m_in.is_symmetric()) throw std::invalid_argument("psd_ldlt: matrix not symmetric");
    const int n = m_in.rows();
    LdltResult res;
    res.perm.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) res.perm[static_cast<size_t>(i)] = i;
    res.lower = RatMat::identity(n);
    res.diag.assign(static_cast<size_t>(n), Rat(0));
    res.complete = true;

    RatMat a = m_in;  // working copy, permuted in place
    bool saw_negative = false;
    bool first_pivot = true;

    auto swap_rows_cols = [&](int step, int i, int j) {
        if (i == j) return;
        std::swap(res.perm[static_cast<size_t>(i)], res.perm[static_cast<size_t>(j)]);
        for (int t = 0; t < n; ++t) std::swap(a.at(i, t), a.at(j, t));
        for (int t = 0; t < n; ++t) std::swap(a.at(t, i), a.at(t, j));
        // already-computed columns of L follow their rows
        for (int t = 0; t < step; ++t) std::swap(res.lower.at(i, t), res.lower.at(j, t));
    };

    int k = 0;
    for (; k < n; ++k) {
        // pick remaining diagonal entry of largest absolute value
        int piv = k;
        Rat best = abs(a.at(k, k));
        for (int i = k + 1; i < n; ++i) {
            Rat cand = abs(a.at(i, i));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best == 0) {
            // all remaining diagonal entries are zero; PSD requires a zero block
            bool zero_block = true;
            for (int i = k; i < n && zero_block; ++i)
                for (int j = k; j < n; ++j)
                    if (a.at(i, j) != 0) {
                        zero_block = false;
                        break;
                    }
            if (!zero_block) {
                res.complete = false;
                saw_negative = true;  // indefinite by the zero-diagonal rule
            }
            break;
        }
        swap_rows_cols(k, k, piv);
        const Rat d = a.at(k, k);
        res.diag[static_cast<size_t>(k)] = d;
        if (d < 0) saw_negative = true;
        if (first_pivot || d < res.min_pivot) res.min_pivot = d;
        first_pivot = false;
        for (int i = k + 1; i < n; ++i) {
            const Rat lik = a.at(i, k) / d;
            res.lower.at(i, k) = lik;
            if (lik == 0) continue;
            for (int j = k + 1; j <= i; ++j) {
                a.at(i, j) -= lik * a.at(j, k);
                if (j != i) a.at(j, i) = a.at(i, j);
            }
        }
        for (int i = k + 1; i < n; ++i) {
            a.at(i, k) = 0;
            a.at(k, i) = 0;
        }
    }
    res.rank = k;
    res.is_psd = res.complete && !saw_negative;
    return res;
}

/// Solve M*y = r exactly for symmetric PSD M via its LDL^T factors.
/// Returns nullopt when r is not in the range of M.
inline std::optional<std::vector<Rat>> solve_psd(const LdltResult& f, const std::vector<Rat>& rhs) {
    if (!f.is_psd) return std::nullopt;
    const int n = f.lower.rows();
    std::vector<Rat> b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) b[static_cast<size_t>(i)] = rhs[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
    // forward: L w = b
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) b[static_cast<size_t>(i)] -= f.lower.at(i, j) * b[static_cast<size_t>(j)];
    // diagonal: D v = w (zero pivots demand zero rhs)
    for (int i = 0; i < n; ++i) {
        if (f.diag[static_cast<size_t>(i)] == 0) {
            if (b[static_cast<size_t>(i)] != 0) return std::nullopt;
        } else {
            b[static_cast<size_t>(i)] /= f.diag[static_cast<size_t>(i)];
        }
    }
    // backward: L^T u = v
    for (int i = n - 1; i >= 0; --i)
        for (int j = i + 1; j < n; ++j) b[static_cast<size_t>(i)] -= f.lower.at(j, i) * b[static_cast<size_t>(j)];
    std::vector<Rat> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<size_t>(f.perm[static_cast<size_t>(i)])] = b[static_cast<size_t>(i)];
    return y;
}

}  // namespace psatz

#endif
