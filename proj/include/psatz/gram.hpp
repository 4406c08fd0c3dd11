#ifndef PSATZ_GRAM_HPP
#define PSATZ_GRAM_HPP

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psatz/witness.hpp"

namespace psatz {

struct GramBuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GramMode { Preorder, QuadraticModule };

/// One unknown PSD block: ghat_e times a Gram form over stacked
/// (basis monomial, coordinate) indices. `equation_multiplier` is its
/// coefficient in the affine identity being matched (the plain ghat for
/// membership systems). `indices` lists the live stacked coordinates after
/// diagonal-consistency pruning.
struct GramBlock {
    int group = 0;  // which witness the block belongs to
    ExponentVector exponent;
    Poly ghat;
    Poly equation_multiplier;
    std::vector<Monomial> basis;
    std::vector<std::pair<int, int>> indices;  // (basis position, coordinate)
    int stacked = 0;                           // indices.size()
    int var_offset = 0;                        // into the packed upper-triangle vector
};

struct AffineRow {
    std::vector<std::pair<int, Rat>> coeffs;  // sorted by variable index
    Rat rhs;
};

/// Affine-plus-PSD feasibility problem: find PSD blocks G_b with
/// sum_b equation_multiplier_b * (stacked basis form of G_b) == target.
struct GramSystem {
    int nvars = 0;
    int n = 1;  // matrix dimension of the target
    MatPoly target;
    ConstraintSet set;
    std::vector<GramBlock> blocks;
    std::vector<AffineRow> rows;
    int num_vars = 0;

    static int tri_index(int i, int j) {  // i <= j
        return j * (j + 1) / 2 + i;
    }
    int var_of(const GramBlock& b, int i, int j) const {
        if (i > j) std::swap(i, j);
        return b.var_offset + tri_index(i, j);
    }
};

namespace detail {

inline long even_ceil(long x) { return x <= 0 ? 0 : x + (x & 1); }

inline std::vector<ExponentVector> mode_exponents(const ConstraintSet& s, GramMode mode) {
    const int m = s.count();
    std::vector<ExponentVector> out;
    if (mode == GramMode::QuadraticModule) {
        out.push_back(ExponentVector(m));
        for (int i = 0; i < m; ++i) out.push_back(ExponentVector::single(m, i));
        return out;
    }
    for (int mask = 0; mask < (1 << m); ++mask) {
        ExponentVector e(m);
        for (int i = 0; i < m; ++i) e.bits[static_cast<size_t>(i)] = (mask >> i) & 1;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct RowKey {
    int entry;  // packed (r, c) with r <= c
    Monomial mono;
    bool operator<(const RowKey& o) const {
        if (entry != o.entry) return entry < o.entry;
        return GrlexLess{}(mono, o.mono);
    }
};

/// Remove stacked indices whose Gram diagonal is forced to zero: a row with
/// zero right-hand side whose nonzero coefficients all sit on diagonal
/// variables of one sign pins those diagonals (hence rows and columns) to
/// zero in every feasible point. Iterated to a fixpoint; keeps the float
/// solve away from tangent feasible sets.
inline void prune_gram_indices(GramSystem& sys) {
    const int n = sys.n;
    bool changed = true;
    while (changed) {
        changed = false;
        // map: row key -> list of (block, i, j, coeff) with i <= j index positions
        std::map<RowKey, std::vector<std::array<int, 3>>> diag_rows;
        std::map<RowKey, bool> has_offdiag;
        std::map<RowKey, std::pair<bool, bool>> signs;  // (any positive, any negative)
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi) {
            GramBlock& b = sys.blocks[bi];
            const int k = static_cast<int>(b.indices.size());
            for (int i1 = 0; i1 < k; ++i1)
                for (int i2 = 0; i2 < k; ++i2) {
                    const auto& [j1, r] = b.indices[static_cast<size_t>(i1)];
                    const auto& [j2, c] = b.indices[static_cast<size_t>(i2)];
                    if (r > c) continue;
                    const Monomial mm =
                        b.basis[static_cast<size_t>(j1)] * b.basis[static_cast<size_t>(j2)];
                    for (const auto& [mq, cq] : b.equation_multiplier.terms()) {
                        RowKey key{r * n + c, mm * mq};
                        if (i1 == i2) {
                            diag_rows[key].push_back({static_cast<int>(bi), i1, 0});
                            auto& sg = signs[key];
                            if (cq > 0) sg.first = true;
                            else sg.second = true;
                        } else {
                            has_offdiag[key] = true;
                        }
                    }
                }
        }
        std::vector<std::vector<char>> dead(sys.blocks.size());
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi)
            dead[bi].assign(sys.blocks[bi].indices.size(), 0);
        for (const auto& [key, vars] : diag_rows) {
            if (has_offdiag.count(key)) continue;
            const auto& sg = signs[key];
            if (sg.first && sg.second) continue;  // mixed signs prove nothing
            Rat rhs(0);
            const int r = key.entry / n, c = key.entry % n;
            rhs = sys.target.at(r, c).coeff(key.mono);
            if (rhs != 0) continue;
            for (const auto& [bi, i1, unused] : vars)
                dead[static_cast<size_t>(bi)][static_cast<size_t>(i1)] = 1;
        }
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi) {
            GramBlock& b = sys.blocks[bi];
            std::vector<std::pair<int, int>> live;
            for (size_t i = 0; i < b.indices.size(); ++i)
                if (!dead[bi][i]) live.push_back(b.indices[i]);
            if (live.size() != b.indices.size()) {
                b.indices = std::move(live);
                changed = true;
            }
        }
    }
    std::vector<GramBlock> keep;
    for (GramBlock& b : sys.blocks) {
        b.stacked = static_cast<int>(b.indices.size());
        if (b.stacked > 0) keep.push_back(std::move(b));
    }
    sys.blocks = std::move(keep);
}

}  // namespace detail

/// Assemble the affine rows for a list of prepared blocks against `target`.
inline void finalize_gram_system(GramSystem& sys) {
    for (GramBlock& b : sys.blocks) {
        if (!b.indices.empty()) continue;
        const int k = static_cast<int>(b.basis.size());
        for (int j = 0; j < k; ++j)
            for (int r = 0; r < sys.n; ++r) b.indices.emplace_back(j, r);
    }
    detail::prune_gram_indices(sys);

    int offset = 0;
    for (GramBlock& b : sys.blocks) {
        b.var_offset = offset;
        offset += b.stacked * (b.stacked + 1) / 2;
    }
    sys.num_vars = offset;

    const int n = sys.n;
    std::map<detail::RowKey, std::pair<std::map<int, Rat>, Rat>> rows;
    // seed rhs entries so unrepresentable target monomials are caught
    for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c)
            for (const auto& [m, coef] : sys.target.at(r, c).terms())
                rows[{r * n + c, m}].second = coef;
    for (const GramBlock& b : sys.blocks) {
        const int k = b.stacked;
        for (int i1 = 0; i1 < k; ++i1)
            for (int i2 = 0; i2 < k; ++i2) {
                const auto& [j1, r] = b.indices[static_cast<size_t>(i1)];
                const auto& [j2, c] = b.indices[static_cast<size_t>(i2)];
                if (r > c) continue;
                const int var = sys.var_of(b, i1, i2);
                const Monomial mm =
                    b.basis[static_cast<size_t>(j1)] * b.basis[static_cast<size_t>(j2)];
                for (const auto& [mq, cq] : b.equation_multiplier.terms())
                    rows[{r * n + c, mm * mq}].first[var] += cq;
            }
    }
    sys.rows.clear();
    for (auto& [key, data] : rows) {
        AffineRow row;
        row.rhs = data.second;
        for (auto& [var, coef] : data.first)
            if (coef != 0) row.coeffs.emplace_back(var, coef);
        if (row.coeffs.empty()) {
            if (row.rhs != 0)
                throw GramBuildError("target monomial '" +
                                     key.mono.str(default_var_names(sys.nvars)) +
                                     "' has no Gram contribution at this degree bound");
            continue;
        }
        sys.rows.push_back(std::move(row));
    }
}

/// Membership system: target == sum_e ghat_e * (PSD Gram form), exponents
/// chosen by mode, bases graded-lex prefixes fitted to the degree bound.
inline GramSystem build_gram_system(const MatPoly& target, const ConstraintSet& set, GramMode mode,
                                    long degree_bound) {
    if (!target.is_square() || !target.is_symmetric())
        throw std::invalid_argument("gram target must be symmetric");
    GramSystem sys;
    sys.nvars = target.nvars();
    sys.n = target.rows();
    sys.target = target;
    sys.set = set;
    for (const ExponentVector& e : detail::mode_exponents(set, mode)) {
        GramBlock b;
        b.group = 0;
        b.exponent = e;
        b.ghat = set.product(e);
        b.equation_multiplier = b.ghat;
        if (degree_bound - b.ghat.degree() < -1) continue;
        b.basis = monomials_up_to_degree(sys.nvars, (degree_bound - b.ghat.degree() + 1) / 2);
        if (b.basis.empty()) continue;
        sys.blocks.push_back(std::move(b));
    }
    if (sys.blocks.empty()) throw GramBuildError("degree bound too small: no Gram blocks available");
    finalize_gram_system(sys);
    return sys;
}

struct SolveConfig {
    double tol = 1e-9;
    int max_iters = 3000;
    /// Rationalization is attempted whenever the residual gets below this,
    /// even without full convergence: the exact projection repairs the rest.
    double attempt_residual = 1e-4;
};

struct FloatSolution {
    std::vector<Eigen::MatrixXd> blocks;
    double residual = 0.0;
    std::vector<double> min_eig;
    bool converged = false;
    bool nan_failure = false;
    int iters = 0;
};

namespace detail {

class AffineProjector {
public:
    AffineProjector(const GramSystem& sys) : nrows_(static_cast<int>(sys.rows.size())) {
        rows_.reserve(sys.rows.size());
        b_.resize(nrows_);
        for (int i = 0; i < nrows_; ++i) {
            const AffineRow& r = sys.rows[static_cast<size_t>(i)];
            std::vector<std::pair<int, double>> row;
            row.reserve(r.coeffs.size());
            for (const auto& [v, c] : r.coeffs) row.emplace_back(v, to_double(c));
            rows_.push_back(std::move(row));
            b_[i] = to_double(r.rhs);
        }
        Eigen::MatrixXd h(nrows_, nrows_);
        for (int i = 0; i < nrows_; ++i)
            for (int j = i; j < nrows_; ++j) {
                double s = 0;
                size_t pi = 0, pj = 0;
                const auto& ri = rows_[static_cast<size_t>(i)];
                const auto& rj = rows_[static_cast<size_t>(j)];
                while (pi < ri.size() && pj < rj.size()) {
                    if (ri[pi].first < rj[pj].first)
                        ++pi;
                    else if (ri[pi].first > rj[pj].first)
                        ++pj;
                    else {
                        s += ri[pi].second * rj[pj].second;
                        ++pi;
                        ++pj;
                    }
                }
                h(i, j) = s;
                h(j, i) = s;
            }
        if (nrows_ > 0) {
            es_.compute(h);
            const auto& ev = es_.eigenvalues();
            double lmax = 0;
            for (int i = 0; i < nrows_; ++i) lmax = std::max(lmax, std::abs(ev[i]));
            thresh_ = lmax * 1e-12;
        }
    }

    Eigen::VectorXd residual_vec(const Eigen::VectorXd& x) const {
        Eigen::VectorXd r(nrows_);
        for (int i = 0; i < nrows_; ++i) {
            double s = -b_[i];
            for (const auto& [v, c] : rows_[static_cast<size_t>(i)]) s += c * x[v];
            r[i] = s;
        }
        return r;
    }

    /// Infinity-norm residual relative to the right-hand-side scale.
    double residual_inf(const Eigen::VectorXd& x) const {
        if (nrows_ == 0) return 0.0;
        double scale = 1.0;
        for (int i = 0; i < nrows_; ++i) scale = std::max(scale, std::abs(b_[i]));
        return residual_vec(x).cwiseAbs().maxCoeff() / scale;
    }

    /// Least-squares projection of x onto {A x = b}.
    Eigen::VectorXd project(const Eigen::VectorXd& x) const {
        if (nrows_ == 0) return x;
        Eigen::VectorXd r = residual_vec(x);
        Eigen::VectorXd w = es_.eigenvectors().transpose() * r;
        for (int i = 0; i < nrows_; ++i) {
            const double ev = es_.eigenvalues()[i];
            w[i] = std::abs(ev) > thresh_ ? w[i] / ev : 0.0;
        }
        Eigen::VectorXd y = es_.eigenvectors() * w;
        Eigen::VectorXd out = x;
        for (int i = 0; i < nrows_; ++i)
            for (const auto& [v, c] : rows_[static_cast<size_t>(i)]) out[v] -= c * y[i];
        return out;
    }

private:
    int nrows_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
    Eigen::VectorXd b_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_;
    double thresh_ = 0.0;
};

inline Eigen::MatrixXd unpack_block(const GramSystem& sys, const GramBlock& b,
                                    const Eigen::VectorXd& x) {
    Eigen::MatrixXd g(b.stacked, b.stacked);
    for (int i = 0; i < b.stacked; ++i)
        for (int j = i; j < b.stacked; ++j) {
            const double v = x[sys.var_of(b, i, j)];
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

inline void pack_block(const GramSystem& sys, const GramBlock& b, const Eigen::MatrixXd& g,
                       Eigen::VectorXd& x) {
    for (int i = 0; i < b.stacked; ++i)
        for (int j = i; j < b.stacked; ++j) x[sys.var_of(b, i, j)] = g(i, j);
}

}  // namespace detail

/// Alternating projections between the affine identity subspace and the
/// product of PSD cones. The reported residual is recomputed from scratch.
/// An optional warm start (per-block matrices) seeds the iteration.
inline FloatSolution solve_feasibility(const GramSystem& sys, const SolveConfig& cfg = {},
                                       const std::vector<Eigen::MatrixXd>* warm = nullptr) {
    detail::AffineProjector proj(sys);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.num_vars);
    if (warm)
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi)
            detail::pack_block(sys, sys.blocks[bi], (*warm)[bi], x);
    FloatSolution sol;
    sol.min_eig.assign(sys.blocks.size(), 0.0);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        x = proj.project(x);
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi) {
            const GramBlock& b = sys.blocks[bi];
            Eigen::MatrixXd g = detail::unpack_block(sys, b, x);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            sol.min_eig[bi] = b.stacked > 0 ? es.eigenvalues().minCoeff() : 0.0;
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            g = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            detail::pack_block(sys, b, g, x);
        }
        if (!x.allFinite()) {
            sol.nan_failure = true;
            sol.iters = it + 1;
            sol.residual = std::numeric_limits<double>::quiet_NaN();
            return sol;
        }
        residual = proj.residual_inf(x);
        if (residual < cfg.tol) {
            ++it;
            break;
        }
    }
    sol.iters = it;
    sol.residual = residual;  // recomputed above from the current iterate
    sol.converged = residual < cfg.tol;
    if (sol.converged || residual < cfg.attempt_residual) {
        // strict-feasibility bias: nudge off the PSD boundary, restore the identity
        const double delta = 10.0 * cfg.tol;
        for (const GramBlock& b : sys.blocks)
            for (int i = 0; i < b.stacked; ++i) x[sys.var_of(b, i, i)] += delta;
        x = proj.project(x);
    }
    sol.blocks.reserve(sys.blocks.size());
    for (const GramBlock& b : sys.blocks) sol.blocks.push_back(detail::unpack_block(sys, b, x));
    return sol;
}

/// Whether a float solution is close enough for exact repair to make sense.
inline bool worth_rationalizing(const FloatSolution& sol, const SolveConfig& cfg) {
    return !sol.nan_failure &&
           (sol.converged || (std::isfinite(sol.residual) && sol.residual < cfg.attempt_residual));
}

struct RationalizeResult {
    std::optional<std::vector<RatMat>> blocks;
    std::string diagnostics;
    Rat smallest_pivot = Rat(0);
    bool ok() const { return blocks.has_value(); }
};

/// Round the float solution on a dyadic denominator ladder and project
/// exactly onto the affine identity; succeed only when every block is PSD
/// in exact arithmetic. Never returns an approximate witness.
/// Before rounding at denominator 2^k the iterate is biased off the PSD
/// boundary by a few quantization steps and re-projected in float, so coarse
/// rungs survive the rounding noise whenever the feasible set has interior.
inline RationalizeResult rationalize(const FloatSolution& sol, const GramSystem& sys,
                                     const std::vector<long>& denom_ladder_log2 = {10, 20, 30, 40,
                                                                                   50, 60},
                                     int exact_projection_row_cap = 1 << 30) {
    RationalizeResult out;
    detail::AffineProjector proj(sys);
    const int nrows = static_cast<int>(sys.rows.size());
    const bool allow_projection = nrows <= exact_projection_row_cap;
    LdltResult hf;
    if (allow_projection) {
        // exact normal matrix A A^T, factored once
        RatMat h(nrows, nrows);
        for (int i = 0; i < nrows; ++i)
            for (int j = i; j < nrows; ++j) {
                Rat s(0);
                size_t pi = 0, pj = 0;
                const auto& ri = sys.rows[static_cast<size_t>(i)].coeffs;
                const auto& rj = sys.rows[static_cast<size_t>(j)].coeffs;
                while (pi < ri.size() && pj < rj.size()) {
                    if (ri[pi].first < rj[pj].first)
                        ++pi;
                    else if (ri[pi].first > rj[pj].first)
                        ++pj;
                    else {
                        s += ri[pi].second * rj[pj].second;
                        ++pi;
                        ++pj;
                    }
                }
                h.at(i, j) = s;
                if (i != j) h.at(j, i) = s;
            }
        hf = psd_ldlt(h);
        if (!hf.is_psd) {
            out.diagnostics = "exact normal matrix unexpectedly indefinite";
            return out;
        }
    }

    std::ostringstream diag;
    bool first_pivot_seen = false;
    for (long log2den : denom_ladder_log2) {
        // float bias toward the interior, scaled to the quantization step
        Eigen::VectorXd xf = Eigen::VectorXd::Zero(sys.num_vars);
        for (size_t bi = 0; bi < sys.blocks.size(); ++bi)
            detail::pack_block(sys, sys.blocks[bi], sol.blocks[bi], xf);
        const double delta = 4.0 * std::ldexp(1.0, static_cast<int>(-log2den));
        for (const GramBlock& b : sys.blocks)
            for (int i = 0; i < b.stacked; ++i) xf[sys.var_of(b, i, i)] += delta;
        xf = proj.project(xf);
        if (!xf.allFinite()) {
            out.diagnostics = "numeric breakdown (NaN) while preparing the rounding point";
            return out;
        }
        std::vector<Rat> x(static_cast<size_t>(sys.num_vars), Rat(0));
        for (int v = 0; v < sys.num_vars; ++v) x[static_cast<size_t>(v)] = dyadic_round(xf[v], log2den);
        // exact residual and least-squares repair
        std::vector<Rat> r(static_cast<size_t>(nrows), Rat(0));
        bool already_exact = true;
        for (int i = 0; i < nrows; ++i) {
            Rat s = -sys.rows[static_cast<size_t>(i)].rhs;
            for (const auto& [v, c] : sys.rows[static_cast<size_t>(i)].coeffs)
                s += c * x[static_cast<size_t>(v)];
            r[static_cast<size_t>(i)] = s;
            if (s != 0) already_exact = false;
        }
        if (!already_exact && !allow_projection) {
            diag << "denominator 2^" << log2den
                 << ": rounding not exact and the system is too large for exact projection; ";
            continue;
        }
        if (!already_exact) {
            auto y = solve_psd(hf, r);
            if (!y) {
                out.diagnostics = "affine identity is inconsistent: no exact solution exists";
                return out;
            }
            for (int i = 0; i < nrows; ++i) {
                const Rat& yi = (*y)[static_cast<size_t>(i)];
                if (yi == 0) continue;
                for (const auto& [v, c] : sys.rows[static_cast<size_t>(i)].coeffs)
                    x[static_cast<size_t>(v)] -= c * yi;
            }
            for (int i = 0; i < nrows; ++i) {
                Rat s = -sys.rows[static_cast<size_t>(i)].rhs;
                for (const auto& [v, c] : sys.rows[static_cast<size_t>(i)].coeffs)
                    s += c * x[static_cast<size_t>(v)];
                if (s != 0) {
                    out.diagnostics = "exact projection failed to restore the identity";
                    return out;
                }
            }
        }
        // exact PSD check per block, with a cheap float reject first
        std::vector<RatMat> blocks;
        blocks.reserve(sys.blocks.size());
        bool all_psd = true;
        for (const GramBlock& b : sys.blocks) {
            RatMat g(b.stacked, b.stacked);
            Eigen::MatrixXd gf(b.stacked, b.stacked);
            double scale = 1.0;
            for (int i = 0; i < b.stacked; ++i)
                for (int j = i; j < b.stacked; ++j) {
                    g.at(i, j) = x[static_cast<size_t>(sys.var_of(b, i, j))];
                    g.at(j, i) = g.at(i, j);
                    gf(i, j) = to_double(g.at(i, j));
                    gf(j, i) = gf(i, j);
                    scale = std::max(scale, std::abs(gf(i, j)));
                }
            if (b.stacked > 12) {  // small blocks go straight to the exact pivots
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gf);
                if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
                    all_psd = false;
                    diag << "denominator 2^" << log2den << ": block clearly indefinite; ";
                    break;
                }
            }
            LdltResult f = psd_ldlt(g);
            if (!f.is_psd) {
                all_psd = false;
                if (!first_pivot_seen || f.min_pivot < out.smallest_pivot) {
                    out.smallest_pivot = f.min_pivot;
                    first_pivot_seen = true;
                }
                diag << "denominator 2^" << log2den << ": block not PSD (pivot "
                     << rat_str(f.min_pivot) << "); ";
                break;
            }
            blocks.push_back(std::move(g));
        }
        if (all_psd) {
            out.blocks = std::move(blocks);
            return out;
        }
    }
    out.diagnostics = "denominator ladder exhausted: " + diag.str();
    return out;
}

/// Weighted squares from an exact PSD Gram matrix over `basis` stacked with
/// the matrix dimension n; expansion equals the represented form.
inline SosMatrixWitness gram_to_sos(const RatMat& g, const std::vector<Monomial>& basis, int n,
                                    int nvars) {
    std::vector<std::pair<int, int>> indices;
    for (int j = 0; j < static_cast<int>(basis.size()); ++j)
        for (int r = 0; r < n; ++r) indices.emplace_back(j, r);
    LdltResult f = psd_ldlt(g);
    if (!f.is_psd) throw std::invalid_argument("gram_to_sos: matrix is not PSD");
    SosMatrixWitness w(n, nvars);
    const int dim = g.rows();
    for (int col = 0; col < f.rank; ++col) {
        const Rat& d = f.diag[static_cast<size_t>(col)];
        if (d == 0) continue;
        MatPoly a(1, n, nvars);
        for (int i = 0; i < dim; ++i) {
            const Rat& v = f.lower.at(i, col);
            if (v == 0) continue;
            const auto& [j, r] = indices[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
            a.at(0, r) += Poly::monomial(basis[static_cast<size_t>(j)], v);
        }
        w.add_term(d, a);
    }
    return w;
}

namespace detail {

inline SosMatrixWitness block_to_sos(const RatMat& g, const GramBlock& b, int n, int nvars) {
    SosMatrixWitness w(n, nvars);
    for (const ExtractedSquare& sq : extract_psd_squares(g)) {
        MatPoly a(1, n, nvars);
        for (const auto& [idx, v] : sq.vec) {
            const auto& [j, r] = b.indices[static_cast<size_t>(idx)];
            a.at(0, r) += Poly::monomial(b.basis[static_cast<size_t>(j)], v);
        }
        w.add_term(sq.weight, a);
    }
    return w;
}

}  // namespace detail

/// Assemble the witness for one block group of a rationalized system.
inline PreorderWitness witness_from_blocks(const GramSystem& sys, const std::vector<RatMat>& blocks,
                                           int group) {
    PreorderWitness w(sys.set, sys.n);
    for (size_t bi = 0; bi < sys.blocks.size(); ++bi) {
        const GramBlock& b = sys.blocks[bi];
        if (b.group != group) continue;
        if (blocks[bi].is_zero()) continue;
        w.add_block(b.exponent, detail::block_to_sos(blocks[bi], b, sys.n, sys.nvars));
    }
    return w;
}

struct SearchConfig {
    long degree_cap = 8;
    SolveConfig solve;
    std::vector<long> denom_ladder{10, 20, 30, 40, 50, 60};
    long eps_min_log2 = -20;
};

/// Re-rationalize a witness onto small dyadic denominators: rebuild its Gram
/// system over its own monomial support, warm-start a short projection polish
/// from the witness's exact Gram, and round up the denominator ladder. Falls
/// back to the input when the exact identity cannot be reproduced; the result
/// always expands to the same matrix. Tames coefficient growth between
/// assembly levels.
/// `target_hint`, when supplied, must equal the witness expansion; it saves
/// the (sometimes expensive) exact expansion of a long term list.
inline PreorderWitness slim_witness(const PreorderWitness& w,
                                    const MatPoly* target_hint = nullptr) {
    if (w.empty()) return w;
    const MatPoly target = target_hint ? *target_hint : w.expand();
    GramSystem sys;
    sys.nvars = w.nvars();
    sys.n = w.size();
    sys.target = target;
    sys.set = w.constraints();
    for (const auto& [e, blk] : w.blocks()) {
        GramBlock b;
        b.group = 0;
        b.exponent = e;
        b.ghat = sys.set.product(e);
        b.equation_multiplier = b.ghat;
        std::map<Monomial, int, GrlexLess> support;
        for (const SosTerm& t : blk.terms())
            for (int i = 0; i < t.mat.rows(); ++i)
                for (int c = 0; c < sys.n; ++c)
                    for (const auto& [m, coef] : t.mat.at(i, c).terms()) support.emplace(m, 0);
        for (const auto& [m, unused] : support) b.basis.push_back(m);
        if (b.basis.empty()) continue;
        sys.blocks.push_back(std::move(b));
    }
    try {
        finalize_gram_system(sys);
    } catch (const GramBuildError&) {
        return w;
    }
    // the float projector alone would dominate on very large systems
    if (sys.rows.size() > 2500) return w;
    // exact witness Gram, restricted to the live indices
    std::vector<Eigen::MatrixXd> warm;
    warm.reserve(sys.blocks.size());
    for (const GramBlock& b : sys.blocks) {
        std::map<std::pair<int, int>, int> pos;  // (basis j, coord) -> live position
        for (int i = 0; i < b.stacked; ++i) pos[b.indices[static_cast<size_t>(i)]] = i;
        std::map<Monomial, int, GrlexLess> where;
        for (int j = 0; j < static_cast<int>(b.basis.size()); ++j)
            where[b.basis[static_cast<size_t>(j)]] = j;
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(b.stacked, b.stacked);
        const SosMatrixWitness* blk = nullptr;
        for (const auto& [e, candidate] : w.blocks())
            if (e == b.exponent) blk = &candidate;
        if (!blk) return w;
        for (const SosTerm& t : blk->terms())
            for (int rowi = 0; rowi < t.mat.rows(); ++rowi) {
                std::vector<std::pair<int, double>> vec;
                for (int c = 0; c < sys.n; ++c)
                    for (const auto& [m, coef] : t.mat.at(rowi, c).terms()) {
                        auto it = pos.find({where[m], c});
                        if (it == pos.end()) return w;  // support landed on a pruned index
                        vec.emplace_back(it->second, to_double(coef));
                    }
                const double wt = to_double(t.weight);
                for (const auto& [i, vi] : vec)
                    for (const auto& [j, vj] : vec) g(i, j) += wt * vi * vj;
            }
        warm.push_back(std::move(g));
    }
    SolveConfig polish;
    polish.max_iters = 300;
    FloatSolution sol = solve_feasibility(sys, polish, &warm);
    if (!worth_rationalizing(sol, polish)) return w;
    // beyond the row cap exact projection is too expensive; only rounding
    // points that are exactly feasible can succeed there
    RationalizeResult rat = rationalize(sol, sys, {10, 20, 30, 40, 50, 60}, 400);
    if (!rat.ok()) return w;
    PreorderWitness slim = witness_from_blocks(sys, *rat.blocks, 0);
    if (!verify_membership(target, slim)) return w;
    // keep the rewrite only when the term-count x coefficient-size product
    // (a proxy for every downstream cost) actually improves
    const size_t cost_slim = slim.term_count() * std::max<size_t>(max_coeff_bits(slim), 1);
    const size_t cost_in = w.term_count() * std::max<size_t>(max_coeff_bits(w), 1);
    if (cost_slim >= cost_in) return w;
    return slim;
}

struct EpsCertificate {
    Rat eps;
    PreorderWitness witness;
    long degree_bound = 0;
};

struct EpsSearchResult {
    std::optional<EpsCertificate> cert;
    std::string diagnostics;
    bool ok() const { return cert.has_value(); }
};

/// Search for eps > 0 and an exact witness of F - eps*I over the chosen cone.
/// Degrees walk the even schedule; eps walks a descending dyadic ladder so
/// returned values are exact powers of two. Failure is inconclusive.
inline EpsSearchResult matrix_sos_search(const MatPoly& f, const ConstraintSet& set, GramMode mode,
                                         const SearchConfig& cfg = {}) {
    EpsSearchResult res;
    if (!f.is_square() || !f.is_symmetric()) {
        res.diagnostics = "target matrix is not symmetric";
        return res;
    }
    std::ostringstream diag;
    const long dstart = std::max<long>(2, detail::even_ceil(f.degree()));
    for (long d = dstart; d <= std::max(dstart, cfg.degree_cap); d += 2) {
        for (long elog = 0; elog >= cfg.eps_min_log2; --elog) {
            const Rat eps = pow2(elog);
            const MatPoly target = f - MatPoly::identity(f.rows(), f.nvars()).scale(eps);
            GramSystem sys;
            try {
                sys = build_gram_system(target, set, mode, d);
            } catch (const GramBuildError& e) {
                diag << "degree " << d << ": " << e.what() << "; ";
                break;  // same target degree for every eps
            }
            FloatSolution sol = solve_feasibility(sys, cfg.solve);
            if (sol.nan_failure) {
                diag << "degree " << d << " eps 2^" << elog << ": numeric breakdown (NaN); ";
                continue;
            }
            if (!worth_rationalizing(sol, cfg.solve)) {
                diag << "degree " << d << " eps 2^" << elog << ": no convergence (residual "
                     << sol.residual << "); ";
                continue;
            }
            RationalizeResult rat = rationalize(sol, sys, cfg.denom_ladder);
            if (!rat.ok()) {
                diag << "degree " << d << " eps 2^" << elog << ": " << rat.diagnostics << "; ";
                continue;
            }
            PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
            if (!verify_membership(target, w))
                throw std::logic_error("rationalized witness failed exact verification");
            res.cert = EpsCertificate{eps, std::move(w), d};
            return res;
        }
    }
    res.diagnostics = "no certificate found at bounds: " + diag.str();
    return res;
}

/// Direct membership search: an exact witness of target in the chosen cone.
inline std::optional<PreorderWitness> sos_membership_search(const MatPoly& target,
                                                            const ConstraintSet& set, GramMode mode,
                                                            const SearchConfig& cfg,
                                                            std::string* diagnostics = nullptr) {
    std::ostringstream diag;
    const long dstart = std::max<long>(0, detail::even_ceil(target.degree()));
    for (long d = dstart; d <= std::max(dstart, cfg.degree_cap); d += 2) {
        GramSystem sys;
        try {
            sys = build_gram_system(target, set, mode, d);
        } catch (const GramBuildError& e) {
            diag << "degree " << d << ": " << e.what() << "; ";
            continue;
        }
        FloatSolution sol = solve_feasibility(sys, cfg.solve);
        if (!worth_rationalizing(sol, cfg.solve)) {
            diag << "degree " << d << ": residual " << sol.residual << "; ";
            continue;
        }
        RationalizeResult rat = rationalize(sol, sys, cfg.denom_ladder);
        if (!rat.ok()) {
            diag << "degree " << d << ": " << rat.diagnostics << "; ";
            continue;
        }
        PreorderWitness w = witness_from_blocks(sys, *rat.blocks, 0);
        if (!verify_membership(target, w))
            throw std::logic_error("rationalized witness failed exact verification");
        return w;
    }
    if (diagnostics) *diagnostics = diag.str();
    return std::nullopt;
}

}  // namespace psatz

#endif
