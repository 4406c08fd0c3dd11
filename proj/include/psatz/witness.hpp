#ifndef PSATZ_WITNESS_HPP
#define PSATZ_WITNESS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "psatz/ldlt.hpp"
#include "psatz/matpoly.hpp"

namespace psatz {

/// Exponent pattern over the constraint list: which generators enter a product.
struct ExponentVector {
    std::vector<uint8_t> bits;

    ExponentVector() = default;
    explicit ExponentVector(int m) : bits(static_cast<size_t>(m), 0) {}
    explicit ExponentVector(std::vector<uint8_t> b) : bits(std::move(b)) {}

    static ExponentVector single(int m, int i) {
        ExponentVector e(m);
        e.bits[static_cast<size_t>(i)] = 1;
        return e;
    }

    int size() const { return static_cast<int>(bits.size()); }

    int hamming() const {
        int h = 0;
        for (uint8_t b : bits) h += b;
        return h;
    }

    ExponentVector sym_diff(const ExponentVector& o) const {
        ExponentVector r = *this;
        for (size_t i = 0; i < bits.size(); ++i) r.bits[i] ^= o.bits[i];
        return r;
    }

    ExponentVector common(const ExponentVector& o) const {
        ExponentVector r = *this;
        for (size_t i = 0; i < bits.size(); ++i) r.bits[i] &= o.bits[i];
        return r;
    }

    bool operator==(const ExponentVector& o) const { return bits == o.bits; }
    bool operator<(const ExponentVector& o) const { return bits < o.bits; }

    std::string str() const {
        if (bits.empty()) return "-";
        std::string s;
        for (uint8_t b : bits) s += b ? '1' : '0';
        return s;
    }
};

/// Ordered list of scalar constraint polynomials g_1,...,g_m.
/// The described set is {x : g_i(x) >= 0 for all i}.
class ConstraintSet {
public:
    static constexpr int kMaxGenerators = 8;  // 2^m product blocks, desk scale

    ConstraintSet() : nvars_(0) {}
    explicit ConstraintSet(int nvars) : nvars_(nvars) {}
    ConstraintSet(int nvars, std::vector<Poly> gens) : nvars_(nvars), generators_(std::move(gens)) {
        if (static_cast<int>(generators_.size()) > kMaxGenerators)
            throw std::invalid_argument("constraint set exceeds the supported generator count (8)");
        for (const Poly& g : generators_)
            if (g.nvars() != nvars_) throw std::invalid_argument("constraint variable count mismatch");
    }

    int nvars() const { return nvars_; }
    int count() const { return static_cast<int>(generators_.size()); }
    const std::vector<Poly>& generators() const { return generators_; }
    const Poly& generator(int i) const { return generators_[static_cast<size_t>(i)]; }

    /// Product g_1^{e_1} * ... * g_m^{e_m}.
    Poly product(const ExponentVector& e) const {
        if (e.size() != count()) throw std::invalid_argument("exponent vector length mismatch");
        Poly p = Poly::constant(nvars_, Rat(1));
        for (int i = 0; i < count(); ++i)
            if (e.bits[static_cast<size_t>(i)]) p *= generators_[static_cast<size_t>(i)];
        return p;
    }

    /// Exact membership test for the described closed set.
    bool contains(const RatPoint& x) const {
        for (const Poly& g : generators_)
            if (g.eval(x.coords) < 0) return false;
        return true;
    }

    bool operator==(const ConstraintSet& o) const {
        return nvars_ == o.nvars_ && generators_ == o.generators_;
    }
    bool operator!=(const ConstraintSet& o) const { return !(*this == o); }

private:
    int nvars_;
    std::vector<Poly> generators_;
};

/// One weighted square: weight * mat^T * mat with weight > 0.
struct SosTerm {
    Rat weight;
    MatPoly mat;  // cols == witness size
};

/// Weighted sum of squares of matrix polynomials, sum_i w_i A_i^T A_i.
/// The scalar case is n == 1.
class SosMatrixWitness {
public:
    SosMatrixWitness() : n_(0), nvars_(0) {}
    SosMatrixWitness(int n, int nvars) : n_(n), nvars_(nvars) {}

    static SosMatrixWitness single(const MatPoly& a, const Rat& w = Rat(1)) {
        SosMatrixWitness s(a.cols(), a.nvars());
        s.add_term(w, a);
        return s;
    }

    static SosMatrixWitness scalar_square(const Poly& h, const Rat& w = Rat(1)) {
        return single(MatPoly::scalar(h), w);
    }

    /// Positive constant c as the weighted square c * 1^2.
    static SosMatrixWitness scalar_constant(int nvars, const Rat& c) {
        SosMatrixWitness s(1, nvars);
        if (c < 0) throw std::invalid_argument("negative constant is not a weighted square");
        if (c > 0) s.add_term(c, MatPoly::identity(1, nvars));
        return s;
    }

    static SosMatrixWitness identity(int n, int nvars, const Rat& w = Rat(1)) {
        return single(MatPoly::identity(n, nvars), w);
    }

    int size() const { return n_; }
    int nvars() const { return nvars_; }
    const std::vector<SosTerm>& terms() const { return terms_; }
    size_t term_count() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    void add_term(const Rat& w, const MatPoly& a) {
        if (w < 0) throw std::invalid_argument("witness weight must be nonnegative");
        if (w == 0 || a.is_zero()) return;
        if (a.cols() != n_ || a.nvars() != nvars_)
            throw std::invalid_argument("witness term shape mismatch");
        terms_.push_back({w, a});
    }

    void append(const SosMatrixWitness& o) {
        if (o.n_ != n_ || o.nvars_ != nvars_) throw std::invalid_argument("witness size mismatch");
        for (const SosTerm& t : o.terms_) terms_.push_back(t);
    }

    MatPoly expand() const {
        MatPoly acc = MatPoly::zero(n_, n_, nvars_);
        for (const SosTerm& t : terms_) acc += gram_square(t.mat).scale(t.weight);
        return acc;
    }

    /// Each term A -> A*g; expansion becomes g^T * expand * g.
    SosMatrixWitness congruence(const MatPoly& g) const {
        if (g.rows() != n_) throw std::invalid_argument("congruence shape mismatch");
        SosMatrixWitness r(g.cols(), nvars_);
        for (const SosTerm& t : terms_) r.add_term(t.weight, t.mat * g);
        return r;
    }

    /// Scale by a single polynomial square h^2 (folded into the squares).
    SosMatrixWitness scale_square(const Poly& h) const {
        SosMatrixWitness r(n_, nvars_);
        for (const SosTerm& t : terms_) r.add_term(t.weight, t.mat.scale(h));
        return r;
    }

    SosMatrixWitness scale_weight(const Rat& c) const {
        if (c < 0) throw std::invalid_argument("witness weights must stay positive");
        SosMatrixWitness r(n_, nvars_);
        if (c == 0) return r;
        for (const SosTerm& t : terms_) r.add_term(t.weight * c, t.mat);
        return r;
    }

    /// Product of two scalar witnesses (n == 1 both): pairwise squares.
    static SosMatrixWitness scalar_product(const SosMatrixWitness& a, const SosMatrixWitness& b) {
        if (a.n_ != 1 || b.n_ != 1) throw std::invalid_argument("scalar_product needs 1x1 witnesses");
        SosMatrixWitness r(1, a.nvars_);
        for (const SosTerm& ta : a.terms_)
            for (int ra = 0; ra < ta.mat.rows(); ++ra) {
                const Poly& h = ta.mat.at(ra, 0);
                for (const SosTerm& tb : b.terms_) r.add_term(ta.weight * tb.weight, tb.mat.scale(h));
            }
        return r;
    }

    bool well_formed() const {
        for (const SosTerm& t : terms_) {
            if (t.weight <= 0) return false;
            if (t.mat.cols() != n_ || t.mat.nvars() != nvars_) return false;
        }
        return true;
    }

private:
    int n_;
    int nvars_;
    std::vector<SosTerm> terms_;
};

/// One extracted weighted square over stacked coordinates.
struct ExtractedSquare {
    Rat weight;
    std::vector<std::pair<int, Rat>> vec;
};

namespace detail {

/// Diagonally-dominant split: pair squares (e_i +- e_j) for off-diagonal
/// entries plus diagonal leftovers. Exact, zero coefficient growth.
/// Returns false when the matrix is not diagonally dominant.
inline bool sdd_squares(const RatMat& g, std::vector<ExtractedSquare>& out) {
    const int n = g.rows();
    std::vector<Rat> slack(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rat s = g.at(i, i);
        for (int j = 0; j < n; ++j)
            if (j != i) s -= abs(g.at(i, j));
        if (s < 0) return false;
        slack[static_cast<size_t>(i)] = s;
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Rat& v = g.at(i, j);
            if (v == 0) continue;
            ExtractedSquare sq;
            sq.weight = abs(v);
            sq.vec = {{i, Rat(1)}, {j, v > 0 ? Rat(1) : Rat(-1)}};
            out.push_back(std::move(sq));
        }
    for (int i = 0; i < n; ++i) {
        if (slack[static_cast<size_t>(i)] == 0) continue;
        ExtractedSquare sq;
        sq.weight = slack[static_cast<size_t>(i)];
        sq.vec = {{i, Rat(1)}};
        out.push_back(std::move(sq));
    }
    return true;
}

/// Plain float Cholesky, lower triangular; false when not numerically PD.
inline bool float_cholesky(const std::vector<double>& a, int n, std::vector<double>& l) {
    l.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= l[static_cast<size_t>(i) * n + k] * l[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (!(s > 0)) return false;
                l[static_cast<size_t>(i) * n + i] = std::sqrt(s);
            } else {
                l[static_cast<size_t>(i) * n + j] = s / l[static_cast<size_t>(j) * n + j];
            }
        }
    }
    return true;
}

}  // namespace detail

/// Exact weighted-square decomposition of a PSD rational matrix with bounded
/// coefficient growth: try the diagonally-dominant split, then peel a rounded
/// float Cholesky factor (the exact remainder becomes diagonally dominant),
/// and fall back to the exact pivoted LDL^T.
inline std::vector<ExtractedSquare> extract_psd_squares(const RatMat& g) {
    std::vector<ExtractedSquare> out;
    const int n = g.rows();
    if (g.is_zero()) return out;
    if (detail::sdd_squares(g, out)) return out;
    out.clear();

    std::vector<double> gd(static_cast<size_t>(n) * n);
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            gd[static_cast<size_t>(i) * n + j] = to_double(g.at(i, j));
            scale = std::max(scale, std::abs(gd[static_cast<size_t>(i) * n + j]));
        }
    for (long k : {20L, 28L, 36L, 44L, 52L}) {
        const double delta = scale * (n + 2) * std::ldexp(1.0, static_cast<int>(-k + 2));
        std::vector<double> shifted = gd;
        for (int i = 0; i < n; ++i) shifted[static_cast<size_t>(i) * n + i] -= delta;
        std::vector<double> l;
        if (!detail::float_cholesky(shifted, n, l)) continue;
        // exact remainder after removing the rounded factor
        RatMat rounded(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) rounded.at(i, j) = dyadic_round(l[static_cast<size_t>(i) * n + j], k);
        RatMat rem = g - rounded * rounded.transpose();
        std::vector<ExtractedSquare> tail;
        if (!detail::sdd_squares(rem, tail)) continue;
        for (int col = 0; col < n; ++col) {
            ExtractedSquare sq;
            sq.weight = 1;
            for (int i = col; i < n; ++i)
                if (rounded.at(i, col) != 0) sq.vec.emplace_back(i, rounded.at(i, col));
            if (!sq.vec.empty()) out.push_back(std::move(sq));
        }
        for (auto& sq : tail) out.push_back(std::move(sq));
        return out;
    }

    LdltResult f = psd_ldlt(g);
    if (!f.is_psd) throw std::invalid_argument("extract_psd_squares: matrix is not PSD");
    for (int col = 0; col < f.rank; ++col) {
        const Rat& d = f.diag[static_cast<size_t>(col)];
        if (d == 0) continue;
        ExtractedSquare sq;
        sq.weight = d;
        for (int i = 0; i < n; ++i) {
            const Rat& v = f.lower.at(i, col);
            if (v != 0) sq.vec.emplace_back(f.perm[static_cast<size_t>(i)], v);
        }
        out.push_back(std::move(sq));
    }
    return out;
}

/// Re-extract a witness from its exact Gram matrix. Expansion-preserving and
/// bit-exact. Compact mode uses the pivoted LDL^T and returns at most
/// dimension-many squares (coefficients may grow); the default mode favors
/// small coefficients at the price of more (sparse) squares.
inline SosMatrixWitness compress(const SosMatrixWitness& w, bool compact = false) {
    if (w.empty()) return w;
    const int n = w.size();
    const int nvars = w.nvars();
    // flatten all terms to weighted 1xN rows
    struct Row {
        Rat weight;
        std::vector<std::pair<size_t, Rat>> entries;  // stacked index -> coeff
    };
    std::map<Monomial, size_t, GrlexLess> basis_index;
    std::vector<Monomial> basis;
    std::vector<Row> rows;
    for (const SosTerm& t : w.terms()) {
        for (int r = 0; r < t.mat.rows(); ++r) {
            Row row;
            row.weight = t.weight;
            bool nonzero = false;
            for (int c = 0; c < n; ++c) {
                const Poly& p = t.mat.at(r, c);
                for (const auto& [m, coef] : p.terms()) {
                    auto it = basis_index.find(m);
                    size_t j;
                    if (it == basis_index.end()) {
                        j = basis.size();
                        basis_index.emplace(m, j);
                        basis.push_back(m);
                    } else {
                        j = it->second;
                    }
                    row.entries.emplace_back(j * static_cast<size_t>(n) + static_cast<size_t>(c), coef);
                    nonzero = true;
                }
            }
            if (nonzero) rows.push_back(std::move(row));
        }
    }
    const size_t dim = basis.size() * static_cast<size_t>(n);
    if (dim == 0) return SosMatrixWitness(n, nvars);
    RatMat gram(static_cast<int>(dim), static_cast<int>(dim));
    for (const Row& row : rows)
        for (const auto& [i, ci] : row.entries)
            for (const auto& [j, cj] : row.entries)
                gram.at(static_cast<int>(i), static_cast<int>(j)) += row.weight * ci * cj;
    std::vector<ExtractedSquare> squares;
    if (compact) {
        LdltResult f = psd_ldlt(gram);
        if (!f.is_psd) throw std::logic_error("compress: exact Gram of a witness must be PSD");
        for (int col = 0; col < f.rank; ++col) {
            const Rat& d = f.diag[static_cast<size_t>(col)];
            if (d == 0) continue;
            ExtractedSquare sq;
            sq.weight = d;
            for (int i = 0; i < static_cast<int>(dim); ++i)
                if (f.lower.at(i, col) != 0)
                    sq.vec.emplace_back(f.perm[static_cast<size_t>(i)], f.lower.at(i, col));
            squares.push_back(std::move(sq));
        }
    } else {
        squares = extract_psd_squares(gram);
    }
    SosMatrixWitness out(n, nvars);
    for (const ExtractedSquare& sq : squares) {
        MatPoly a(1, n, nvars);
        for (const auto& [idx, v] : sq.vec) {
            const size_t j = static_cast<size_t>(idx) / static_cast<size_t>(n);
            a.at(0, idx % n) += Poly::monomial(basis[j], v);
        }
        out.add_term(sq.weight, a);
    }
    return out;
}

/// Element of the preordering generated by the constraint products:
/// sum over exponent patterns e of ghat_e * (matrix SOS block).
/// Quadratic-module elements are the patterns of Hamming weight <= 1.
class PreorderWitness {
public:
    PreorderWitness() : n_(0) {}
    PreorderWitness(ConstraintSet set, int n) : set_(std::move(set)), n_(n) {}

    static PreorderWitness zero(const ConstraintSet& s, int n) { return PreorderWitness(s, n); }

    static PreorderWitness from_sos(const ConstraintSet& s, const ExponentVector& e,
                                    const SosMatrixWitness& w) {
        PreorderWitness r(s, w.size());
        r.add_block(e, w);
        return r;
    }

    /// Plain SOS block (empty exponent pattern).
    static PreorderWitness sos_only(const ConstraintSet& s, const SosMatrixWitness& w) {
        return from_sos(s, ExponentVector(s.count()), w);
    }

    /// Scalar constant c >= 0.
    static PreorderWitness scalar_constant(const ConstraintSet& s, const Rat& c) {
        return sos_only(s, SosMatrixWitness::scalar_constant(s.nvars(), c));
    }

    /// Scalar single square h^2 (weight w).
    static PreorderWitness scalar_square(const ConstraintSet& s, const Poly& h, const Rat& w = Rat(1)) {
        return sos_only(s, SosMatrixWitness::scalar_square(h, w));
    }

    /// The generator g_i itself: block e_i with the constant square 1.
    static PreorderWitness generator(const ConstraintSet& s, int i) {
        return from_sos(s, ExponentVector::single(s.count(), i),
                        SosMatrixWitness::identity(1, s.nvars()));
    }

    static PreorderWitness identity(const ConstraintSet& s, int n, const Rat& w = Rat(1)) {
        return sos_only(s, SosMatrixWitness::identity(n, s.nvars(), w));
    }

    int size() const { return n_; }
    int nvars() const { return set_.nvars(); }
    const ConstraintSet& constraints() const { return set_; }
    const std::map<ExponentVector, SosMatrixWitness>& blocks() const { return blocks_; }
    bool empty() const { return blocks_.empty(); }

    size_t term_count() const {
        size_t c = 0;
        for (const auto& [e, b] : blocks_) c += b.term_count();
        return c;
    }

    void add_block(const ExponentVector& e, const SosMatrixWitness& w) {
        if (e.size() != set_.count()) throw std::invalid_argument("exponent vector length mismatch");
        if (w.size() != n_ || w.nvars() != set_.nvars())
            throw std::invalid_argument("witness block size mismatch");
        if (w.empty()) return;
        auto [it, inserted] = blocks_.emplace(e, w);
        if (!inserted) it->second.append(w);
    }

    MatPoly expand() const {
        MatPoly acc = MatPoly::zero(n_, n_, set_.nvars());
        for (const auto& [e, b] : blocks_) acc += b.expand().scale(set_.product(e));
        return acc;
    }

    /// Largest Hamming weight among nonempty blocks; 0 for the empty witness.
    int max_hamming() const {
        int h = 0;
        for (const auto& [e, b] : blocks_) h = std::max(h, e.hamming());
        return h;
    }

    /// Quadratic-module shape: every block uses at most one generator.
    bool is_quadratic_module() const { return max_hamming() <= 1; }

    bool well_formed() const {
        for (const auto& [e, b] : blocks_) {
            if (e.size() != set_.count()) return false;
            if (b.size() != n_ || !b.well_formed()) return false;
        }
        return true;
    }

    /// Compress each block whose square count exceeds `threshold_factor`
    /// times the dimension of its exact Gram matrix.
    PreorderWitness compressed(bool compact = false, size_t threshold_factor = 1,
                               size_t dim_cap = 900) const;

    std::string summary() const {
        std::string s = "blocks=" + std::to_string(blocks_.size()) +
                        " terms=" + std::to_string(term_count());
        return s;
    }

private:
    ConstraintSet set_;
    int n_;
    std::map<ExponentVector, SosMatrixWitness> blocks_;
};

/// Largest numerator/denominator bit length over all term coefficients.
inline size_t max_coeff_bits(const PreorderWitness& w) {
    size_t bits = 0;
    for (const auto& [e, blk] : w.blocks())
        for (const SosTerm& t : blk.terms()) {
            bits = std::max({bits, mpz_sizeinbase(t.weight.get_num().get_mpz_t(), 2),
                             mpz_sizeinbase(t.weight.get_den().get_mpz_t(), 2)});
            for (int i = 0; i < t.mat.rows(); ++i)
                for (int c = 0; c < t.mat.cols(); ++c)
                    for (const auto& [m, coef] : t.mat.at(i, c).terms())
                        bits = std::max({bits, mpz_sizeinbase(coef.get_num().get_mpz_t(), 2),
                                         mpz_sizeinbase(coef.get_den().get_mpz_t(), 2)});
        }
    return bits;
}

inline void check_compatible(const PreorderWitness& a, const PreorderWitness& b) {
    if (a.constraints() != b.constraints())
        throw std::invalid_argument("witness constraint sets differ");
    if (a.size() != b.size()) throw std::invalid_argument("witness sizes differ");
}

inline PreorderWitness witness_add(const PreorderWitness& a, const PreorderWitness& b) {
    check_compatible(a, b);
    PreorderWitness r = a;
    for (const auto& [e, blk] : b.blocks()) r.add_block(e, blk);
    return r;
}

/// Congruence transport: expansion becomes A^T * expand(w) * A.
/// A must have w.size() rows; the result has A.cols() size.
inline PreorderWitness witness_congruence(const MatPoly& a, const PreorderWitness& w) {
    if (a.rows() != w.size()) throw std::invalid_argument("congruence shape mismatch");
    PreorderWitness r(w.constraints(), a.cols());
    for (const auto& [e, blk] : w.blocks()) r.add_block(e, blk.congruence(a));
    return r;
}

/// Product of a scalar preordering element with a matrix one.
/// Block algebra: ghat_e * ghat_f = ghat_{e xor f} * (ghat_{e and f})^2,
/// the square folded into the SOS factors.
inline PreorderWitness preorder_mul(const PreorderWitness& scalar, const PreorderWitness& mat) {
    if (scalar.constraints() != mat.constraints())
        throw std::invalid_argument("witness constraint sets differ");
    if (scalar.size() != 1) throw std::invalid_argument("left factor must be scalar");
    const ConstraintSet& s = scalar.constraints();
    PreorderWitness r(s, mat.size());
    for (const auto& [e, bs] : scalar.blocks()) {
        for (const auto& [f, bm] : mat.blocks()) {
            const Poly fold = s.product(e.common(f));
            SosMatrixWitness prod(mat.size(), s.nvars());
            for (const SosTerm& ts : bs.terms()) {
                for (int row = 0; row < ts.mat.rows(); ++row) {
                    const Poly scaled = ts.mat.at(row, 0) * fold;
                    if (scaled.is_zero()) continue;
                    for (const SosTerm& tm : bm.terms())
                        prod.add_term(ts.weight * tm.weight, tm.mat.scale(scaled));
                }
            }
            r.add_block(e.sym_diff(f), prod);
        }
    }
    return r;
}

/// Adds the constant identity square into the empty block: witness of 1 + w.
inline PreorderWitness one_plus(const PreorderWitness& w) {
    PreorderWitness r = w;
    r.add_block(ExponentVector(w.constraints().count()),
                SosMatrixWitness::identity(w.size(), w.nvars()));
    return r;
}

/// Exact membership: the witness is structurally valid and expands to p.
inline bool verify_membership(const MatPoly& p, const PreorderWitness& w) {
    if (p.rows() != w.size() || p.cols() != w.size() || p.nvars() != w.nvars()) return false;
    if (!w.well_formed()) return false;
    return w.expand() == p;
}

inline PreorderWitness PreorderWitness::compressed(bool compact, size_t threshold_factor,
                                                   size_t dim_cap) const {
    PreorderWitness r(set_, n_);
    for (const auto& [e, b] : blocks_) {
        size_t dim = 0;
        {
            std::map<Monomial, bool, GrlexLess> seen;
            for (const SosTerm& t : b.terms())
                for (int i = 0; i < t.mat.rows(); ++i)
                    for (int c = 0; c < n_; ++c)
                        for (const auto& [m, coef] : t.mat.at(i, c).terms()) seen.emplace(m, true);
            dim = seen.size() * static_cast<size_t>(n_);
        }
        if (dim > 0 && dim <= dim_cap && b.term_count() > threshold_factor * dim)
            r.add_block(e, compress(b, compact));
        else
            r.add_block(e, b);
    }
    return r;
}

}  // namespace psatz

#endif
