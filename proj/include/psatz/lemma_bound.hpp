#ifndef PSATZ_LEMMA_BOUND_HPP
#define PSATZ_LEMMA_BOUND_HPP

#include <memory>
#include <stdexcept>
#include <vector>

#include "psatz/witness.hpp"

namespace psatz {

/// Structural presentation of a matrix polynomial as sums and products of
/// scalar variables and constant matrices.
struct ExprTree {
    enum class Kind { ConstMat, VarScalar, Sum, Product };

    Kind kind;
    int rows = 0, cols = 0, nvars = 0;
    RatMat constant;  // ConstMat
    int var = -1;     // VarScalar, 0-based
    std::unique_ptr<ExprTree> left, right;

    static std::unique_ptr<ExprTree> const_mat(const RatMat& c, int nvars) {
        auto t = std::make_unique<ExprTree>();
        t->kind = Kind::ConstMat;
        t->rows = c.rows();
        t->cols = c.cols();
        t->nvars = nvars;
        t->constant = c;
        return t;
    }

    /// x_var * I_size.
    static std::unique_ptr<ExprTree> var_scalar(int var, int size, int nvars) {
        auto t = std::make_unique<ExprTree>();
        t->kind = Kind::VarScalar;
        t->rows = t->cols = size;
        t->nvars = nvars;
        t->var = var;
        return t;
    }

    static std::unique_ptr<ExprTree> sum(std::unique_ptr<ExprTree> l, std::unique_ptr<ExprTree> r) {
        if (l->rows != r->rows || l->cols != r->cols)
            throw std::invalid_argument("sum node shape mismatch");
        auto t = std::make_unique<ExprTree>();
        t->kind = Kind::Sum;
        t->rows = l->rows;
        t->cols = l->cols;
        t->nvars = l->nvars;
        t->left = std::move(l);
        t->right = std::move(r);
        return t;
    }

    static std::unique_ptr<ExprTree> product(std::unique_ptr<ExprTree> l, std::unique_ptr<ExprTree> r) {
        if (l->cols != r->rows) throw std::invalid_argument("product node shape mismatch");
        auto t = std::make_unique<ExprTree>();
        t->kind = Kind::Product;
        t->rows = l->rows;
        t->cols = r->cols;
        t->nvars = l->nvars;
        t->left = std::move(l);
        t->right = std::move(r);
        return t;
    }

    MatPoly flatten() const {
        switch (kind) {
            case Kind::ConstMat:
                return MatPoly::from_ratmat(constant, nvars);
            case Kind::VarScalar:
                return MatPoly::identity(rows, nvars).scale(Poly::variable(nvars, var));
            case Kind::Sum:
                return left->flatten() + right->flatten();
            case Kind::Product:
                return left->flatten() * right->flatten();
        }
        throw std::logic_error("unreachable");
    }
};

/// Canonical presentation: sum over monomials of (variable chain) * (constant
/// coefficient matrix); variable chains are left folds in index order.
inline std::unique_ptr<ExprTree> decompose(const MatPoly& b) {
    const int nvars = b.nvars();
    std::map<Monomial, RatMat, GrlexLess> coeffs;
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            for (const auto& [m, c] : b.at(i, j).terms()) {
                auto it = coeffs.find(m);
                if (it == coeffs.end()) it = coeffs.emplace(m, RatMat(b.rows(), b.cols())).first;
                it->second.at(i, j) = c;
            }
    std::unique_ptr<ExprTree> acc;
    for (const auto& [m, c] : coeffs) {
        std::unique_ptr<ExprTree> term;
        std::unique_ptr<ExprTree> chain;
        for (int v = 0; v < nvars; ++v)
            for (uint32_t rep = 0; rep < m.exps[static_cast<size_t>(v)]; ++rep) {
                auto leaf = ExprTree::var_scalar(v, b.rows(), nvars);
                chain = chain ? ExprTree::product(std::move(chain), std::move(leaf)) : std::move(leaf);
            }
        auto cnode = ExprTree::const_mat(c, nvars);
        term = chain ? ExprTree::product(std::move(chain), std::move(cnode)) : std::move(cnode);
        acc = acc ? ExprTree::sum(std::move(acc), std::move(term)) : std::move(term);
    }
    if (!acc) acc = ExprTree::const_mat(RatMat(b.rows(), b.cols()), nvars);
    return acc;
}

/// Certified norm bound: expand(sos) = k * p^l * I - B^T B exactly,
/// where p = 1 + sum of squared variables.
struct BoundWitness {
    Rat k;
    long l = 0;
    SosMatrixWitness sos;
    MatPoly mat;  // the bounded B

    Poly bound_poly() const {
        return one_plus_sum_of_squares(mat.nvars()).pow(l) * k;
    }
};

/// SOS squares of p^l: a single square for even l, p times a square otherwise.
inline SosMatrixWitness p_power_sos(int nvars, long l) {
    const Poly p = one_plus_sum_of_squares(nvars);
    SosMatrixWitness w(1, nvars);
    if (l % 2 == 0) {
        w.add_term(Rat(1), MatPoly::scalar(p.pow(l / 2)));
        return w;
    }
    const Poly h = p.pow((l - 1) / 2);
    w.add_term(Rat(1), MatPoly::scalar(h));
    for (int i = 0; i < nvars; ++i)
        w.add_term(Rat(1), MatPoly::scalar(h * Poly::variable(nvars, i)));
    return w;
}

/// Telescoped squares of p^delta - 1 = sum_{j<delta} p^j (p - 1).
inline SosMatrixWitness p_power_minus_one_sos(int nvars, long delta) {
    SosMatrixWitness w(1, nvars);
    if (delta < 0) throw std::invalid_argument("negative power gap");
    const Poly p = one_plus_sum_of_squares(nvars);
    for (long j = 0; j < delta; ++j) {
        SosMatrixWitness pj = p_power_sos(nvars, j);
        for (int i = 0; i < nvars; ++i) {
            const Poly xi = Poly::variable(nvars, i);
            for (const SosTerm& t : pj.terms())
                w.add_term(t.weight, t.mat.scale(xi));
        }
    }
    return w;
}

namespace detail {

inline Rat multinomial(long total, const Monomial& beta) {
    Int num;
    mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(total));
    Int den;
    long rest = total - beta.degree();
    mpz_fac_ui(den.get_mpz_t(), static_cast<unsigned long>(rest));
    for (uint32_t e : beta.exps) {
        Int f;
        mpz_fac_ui(f.get_mpz_t(), e);
        den *= f;
    }
    return make_rat(num, den);
}

/// Monomial squares of p^{|alpha|} - x^{2 alpha} via multinomial expansion.
inline SosMatrixWitness monomial_dominance_sos(int nvars, const Monomial& alpha) {
    const long deg = alpha.degree();
    if (deg < 1) throw std::invalid_argument("dominance needs a nonconstant monomial");
    SosMatrixWitness w(1, nvars);
    for (const Monomial& beta : monomials_up_to_degree(nvars, deg)) {
        Rat c = multinomial(deg, beta);
        if (beta == alpha) c -= 1;
        if (c == 0) continue;
        w.add_term(c, MatPoly::scalar(Poly::monomial(beta, Rat(1))));
    }
    return w;
}

}  // namespace detail

/// Bound for a constant matrix: k = 1 + squared Frobenius norm keeps
/// k*I - C^T C strictly positive definite, so the exact LDL^T never stalls.
inline BoundWitness bound_constant(const RatMat& c, int nvars) {
    BoundWitness r;
    r.k = Rat(1) + c.frobenius_sq();
    r.l = 0;
    r.mat = MatPoly::from_ratmat(c, nvars);
    RatMat m = RatMat::identity(c.cols()) * r.k - c.transpose() * c;
    LdltResult f = psd_ldlt(m);
    if (!f.is_psd) throw std::logic_error("bound_constant: k*I - C^T C must be PD");
    SosMatrixWitness sos(c.cols(), nvars);
    for (int col = 0; col < c.cols(); ++col) {
        const Rat& d = f.diag[static_cast<size_t>(col)];
        if (d == 0) continue;
        MatPoly a(1, c.cols(), nvars);
        for (int i = 0; i < c.cols(); ++i)
            a.at(0, f.perm[static_cast<size_t>(i)]) = Poly::constant(nvars, f.lower.at(i, col));
        sos.add_term(d, a);
    }
    r.sos = std::move(sos);
    return r;
}

/// Bound for x_var * I_size: p*I - x^2*I = (1 + sum_{j != var} x_j^2)*I.
inline BoundWitness bound_variable_sized(int nvars, int var, int size) {
    if (var < 0 || var >= nvars) throw std::invalid_argument("variable index out of range");
    BoundWitness r;
    r.k = 1;
    r.l = 1;
    r.mat = MatPoly::identity(size, nvars).scale(Poly::variable(nvars, var));
    SosMatrixWitness sos(size, nvars);
    sos.add_term(Rat(1), MatPoly::identity(size, nvars));
    for (int j = 0; j < nvars; ++j) {
        if (j == var) continue;
        sos.add_term(Rat(1), MatPoly::identity(size, nvars).scale(Poly::variable(nvars, j)));
    }
    r.sos = std::move(sos);
    return r;
}

inline BoundWitness bound_variable(int nvars, int var) { return bound_variable_sized(nvars, var, 1); }

namespace detail {

/// Level raising: terms of w plus k*(p^l*(p^delta - 1)) * I, so the bound
/// identity holds at exponent l + delta.
inline SosMatrixWitness raise_level(const BoundWitness& w, long delta, const Rat& scale) {
    SosMatrixWitness out = w.sos.scale_weight(scale);
    if (delta > 0) {
        const int nvars = w.mat.nvars();
        const int size = w.sos.size();
        SosMatrixWitness gap =
            SosMatrixWitness::scalar_product(p_power_sos(nvars, w.l), p_power_minus_one_sos(nvars, delta));
        for (const SosTerm& t : gap.terms())
            out.add_term(scale * w.k * t.weight,
                         MatPoly::identity(size, nvars).scale(t.mat.at(0, 0)));
    }
    return out;
}

}  // namespace detail

/// Parallelogram combination: bound for B1 + B2 with k = 2(k1+k2), l = max(l1,l2).
inline BoundWitness bound_sum(const BoundWitness& w1, const BoundWitness& w2) {
    if (w1.mat.rows() != w2.mat.rows() || w1.mat.cols() != w2.mat.cols())
        throw std::invalid_argument("bound_sum shape mismatch");
    BoundWitness r;
    r.k = (w1.k + w2.k) * 2;
    r.l = std::max(w1.l, w2.l);
    r.mat = w1.mat + w2.mat;
    SosMatrixWitness sos(w1.sos.size(), w1.mat.nvars());
    sos.add_term(Rat(1), w1.mat - w2.mat);
    sos.append(detail::raise_level(w1, r.l - w1.l, Rat(2)));
    sos.append(detail::raise_level(w2, r.l - w2.l, Rat(2)));
    r.sos = std::move(sos);
    return r;
}

/// Composition: bound for B1*B2 with k = k1*k2, l = l1+l2, built from
/// B2^T (k1 p^{l1} I - B1^T B1) B2 + k1 p^{l1} (k2 p^{l2} I - B2^T B2).
inline BoundWitness bound_product(const BoundWitness& w1, const BoundWitness& w2) {
    if (w1.mat.cols() != w2.mat.rows()) throw std::invalid_argument("bound_product shape mismatch");
    const int nvars = w1.mat.nvars();
    BoundWitness r;
    r.k = w1.k * w2.k;
    r.l = w1.l + w2.l;
    r.mat = w1.mat * w2.mat;
    SosMatrixWitness sos = w1.sos.congruence(w2.mat);
    const SosMatrixWitness left_power = p_power_sos(nvars, w1.l);
    for (const SosTerm& q : left_power.terms())
        for (const SosTerm& t : w2.sos.terms())
            sos.add_term(w1.k * q.weight * t.weight, t.mat.scale(q.mat.at(0, 0)));
    r.sos = std::move(sos);
    return r;
}

namespace detail {

/// Direct bound for a single monomial term x^alpha * C: k stays the constant
/// bound of C and l = |alpha|, avoiding the k growth of chained products.
inline BoundWitness bound_monomial_term(const Monomial& alpha, const RatMat& c, int nvars) {
    if (alpha.degree() == 0) return bound_constant(c, nvars);
    const bool ident = [&] {
        if (c.rows() != c.cols()) return false;
        return c == RatMat::identity(c.rows());
    }();
    const Poly xalpha = Poly::monomial(alpha, Rat(1));
    BoundWitness r;
    r.l = alpha.degree();
    r.mat = MatPoly::from_ratmat(c, nvars).scale(xalpha);
    SosMatrixWitness dom = monomial_dominance_sos(nvars, alpha);
    SosMatrixWitness sos(c.cols(), nvars);
    if (ident) {
        r.k = 1;
    } else {
        BoundWitness base = bound_constant(c, nvars);
        r.k = base.k;
        sos.append(base.sos.scale_square(xalpha));
    }
    for (const SosTerm& t : dom.terms())
        sos.add_term(r.k * t.weight, MatPoly::identity(c.cols(), nvars).scale(t.mat.at(0, 0)));
    r.sos = std::move(sos);
    return r;
}

inline bool is_identity_const(const ExprTree& t) {
    return t.kind == ExprTree::Kind::ConstMat && t.rows == t.cols &&
           t.constant == RatMat::identity(t.rows);
}

/// Recognize a decompose-shaped addend (variable chain times constant) and
/// bound it directly; anything else falls back to the closure operations.
inline BoundWitness bound_node(const ExprTree& t);

inline bool collect_term(const ExprTree& t, Monomial& alpha, const RatMat*& c) {
    switch (t.kind) {
        case ExprTree::Kind::ConstMat:
            c = &t.constant;
            return true;
        case ExprTree::Kind::VarScalar:
            alpha.exps[static_cast<size_t>(t.var)] += 1;
            c = nullptr;
            return true;
        case ExprTree::Kind::Product: {
            Monomial la(t.nvars);
            const RatMat* lc = nullptr;
            Monomial ra(t.nvars);
            const RatMat* rc = nullptr;
            if (!collect_term(*t.left, la, lc) || lc != nullptr) return false;
            if (!collect_term(*t.right, ra, rc)) return false;
            alpha = alpha * la * ra;
            c = rc;
            return true;
        }
        case ExprTree::Kind::Sum:
            return false;
    }
    return false;
}

inline BoundWitness bound_node(const ExprTree& t) {
    switch (t.kind) {
        case ExprTree::Kind::ConstMat:
            return bound_constant(t.constant, t.nvars);
        case ExprTree::Kind::VarScalar:
            return bound_variable_sized(t.nvars, t.var, t.rows);
        case ExprTree::Kind::Sum:
            return bound_sum(bound_node(*t.left), bound_node(*t.right));
        case ExprTree::Kind::Product: {
            // multiplying by an identity coefficient matrix changes nothing
            if (is_identity_const(*t.right)) return bound_node(*t.left);
            Monomial alpha(t.nvars);
            const RatMat* c = nullptr;
            if (collect_term(t, alpha, c)) {
                if (c != nullptr) return bound_monomial_term(alpha, *c, t.nvars);
                // pure variable chain x^alpha * I
                RatMat id = RatMat::identity(t.cols);
                return bound_monomial_term(alpha, id, t.nvars);
            }
            return bound_product(bound_node(*t.left), bound_node(*t.right));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

/// Lemma bound: explicit k, l and SOS witness with
/// expand(sos) + B^T B = k * p^l * I, valid for every matrix polynomial B.
inline BoundWitness lemma_bound(const MatPoly& b) {
    auto tree = decompose(b);
    BoundWitness r = detail::bound_node(*tree);
    if (r.mat != b) throw std::logic_error("lemma_bound: presentation does not flatten back");
    return r;
}

}  // namespace psatz

#endif
