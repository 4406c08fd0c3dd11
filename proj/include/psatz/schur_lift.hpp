#ifndef PSATZ_SCHUR_LIFT_HPP
#define PSATZ_SCHUR_LIFT_HPP

#include <random>
#include <sstream>

#include "psatz/lemma_bound.hpp"
#include "psatz/scalar_cert.hpp"

namespace psatz {

/// Certificate for a symmetric matrix polynomial F:
/// (1 + expand(multiplier)) * F = I + expand(residue), both witnesses in the
/// preordering of the constraint set.
struct TraceStep {
    std::string step;
    std::string tag;
    long degree = 0;
    size_t terms = 0;
};

struct MatrixCertificate {
    PreorderWitness multiplier;  // scalar t
    PreorderWitness residue;     // V, size n
    std::vector<TraceStep> trace;
};

inline bool verify_matrix_cert(const MatPoly& f, const MatrixCertificate& cert,
                               const ConstraintSet& set) {
    if (!f.is_square()) return false;
    const int n = f.rows();
    if (cert.multiplier.size() != 1 || cert.residue.size() != n) return false;
    if (cert.multiplier.constraints() != set || cert.residue.constraints() != set) return false;
    if (!cert.multiplier.well_formed() || !cert.residue.well_formed()) return false;
    if (f.nvars() != set.nvars()) return false;
    if (!f.is_symmetric()) return false;
    const Poly one = Poly::constant(f.nvars(), Rat(1));
    const MatPoly lhs = f.scale(one + cert.multiplier.expand().at(0, 0));
    const MatPoly rhs = MatPoly::identity(n, f.nvars()) + cert.residue.expand();
    return lhs == rhs;
}

/// Pivoted block split of a symmetric matrix polynomial:
/// after the symmetric permutation, F_perm = [[pivot, border],[border^T, trailing]],
/// and scaled_schur = pivot*trailing - border^T*border is the polynomial
/// pivot-multiple of the Schur complement.
struct SchurSplit {
    Poly pivot;
    MatPoly border;         // 1 x (n-1)
    MatPoly trailing;       // (n-1) x (n-1)
    MatPoly scaled_schur;   // (n-1) x (n-1)
    std::vector<int> perm;  // row i of the permuted matrix is row perm[i] of F

    MatPoly permuted_matrix() const {
        const int n = trailing.rows() + 1;
        MatPoly fp(n, n, pivot.nvars());
        fp.at(0, 0) = pivot;
        for (int j = 1; j < n; ++j) {
            fp.at(0, j) = border.at(0, j - 1);
            fp.at(j, 0) = border.at(0, j - 1);
        }
        for (int i = 1; i < n; ++i)
            for (int j = 1; j < n; ++j) fp.at(i, j) = trailing.at(i - 1, j - 1);
        return fp;
    }
};

inline SchurSplit schur_split(const MatPoly& f, PivotPolicy policy = PivotPolicy::MinDegree) {
    if (!f.is_square() || !f.is_symmetric())
        throw std::invalid_argument("schur_split: matrix must be symmetric");
    const int n = f.rows();
    if (n < 2) throw std::invalid_argument("schur_split: size must be at least 2");
    int piv = 0;
    if (policy == PivotPolicy::MinDegree) {
        long best = f.at(0, 0).degree();
        for (int i = 1; i < n; ++i) {
            const long d = f.at(i, i).degree();
            if (d < best) {
                best = d;
                piv = i;
            }
        }
    }
    SchurSplit s;
    s.perm.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) s.perm[static_cast<size_t>(i)] = i;
    std::swap(s.perm[0], s.perm[static_cast<size_t>(piv)]);
    MatPoly fp(n, n, f.nvars());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            fp.at(i, j) = f.at(s.perm[static_cast<size_t>(i)], s.perm[static_cast<size_t>(j)]);
    s.pivot = fp.at(0, 0);
    s.border = MatPoly(1, n - 1, f.nvars());
    for (int j = 1; j < n; ++j) s.border.at(0, j - 1) = fp.at(0, j);
    s.trailing = MatPoly(n - 1, n - 1, f.nvars());
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) s.trailing.at(i - 1, j - 1) = fp.at(i, j);
    s.scaled_schur = s.trailing.scale(s.pivot) - gram_square(s.border);
    return s;
}

/// Raised when an exact identity breaks during certificate assembly.
struct AssemblyError : std::runtime_error {
    std::string step;
    explicit AssemblyError(const std::string& step_name)
        : std::runtime_error("certificate assembly failed at step '" + step_name + "'"),
          step(step_name) {}
};

namespace detail {

/// Witness of prod_i (1 + a_i) - 1 via t <- t + a + t*a, with per-step
/// slimming to keep term counts and coefficients small.
inline PreorderWitness scalar_one_plus_product(const std::vector<const PreorderWitness*>& factors,
                                               const ConstraintSet& set) {
    PreorderWitness acc = PreorderWitness::zero(set, 1);
    for (const PreorderWitness* a : factors) {
        if (a->empty()) continue;
        PreorderWitness next = witness_add(witness_add(acc, *a), preorder_mul(acc, *a));
        acc = next.term_count() > 64 ? slim_witness(next) : next;
    }
    return acc;
}

inline MatPoly row_selector(int n, int nvars) {  // 1 x n, picks coordinate 0
    MatPoly e(1, n, nvars);
    e.at(0, 0) = Poly::constant(nvars, Rat(1));
    return e;
}

inline MatPoly tail_selector(int n, int nvars) {  // (n-1) x n, picks coordinates 1..n-1
    MatPoly e(n - 1, n, nvars);
    for (int i = 0; i < n - 1; ++i) e.at(i, i + 1) = Poly::constant(nvars, Rat(1));
    return e;
}

/// Embed an m x m expansion into the trailing block of an n x n matrix,
/// with `top` in the leading corner.
inline MatPoly diag_embed(const Poly& top, const MatPoly& tail) {
    const int n = tail.rows() + 1;
    MatPoly d(n, n, top.nvars());
    d.at(0, 0) = top;
    for (int i = 0; i < tail.rows(); ++i)
        for (int j = 0; j < tail.cols(); ++j) d.at(i + 1, j + 1) = tail.at(i, j);
    return d;
}

}  // namespace detail

/// One inductive step: combine a scalar certificate for the pivot and a
/// matrix certificate for scaled_schur into a certificate for the permuted F.
/// The multiplier comes out as v(1+v)(1+s)(1+s1)(1+u1)^3 - 1 with
/// v = 1 + (lemma bound constant for the rescaled border).
///
/// Intermediate identities are checked on closed-form expansions as the
/// assembly proceeds; the returned certificate is verified exactly against
/// the permuted matrix before returning.
inline MatrixCertificate lift_step(const SchurSplit& split, const ScalarCertificate& pivot_cert,
                                   const MatrixCertificate& inner_cert, const ConstraintSet& set,
                                   bool want_trace = false) {
    const int nvars = set.nvars();
    const int n = split.trailing.rows() + 1;
    const int m = n - 1;
    const Poly one = Poly::constant(nvars, Rat(1));
    const MatPoly eye_m = MatPoly::identity(m, nvars);
    MatrixCertificate out;
    auto trace = [&](const char* step, const char* tag, long deg, size_t terms) {
        if (want_trace) out.trace.push_back({step, tag, deg, terms});
    };

    // exact inputs
    if (!verify_scalar_cert(split.pivot, pivot_cert)) throw AssemblyError("pivot-scalar-identity");
    if (!verify_matrix_cert(split.scaled_schur, inner_cert, set))
        throw AssemblyError("inner-certificate-identity");

    const PreorderWitness& s1 = pivot_cert.t;
    const PreorderWitness& u1 = pivot_cert.u;
    const PreorderWitness& s = inner_cert.multiplier;
    const PreorderWitness& bigU = inner_cert.residue;
    const Poly s1_p = s1.expand().at(0, 0);
    const Poly u1_p = u1.expand().at(0, 0);
    const Poly s_p = s.expand().at(0, 0);
    // forced by the verified inner identity (1+s) * scaled_schur = I + U
    const MatPoly bigU_p = split.scaled_schur.scale(one + s_p) - eye_m;
    trace("inputs", "pivot-and-inner-certs", split.pivot.degree(),
          s1.term_count() + u1.term_count() + s.term_count() + bigU.term_count());

    const PreorderWitness two = PreorderWitness::scalar_constant(set, Rat(2));
    // q expands to (1+u1)^2 - 1
    PreorderWitness q = preorder_mul(u1, witness_add(two, u1));
    if (q.term_count() > 64) q = slim_witness(q);
    const Poly q_p = (one + u1_p) * (one + u1_p) - one;
    // W11 expands to (1+s)(1+u1)^2 - 1, W22 to (1+s1)^2 (I + U) - I
    PreorderWitness w11 = witness_add(witness_add(q, s), preorder_mul(s, q));
    if (w11.term_count() > 64) w11 = slim_witness(w11);
    const Poly w11_p = (one + s_p) * (one + q_p) - one;
    PreorderWitness s1_shift = preorder_mul(s1, witness_add(two, s1));
    PreorderWitness w22 =
        witness_add(preorder_mul(s1_shift, PreorderWitness::identity(set, m)),
                    preorder_mul(PreorderWitness::scalar_square(set, one + s1_p), bigU));
    const MatPoly w22_p =
        (eye_m + bigU_p).scale((one + s1_p) * (one + s1_p)) - eye_m;
    if (w11.expand().at(0, 0) != w11_p) throw AssemblyError("top-diagonal-identity");
    if (w22.expand() != w22_p) throw AssemblyError("trailing-diagonal-identity");
    PreorderWitness w = witness_add(witness_congruence(detail::row_selector(n, nvars), w11),
                                    witness_congruence(detail::tail_selector(n, nvars), w22));
    const MatPoly w_p = detail::diag_embed(w11_p, w22_p);
    trace("diagonal-stack", "identity-plus-preorder", w_p.degree(), w.term_count());

    // congruence factor M = [[1+u1, (1+s1) border],[0, (1+u1) I]]
    MatPoly mfac(n, n, nvars);
    mfac.at(0, 0) = one + u1_p;
    for (int j = 0; j < m; ++j) mfac.at(0, j + 1) = split.border.at(0, j) * (one + s1_p);
    for (int i = 0; i < m; ++i) mfac.at(i + 1, i + 1) = one + u1_p;
    const MatPoly wprime_p = mfac.transpose() * w_p * mfac;
    {
        // (1+s)(1+s1)(1+u1)^3 F_perm = M^T M + W'
        const Poly mult = (one + s_p) * (one + s1_p) * (one + u1_p).pow(3);
        if (split.permuted_matrix().scale(mult) != gram_square(mfac) + wprime_p)
            throw AssemblyError("congruence-identity");
    }
    PreorderWitness wprime = slim_witness(witness_congruence(mfac, w), &wprime_p);
    trace("congruence", "triangular-factor-absorbed", wprime_p.degree(), wprime.term_count());

    // norm bound for the rescaled border
    const MatPoly gtilde = split.border.scale(one + s1_p);
    BoundWitness bound = lemma_bound(gtilde);
    const Poly c_p = bound.bound_poly();
    const MatPoly sigma_p = eye_m.scale(c_p) - gram_square(gtilde);
    if (bound.sos.expand() != sigma_p) throw AssemblyError("border-norm-bound");
    PreorderWitness c_w =
        PreorderWitness::sos_only(set, p_power_sos(nvars, bound.l).scale_weight(bound.k));
    PreorderWitness sigma = PreorderWitness::sos_only(set, bound.sos);
    trace("border-bound", "sos-norm-bound", c_p.degree(), sigma.term_count());

    const Poly v_p = one + c_p;
    PreorderWitness v_w = one_plus(c_w);
    PreorderWitness vshift = witness_add(two, c_w);  // 1 + v
    PreorderWitness v_times_1v = preorder_mul(v_w, one_plus(v_w));
    if (v_times_1v.term_count() > 64) v_times_1v = slim_witness(v_times_1v);
    const Poly v1v_p = v_p * (one + v_p);
    PreorderWitness wsecond = preorder_mul(v_times_1v, wprime);  // never expanded

    // residue: top diagonal v(1+u1)^2 - 1, trailing diagonal
    // (v(1+u1)^2 + v^2((1+u1)^2-1)) I + (1+v) sigma, the rank-one square, W''
    PreorderWitness sq_1u1 = PreorderWitness::scalar_square(set, one + u1_p);
    PreorderWitness top = witness_add(preorder_mul(c_w, sq_1u1), q);
    const Poly top_p = v_p * (one + q_p) - one;
    PreorderWitness coeff = witness_add(preorder_mul(v_w, sq_1u1),
                                        preorder_mul(PreorderWitness::scalar_square(set, v_p), q));
    const Poly coeff_p = v_p * (one + q_p) + v_p * v_p * q_p;
    PreorderWitness low = witness_add(preorder_mul(coeff, PreorderWitness::identity(set, m)),
                                      preorder_mul(vshift, sigma));
    const MatPoly low_p = eye_m.scale(coeff_p) + sigma_p.scale(one + v_p);
    MatPoly rank_one(1, n, nvars);
    rank_one.at(0, 0) = v_p * (one + u1_p);
    for (int j = 0; j < m; ++j) rank_one.at(0, j + 1) = gtilde.at(0, j) * (one + v_p);
    PreorderWitness residue = witness_add(
        witness_add(witness_congruence(detail::row_selector(n, nvars), top),
                    witness_congruence(detail::tail_selector(n, nvars), low)),
        witness_add(PreorderWitness::sos_only(set, SosMatrixWitness::single(rank_one)), wsecond));
    const MatPoly residue_p = detail::diag_embed(top_p, low_p) + gram_square(rank_one) +
                              wprime_p.scale(v1v_p);

    // multiplier (1+t) = v(1+v)(1+s)(1+s1)(1+u1)^3
    const Poly mult_p = v1v_p * (one + s_p) * (one + s1_p) * (one + u1_p).pow(3);
    if (residue_p != split.permuted_matrix().scale(mult_p) - MatPoly::identity(n, nvars))
        throw AssemblyError("residue-assembly");
    residue = slim_witness(residue, &residue_p);
    trace("residue", "diagonal-plus-rank-one", residue_p.degree(), residue.term_count());

    PreorderWitness t =
        detail::scalar_one_plus_product({&c_w, &v_w, &s, &s1, &u1, &u1, &u1}, set);
    trace("multiplier", "product-of-shifted-preorder-units", mult_p.degree(), t.term_count());

    out.multiplier = std::move(t);
    out.residue = std::move(residue);

    // final exact check against the permuted matrix
    if (!verify_matrix_cert(split.permuted_matrix(), out, set)) throw AssemblyError("final-identity");
    return out;
}

struct MatrixCertifyResult {
    std::optional<MatrixCertificate> cert;
    std::string diagnostics;
    bool ok() const { return cert.has_value(); }
};

/// Induction on the matrix size: split at a pivot, certify the pivot entry
/// (scalar) and the scaled Schur complement (recursion), lift, undo the
/// pivot permutation by congruence. Every certificate is verified exactly
/// before it is returned.
inline MatrixCertifyResult certify_matrix(const MatPoly& f, const ConstraintSet& set,
                                          const ProviderConfig& cfg = {}, bool want_trace = false) {
    MatrixCertifyResult res;
    if (!f.is_square() || !f.is_symmetric()) {
        res.diagnostics = "target matrix is not symmetric";
        return res;
    }
    const int n = f.rows();
    const int nvars = f.nvars();
    if (n == 1) {
        ScalarCertifyResult sc = certify_scalar(f.at(0, 0), set, cfg);
        if (!sc.ok()) {
            res.diagnostics = "scalar target: " + sc.diagnostics;
            return res;
        }
        MatrixCertificate cert;
        cert.multiplier = sc.cert->t;
        cert.residue = sc.cert->u;
        if (!verify_matrix_cert(f, cert, set))
            throw std::logic_error("certify_matrix: scalar certificate failed matrix verification");
        res.cert = std::move(cert);
        return res;
    }
    if (f.is_identity()) {
        MatrixCertificate cert;
        cert.multiplier = PreorderWitness::zero(set, 1);
        cert.residue = PreorderWitness::zero(set, n);
        res.cert = std::move(cert);
        return res;
    }

    SchurSplit split = schur_split(f, cfg.pivot);
    MatrixCertifyResult inner = certify_matrix(split.scaled_schur, set, cfg, want_trace);
    if (!inner.ok()) {
        res.diagnostics =
            "scaled Schur complement (size " + std::to_string(n - 1) + "): " + inner.diagnostics;
        return res;
    }
    ScalarCertifyResult pivot_cert = certify_scalar(split.pivot, set, cfg);
    if (!pivot_cert.ok()) {
        res.diagnostics = "pivot entry (original index " + std::to_string(split.perm[0]) +
                          "): " + pivot_cert.diagnostics;
        return res;
    }
    MatrixCertificate lifted = lift_step(split, *pivot_cert.cert, *inner.cert, set, want_trace);
    if (want_trace && !inner.cert->trace.empty())
        lifted.trace.insert(lifted.trace.begin(), inner.cert->trace.begin(),
                            inner.cert->trace.end());

    // undo the pivot permutation: F = P F_perm P^T, so V = P V_perm P^T
    bool identity_perm = true;
    for (int i = 0; i < n; ++i)
        identity_perm = identity_perm && split.perm[static_cast<size_t>(i)] == i;
    if (!identity_perm) {
        MatPoly pt(n, n, nvars);  // (P^T)[i][j] = [perm[i] == j]
        for (int i = 0; i < n; ++i)
            pt.at(i, split.perm[static_cast<size_t>(i)]) = Poly::constant(nvars, Rat(1));
        lifted.residue = witness_congruence(pt, lifted.residue);
    }
    if (!verify_matrix_cert(f, lifted, set))
        throw std::logic_error("certify_matrix: assembled certificate failed final verification");
    res.cert = std::move(lifted);
    return res;
}

/// Numeric spot check of the positivity consequence at sampled points of the
/// constraint set: lambda_min(F(x)) >= 1/(1 + t(x)) - tol.
struct SoundnessReport {
    int requested = 0;
    int accepted = 0;
    int passed = 0;
    double worst_margin = 0.0;
    bool all_passed() const { return accepted == passed; }
};

inline SoundnessReport soundness_sample(const MatPoly& f, const MatrixCertificate& cert,
                                        const ConstraintSet& set, int num_points, const Rat& box_lo,
                                        const Rat& box_hi, uint64_t seed = 0, double tol = 1e-6) {
    SoundnessReport rep;
    rep.requested = num_points;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> grid(0, 4096);
    const Poly t_p = cert.multiplier.expand().at(0, 0);
    const int nvars = f.nvars();
    const Rat width = box_hi - box_lo;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    const long max_draws = static_cast<long>(num_points) * 64;
    for (long draw = 0; draw < max_draws && rep.accepted < num_points; ++draw) {
        RatPoint x;
        x.coords.reserve(static_cast<size_t>(nvars));
        for (int i = 0; i < nvars; ++i)
            x.coords.push_back(box_lo + width * make_rat(grid(rng), 4096));
        if (!set.contains(x)) continue;
        ++rep.accepted;
        const RatMat fx = f.eval(x);
        Eigen::MatrixXd fd(fx.rows(), fx.cols());
        for (int i = 0; i < fx.rows(); ++i)
            for (int j = 0; j < fx.cols(); ++j) fd(i, j) = to_double(fx.at(i, j));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fd);
        const double lmin = es.eigenvalues().minCoeff();
        const double bound = 1.0 / (1.0 + to_double(t_p.eval(x.coords)));
        const double margin = lmin - bound;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin >= -tol) ++rep.passed;
    }
    if (rep.accepted == 0) rep.worst_margin = 0.0;
    return rep;
}

}  // namespace psatz

#endif
