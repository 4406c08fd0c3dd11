#ifndef PSATZ_SCALAR_CERT_HPP
#define PSATZ_SCALAR_CERT_HPP

#include <functional>
#include <optional>
#include <sstream>

#include "psatz/gram.hpp"

namespace psatz {

/// Krivine-shape certificate for a scalar polynomial f:
/// (1 + expand(t)) * f = 1 + expand(u) with t, u in the preordering.
struct ScalarCertificate {
    PreorderWitness t;
    PreorderWitness u;
};

inline bool verify_scalar_cert(const Poly& f, const ScalarCertificate& cert) {
    if (cert.t.size() != 1 || cert.u.size() != 1) return false;
    if (cert.t.constraints() != cert.u.constraints()) return false;
    if (!cert.t.well_formed() || !cert.u.well_formed()) return false;
    if (cert.t.nvars() != f.nvars()) return false;
    const Poly one = Poly::constant(f.nvars(), Rat(1));
    return (one + cert.t.expand().at(0, 0)) * f == one + cert.u.expand().at(0, 0);
}

/// Certificate for a positive constant: c >= 1 uses u = c - 1, otherwise
/// t = (1-c)/c makes (1+t)c = 1.
inline ScalarCertificate certify_constant(const Rat& c, const ConstraintSet& set) {
    if (c <= 0) throw std::invalid_argument("certify_constant: value must be positive");
    ScalarCertificate cert{PreorderWitness::zero(set, 1), PreorderWitness::zero(set, 1)};
    if (c >= 1)
        cert.u = PreorderWitness::scalar_constant(set, c - 1);
    else
        cert.t = PreorderWitness::scalar_constant(set, (1 - c) / c);
    return cert;
}

/// Convert the alternative shape t*f = 1+u into (1+t')f = 1+u' via
/// t' = t + u and u' = u + t*f^2.
inline ScalarCertificate normalize_from_tf(const PreorderWitness& t, const PreorderWitness& u,
                                           const Poly& f) {
    check_compatible(t, u);
    if (t.size() != 1) throw std::invalid_argument("normalize_from_tf: witnesses must be scalar");
    const Poly one = Poly::constant(f.nvars(), Rat(1));
    if (t.expand().at(0, 0) * f != one + u.expand().at(0, 0))
        throw std::invalid_argument("normalize_from_tf: input identity t*f = 1+u fails exactly");
    ScalarCertificate cert;
    cert.t = witness_add(t, u);
    cert.u = witness_add(u, preorder_mul(t, PreorderWitness::scalar_square(t.constraints(), f)));
    if (!verify_scalar_cert(f, cert))
        throw std::logic_error("normalize_from_tf: rearranged identity failed");
    return cert;
}

enum class ScalarStrategy { Auto, Trivial, File, Numeric };

inline std::string strategy_name(ScalarStrategy s) {
    switch (s) {
        case ScalarStrategy::Auto: return "auto";
        case ScalarStrategy::Trivial: return "trivial";
        case ScalarStrategy::File: return "file";
        case ScalarStrategy::Numeric: return "numeric";
    }
    return "?";
}

enum class PivotPolicy { MinDegree, FirstIndex };

/// Loader hook for the file strategy; wired up by the CLI layer.
using ScalarCertLoader =
    std::function<std::optional<ScalarCertificate>(const std::string& path, const ConstraintSet&)>;

struct ProviderConfig {
    ScalarStrategy strategy = ScalarStrategy::Auto;
    std::string file_path;
    ScalarCertLoader loader;
    SearchConfig search;
    PivotPolicy pivot = PivotPolicy::MinDegree;
};

struct ScalarCertifyResult {
    std::optional<ScalarCertificate> cert;
    std::string diagnostics;
    bool ok() const { return cert.has_value(); }
};

/// Joint Gram system for (1+t)f = 1+u, linear in (t, u):
/// t-blocks enter with multiplier ghat*f, u-blocks with -ghat, target 1-f.
inline GramSystem build_krivine_system(const Poly& f, const ConstraintSet& set, long t_degree) {
    GramSystem sys;
    sys.nvars = f.nvars();
    sys.n = 1;
    sys.target = MatPoly::scalar(Poly::constant(f.nvars(), Rat(1)) - f);
    sys.set = set;
    const long u_degree = t_degree + std::max<long>(f.degree(), 0);
    for (const ExponentVector& e : detail::mode_exponents(set, GramMode::Preorder)) {
        const Poly ghat = set.product(e);
        for (int group : {0, 1}) {
            const long bound = group == 0 ? u_degree : t_degree;
            if (bound - ghat.degree() < -1) continue;
            GramBlock b;
            b.group = group;
            b.exponent = e;
            b.ghat = ghat;
            b.equation_multiplier = group == 0 ? ghat * Rat(-1) : ghat * f;
            b.basis = monomials_up_to_degree(sys.nvars, (bound - ghat.degree() + 1) / 2);
            if (b.basis.empty()) continue;
            sys.blocks.push_back(std::move(b));
        }
    }
    if (sys.blocks.empty()) throw GramBuildError("no Gram blocks available");
    finalize_gram_system(sys);
    return sys;
}

/// Produce a Krivine certificate for f over the constraint set.
/// Strategy auto: constant shortcut, then the t = 0 pass (searching a direct
/// witness of f - 1), then a supplied file, then the joint numeric search.
/// Failure is inconclusive, never a disproof.
inline ScalarCertifyResult certify_scalar(const Poly& f, const ConstraintSet& set,
                                          const ProviderConfig& cfg = {}) {
    ScalarCertifyResult res;
    std::ostringstream diag;
    const auto strategy = cfg.strategy;
    const bool auto_mode = strategy == ScalarStrategy::Auto;
    const Poly one = Poly::constant(f.nvars(), Rat(1));

    if (f.is_constant()) {
        const Rat c = f.constant_term();
        if (c <= 0) {
            res.diagnostics = "constant target " + rat_str(c) + " is not strictly positive";
            return res;
        }
        res.cert = certify_constant(c, set);
        return res;
    }

    if (auto_mode || strategy == ScalarStrategy::Trivial) {
        std::string d;
        auto u = sos_membership_search(MatPoly::scalar(f - one), set, GramMode::Preorder, cfg.search, &d);
        if (u) {
            ScalarCertificate cert{PreorderWitness::zero(set, 1), std::move(*u)};
            if (verify_scalar_cert(f, cert)) {
                res.cert = std::move(cert);
                return res;
            }
            d += " (pass-through witness failed verification)";
        }
        diag << "trivial: no direct witness of f-1 (" << d << "); ";
        if (strategy == ScalarStrategy::Trivial) {
            res.diagnostics = diag.str();
            return res;
        }
    }

    if ((auto_mode && !cfg.file_path.empty()) || strategy == ScalarStrategy::File) {
        if (!cfg.loader) {
            diag << "file: no certificate loader configured; ";
        } else {
            auto cand = cfg.loader(cfg.file_path, set);
            if (cand && verify_scalar_cert(f, *cand)) {
                res.cert = std::move(*cand);
                return res;
            }
            diag << "file: certificate at '" << cfg.file_path << "' missing or invalid; ";
        }
        if (strategy == ScalarStrategy::File) {
            res.diagnostics = diag.str();
            return res;
        }
    }

    if (auto_mode || strategy == ScalarStrategy::Numeric) {
        for (long td = 0; td <= cfg.search.degree_cap; td += 2) {
            GramSystem sys;
            try {
                sys = build_krivine_system(f, set, td);
            } catch (const GramBuildError& e) {
                diag << "numeric degree " << td << ": " << e.what() << "; ";
                continue;
            }
            FloatSolution sol = solve_feasibility(sys, cfg.search.solve);
            if (sol.nan_failure) {
                diag << "numeric degree " << td << ": numeric breakdown (NaN); ";
                continue;
            }
            if (!worth_rationalizing(sol, cfg.search.solve)) {
                diag << "numeric degree " << td << ": residual " << sol.residual << "; ";
                continue;
            }
            RationalizeResult rat = rationalize(sol, sys, cfg.search.denom_ladder);
            if (!rat.ok()) {
                diag << "numeric degree " << td << ": " << rat.diagnostics << "; ";
                continue;
            }
            ScalarCertificate cert{witness_from_blocks(sys, *rat.blocks, 1),
                                   witness_from_blocks(sys, *rat.blocks, 0)};
            if (!verify_scalar_cert(f, cert))
                throw std::logic_error("rationalized Krivine certificate failed exact check");
            res.cert = std::move(cert);
            return res;
        }
        diag << "numeric: degree schedule exhausted; ";
    }

    res.diagnostics = diag.str();
    return res;
}

}  // namespace psatz

#endif
