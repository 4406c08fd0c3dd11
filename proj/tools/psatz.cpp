// psatz command line: certify, verify, and inspect positivity certificates
// for scalar and matrix polynomials over scalar constraint sets.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "psatz/psatz.hpp"

namespace {

using namespace psatz;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitInputError = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
}

struct CommonOpts {
    std::string problem_path;
    std::string out_path;
    std::string cert_path;
    std::string strategy = "auto";
    std::string mode = "preorder";
    long degree_bound = 8;
    double tol = 1e-9;
    int max_iters = 3000;
    uint64_t seed = 0;
    int sample_points = 0;
    std::vector<std::string> box{"-2", "2"};
    bool trace = false;
};

ScalarStrategy parse_strategy(const std::string& s) {
    if (s == "auto") return ScalarStrategy::Auto;
    if (s == "trivial") return ScalarStrategy::Trivial;
    if (s == "file") return ScalarStrategy::File;
    if (s == "numeric") return ScalarStrategy::Numeric;
    throw std::runtime_error("unknown strategy '" + s + "'");
}

std::optional<ScalarCertificate> load_scalar_cert(const std::string& path,
                                                  const ConstraintSet& set) {
    try {
        CertificateFile cf = parse_certificate(read_file(path));
        if (cf.kind != CertificateKind::ScalarKrivine) return std::nullopt;
        if (cf.constraint_set() != set) return std::nullopt;
        const PreorderWitness* t = cf.find_witness("t");
        const PreorderWitness* u = cf.find_witness("u");
        if (!t || !u) return std::nullopt;
        return ScalarCertificate{*t, *u};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

ProviderConfig provider_config(const CommonOpts& o) {
    ProviderConfig cfg;
    cfg.strategy = parse_strategy(o.strategy);
    cfg.file_path = o.cert_path;
    cfg.loader = load_scalar_cert;
    cfg.search.degree_cap = o.degree_bound;
    cfg.search.solve.tol = o.tol;
    cfg.search.solve.max_iters = o.max_iters;
    return cfg;
}

CertificateFile base_cert(const ProblemFile& pf, CertificateKind kind, const CommonOpts& o) {
    CertificateFile cf;
    cf.kind = kind;
    cf.nvars = pf.nvars;
    cf.generators = pf.constraints;
    cf.meta.emplace_back("version", kVersion);
    cf.meta.emplace_back("seed", std::to_string(o.seed));
    cf.meta.emplace_back("degree-bound", std::to_string(o.degree_bound));
    return cf;
}

void print_trace(const std::vector<TraceStep>& steps) {
    for (const TraceStep& st : steps)
        std::cerr << "trace step=" << st.step << " tag=" << st.tag << " degree=" << st.degree
                  << " terms=" << st.terms << "\n";
}

int cmd_certify(const CommonOpts& o, bool force_scalar) {
    ProblemFile pf = parse_problem(read_file(o.problem_path));
    ConstraintSet set = pf.constraint_set();
    ProviderConfig cfg = provider_config(o);
    if (force_scalar && pf.has_matrix_target()) {
        std::cerr << "error: scalar-certify needs a poly target\n";
        return kExitInputError;
    }
    if (!pf.has_matrix_target()) {
        ScalarCertifyResult r = certify_scalar(*pf.poly_target, set, cfg);
        if (!r.ok()) {
            std::cerr << "inconclusive: " << r.diagnostics << "\n";
            return kExitInconclusive;
        }
        CertificateFile cf = base_cert(pf, CertificateKind::ScalarKrivine, o);
        cf.size = 1;
        cf.meta.emplace_back("strategy", o.strategy);
        cf.witnesses.emplace_back("t", r.cert->t);
        cf.witnesses.emplace_back("u", r.cert->u);
        emit(serialize_certificate(cf), o.out_path);
        std::cerr << "certified: multiplier degree "
                  << std::max<long>(0, r.cert->t.expand().at(0, 0).degree()) << ", "
                  << r.cert->u.summary() << "\n";
        return kExitOk;
    }
    MatrixCertifyResult r = certify_matrix(*pf.matrix_target, set, cfg, o.trace);
    if (!r.ok()) {
        std::cerr << "inconclusive: " << r.diagnostics << "\n";
        return kExitInconclusive;
    }
    if (o.trace) print_trace(r.cert->trace);
    CertificateFile cf = base_cert(pf, CertificateKind::MatrixKrivine, o);
    cf.size = pf.matrix_target->rows();
    cf.meta.emplace_back("strategy", o.strategy);
    cf.witnesses.emplace_back("t", r.cert->multiplier);
    cf.witnesses.emplace_back("V", r.cert->residue);
    emit(serialize_certificate(cf), o.out_path);
    std::cerr << "certified: multiplier degree "
              << std::max<long>(0, r.cert->multiplier.expand().at(0, 0).degree()) << ", "
              << r.cert->residue.summary() << "\n";
    return kExitOk;
}

int cmd_eps_certify(const CommonOpts& o) {
    ProblemFile pf = parse_problem(read_file(o.problem_path));
    ConstraintSet set = pf.constraint_set();
    const MatPoly target = pf.target_as_matrix();
    GramMode mode;
    CertificateKind kind;
    if (o.mode == "preorder") {
        mode = GramMode::Preorder;
        kind = CertificateKind::EpsPreorder;
    } else if (o.mode == "qmodule") {
        mode = GramMode::QuadraticModule;
        kind = CertificateKind::EpsQModule;
    } else {
        std::cerr << "error: unknown mode '" << o.mode << "'\n";
        return kExitInputError;
    }
    SearchConfig cfg;
    cfg.degree_cap = o.degree_bound;
    cfg.solve.tol = o.tol;
    cfg.solve.max_iters = o.max_iters;
    EpsSearchResult r = matrix_sos_search(target, set, mode, cfg);
    if (!r.ok()) {
        std::cerr << "inconclusive: " << r.diagnostics << "\n";
        return kExitInconclusive;
    }
    CertificateFile cf = base_cert(pf, kind, o);
    cf.size = target.rows();
    cf.eps = r.cert->eps;
    cf.meta.emplace_back("mode", o.mode);
    cf.witnesses.emplace_back("V", r.cert->witness);
    emit(serialize_certificate(cf), o.out_path);
    std::cerr << "certified: epsilon " << rat_str(r.cert->eps) << " at degree bound "
              << r.cert->degree_bound << "\n";
    return kExitOk;
}

int cmd_verify(const CommonOpts& o) {
    ProblemFile pf = parse_problem(read_file(o.problem_path));
    ConstraintSet set = pf.constraint_set();
    CertificateFile cf = parse_certificate(read_file(o.cert_path));
    if (cf.nvars != pf.nvars || cf.constraint_set() != set) {
        std::cerr << "invalid: certificate constraint data does not match the problem\n";
        return kExitInvalid;
    }
    bool ok = false;
    std::optional<MatrixCertificate> sampling_cert;
    MatPoly target = pf.target_as_matrix();
    switch (cf.kind) {
        case CertificateKind::ScalarKrivine: {
            const PreorderWitness* t = cf.find_witness("t");
            const PreorderWitness* u = cf.find_witness("u");
            if (t && u && !pf.has_matrix_target()) {
                ok = verify_scalar_cert(*pf.poly_target, ScalarCertificate{*t, *u});
                if (ok) sampling_cert = MatrixCertificate{*t, *u, {}};
            }
            break;
        }
        case CertificateKind::MatrixKrivine: {
            const PreorderWitness* t = cf.find_witness("t");
            const PreorderWitness* v = cf.find_witness("V");
            if (t && v) {
                MatrixCertificate cert{*t, *v, {}};
                ok = verify_matrix_cert(target, cert, set);
                if (ok) sampling_cert = std::move(cert);
            }
            break;
        }
        case CertificateKind::EpsPreorder:
        case CertificateKind::EpsQModule: {
            const PreorderWitness* v = cf.find_witness("V");
            if (v && cf.eps && *cf.eps > 0) {
                const MatPoly shifted =
                    target - MatPoly::identity(target.rows(), target.nvars()).scale(*cf.eps);
                ok = verify_membership(shifted, *v);
                if (cf.kind == CertificateKind::EpsQModule) ok = ok && v->is_quadratic_module();
            }
            break;
        }
    }
    if (!ok) {
        std::cout << "INVALID\n";
        return kExitInvalid;
    }
    if (o.sample_points > 0 && sampling_cert) {
        SoundnessReport rep =
            soundness_sample(target, *sampling_cert, set, o.sample_points, parse_rat(o.box[0]),
                             parse_rat(o.box[1]), o.seed, o.tol);
        std::cerr << "sampling: requested " << rep.requested << ", accepted " << rep.accepted
                  << ", passed " << rep.passed << "\n";
        if (rep.accepted == 0)
            std::cerr << "sampling: box misses the constraint set\n";
        else if (!rep.all_passed()) {
            std::cout << "INVALID\n";
            return kExitInvalid;
        }
    }
    std::cout << "VERIFIED\n";
    return kExitOk;
}

int cmd_lemma_bound(const CommonOpts& o) {
    ProblemFile pf = parse_problem(read_file(o.problem_path), /*require_symmetric_target=*/false);
    MatPoly b = pf.target_as_matrix();
    BoundWitness w = lemma_bound(b);
    std::ostringstream os;
    os << "k " << rat_str_explicit(w.k) << "\n";
    os << "l " << w.l << "\n";
    PreorderWitness sos =
        PreorderWitness::sos_only(ConstraintSet(pf.nvars, {}), w.sos);
    serialize_witness(os, "sigma", sos, default_var_names(pf.nvars));
    emit(os.str(), o.out_path);
    std::cerr << "bound: k*p^l with k = " << rat_str(w.k) << ", l = " << w.l << ", "
              << w.sos.term_count() << " squares\n";
    return kExitOk;
}

int cmd_eval(const CommonOpts& o, const std::string& point_text) {
    ProblemFile pf = parse_problem(read_file(o.problem_path));
    RatPoint x;
    std::stringstream ss(point_text);
    std::string coord;
    while (std::getline(ss, coord, ',')) x.coords.push_back(parse_rat(coord));
    if (x.dim() != pf.nvars) {
        std::cerr << "error: point has " << x.dim() << " coordinates, problem has " << pf.nvars
                  << " variables\n";
        return kExitInputError;
    }
    std::ostringstream os;
    if (pf.has_matrix_target()) {
        RatMat m = pf.matrix_target->eval(x);
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) {
                if (j) os << " ";
                os << rat_str(m.at(i, j));
            }
            os << "\n";
        }
    } else {
        os << "value " << rat_str(pf.poly_target->eval(x.coords)) << "\n";
    }
    emit(os.str(), o.out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact positivity certificates for matrix polynomials"};
    app.require_subcommand(1);
    CommonOpts o;
    std::string point_text;

    auto add_common = [&](CLI::App* sub, bool needs_problem = true) {
        if (needs_problem) sub->add_option("problem", o.problem_path, "problem file")->required();
        sub->add_option("--out", o.out_path, "write machine output to this file");
        sub->add_option("--degree-bound", o.degree_bound, "degree cap for numeric searches");
        sub->add_option("--tol", o.tol, "numeric solver tolerance");
        sub->add_option("--max-iters", o.max_iters, "numeric solver iteration cap");
        sub->add_option("--seed", o.seed, "seed for all randomized steps");
    };

    CLI::App* certify = app.add_subcommand("certify", "construct a Krivine-shape certificate");
    add_common(certify);
    certify->add_option("--strategy", o.strategy, "scalar strategy: auto|trivial|file|numeric");
    certify->add_option("--cert", o.cert_path, "scalar certificate file for the file strategy");
    certify->add_flag("--trace", o.trace, "print assembly steps to stderr");

    CLI::App* scalar_certify =
        app.add_subcommand("scalar-certify", "certificate for a scalar target");
    add_common(scalar_certify);
    scalar_certify->add_option("--strategy", o.strategy, "auto|trivial|file|numeric");
    scalar_certify->add_option("--cert", o.cert_path, "scalar certificate for the file strategy");

    CLI::App* eps = app.add_subcommand("eps-certify", "search F - eps*I in the chosen cone");
    add_common(eps);
    eps->add_option("--mode", o.mode, "preorder|qmodule");

    CLI::App* verify = app.add_subcommand("verify", "check a certificate exactly");
    add_common(verify);
    verify->add_option("--cert", o.cert_path, "certificate file")->required();
    verify->add_option("--sample-points", o.sample_points, "extra numeric spot checks");
    verify->add_option("--box", o.box, "sampling box LO HI")->expected(2);

    CLI::App* lemma = app.add_subcommand("lemma-bound", "norm bound k*p^l for a matrix target");
    add_common(lemma);

    CLI::App* eval = app.add_subcommand("eval", "evaluate the target at a rational point");
    add_common(eval);
    eval->add_option("--point", point_text, "comma-separated rational coordinates")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return cmd_certify(o, false);
        if (scalar_certify->parsed()) return cmd_certify(o, true);
        if (eps->parsed()) return cmd_eps_certify(o);
        if (verify->parsed()) return cmd_verify(o);
        if (lemma->parsed()) return cmd_lemma_bound(o);
        if (eval->parsed()) return cmd_eval(o, point_text);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
