#ifndef PSATZ_CERTIFICATE_IO_HPP
#define PSATZ_CERTIFICATE_IO_HPP

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psatz/problem.hpp"
#include "psatz/witness.hpp"

namespace psatz {

inline const char* kCertHeader = "psatz-cert v1";

enum class CertificateKind { ScalarKrivine, MatrixKrivine, EpsPreorder, EpsQModule };

inline std::string kind_name(CertificateKind k) {
    switch (k) {
        case CertificateKind::ScalarKrivine: return "scalar-krivine";
        case CertificateKind::MatrixKrivine: return "matrix-krivine";
        case CertificateKind::EpsPreorder: return "eps-preorder";
        case CertificateKind::EpsQModule: return "eps-qmodule";
    }
    return "?";
}

inline CertificateKind kind_from_name(const std::string& s) {
    if (s == "scalar-krivine") return CertificateKind::ScalarKrivine;
    if (s == "matrix-krivine") return CertificateKind::MatrixKrivine;
    if (s == "eps-preorder") return CertificateKind::EpsPreorder;
    if (s == "eps-qmodule") return CertificateKind::EpsQModule;
    throw std::runtime_error("unknown certificate kind '" + s + "'");
}

/// On-disk certificate: the constraint data, one or two witnesses, and
/// plain-text metadata. All numbers are exact rationals.
struct CertificateFile {
    CertificateKind kind = CertificateKind::ScalarKrivine;
    int nvars = 0;
    std::vector<Poly> generators;
    int size = 1;  // matrix dimension n of the certified target
    std::optional<Rat> eps;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::pair<std::string, PreorderWitness>> witnesses;

    ConstraintSet constraint_set() const { return ConstraintSet(nvars, generators); }

    const PreorderWitness* find_witness(const std::string& name) const {
        for (const auto& [n, w] : witnesses)
            if (n == name) return &w;
        return nullptr;
    }
};

inline void serialize_witness(std::ostream& os, const std::string& name,
                              const PreorderWitness& w,
                              const std::vector<std::string>& names) {
    os << "witness " << name << "\n";
    os << "n " << w.size() << "\n";
    os << "blocks " << w.blocks().size() << "\n";
    for (const auto& [e, blk] : w.blocks()) {
        os << "block " << e.str() << " " << blk.term_count() << "\n";
        for (const SosTerm& t : blk.terms()) {
            os << "term " << rat_str_explicit(t.weight) << " " << t.mat.rows() << " "
               << t.mat.cols() << "\n";
            for (int i = 0; i < t.mat.rows(); ++i) {
                for (int j = 0; j < t.mat.cols(); ++j) {
                    if (j) os << " ";
                    os << t.mat.at(i, j).str(names);
                }
                os << "\n";
            }
        }
    }
    os << "end witness\n";
}

inline std::string serialize_certificate(const CertificateFile& cert) {
    const std::vector<std::string> names = default_var_names(cert.nvars);
    std::ostringstream os;
    os << kCertHeader << "\n";
    os << "kind " << kind_name(cert.kind) << "\n";
    os << "vars " << cert.nvars << "\n";
    os << "size " << cert.size << "\n";
    os << "generators " << cert.generators.size() << "\n";
    for (const Poly& g : cert.generators) os << "g " << g.str(names) << "\n";
    if (cert.eps) os << "epsilon " << rat_str_explicit(*cert.eps) << "\n";
    for (const auto& [k, v] : cert.meta) os << "meta " << k << " " << v << "\n";
    for (const auto& [name, w] : cert.witnesses) serialize_witness(os, name, w, names);
    os << "end\n";
    return os.str();
}

namespace detail {

class LineReader {
public:
    explicit LineReader(const std::string& text) : in_(text) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            return true;
        }
        return false;
    }

    int lineno() const { return lineno_; }

private:
    std::istringstream in_;
    int lineno_ = 0;
};

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream is(s);
    std::string w;
    while (is >> w) parts.push_back(w);
    return parts;
}

}  // namespace detail

inline CertificateFile parse_certificate(const std::string& text) {
    detail::LineReader rd(text);
    std::string line;
    auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError(msg, rd.lineno(), 1);
    };
    if (!rd.next(line) || line != kCertHeader) throw fail("missing certificate header");

    CertificateFile cert;
    std::vector<std::string> names;
    bool have_kind = false, have_vars = false;
    long gens_expected = -1;

    while (rd.next(line)) {
        auto parts = detail::split_ws(line);
        const std::string& key = parts[0];
        if (key == "end" && parts.size() == 1) {
            if (!have_kind || !have_vars) throw fail("incomplete certificate");
            return cert;
        }
        if (key == "kind" && parts.size() == 2) {
            cert.kind = kind_from_name(parts[1]);
            have_kind = true;
        } else if (key == "vars" && parts.size() == 2) {
            cert.nvars = std::stoi(parts[1]);
            names = default_var_names(cert.nvars);
            have_vars = true;
        } else if (key == "size" && parts.size() == 2) {
            cert.size = std::stoi(parts[1]);
        } else if (key == "generators" && parts.size() == 2) {
            gens_expected = std::stol(parts[1]);
        } else if (key == "g") {
            if (!have_vars) throw fail("'vars' must precede generators");
            cert.generators.push_back(parse_poly_expr(line.substr(2), cert.nvars, names));
        } else if (key == "epsilon" && parts.size() == 2) {
            cert.eps = parse_rat(parts[1]);
        } else if (key == "meta" && parts.size() >= 2) {
            std::string value;
            for (size_t i = 2; i < parts.size(); ++i) {
                if (i > 2) value += " ";
                value += parts[i];
            }
            cert.meta.emplace_back(parts[1], value);
        } else if (key == "witness" && parts.size() == 2) {
            if (!have_vars) throw fail("'vars' must precede witnesses");
            if (gens_expected >= 0 && static_cast<long>(cert.generators.size()) != gens_expected)
                throw fail("generator count mismatch");
            const std::string wname = parts[1];
            ConstraintSet set(cert.nvars, cert.generators);
            if (!rd.next(line)) throw fail("truncated witness");
            auto np = detail::split_ws(line);
            if (np.size() != 2 || np[0] != "n") throw fail("expected witness size line");
            const int wn = std::stoi(np[1]);
            PreorderWitness w(set, wn);
            if (!rd.next(line)) throw fail("truncated witness");
            auto bp = detail::split_ws(line);
            if (bp.size() != 2 || bp[0] != "blocks") throw fail("expected block count line");
            const long nblocks = std::stol(bp[1]);
            for (long b = 0; b < nblocks; ++b) {
                if (!rd.next(line)) throw fail("truncated witness block");
                auto hp = detail::split_ws(line);
                if (hp.size() != 3 || hp[0] != "block") throw fail("expected block header");
                ExponentVector e(set.count());
                if (hp[1] != "-") {
                    if (static_cast<int>(hp[1].size()) != set.count())
                        throw fail("exponent vector length mismatch");
                    for (int i = 0; i < set.count(); ++i) {
                        const char c = hp[1][static_cast<size_t>(i)];
                        if (c != '0' && c != '1') throw fail("bad exponent bit");
                        e.bits[static_cast<size_t>(i)] = c == '1';
                    }
                } else if (set.count() != 0) {
                    throw fail("exponent vector length mismatch");
                }
                const long nterms = std::stol(hp[2]);
                SosMatrixWitness blk(wn, cert.nvars);
                for (long t = 0; t < nterms; ++t) {
                    if (!rd.next(line)) throw fail("truncated witness term");
                    auto tp = detail::split_ws(line);
                    if (tp.size() != 4 || tp[0] != "term") throw fail("expected term header");
                    const Rat weight = parse_rat(tp[1]);
                    const int rows = std::stoi(tp[2]);
                    const int cols = std::stoi(tp[3]);
                    if (cols != wn) throw fail("term column count must equal witness size");
                    MatPoly a(rows, cols, cert.nvars);
                    for (int i = 0; i < rows; ++i) {
                        if (!rd.next(line)) throw fail("truncated term matrix");
                        auto ep = detail::split_ws(line);
                        if (static_cast<int>(ep.size()) != cols)
                            throw fail("term row entry count mismatch");
                        for (int j = 0; j < cols; ++j)
                            a.at(i, j) = parse_poly_expr(ep[static_cast<size_t>(j)], cert.nvars, names);
                    }
                    blk.add_term(weight, a);
                }
                w.add_block(e, blk);
            }
            if (!rd.next(line) || line != "end witness") throw fail("missing 'end witness'");
            cert.witnesses.emplace_back(wname, std::move(w));
        } else {
            throw fail("unrecognized certificate line '" + line + "'");
        }
    }
    throw fail("missing final 'end'");
}

}  // namespace psatz

#endif
