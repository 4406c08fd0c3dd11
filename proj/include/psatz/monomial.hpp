#ifndef PSATZ_MONOMIAL_HPP
#define PSATZ_MONOMIAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "psatz/rational.hpp"

namespace psatz {

/// Power product of the ambient variables; exponent vector of fixed length.
struct Monomial {
    std::vector<uint32_t> exps;

    Monomial() = default;
    explicit Monomial(int nvars) : exps(static_cast<size_t>(nvars), 0) {}
    explicit Monomial(std::vector<uint32_t> e) : exps(std::move(e)) {}

    int nvars() const { return static_cast<int>(exps.size()); }

    long degree() const {
        long d = 0;
        for (uint32_t e : exps) d += e;
        return d;
    }

    bool is_one() const {
        for (uint32_t e : exps)
            if (e != 0) return false;
        return true;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r = *this;
        for (size_t i = 0; i < exps.size(); ++i) r.exps[i] += o.exps[i];
        return r;
    }

    Monomial squared() const {
        Monomial r = *this;
        for (auto& e : r.exps) e *= 2;
        return r;
    }

    bool operator==(const Monomial& o) const { return exps == o.exps; }
    bool operator!=(const Monomial& o) const { return !(*this == o); }

    Rat eval(const std::vector<Rat>& point) const {
        Rat v(1);
        for (size_t i = 0; i < exps.size(); ++i) {
            for (uint32_t k = 0; k < exps[i]; ++k) v *= point[i];
        }
        return v;
    }

    std::string str(const std::vector<std::string>& names) const {
        std::string s;
        for (size_t i = 0; i < exps.size(); ++i) {
            if (exps[i] == 0) continue;
            if (!s.empty()) s += "*";
            s += names[i];
            if (exps[i] > 1) s += "^" + std::to_string(exps[i]);
        }
        return s;
    }
};

/// Graded lexicographic order: total degree first, then lex on exponents.
struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        const long da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.exps < b.exps;
    }
};

inline std::vector<std::string> default_var_names(int nvars) {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(nvars));
    for (int i = 0; i < nvars; ++i) names.push_back("x" + std::to_string(i + 1));
    return names;
}

/// All monomials in nvars variables with total degree <= maxdeg, grlex ascending.
inline std::vector<Monomial> monomials_up_to_degree(int nvars, long maxdeg) {
    std::vector<Monomial> out;
    if (maxdeg < 0) return out;
    Monomial cur(nvars);
    // enumerate by recursion over variable positions
    std::vector<Monomial> acc;
    struct Rec {
        int nvars;
        std::vector<Monomial>* out;
        void go(Monomial& m, int pos, long left) {
            if (pos == nvars) {
                out->push_back(m);
                return;
            }
            for (long e = 0; e <= left; ++e) {
                m.exps[static_cast<size_t>(pos)] = static_cast<uint32_t>(e);
                go(m, pos + 1, left - e);
            }
            m.exps[static_cast<size_t>(pos)] = 0;
        }
    } rec{nvars, &acc};
    rec.go(cur, 0, maxdeg);
    std::sort(acc.begin(), acc.end(), [](const Monomial& a, const Monomial& b) {
        return GrlexLess{}(a, b);
    });
    return acc;
}

}  // namespace psatz

#endif
