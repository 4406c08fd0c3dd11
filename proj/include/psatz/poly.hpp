#ifndef PSATZ_POLY_HPP
#define PSATZ_POLY_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "psatz/monomial.hpp"
#include "psatz/rational.hpp"

namespace psatz {

/// Sparse multivariate polynomial with exact rational coefficients.
/// Canonical: no zero coefficients, one entry per monomial, grlex-ordered map.
class Poly {
public:
    using TermMap = std::map<Monomial, Rat, GrlexLess>;

    Poly() : nvars_(0) {}
    explicit Poly(int nvars) : nvars_(nvars) {}

    static Poly constant(int nvars, const Rat& c) {
        Poly p(nvars);
        if (c != 0) p.terms_[Monomial(nvars)] = c;
        return p;
    }

    static Poly variable(int nvars, int i) {
        if (i < 0 || i >= nvars) throw std::invalid_argument("variable index out of range");
        Poly p(nvars);
        Monomial m(nvars);
        m.exps[static_cast<size_t>(i)] = 1;
        p.terms_[m] = Rat(1);
        return p;
    }

    static Poly monomial(const Monomial& m, const Rat& c) {
        Poly p(m.nvars());
        if (c != 0) p.terms_[m] = c;
        return p;
    }

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    size_t term_count() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
    }

    Rat constant_term() const {
        auto it = terms_.find(Monomial(nvars_));
        return it == terms_.end() ? Rat(0) : it->second;
    }

    Rat coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rat(0) : it->second;
    }

    /// Total degree; -1 for the zero polynomial.
    long degree() const {
        if (terms_.empty()) return -1;
        return terms_.rbegin()->first.degree();
    }

    void add_term(const Monomial& m, const Rat& c) {
        if (c == 0) return;
        if (m.nvars() != nvars_) throw std::invalid_argument("monomial/poly variable count mismatch");
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly operator-() const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) r.terms_[m] = -c;
        return r;
    }

    Poly operator+(const Poly& o) const {
        check_vars(o);
        Poly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }

    Poly operator-(const Poly& o) const {
        check_vars(o);
        Poly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }

    Poly operator*(const Poly& o) const {
        check_vars(o);
        Poly r(nvars_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }

    Poly operator*(const Rat& c) const {
        Poly r(nvars_);
        if (c == 0) return r;
        for (const auto& [m, v] : terms_) r.terms_[m] = v * c;
        return r;
    }

    Poly& operator+=(const Poly& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    Poly pow(long e) const {
        if (e < 0) throw std::invalid_argument("negative exponent");
        Poly r = constant(nvars_, Rat(1));
        Poly base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = base * base;
            e >>= 1;
        }
        return r;
    }

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    Rat eval(const std::vector<Rat>& point) const {
        if (static_cast<int>(point.size()) != nvars_)
            throw std::invalid_argument("evaluation point dimension mismatch");
        Rat v(0);
        for (const auto& [m, c] : terms_) v += c * m.eval(point);
        return v;
    }

    /// Canonical text form, leading (grlex-greatest) term first, no spaces.
    std::string str(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string s;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const Rat& c = it->second;
            const std::string mono = it->first.str(names);
            const bool neg = c < 0;
            Rat a = neg ? Rat(-c) : c;
            if (s.empty()) {
                if (neg) s += "-";
            } else {
                s += neg ? "-" : "+";
            }
            if (mono.empty()) {
                s += rat_str(a);
            } else {
                if (a != 1) s += rat_str(a) + "*";
                s += mono;
            }
        }
        return s;
    }

    std::string str() const { return str(default_var_names(nvars_)); }

private:
    void check_vars(const Poly& o) const {
        if (nvars_ != o.nvars_) throw std::invalid_argument("polynomial variable count mismatch");
    }

    int nvars_;
    TermMap terms_;
};

inline Poly operator*(const Rat& c, const Poly& p) { return p * c; }

/// 1 + x_1^2 + ... + x_d^2, the strictly positive denominator polynomial.
inline Poly one_plus_sum_of_squares(int nvars) {
    Poly p = Poly::constant(nvars, Rat(1));
    for (int i = 0; i < nvars; ++i) {
        Poly x = Poly::variable(nvars, i);
        p += x * x;
    }
    return p;
}

}  // namespace psatz

#endif
