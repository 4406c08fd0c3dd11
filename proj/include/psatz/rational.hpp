#ifndef PSATZ_RATIONAL_HPP
#define PSATZ_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace psatz {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat make_rat(long num, long den = 1) { return make_rat(Int(num), Int(den)); }

/// 2^k as an exact rational, k may be negative.
inline Rat pow2(long k) {
    Int p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
    return k >= 0 ? Rat(p) : make_rat(Int(1), p);
}

/// Nearest rational with denominator 2^log2_den. Exact for any finite double.
inline Rat dyadic_round(double x, long log2_den) {
    if (!std::isfinite(x)) throw std::invalid_argument("dyadic_round: non-finite value");
    const double scaled = std::nearbyint(std::ldexp(x, static_cast<int>(log2_den)));
    Int num;
    mpz_set_d(num.get_mpz_t(), scaled);
    Int den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(log2_den));
    return make_rat(num, den);
}

inline double to_double(const Rat& q) { return q.get_d(); }

inline std::string rat_str(const Rat& q) { return q.get_str(); }

/// "num/den" with the denominator always spelled out (certificate files).
inline std::string rat_str_explicit(const Rat& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rat parse_rat(const std::string& s) {
    Rat q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
    q.canonicalize();
    return q;
}

}  // namespace psatz

#endif
