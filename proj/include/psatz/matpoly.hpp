#ifndef PSATZ_MATPOLY_HPP
#define PSATZ_MATPOLY_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "psatz/poly.hpp"
#include "psatz/ratmat.hpp"

namespace psatz {

/// Rational point in the ambient variable space.
struct RatPoint {
    std::vector<Rat> coords;

    RatPoint() = default;
    explicit RatPoint(std::vector<Rat> c) : coords(std::move(c)) {}
    int dim() const { return static_cast<int>(coords.size()); }
};

/// Matrix with polynomial entries, dense row-major. All entries share nvars.
class MatPoly {
public:
    MatPoly() : rows_(0), cols_(0), nvars_(0) {}

    MatPoly(int rows, int cols, int nvars)
        : rows_(rows), cols_(cols), nvars_(nvars),
          entries_(static_cast<size_t>(rows) * cols, Poly(nvars)) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix shape must be positive");
    }

    static MatPoly identity(int n, int nvars) {
        MatPoly m(n, n, nvars);
        for (int i = 0; i < n; ++i) m.at(i, i) = Poly::constant(nvars, Rat(1));
        return m;
    }

    static MatPoly zero(int rows, int cols, int nvars) { return MatPoly(rows, cols, nvars); }

    static MatPoly scalar(const Poly& p) {
        MatPoly m(1, 1, p.nvars());
        m.at(0, 0) = p;
        return m;
    }

    static MatPoly from_ratmat(const RatMat& c, int nvars) {
        MatPoly m(c.rows(), c.cols(), nvars);
        for (int i = 0; i < c.rows(); ++i)
            for (int j = 0; j < c.cols(); ++j) m.at(i, j) = Poly::constant(nvars, c.at(i, j));
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nvars() const { return nvars_; }

    Poly& at(int r, int c) { return entries_[static_cast<size_t>(r) * cols_ + c]; }
    const Poly& at(int r, int c) const { return entries_[static_cast<size_t>(r) * cols_ + c]; }

    bool is_square() const { return rows_ == cols_; }

    bool is_zero() const {
        for (const Poly& p : entries_)
            if (!p.is_zero()) return false;
        return true;
    }

    bool is_identity() const {
        if (!is_square()) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) {
                const Poly want = Poly::constant(nvars_, Rat(i == j ? 1 : 0));
                if (at(i, j) != want) return false;
            }
        return true;
    }

    /// True iff every entry is a constant polynomial.
    bool is_constant() const {
        for (const Poly& p : entries_)
            if (!p.is_constant()) return false;
        return true;
    }

    RatMat constant_part() const {
        RatMat c(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) c.at(i, j) = at(i, j).constant_term();
        return c;
    }

    bool is_symmetric() const {
        if (!is_square()) throw std::invalid_argument("symmetry check on non-square matrix");
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if (at(i, j) != at(j, i)) return false;
        return true;
    }

    /// Maximum total degree over entries; -1 for the zero matrix.
    long degree() const {
        long d = -1;
        for (const Poly& p : entries_) d = std::max(d, p.degree());
        return d;
    }

    MatPoly transpose() const {
        MatPoly t(cols_, rows_, nvars_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    MatPoly operator+(const MatPoly& o) const {
        check_same_shape(o);
        MatPoly r = *this;
        for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] += o.entries_[i];
        return r;
    }

    MatPoly& operator+=(const MatPoly& o) {
        check_same_shape(o);
        for (size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }

    MatPoly operator-(const MatPoly& o) const {
        check_same_shape(o);
        MatPoly r = *this;
        for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] -= o.entries_[i];
        return r;
    }

    MatPoly operator*(const MatPoly& o) const {
        if (cols_ != o.rows_ || nvars_ != o.nvars_)
            throw std::invalid_argument("matrix product shape/variable mismatch");
        MatPoly r(rows_, o.cols_, nvars_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const Poly& a = at(i, k);
                if (a.is_zero()) continue;
                for (int j = 0; j < o.cols_; ++j) {
                    if (o.at(k, j).is_zero()) continue;
                    r.at(i, j) += a * o.at(k, j);
                }
            }
        return r;
    }

    MatPoly scale(const Poly& p) const {
        if (p.nvars() != nvars_) throw std::invalid_argument("scale variable mismatch");
        MatPoly r(rows_, cols_, nvars_);
        for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = entries_[i] * p;
        return r;
    }

    MatPoly scale(const Rat& c) const {
        MatPoly r = *this;
        for (auto& e : r.entries_) e = e * c;
        return r;
    }

    bool operator==(const MatPoly& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && nvars_ == o.nvars_ &&
               entries_ == o.entries_;
    }
    bool operator!=(const MatPoly& o) const { return !(*this == o); }

    RatMat eval(const RatPoint& x) const {
        if (x.dim() != nvars_) throw std::invalid_argument("evaluation point dimension mismatch");
        RatMat r(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j).eval(x.coords);
        return r;
    }

    std::string str() const {
        std::string s = "[";
        for (int i = 0; i < rows_; ++i) {
            s += "[";
            for (int j = 0; j < cols_; ++j) {
                s += at(i, j).str();
                if (j + 1 < cols_) s += ", ";
            }
            s += "]";
            if (i + 1 < rows_) s += ", ";
        }
        return s + "]";
    }

private:
    void check_same_shape(const MatPoly& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_ || nvars_ != o.nvars_)
            throw std::invalid_argument("matrix shape/variable mismatch");
    }

    int rows_, cols_, nvars_;
    std::vector<Poly> entries_;
};

inline MatPoly gram_square(const MatPoly& a) { return a.transpose() * a; }

}  // namespace psatz

#endif
