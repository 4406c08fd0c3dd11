#ifndef PSATZ_RATMAT_HPP
#define PSATZ_RATMAT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "psatz/rational.hpp"

namespace psatz {

/// Dense rational matrix, row-major.
class RatMat {
public:
    RatMat() : rows_(0), cols_(0) {}
    RatMat(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, Rat(0)) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
    }

    static RatMat identity(int n) {
        RatMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rat& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const Rat& at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    bool is_square() const { return rows_ == cols_; }

    bool is_symmetric() const {
        if (!is_square()) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if (at(i, j) != at(j, i)) return false;
        return true;
    }

    bool is_zero() const {
        for (const Rat& v : data_)
            if (v != 0) return false;
        return true;
    }

    RatMat transpose() const {
        RatMat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    RatMat operator+(const RatMat& o) const {
        check_same_shape(o);
        RatMat r = *this;
        for (size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
        return r;
    }

    RatMat operator-(const RatMat& o) const {
        check_same_shape(o);
        RatMat r = *this;
        for (size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
        return r;
    }

    RatMat operator*(const RatMat& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
        RatMat r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const Rat& a = at(i, k);
                if (a == 0) continue;
                for (int j = 0; j < o.cols_; ++j) r.at(i, j) += a * o.at(k, j);
            }
        return r;
    }

    RatMat operator*(const Rat& c) const {
        RatMat r = *this;
        for (auto& v : r.data_) v *= c;
        return r;
    }

    bool operator==(const RatMat& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const RatMat& o) const { return !(*this == o); }

    Rat frobenius_sq() const {
        Rat s(0);
        for (const Rat& v : data_) s += v * v;
        return s;
    }

    std::string str() const {
        std::string s = "[";
        for (int i = 0; i < rows_; ++i) {
            s += "[";
            for (int j = 0; j < cols_; ++j) {
                s += rat_str(at(i, j));
                if (j + 1 < cols_) s += ", ";
            }
            s += "]";
            if (i + 1 < rows_) s += ", ";
        }
        return s + "]";
    }

private:
    void check_same_shape(const RatMat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix shape mismatch");
    }

    int rows_, cols_;
    std::vector<Rat> data_;
};

}  // namespace psatz

#endif
