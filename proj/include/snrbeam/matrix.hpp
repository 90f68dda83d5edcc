#pragma once

// Dense column-major matrices over double / complex<double>.
// Column vectors are n-by-1 matrices. Inner loops route through the
// runtime-dispatched kernels.

#include "snrbeam/kernels.hpp"

#include <cassert>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace snrbeam {

using cd = std::complex<double>;
using idx = std::ptrdiff_t;

inline double conj_val(double x) { return x; }
inline cd conj_val(cd x) { return std::conj(x); }
inline double real_part(double x) { return x; }
inline double real_part(cd x) { return x.real(); }

inline void axpy(std::size_t n, double a, const double* x, double* y) { kernels::daxpy(n, a, x, y); }
inline void axpy(std::size_t n, cd a, const cd* x, cd* y) { kernels::zaxpy(n, a, x, y); }
inline double dotc(std::size_t n, const double* x, const double* y) { return kernels::ddot(n, x, y); }
inline cd dotc(std::size_t n, const cd* x, const cd* y) { return kernels::zdotc(n, x, y); }
inline void scal(std::size_t n, double a, double* x) { kernels::dscal(n, a, x); }
inline void scal(std::size_t n, cd a, cd* x) { kernels::zscal(n, a, x); }

template <class T>
class Mat {
  public:
    Mat() = default;
    Mat(idx rows, idx cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), T{}) {
        assert(rows >= 0 && cols >= 0);
    }
    Mat(idx rows, idx cols, std::initializer_list<T> rowmajor) : Mat(rows, cols) {
        assert(static_cast<idx>(rowmajor.size()) == rows * cols);
        idx k = 0;
        for (T v : rowmajor) {
            (*this)(k / cols, k % cols) = v;
            ++k;
        }
    }

    static Mat zero(idx rows, idx cols) { return Mat(rows, cols); }
    static Mat identity(idx n) {
        Mat m(n, n);
        for (idx i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }
    static Mat colvec(std::initializer_list<T> entries) {
        Mat m(static_cast<idx>(entries.size()), 1);
        idx i = 0;
        for (T v : entries) m(i++, 0) = v;
        return m;
    }

    idx rows() const { return rows_; }
    idx cols() const { return cols_; }
    idx size() const { return rows_ * cols_; }
    bool empty() const { return a_.empty(); }

    T& operator()(idx i, idx j) {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return a_[static_cast<std::size_t>(j * rows_ + i)];
    }
    T operator()(idx i, idx j) const {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return a_[static_cast<std::size_t>(j * rows_ + i)];
    }
    // Flat column-major access; the natural indexing for column vectors.
    T& operator[](idx k) { return a_[static_cast<std::size_t>(k)]; }
    T operator[](idx k) const { return a_[static_cast<std::size_t>(k)]; }

    T* data() { return a_.data(); }
    const T* data() const { return a_.data(); }
    T* col(idx j) { return a_.data() + j * rows_; }
    const T* col(idx j) const { return a_.data() + j * rows_; }

    Mat& operator+=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Mat& operator*=(T s) {
        scal(a_.size(), s, a_.data());
        return *this;
    }

  private:
    idx rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using CMat = Mat<cd>;
using RMat = Mat<double>;

template <class T>
Mat<T> operator+(Mat<T> a, const Mat<T>& b) { a += b; return a; }
template <class T>
Mat<T> operator-(Mat<T> a, const Mat<T>& b) { a -= b; return a; }
template <class T>
Mat<T> operator*(T s, Mat<T> a) { a *= s; return a; }
template <class T>
Mat<T> operator*(Mat<T> a, T s) { a *= s; return a; }
inline CMat operator*(double s, CMat a) { a *= cd(s, 0.0); return a; }

template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    assert(a.cols() == b.rows());
    Mat<T> c(a.rows(), b.cols());
    const std::size_t r = static_cast<std::size_t>(a.rows());
    for (idx j = 0; j < b.cols(); ++j)
        for (idx l = 0; l < a.cols(); ++l) {
            const T blj = b(l, j);
            if (blj != T{}) axpy(r, blj, a.col(l), c.col(j));
        }
    return c;
}

template <class T>
Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) { return matmul(a, b); }

// a^H * b without forming the adjoint
template <class T>
Mat<T> adjoint_mul(const Mat<T>& a, const Mat<T>& b) {
    assert(a.rows() == b.rows());
    Mat<T> c(a.cols(), b.cols());
    const std::size_t r = static_cast<std::size_t>(a.rows());
    for (idx j = 0; j < b.cols(); ++j)
        for (idx i = 0; i < a.cols(); ++i) c(i, j) = dotc(r, a.col(i), b.col(j));
    return c;
}

template <class T>
Mat<T> adjoint(const Mat<T>& a) {
    Mat<T> t(a.cols(), a.rows());
    for (idx j = 0; j < a.cols(); ++j)
        for (idx i = 0; i < a.rows(); ++i) t(j, i) = conj_val(a(i, j));
    return t;
}

template <class T>
Mat<T> transpose(const Mat<T>& a) {
    Mat<T> t(a.cols(), a.rows());
    for (idx j = 0; j < a.cols(); ++j)
        for (idx i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

inline CMat conjugate(const CMat& a) {
    CMat c(a.rows(), a.cols());
    for (idx j = 0; j < a.cols(); ++j)
        for (idx i = 0; i < a.rows(); ++i) c(i, j) = std::conj(a(i, j));
    return c;
}

template <class T>
T trace(const Mat<T>& a) {
    assert(a.rows() == a.cols());
    T s{};
    for (idx i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

template <class T>
double frob_norm(const Mat<T>& a) {
    double s = 0.0;
    for (idx k = 0; k < a.size(); ++k) s += std::norm(cd(a[k]));
    return std::sqrt(s);
}

inline double frob_norm(const RMat& a) {
    double s = 0.0;
    for (idx k = 0; k < a.size(); ++k) s += a[k] * a[k];
    return std::sqrt(s);
}

template <class T>
double max_abs(const Mat<T>& a) {
    double m = 0.0;
    for (idx k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k]));
    return m;
}

template <class T>
bool all_finite(const Mat<T>& a) {
    for (idx k = 0; k < a.size(); ++k)
        if (!std::isfinite(std::abs(a[k]))) return false;
    return true;
}

// x^H M y for column vectors
template <class T>
T quad_form(const Mat<T>& x, const Mat<T>& m, const Mat<T>& y) {
    assert(x.cols() == 1 && y.cols() == 1);
    Mat<T> my = matmul(m, y);
    return dotc(static_cast<std::size_t>(x.rows()), x.data(), my.data());
}

// Hermitian matrix with conjugate symmetry exact by construction.
class Herm {
  public:
    Herm() = default;

    // Symmetrizes (m + m^H)/2 and zeroes the diagonal imaginary parts.
    static Herm enforce(const CMat& m) {
        assert(m.rows() == m.cols());
        CMat h(m.rows(), m.cols());
        for (idx j = 0; j < m.cols(); ++j) {
            h(j, j) = cd(m(j, j).real(), 0.0);
            for (idx i = j + 1; i < m.rows(); ++i) {
                const cd v = 0.5 * (m(i, j) + std::conj(m(j, i)));
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
        }
        return Herm(std::move(h));
    }

    static Herm identity(idx n) { return Herm(CMat::identity(n)); }
    static Herm zero(idx n) { return Herm(CMat::zero(n, n)); }

    idx order() const { return m_.rows(); }
    const CMat& mat() const { return m_; }
    operator const CMat&() const { return m_; }
    cd operator()(idx i, idx j) const { return m_(i, j); }

  private:
    explicit Herm(CMat m) : m_(std::move(m)) {}
    CMat m_;
};

inline double norm2(const CMat& v) {
    assert(v.cols() == 1);
    return std::sqrt(std::real(dotc(static_cast<std::size_t>(v.rows()), v.data(), v.data())));
}

inline double norm2(const RMat& v) {
    assert(v.cols() == 1);
    return std::sqrt(dotc(static_cast<std::size_t>(v.rows()), v.data(), v.data()));
}

} // namespace snrbeam
