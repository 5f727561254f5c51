#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <vector>

#include "base.hpp"

namespace sglab {

// Dense row-major matrix over double or std::complex<double>.
template <typename T>
class basic_matrix {
  public:
    basic_matrix() = default;
    basic_matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    T* row(std::size_t i) { return a_.data() + i * cols_; }
    const T* row(std::size_t i) const { return a_.data() + i * cols_; }

    std::vector<T>& data() { return a_; }
    const std::vector<T>& data() const { return a_; }

    static basic_matrix identity(std::size_t n) {
        basic_matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    basic_matrix transposed() const {
        basic_matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using matrix = basic_matrix<double>;
using cmatrix = basic_matrix<std::complex<double>>;

// C = A * B with the inner loop over contiguous rows of B (ikj order).
template <typename T>
basic_matrix<T> matmul(const basic_matrix<T>& A, const basic_matrix<T>& B) {
    assert(A.cols() == B.rows());
    basic_matrix<T> C(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        T* ci = C.row(i);
        for (std::size_t k = 0; k < A.cols(); ++k) {
            const T aik = A(i, k);
            if (aik == T{}) continue;
            const T* bk = B.row(k);
            for (std::size_t j = 0; j < B.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

template <typename T>
basic_matrix<T> matmul_transB(const basic_matrix<T>& A, const basic_matrix<T>& B) {
    assert(A.cols() == B.cols());
    basic_matrix<T> C(A.rows(), B.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        const T* ai = A.row(i);
        for (std::size_t j = 0; j < B.rows(); ++j) {
            const T* bj = B.row(j);
            T s{};
            for (std::size_t k = 0; k < A.cols(); ++k) s += ai[k] * bj[k];
            C(i, j) = s;
        }
    }
    return C;
}

inline double max_abs(const matrix& A) {
    double m = 0.0;
    for (double v : A.data()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(const cmatrix& A) {
    double m = 0.0;
    for (const auto& v : A.data()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const matrix& A, const matrix& B) {
    assert(A.rows() == B.rows() && A.cols() == B.cols());
    double m = 0.0;
    for (std::size_t k = 0; k < A.data().size(); ++k)
        m = std::max(m, std::abs(A.data()[k] - B.data()[k]));
    return m;
}

// Row-sum norm, the natural scale for residual contracts.
inline double inf_norm(const matrix& A) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) s += std::abs(A(i, j));
        m = std::max(m, s);
    }
    return m;
}

inline double frobenius_norm(const matrix& A) {
    double s = 0.0;
    for (double v : A.data()) s += v * v;
    return std::sqrt(s);
}

inline double symmetry_defect(const matrix& A) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = i + 1; j < A.cols(); ++j)
            m = std::max(m, std::abs(A(i, j) - A(j, i)));
    return m;
}

inline std::vector<double> matvec(const matrix& A, const std::vector<double>& x) {
    assert(A.cols() == x.size());
    std::vector<double> y(A.rows(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        const double* ai = A.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

} // namespace sglab
