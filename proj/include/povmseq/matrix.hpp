#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "povmseq/errors.hpp"

namespace povmseq {

/// Dense complex matrix with row-major storage. This is the representation
/// every operator in the library lives in (effects, states, unitaries); it is
/// a plain value type and all operations on it are pure.
template <typename Real = double>
class Matrix {
public:
    using Complex = std::complex<Real>;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex(0)) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be >= 1");
    }

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries)
        : Matrix(rows, cols) {
        if (entries.size() != data_.size())
            throw DimensionError("entry count does not match matrix shape");
        std::size_t k = 0;
        for (const auto& e : entries) data_[k++] = e;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Complex(1);
        return m;
    }

    static Matrix diagonal(const std::vector<Real>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = Complex(d[i]);
        return m;
    }

    /// Rank-one |u><v| from two vectors.
    static Matrix outer(const std::vector<Complex>& u, const std::vector<Complex>& v) {
        Matrix m(u.size(), v.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<Complex>& data() const { return data_; }

    bool all_finite() const {
        for (const auto& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(Complex s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(Matrix a, Real s) { return a *= Complex(s); }
    friend Matrix operator*(Real s, Matrix a) { return a *= Complex(s); }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
        Matrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    /// Matrix-vector product M v.
    std::vector<Complex> apply(const std::vector<Complex>& v) const {
        if (v.size() != cols_) throw DimensionError("matrix-vector product: size mismatch");
        std::vector<Complex> r(rows_, Complex(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    Matrix dagger() const {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    Complex trace() const {
        if (!square()) throw DimensionError("trace of a non-square matrix");
        Complex t(0);
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    Real frob_norm() const {
        Real s(0);
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

private:
    void require_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError("matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

template <typename Real>
Matrix<Real> dagger(const Matrix<Real>& m) {
    return m.dagger();
}

/// Kronecker product with the FIRST factor as the slow index. Throughout the
/// library the system is the slow factor and the ancilla the fast one, so
/// kron(system_op, ancilla_op) indexes basis states as |system> |ancilla>.
template <typename Real>
Matrix<Real> kron(const Matrix<Real>& a, const Matrix<Real>& b) {
    Matrix<Real> r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const auto aij = a(i, j);
            if (aij == typename Matrix<Real>::Complex(0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

template <typename Real>
Real frob_dist(const Matrix<Real>& a, const Matrix<Real>& b) {
    return (a - b).frob_norm();
}

template <typename Real>
bool is_hermitian(const Matrix<Real>& m, Real tol) {
    return m.square() && frob_dist(m, m.dagger()) <= tol;
}

template <typename Real>
bool is_unitary(const Matrix<Real>& m, Real tol) {
    if (!m.square()) return false;
    return frob_dist(m.dagger() * m, Matrix<Real>::identity(m.rows())) <= tol;
}

// -- small vector helpers (kets are plain std::vector<Complex>) --------------

template <typename Real>
std::complex<Real> vec_dot(const std::vector<std::complex<Real>>& u,
                           const std::vector<std::complex<Real>>& v) {
    if (u.size() != v.size()) throw DimensionError("inner product: size mismatch");
    std::complex<Real> s(0);
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s;
}

template <typename Real>
Real vec_norm(const std::vector<std::complex<Real>>& u) {
    Real s(0);
    for (const auto& z : u) s += std::norm(z);
    return std::sqrt(s);
}

/// |u> |v> with u as the slow factor.
template <typename Real>
std::vector<std::complex<Real>> vec_kron(const std::vector<std::complex<Real>>& u,
                                         const std::vector<std::complex<Real>>& v) {
    std::vector<std::complex<Real>> r(u.size() * v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i * v.size() + j] = u[i] * v[j];
    return r;
}

} // namespace povmseq
