#include "qnet/linalg.hpp"

#include <cmath>
#include <utility>

#include "qnet/errors.hpp"
#include "qnet/kernels.hpp"

namespace qnet {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ > 0 ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
        if (r.size() != cols_) throw DimensionMismatch("ragged initializer for Matrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw DimensionMismatch("matrix product shape mismatch");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            simd::axpy(aik, rhs.row(k), out.data() + i * rhs.cols_, rhs.cols_);
        }
    }
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw DimensionMismatch("matrix difference shape mismatch");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
    return out;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

// In-place PA = LU with partial pivoting; returns the permutation.
std::vector<std::size_t> lu_factor(Matrix& a, double pivot_tol) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw DimensionMismatch("lu_factor requires a square matrix");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::fabs(a(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best < pivot_tol)
            throw SingularSystem("pivot below tolerance at column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        const double inv_pivot = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv_pivot;
            a(i, k) = f;
            if (f != 0.0) {
                for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            }
        }
    }
    return perm;
}

std::vector<double> lu_solve(const Matrix& lu, const std::vector<std::size_t>& perm,
                             const std::vector<double>& b) {
    const std::size_t n = lu.rows();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= lu(i, j) * x[j];
        x[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= lu(ii, j) * x[j];
        x[ii] = acc / lu(ii, ii);
    }
    return x;
}

}  // namespace

std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol) {
    if (a.rows() != b.size()) throw DimensionMismatch("solve_linear shape mismatch");
    const auto perm = lu_factor(a, pivot_tol);
    return lu_solve(a, perm, b);
}

Matrix solve_linear_multi(Matrix a, const Matrix& b, double pivot_tol) {
    if (a.rows() != b.rows()) throw DimensionMismatch("solve_linear_multi shape mismatch");
    const auto perm = lu_factor(a, pivot_tol);
    const std::size_t n = b.rows();
    Matrix x(n, b.cols());
    std::vector<double> col(n);
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, c);
        const auto sol = lu_solve(a, perm, col);
        for (std::size_t i = 0; i < n; ++i) x(i, c) = sol[i];
    }
    return x;
}

Matrix invert(const Matrix& a, double pivot_tol) {
    return solve_linear_multi(a, Matrix::identity(a.rows()), pivot_tol);
}

}  // namespace qnet
