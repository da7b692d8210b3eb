#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace qnet {

// Dense row-major matrix of doubles. Sized for the traffic systems here
// (J up to a few dozen), not for large-scale numerics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;

    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws SingularSystem when the largest available pivot falls below
// `pivot_tol` (the openness certificate for I - R^T systems).
std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol = 1e-14);

// Solves A X = B column by column with a single factorization pass.
Matrix solve_linear_multi(Matrix a, const Matrix& b, double pivot_tol = 1e-14);

// Inverse via solve against the identity.
Matrix invert(const Matrix& a, double pivot_tol = 1e-14);

}  // namespace qnet
