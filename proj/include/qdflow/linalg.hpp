#pragma once

#include <string>
#include <vector>

#include "qdflow/scalar.hpp"

namespace qdflow {

// Small dense matrix over Scalar.  Sizes here are tied to the number of
// moduli/phase-space coordinates (a few dozen at most), so plain Gaussian
// elimination with partial pivoting is appropriate.  In exact mode pivoting
// is by structural nonzero-ness; in floating modes by magnitude.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(size_t rows, size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, Scalar(0L)) {}

    static Matrix identity(size_t n);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    Scalar& at(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const Scalar& at(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix operator*(const Matrix& o) const;
    Matrix operator*(const Scalar& c) const;
    Matrix transpose() const;

    std::vector<Scalar> apply(const std::vector<Scalar>& v) const;

    Scalar det() const;
    size_t rank(double tol = 1e-10) const;
    Matrix inverse() const;  // throws degeneracy_error if singular

    // Solve A x = b (square, nonsingular).
    std::vector<Scalar> solve(const std::vector<Scalar>& b) const;

    // Basis of the right kernel {x : A x = 0}, one column vector per entry.
    std::vector<std::vector<Scalar>> kernel(double tol = 1e-10) const;

    double max_abs() const;
    std::string str() const;

private:
    size_t rows_, cols_;
    std::vector<Scalar> a_;
};

}  // namespace qdflow
