#include "qdflow/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace qdflow {

Matrix Matrix::identity(size_t n) {
    Matrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = Scalar(1L);
    return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw error("matrix shape mismatch in +");
    Matrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw error("matrix shape mismatch in -");
    Matrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw error("matrix shape mismatch in *");
    Matrix r(rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t k = 0; k < cols_; ++k) {
            if (at(i, k).is_zero()) continue;
            for (size_t j = 0; j < o.cols_; ++j)
                r.at(i, j) += at(i, k) * o.at(k, j);
        }
    return r;
}

Matrix Matrix::operator*(const Scalar& c) const {
    Matrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * c;
    return r;
}

Matrix Matrix::transpose() const {
    Matrix r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

std::vector<Scalar> Matrix::apply(const std::vector<Scalar>& v) const {
    if (v.size() != cols_) throw error("matrix/vector shape mismatch");
    std::vector<Scalar> r(rows_, Scalar(0L));
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j)
            if (!at(i, j).is_zero()) r[i] += at(i, j) * v[j];
    return r;
}

namespace {

// Row echelon pass on a working copy.  Returns the pivot columns; the matrix
// is left in (unreduced) upper echelon form.  det_acc, if given, accumulates
// the product of pivots with row-swap signs (square case only).
struct Echelon {
    Matrix m;
    std::vector<size_t> pivot_cols;
    Scalar det{0L};
    bool det_valid = false;
};

Echelon echelon_form(Matrix m, double tol) {
    Echelon e;
    size_t rows = m.rows(), cols = m.cols();
    Scalar det(1L);
    bool square = rows == cols;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        // pivot choice: any structural nonzero in exact mode, max |.| otherwise
        size_t best = r;
        double best_mag = -1;
        for (size_t i = r; i < rows; ++i) {
            const Scalar& x = m.at(i, c);
            if (x.is_zero()) continue;
            if (x.is_exact()) { best = i; best_mag = 1; break; }
            double mag = x.abs();
            if (mag > best_mag) { best_mag = mag; best = i; }
        }
        if (best_mag < 0) {  // structurally zero column
            if (square) det = Scalar(0L);
            continue;
        }
        // float-mode near-zero pivot counts as zero for rank purposes
        if (!m.at(best, c).is_exact() && m.at(best, c).abs() <= tol) {
            if (square) det = Scalar(0L);
            continue;
        }
        if (best != r) {
            for (size_t j = 0; j < cols; ++j) std::swap(m.at(best, j), m.at(r, j));
            det = -det;
        }
        const Scalar piv = m.at(r, c);
        det = det * piv;
        for (size_t i = r + 1; i < rows; ++i) {
            if (m.at(i, c).is_zero()) continue;
            Scalar f = m.at(i, c) / piv;
            m.at(i, c) = Scalar(0L);
            for (size_t j = c + 1; j < cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        e.pivot_cols.push_back(c);
        ++r;
    }
    if (square && r < rows) det = Scalar(0L);
    e.m = std::move(m);
    if (square) { e.det = det; e.det_valid = true; }
    return e;
}

}  // namespace

Scalar Matrix::det() const {
    if (rows_ != cols_) throw error("det of non-square matrix");
    if (rows_ == 0) return Scalar(1L);
    Echelon e = echelon_form(*this, 0.0);
    return e.det;
}

size_t Matrix::rank(double tol) const {
    double scale = std::max(max_abs(), 1.0);
    return echelon_form(*this, tol * scale).pivot_cols.size();
}

std::vector<Scalar> Matrix::solve(const std::vector<Scalar>& b) const {
    if (rows_ != cols_) throw error("solve requires a square matrix");
    if (b.size() != rows_) throw error("solve: rhs length mismatch");
    size_t n = rows_;
    // augment
    Matrix aug(n, n + 1);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) aug.at(i, j) = at(i, j);
        aug.at(i, n) = b[i];
    }
    Echelon e = echelon_form(std::move(aug), 0.0);
    if (e.pivot_cols.size() != n || e.pivot_cols.back() != n - 1)
        throw degeneracy_error("solve: singular matrix");
    std::vector<Scalar> x(n, Scalar(0L));
    for (size_t ii = n; ii-- > 0;) {
        Scalar acc = e.m.at(ii, n);
        for (size_t j = ii + 1; j < n; ++j) acc -= e.m.at(ii, j) * x[j];
        x[ii] = acc / e.m.at(ii, ii);
    }
    return x;
}

Matrix Matrix::inverse() const {
    if (rows_ != cols_) throw error("inverse of non-square matrix");
    size_t n = rows_;
    Matrix aug(n, 2 * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) aug.at(i, j) = at(i, j);
        aug.at(i, n + i) = Scalar(1L);
    }
    Echelon e = echelon_form(std::move(aug), 0.0);
    if (e.pivot_cols.size() != n || e.pivot_cols.back() != n - 1)
        throw degeneracy_error("inverse: singular matrix");
    Matrix inv(n, n);
    for (size_t col = 0; col < n; ++col) {
        std::vector<Scalar> x(n, Scalar(0L));
        for (size_t ii = n; ii-- > 0;) {
            Scalar acc = e.m.at(ii, n + col);
            for (size_t j = ii + 1; j < n; ++j) acc -= e.m.at(ii, j) * x[j];
            x[ii] = acc / e.m.at(ii, ii);
        }
        for (size_t i = 0; i < n; ++i) inv.at(i, col) = x[i];
    }
    return inv;
}

std::vector<std::vector<Scalar>> Matrix::kernel(double tol) const {
    double scale = std::max(max_abs(), 1.0);
    Echelon e = echelon_form(*this, tol * scale);
    std::vector<bool> is_pivot(cols_, false);
    for (size_t c : e.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<Scalar>> basis;
    for (size_t free_c = 0; free_c < cols_; ++free_c) {
        if (is_pivot[free_c]) continue;
        std::vector<Scalar> v(cols_, Scalar(0L));
        v[free_c] = Scalar(1L);
        // back-substitute over pivot rows from bottom up
        for (size_t pr = e.pivot_cols.size(); pr-- > 0;) {
            size_t pc = e.pivot_cols[pr];
            if (pc > free_c) continue;
            Scalar acc(0L);
            for (size_t j = pc + 1; j < cols_; ++j)
                if (!v[j].is_zero()) acc += e.m.at(pr, j) * v[j];
            v[pc] = -acc / e.m.at(pr, pc);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

double Matrix::max_abs() const {
    double m = 0;
    for (const Scalar& x : a_) m = std::max(m, x.abs());
    return m;
}

std::string Matrix::str() const {
    std::string out;
    for (size_t i = 0; i < rows_; ++i) {
        out += "[";
        for (size_t j = 0; j < cols_; ++j) {
            out += at(i, j).str();
            if (j + 1 < cols_) out += ", ";
        }
        out += "]\n";
    }
    return out;
}

}  // namespace qdflow
