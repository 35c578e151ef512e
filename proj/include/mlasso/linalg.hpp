#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mlasso {

using Vec = std::vector<double>;

/// Compressed-sparse-row matrix. Column indices are strictly increasing
/// within each row; row sums and matvecs therefore have a fixed
/// evaluation order regardless of how the matrix was assembled.
class SparseMatrix {
public:
    SparseMatrix() : rows_(0), cols_(0), row_ptr_(1, 0) {}
    SparseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    /// Appends one entry to the row currently under construction.
    /// Entries must be pushed row by row, columns ascending.
    void push(std::size_t col, double value) {
        if (col_idx_.size() > row_start_ && col_idx_.back() >= col)
            throw std::invalid_argument("SparseMatrix: columns must ascend within a row");
        col_idx_.push_back(col);
        values_.push_back(value);
    }
    void end_row() {
        row_ptr_[++cur_row_] = col_idx_.size();
        row_start_ = col_idx_.size();
    }

    std::size_t row_begin(std::size_t i) const { return row_ptr_[i]; }
    std::size_t row_end(std::size_t i) const { return row_ptr_[i + 1]; }
    std::size_t col(std::size_t k) const { return col_idx_[k]; }
    double value(std::size_t k) const { return values_[k]; }

    /// y = A x
    void multiply(const Vec& x, Vec& y) const {
        if (x.size() != cols_) throw std::invalid_argument("spmv: dimension mismatch");
        y.assign(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                s += values_[k] * x[col_idx_[k]];
            y[i] = s;
        }
    }

    /// y += A^T x
    void multiply_transpose_add(const Vec& x, Vec& y) const {
        if (x.size() != rows_) throw std::invalid_argument("spmv^T: dimension mismatch");
        for (std::size_t i = 0; i < rows_; ++i) {
            const double xi = x[i];
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                y[col_idx_[k]] += values_[k] * xi;
        }
    }

private:
    std::size_t rows_, cols_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    Vec values_;
    std::size_t cur_row_ = 0;
    std::size_t row_start_ = 0;
};

inline Vec spmv(const SparseMatrix& a, const Vec& x) {
    Vec y;
    a.multiply(x, y);
    return y;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Per-coefficient regularization weights: lambda_j repeated n_j times,
/// i.e. the diagonal of the block matrix diag(lambda_1 I, ..., lambda_J I).
inline Vec expand_level_weights(const Vec& per_level, const std::vector<std::size_t>& block_sizes) {
    if (per_level.size() != block_sizes.size())
        throw std::invalid_argument("expand_level_weights: level count mismatch");
    Vec w;
    for (std::size_t j = 0; j < per_level.size(); ++j) {
        if (per_level[j] <= 0.0)
            throw std::invalid_argument("expand_level_weights: weights must be positive");
        w.insert(w.end(), block_sizes[j], per_level[j]);
    }
    return w;
}

struct CgResult {
    Vec x;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Conjugate gradients for a symmetric positive-definite operator given
/// matrix-free. Stops when ||apply(x) - rhs|| <= rel_tol * ||rhs||.
inline CgResult cg_solve(const std::function<Vec(const Vec&)>& apply, const Vec& rhs,
                         double rel_tol, std::size_t max_iter, const Vec* warm_start = nullptr) {
    const std::size_t n = rhs.size();
    CgResult out;
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        out.x.assign(n, 0.0);
        out.converged = true;
        return out;
    }
    Vec x = warm_start ? *warm_start : Vec(n, 0.0);
    if (x.size() != n) throw std::invalid_argument("cg_solve: warm start dimension mismatch");
    Vec r = apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    Vec p = r;
    double rr = dot(r, r);
    const double tol_abs = rel_tol * rhs_norm;
    for (std::size_t k = 0; k < max_iter; ++k) {
        if (std::sqrt(rr) <= tol_abs) {
            out.converged = true;
            break;
        }
        Vec ap = apply(p);
        const double alpha = rr / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
        ++out.iterations;
    }
    if (!out.converged && std::sqrt(rr) <= tol_abs) out.converged = true;
    out.x = std::move(x);
    return out;
}

/// Elementwise shrinkage t_theta(v) = sgn(v) max(0, |v| - theta).
/// |v| == theta maps to exactly 0.
inline Vec soft_threshold(const Vec& v, double theta) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = std::abs(v[i]) - theta;
        out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
    }
    return out;
}

/// Group shrinkage: max(0, 1 - theta/||v||_2) v, zero when ||v||_2 <= theta.
inline Vec block_soft_threshold(const Vec& v, double theta) {
    const double n = norm2(v);
    Vec out(v.size(), 0.0);
    if (n > theta) {
        const double scale = 1.0 - theta / n;
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i];
    }
    return out;
}

}  // namespace mlasso
