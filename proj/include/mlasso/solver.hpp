#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlasso/basis.hpp"
#include "mlasso/linalg.hpp"

namespace mlasso {

struct SolverParams {
    Vec lambda;                    // one positive weight per level
    double beta = 1.0;             // ADMM penalty
    double eps = 1e-4;             // stopping threshold on ||d - lambda X||_2
    double sigma = 1e-3;           // post-hoc hard threshold
    std::size_t max_outer = 5000;

    void validate(std::size_t levels) const {
        if (lambda.size() != levels)
            throw std::invalid_argument("SolverParams: lambda count must match levels");
        for (double l : lambda)
            if (!(l > 0.0)) throw std::invalid_argument("SolverParams: lambda_j must be > 0");
        if (!(beta > 0.0)) throw std::invalid_argument("SolverParams: beta must be > 0");
        if (!(eps > 0.0)) throw std::invalid_argument("SolverParams: eps must be > 0");
        if (sigma < 0.0) throw std::invalid_argument("SolverParams: sigma must be >= 0");
    }
};

// Inner CG settings; a tight inner solve keeps the outer iteration
// reproducible. max_iter is 10 n, set per solve.
inline constexpr double kCgRelTol = 1e-10;

struct AdmmState {
    Vec x, d, b;
    std::size_t iter = 0;
    bool cg_warning = false;
};

/// (2 A^T A + beta lambda^T lambda) x, applied matrix-free blockwise.
inline Vec normal_apply(const ObservationBlocks& a, const Vec& weights, double beta, const Vec& x) {
    if (x.size() != a.total_cols() || weights.size() != a.total_cols())
        throw std::invalid_argument("normal_apply: dimension mismatch");
    Vec ax = a.apply(x);
    Vec y = a.apply_transpose(ax);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 2.0 * y[i] + beta * weights[i] * weights[i] * x[i];
    return y;
}

/// Cached form of normal_apply. The system matrix 2 A^T A + beta diag(w^2)
/// is the same in every outer iteration, so it is assembled once into a
/// symmetric sparse form (diagonal plus strict upper triangle); each CG
/// application is then a single small matvec instead of two passes over
/// the observation matrix. Entries are accumulated over observation rows
/// in ascending order, so the result is deterministic.
class NormalOperator {
public:
    NormalOperator(const ObservationBlocks& a, const Vec& weights, double beta) : n_(a.total_cols()) {
        if (weights.size() != n_)
            throw std::invalid_argument("NormalOperator: dimension mismatch");
        std::vector<std::map<std::size_t, double>> gram(n_);
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t i = 0; i < a.rows; ++i) {
            row.clear();
            for (std::size_t j = 0; j < a.blocks.size(); ++j) {
                const SparseMatrix& blk = a.blocks[j];
                for (std::size_t k = blk.row_begin(i); k < blk.row_end(i); ++k)
                    row.emplace_back(a.offsets[j] + blk.col(k), blk.value(k));
            }
            for (const auto& [c1, v1] : row)
                for (const auto& [c2, v2] : row)
                    if (c2 >= c1) gram[c1][c2] += 2.0 * v1 * v2;
        }
        diag_.assign(n_, 0.0);
        row_ptr_.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) {
            diag_[i] = beta * weights[i] * weights[i];
            for (const auto& [c, v] : gram[i]) {
                if (c == i) {
                    diag_[i] += v;
                    continue;
                }
                col_.push_back(c);
                val_.push_back(v);
            }
            row_ptr_[i + 1] = col_.size();
        }
    }

    Vec operator()(const Vec& x) const {
        if (x.size() != n_) throw std::invalid_argument("NormalOperator: dimension mismatch");
        Vec y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double xi = x[i];
            double s = diag_[i] * xi;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                s += val_[k] * x[col_[k]];
                y[col_[k]] += val_[k] * xi;
            }
            y[i] += s;
        }
        return y;
    }

private:
    std::size_t n_;
    Vec diag_, val_;
    std::vector<std::size_t> col_, row_ptr_;
};

/// ||A X - f||_2^2 + sum_i w_i |X_i|  with w the expanded level weights.
inline double objective(const ObservationBlocks& a, const Vec& f, const Vec& weights, const Vec& x) {
    if (f.size() != a.rows) throw std::invalid_argument("objective: rhs length mismatch");
    Vec r = a.apply(x);
    double fit = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double e = r[i] - f[i];
        fit += e * e;
    }
    double pen = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) pen += weights[i] * std::abs(x[i]);
    return fit + pen;
}

/// One pass of the three-step iteration, given the precomputed system
/// operator and atf2 = 2 A^T f:
///   X  <- argmin ||AX-f||^2 + beta/2 ||lambda X - d + b/beta||^2   (CG)
///   d  <- T_{1/beta}(lambda X + b/beta)
///   b  <- b + (lambda X - d)
inline void admm_step(AdmmState& s, const NormalOperator& op, const Vec& atf2,
                      const Vec& weights, double beta) {
    const std::size_t n = weights.size();
    Vec rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs[i] = atf2[i] + beta * weights[i] * (s.d[i] - s.b[i] / beta);
    CgResult cg = cg_solve([&](const Vec& v) { return op(v); }, rhs, kCgRelTol, 10 * n, &s.x);
    if (!cg.converged) s.cg_warning = true;
    s.x = std::move(cg.x);
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = weights[i] * s.x[i] + s.b[i] / beta;
    s.d = soft_threshold(v, 1.0 / beta);
    for (std::size_t i = 0; i < n; ++i) s.b[i] += weights[i] * s.x[i] - s.d[i];
    ++s.iter;
}

/// Convenience overload assembling the operator on the fly; identical
/// arithmetic to the cached form.
inline void admm_step(AdmmState& s, const ObservationBlocks& a, const Vec& f,
                      const Vec& weights, double beta) {
    const NormalOperator op(a, weights, beta);
    Vec atf2 = a.apply_transpose(f);
    for (double& v : atf2) v *= 2.0;
    admm_step(s, op, atf2, weights, beta);
}

struct SolveResult {
    Vec x;
    std::size_t iterations = 0;
    bool converged = false;
    bool cg_warning = false;
};

inline std::vector<std::size_t> block_sizes(const ObservationBlocks& a) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j + 1 < a.offsets.size(); ++j)
        s.push_back(a.offsets[j + 1] - a.offsets[j]);
    return s;
}

/// Iterates admm_step from X = d = b = 0 until both the primal residual
/// ||d - lambda X||_2 and the dual residual ||beta lambda (d^k - d^{k-1})||_2
/// fall to eps, or max_outer is hit (result flagged, not an error). The
/// dual condition keeps the stationarity error on the active coordinates
/// at the same scale as the primal gap.
inline SolveResult solve_mlasso(const ObservationBlocks& a, const Vec& f, const SolverParams& params) {
    params.validate(a.level_count());
    if (f.size() != a.rows) throw std::invalid_argument("solve_mlasso: rhs length mismatch");
    const std::size_t n = a.total_cols();
    Vec weights = expand_level_weights(params.lambda, block_sizes(a));
    AdmmState s;
    s.x.assign(n, 0.0);
    s.d.assign(n, 0.0);
    s.b.assign(n, 0.0);
    Vec d_prev(n, 0.0);
    const NormalOperator op(a, weights, params.beta);
    Vec atf2 = a.apply_transpose(f);
    for (double& v : atf2) v *= 2.0;
    SolveResult out;
    while (s.iter < params.max_outer) {
        d_prev = s.d;
        admm_step(s, op, atf2, weights, params.beta);
        double gap = 0.0;
        double dual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = s.d[i] - weights[i] * s.x[i];
            gap += e * e;
            const double de = params.beta * weights[i] * (s.d[i] - d_prev[i]);
            dual += de * de;
        }
        if (std::sqrt(gap) <= params.eps && std::sqrt(dual) <= params.eps) {
            out.converged = true;
            break;
        }
    }
    // The CG-side iterate carries the accurate magnitudes; the shrinkage
    // side carries the exact zeros. On a converged run, coordinates
    // clamped by the soft threshold are reported as exact zeros.
    out.x = std::move(s.x);
    if (out.converged)
        for (std::size_t i = 0; i < n; ++i)
            if (s.d[i] == 0.0) out.x[i] = 0.0;
    out.iterations = s.iter;
    out.cg_warning = s.cg_warning;
    return out;
}

/// Zeroes every entry with |x_i| <= sigma.
inline void hard_threshold(Vec& x, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("hard_threshold: sigma must be >= 0");
    for (double& v : x)
        if (std::abs(v) <= sigma) v = 0.0;
}

struct FitReport {
    std::vector<std::size_t> l0;   // nonzero count per level, post-threshold
    double error = 0.0;            // RMS at the scatter points vs. truth
    double rms = 0.0;              // RMS on the regular evaluation grid
    std::size_t iterations = 0;
    double wall_time_seconds = 0.0;
    double final_objective = 0.0;
    bool converged = true;
};

struct FitResult {
    Vec coefficients;  // stacked, hard-thresholded
    FitReport report;
};

/// End-to-end: assemble, solve, hard-threshold. Error/RMS are left to the
/// caller, which knows the ground truth; l0, objective, iterations and the
/// solve wall time are filled here.
inline FitResult fit(const std::vector<Point>& points, const Vec& values,
                     const MultilevelBasis& basis, const SolverParams& params) {
    if (points.size() != values.size() || points.empty())
        throw std::invalid_argument("fit: need matching, nonempty points and values");
    ObservationBlocks a = assemble_observation(basis, points);
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult sol = solve_mlasso(a, values, params);
    const auto t1 = std::chrono::steady_clock::now();
    hard_threshold(sol.x, params.sigma);

    FitResult out;
    out.report.iterations = sol.iterations;
    out.report.converged = sol.converged;
    out.report.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
    Vec weights = expand_level_weights(params.lambda, basis.block_sizes());
    out.report.final_objective = objective(a, values, weights, sol.x);
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        std::size_t c = 0;
        for (std::size_t i = basis.offsets()[j]; i < basis.offsets()[j + 1]; ++i)
            if (sol.x[i] != 0.0) ++c;
        out.report.l0.push_back(c);
    }
    out.coefficients = std::move(sol.x);
    return out;
}

}  // namespace mlasso
