#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlasso/basis.hpp"
#include "mlasso/linalg.hpp"
#include "mlasso/solver.hpp"

namespace mlasso {

/// Level-by-level residual least squares: fit X_j to the residual left by
/// levels 1..j-1, stop early once the max-norm of the residual drops
/// below stop_tol. Remaining blocks stay zero. The small ridge guards
/// rank deficiency from under-covered boundary basis functions.
inline SolveResult multilevel_lsq(const ObservationBlocks& a, const Vec& f, std::size_t levels,
                                  double ridge = 1e-12, double stop_tol = 1e-3) {
    if (levels > a.level_count())
        throw std::invalid_argument("multilevel_lsq: more levels than assembled blocks");
    if (f.size() != a.rows) throw std::invalid_argument("multilevel_lsq: rhs length mismatch");

    SolveResult out;
    out.x.assign(a.total_cols(), 0.0);
    out.converged = true;
    Vec residual = f;

    for (std::size_t j = 0; j < levels; ++j) {
        double rmax = 0.0;
        for (double r : residual) rmax = std::max(rmax, std::abs(r));
        if (rmax <= stop_tol) break;

        const SparseMatrix& aj = a.blocks[j];
        const std::size_t nj = aj.cols();
        Vec rhs(nj, 0.0);
        aj.multiply_transpose_add(residual, rhs);
        auto op = [&](const Vec& v) {
            Vec av;
            aj.multiply(v, av);
            Vec y(nj, 0.0);
            aj.multiply_transpose_add(av, y);
            for (std::size_t i = 0; i < nj; ++i) y[i] += ridge * v[i];
            return y;
        };
        CgResult cg = cg_solve(op, rhs, kCgRelTol, 10 * nj);
        if (!cg.converged) out.cg_warning = true;
        Vec ax;
        aj.multiply(cg.x, ax);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= ax[i];
        for (std::size_t i = 0; i < nj; ++i) out.x[a.offsets[j] + i] = cg.x[i];
        ++out.iterations;
    }
    return out;
}

/// Group-penalized baseline: min ||AX-f||^2 + sum_j mu_j ||X_j||_2,
/// solved by the same splitting as the l1 model with d = X and the
/// shrinkage replaced by a per-level group shrinkage of mu_j / beta.
inline SolveResult aglasso_solve(const ObservationBlocks& a, const Vec& f, const Vec& mu,
                                 double beta = 1.0, double eps = 1e-4,
                                 std::size_t max_outer = 5000) {
    if (mu.size() != a.level_count())
        throw std::invalid_argument("aglasso_solve: mu count must match levels");
    for (double m : mu)
        if (!(m > 0.0)) throw std::invalid_argument("aglasso_solve: mu_j must be > 0");
    if (f.size() != a.rows) throw std::invalid_argument("aglasso_solve: rhs length mismatch");

    const std::size_t n = a.total_cols();
    const Vec ones(n, 1.0);
    Vec x(n, 0.0), d(n, 0.0), b(n, 0.0);
    Vec rhs_base = a.apply_transpose(f);
    for (double& v : rhs_base) v *= 2.0;

    SolveResult out;
    Vec d_prev(n, 0.0);
    const NormalOperator gram(a, ones, beta);
    auto op = [&](const Vec& v) { return gram(v); };
    while (out.iterations < max_outer) {
        d_prev = d;
        Vec rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = rhs_base[i] + beta * (d[i] - b[i] / beta);
        CgResult cg = cg_solve(op, rhs, kCgRelTol, 10 * n, &x);
        if (!cg.converged) out.cg_warning = true;
        x = std::move(cg.x);
        for (std::size_t j = 0; j < a.level_count(); ++j) {
            const std::size_t lo = a.offsets[j], hi = a.offsets[j + 1];
            Vec v(x.begin() + lo, x.begin() + hi);
            for (std::size_t i = lo; i < hi; ++i) v[i - lo] += b[i] / beta;
            Vec shrunk = block_soft_threshold(v, mu[j] / beta);
            for (std::size_t i = lo; i < hi; ++i) d[i] = shrunk[i - lo];
        }
        for (std::size_t i = 0; i < n; ++i) b[i] += x[i] - d[i];
        ++out.iterations;
        double gap = 0.0;
        double dual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = d[i] - x[i];
            gap += e * e;
            const double de = beta * (d[i] - d_prev[i]);
            dual += de * de;
        }
        if (std::sqrt(gap) <= eps && std::sqrt(dual) <= eps) {
            out.converged = true;
            break;
        }
    }
    // The CG-side iterate carries the accurate magnitudes; groups the
    // shrinkage clamped to zero are reported as exact zeros.
    if (out.converged)
        for (std::size_t j = 0; j < a.level_count(); ++j) {
            bool all_zero = true;
            for (std::size_t i = a.offsets[j]; i < a.offsets[j + 1]; ++i)
                if (d[i] != 0.0) all_zero = false;
            if (all_zero)
                for (std::size_t i = a.offsets[j]; i < a.offsets[j + 1]; ++i) x[i] = 0.0;
        }
    out.x = std::move(x);
    return out;
}

}  // namespace mlasso
