#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlasso/linalg.hpp"

namespace mlasso {

struct Point {
    double x, y;
};

struct Domain {
    double x_min, x_max, y_min, y_max;

    Domain(double x0, double x1, double y0, double y1)
        : x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
        if (!(x_min < x_max) || !(y_min < y_max))
            throw std::invalid_argument("Domain: empty or inverted extents");
    }
    static Domain unit_square() { return Domain(-1.0, 1.0, -1.0, 1.0); }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

/// Uniform quadratic B-spline with support [0,3).
inline double bspline2(double t) {
    if (t < 0.0 || t >= 3.0) return 0.0;
    if (t < 1.0) return 0.5 * t * t;
    if (t < 2.0) return 0.5 * (-2.0 * t * t + 6.0 * t - 3.0);
    const double u = 3.0 - t;
    return 0.5 * u * u;
}

/// One refinement level over the domain. Knot spacing halves per level.
/// Basis indices run over k in {-2,...,intervals_per_dim-1} per axis, the
/// functions whose support meets the domain; the flat column order is
/// lexicographic in (k1,k2).
class LevelGrid {
public:
    LevelGrid(int level, const Domain& domain, int base_intervals)
        : level_(level), domain_(domain) {
        if (level < 1) throw std::invalid_argument("LevelGrid: level must be >= 1");
        if (base_intervals < 1) throw std::invalid_argument("LevelGrid: base_intervals must be >= 1");
        intervals_ = base_intervals << (level - 1);
        // Anisotropic domains keep separate spacings per axis; the paper's
        // square domain makes them equal.
        hx_ = domain.width() / intervals_;
        hy_ = domain.height() / intervals_;
    }

    int level() const { return level_; }
    int intervals_per_dim() const { return intervals_; }
    double spacing_x() const { return hx_; }
    double spacing_y() const { return hy_; }
    int per_dim() const { return intervals_ + 2; }
    std::size_t size() const {
        return static_cast<std::size_t>(per_dim()) * static_cast<std::size_t>(per_dim());
    }
    const Domain& domain() const { return domain_; }

    static constexpr int k_min = -2;
    int k_max() const { return intervals_ - 1; }

    std::pair<int, int> index_at(std::size_t flat) const {
        const int n = per_dim();
        return {k_min + static_cast<int>(flat) / n, k_min + static_cast<int>(flat) % n};
    }
    std::size_t flat_index(int k1, int k2) const {
        const int n = per_dim();
        return static_cast<std::size_t>(k1 - k_min) * n + static_cast<std::size_t>(k2 - k_min);
    }

    /// Grid coordinates of a point: s = (p - lower corner) / spacing.
    double grid_x(double x) const { return (x - domain_.x_min) / hx_; }
    double grid_y(double y) const { return (y - domain_.y_min) / hy_; }

    /// phi(2^{j-1} p / h - k) for the tensor-product quadratic B-spline.
    double tensor_eval(int k1, int k2, const Point& p) const {
        return bspline2(grid_x(p.x) - k1) * bspline2(grid_y(p.y) - k2);
    }

    /// Closed support box of basis (k1,k2) in domain coordinates,
    /// clipped to the domain. Used by the support-map plots.
    struct Box {
        double x0, y0, x1, y1;
    };
    Box support_box(int k1, int k2) const {
        Box b{domain_.x_min + k1 * hx_, domain_.y_min + k2 * hy_,
              domain_.x_min + (k1 + 3) * hx_, domain_.y_min + (k2 + 3) * hy_};
        b.x0 = std::max(b.x0, domain_.x_min);
        b.y0 = std::max(b.y0, domain_.y_min);
        b.x1 = std::min(b.x1, domain_.x_max);
        b.y1 = std::min(b.y1, domain_.y_max);
        return b;
    }

private:
    int level_;
    Domain domain_;
    int intervals_;
    double hx_, hy_;
};

inline LevelGrid build_index_set(int level, const Domain& domain, int base_intervals) {
    return LevelGrid(level, domain, base_intervals);
}

/// The J nested levels spanning the approximation space.
class MultilevelBasis {
public:
    MultilevelBasis(const Domain& domain, int levels, int base_intervals) : domain_(domain) {
        if (levels < 1) throw std::invalid_argument("MultilevelBasis: need at least one level");
        levels_.reserve(levels);
        offsets_.push_back(0);
        for (int j = 1; j <= levels; ++j) {
            levels_.emplace_back(j, domain, base_intervals);
            offsets_.push_back(offsets_.back() + levels_.back().size());
        }
    }

    const Domain& domain() const { return domain_; }
    std::size_t level_count() const { return levels_.size(); }
    const LevelGrid& level(std::size_t j) const { return levels_[j]; }
    std::size_t total_dim() const { return offsets_.back(); }
    const std::vector<std::size_t>& offsets() const { return offsets_; }
    std::vector<std::size_t> block_sizes() const {
        std::vector<std::size_t> s;
        for (const auto& g : levels_) s.push_back(g.size());
        return s;
    }

private:
    Domain domain_;
    std::vector<LevelGrid> levels_;
    std::vector<std::size_t> offsets_;  // size J+1, prefix sums of n_j
};

/// Per-level observation matrices A_j (N x n_j), A_j(i,k) = basis value at
/// the i-th scatter point. At most 9 nonzeros per row per level.
struct ObservationBlocks {
    std::vector<SparseMatrix> blocks;
    std::vector<std::size_t> offsets;  // size J+1
    std::size_t rows = 0;

    std::size_t level_count() const { return blocks.size(); }
    std::size_t total_cols() const { return offsets.back(); }

    /// y = sum_j A_j x_j for a stacked coefficient vector.
    Vec apply(const Vec& x) const {
        if (x.size() != total_cols()) throw std::invalid_argument("ObservationBlocks: dimension mismatch");
        Vec y(rows, 0.0);
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const SparseMatrix& a = blocks[j];
            for (std::size_t i = 0; i < rows; ++i) {
                double s = 0.0;
                for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
                    s += a.value(k) * x[offsets[j] + a.col(k)];
                y[i] += s;
            }
        }
        return y;
    }

    /// y = sum_j A_j^T r stacked blockwise.
    Vec apply_transpose(const Vec& r) const {
        if (r.size() != rows) throw std::invalid_argument("ObservationBlocks: dimension mismatch");
        Vec y(total_cols(), 0.0);
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const SparseMatrix& a = blocks[j];
            for (std::size_t i = 0; i < rows; ++i) {
                const double ri = r[i];
                for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
                    y[offsets[j] + a.col(k)] += a.value(k) * ri;
            }
        }
        return y;
    }
};

namespace detail {

/// Indices k with bspline2(s - k) possibly nonzero, clamped to the grid.
inline void support_range(double s, int k_lo_grid, int k_hi_grid, int& lo, int& hi) {
    lo = static_cast<int>(std::floor(s)) - 2;
    hi = static_cast<int>(std::floor(s));
    if (lo < k_lo_grid) lo = k_lo_grid;
    if (hi > k_hi_grid) hi = k_hi_grid;
}

}  // namespace detail

inline ObservationBlocks assemble_observation(const MultilevelBasis& basis,
                                              const std::vector<Point>& points) {
    for (const Point& p : points)
        if (!basis.domain().contains(p.x, p.y))
            throw std::invalid_argument("assemble_observation: point outside domain");

    ObservationBlocks out;
    out.rows = points.size();
    out.offsets = basis.offsets();
    out.blocks.reserve(basis.level_count());
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        const LevelGrid& g = basis.level(j);
        SparseMatrix a(points.size(), g.size());
        for (const Point& p : points) {
            const double sx = g.grid_x(p.x);
            const double sy = g.grid_y(p.y);
            int lo1, hi1, lo2, hi2;
            detail::support_range(sx, LevelGrid::k_min, g.k_max(), lo1, hi1);
            detail::support_range(sy, LevelGrid::k_min, g.k_max(), lo2, hi2);
            for (int k1 = lo1; k1 <= hi1; ++k1) {
                const double bx = bspline2(sx - k1);
                if (bx == 0.0) continue;
                for (int k2 = lo2; k2 <= hi2; ++k2) {
                    const double v = bx * bspline2(sy - k2);
                    if (v != 0.0) a.push(g.flat_index(k1, k2), v);
                }
            }
            a.end_row();
        }
        out.blocks.push_back(std::move(a));
    }
    return out;
}

/// g(p) = sum_j sum_k X_k^j phi_k^j(p), evaluated over the local supports.
inline double eval_surface(const MultilevelBasis& basis, const Vec& x, const Point& p) {
    if (x.size() != basis.total_dim())
        throw std::invalid_argument("eval_surface: coefficient length mismatch");
    double g = 0.0;
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        const LevelGrid& grid = basis.level(j);
        const std::size_t off = basis.offsets()[j];
        const double sx = grid.grid_x(p.x);
        const double sy = grid.grid_y(p.y);
        int lo1, hi1, lo2, hi2;
        detail::support_range(sx, LevelGrid::k_min, grid.k_max(), lo1, hi1);
        detail::support_range(sy, LevelGrid::k_min, grid.k_max(), lo2, hi2);
        for (int k1 = lo1; k1 <= hi1; ++k1) {
            const double bx = bspline2(sx - k1);
            if (bx == 0.0) continue;
            for (int k2 = lo2; k2 <= hi2; ++k2)
                g += x[off + grid.flat_index(k1, k2)] * bx * bspline2(sy - k2);
        }
    }
    return g;
}

}  // namespace mlasso
