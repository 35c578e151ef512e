#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlasso/basis.hpp"

namespace mlasso {

/// 64-bit shift/multiply generator (splitmix64 recurrence):
///   z = (state += 0x9E3779B97F4A7C15)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   output z ^ (z >> 31)
/// Any implementation of this recurrence reproduces the byte-identical
/// stream, so experiments are portable across languages. split() seeds an
/// independent child stream from the next output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    /// Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform on the open interval (0,1).
    double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
    /// Uniform on the open interval (-1,1).
    double uniform_sym() { return 2.0 * uniform_open() - 1.0; }

    Rng split() { return Rng(next()); }

private:
    std::uint64_t state_;
};

enum class TestFunction { f1, f2, f3, f4 };

inline TestFunction parse_test_function(const std::string& id) {
    if (id == "f1") return TestFunction::f1;
    if (id == "f2") return TestFunction::f2;
    if (id == "f3") return TestFunction::f3;
    if (id == "f4") return TestFunction::f4;
    throw std::invalid_argument("unknown test function: " + id);
}

/// The four benchmark surfaces: discontinuous, non-smooth, smooth, Franke.
/// f1 and f2 take the removable-limit value 0 at the origin.
inline double eval_test_function(TestFunction id, double x, double y) {
    switch (id) {
        case TestFunction::f1: {
            const double r2 = x * x + y * y;
            if (r2 > 1.0) return x + y;
            return r2 == 0.0 ? 0.0 : x * x * y / r2;
        }
        case TestFunction::f2: {
            const double r2 = x * x + y * y;
            if (r2 > 1.0) return x * y;
            return r2 == 0.0 ? 0.0 : x * y / std::sqrt(r2);
        }
        case TestFunction::f3: {
            const double u = 3.0 * x - 1.0;
            return (1.25 + std::cos(5.4 * y)) / (6.0 + 6.0 * u * u);
        }
        case TestFunction::f4: {
            const double a = 9.0 * x, b = 9.0 * y;
            return 0.75 * std::exp(-((a - 2.0) * (a - 2.0) + (b - 2.0) * (b - 2.0)) / 4.0) +
                   0.75 * std::exp(-(a + 1.0) * (a + 1.0) / 49.0 - (b + 1.0) * (b + 1.0) / 10.0) +
                   0.5 * std::exp(-((a - 7.0) * (a - 7.0) + (b - 3.0) * (b - 3.0)) / 4.0) -
                   0.2 * std::exp(-(a - 4.0) * (a - 4.0) - (b - 7.0) * (b - 7.0));
        }
    }
    return 0.0;
}

inline std::vector<Point> sample_scatter(std::size_t n, std::uint64_t seed, const Domain& domain) {
    if (n < 1) throw std::invalid_argument("sample_scatter: n must be >= 1");
    Rng rng(seed);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = domain.x_min + rng.uniform01() * domain.width();
        const double y = domain.y_min + rng.uniform01() * domain.height();
        pts.push_back({x, y});
    }
    return pts;
}

/// Adds i.i.d. uniform noise on (-a, a) with a = max_i |f_i| / 10,
/// the amplitude taken from the sampled values themselves.
inline Vec add_noise(const Vec& values, std::uint64_t seed) {
    if (values.empty()) throw std::invalid_argument("add_noise: values must be nonempty");
    double a = 0.0;
    for (double v : values) a = std::max(a, std::abs(v));
    a /= 10.0;
    Vec out = values;
    if (a == 0.0) return out;
    Rng rng(seed);
    for (double& v : out) v += a * rng.uniform_sym();
    return out;
}

struct MetricGrid {
    std::size_t m1 = 50, n1 = 50;
};

using SurfaceEval = std::function<double(double, double)>;

/// Normalized RMS on the regular grid x_i = x_min + i w/(M-1), inclusive
/// of both domain edges.
inline double rms_error(const SurfaceEval& g, const SurfaceEval& f, const MetricGrid& grid,
                        const Domain& domain) {
    double ss = 0.0;
    for (std::size_t i = 0; i < grid.m1; ++i) {
        const double x = domain.x_min + domain.width() * static_cast<double>(i) / (grid.m1 - 1);
        for (std::size_t j = 0; j < grid.n1; ++j) {
            const double y = domain.y_min + domain.height() * static_cast<double>(j) / (grid.n1 - 1);
            const double e = g(x, y) - f(x, y);
            ss += e * e;
        }
    }
    return std::sqrt(ss / static_cast<double>(grid.m1 * grid.n1));
}

/// RMS over the scattered points against noise-free truth.
inline double data_error(const SurfaceEval& g, const std::vector<Point>& points,
                         const Vec& true_values) {
    if (points.size() != true_values.size() || points.empty())
        throw std::invalid_argument("data_error: need matching, nonempty points and values");
    double ss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double e = g(points[i].x, points[i].y) - true_values[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(points.size()));
}

inline std::vector<std::size_t> l0_per_level(const Vec& x, const std::vector<std::size_t>& offsets) {
    std::vector<std::size_t> counts;
    for (std::size_t j = 0; j + 1 < offsets.size(); ++j) {
        std::size_t c = 0;
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i)
            if (x[i] != 0.0) ++c;
        counts.push_back(c);
    }
    return counts;
}

}  // namespace mlasso
