#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlasso/basis.hpp"
#include "mlasso/experiments.hpp"
#include "mlasso/solver.hpp"

namespace mlasso {

/// Scientific notation, 5 significant digits (the table format).
inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4e", v);
    return buf;
}

struct ReportRow {
    std::string method;
    FitReport report;
};

/// CSV with header method,l0_1..l0_J,error,rms,iterations,time_sec.
inline void emit_table(const std::vector<ReportRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_table: no rows");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_table: cannot open " + path);
    const std::size_t levels = rows.front().report.l0.size();
    out << "method";
    for (std::size_t j = 1; j <= levels; ++j) out << ",l0_" << j;
    out << ",error,rms,iterations,time_sec\n";
    for (const ReportRow& r : rows) {
        out << r.method;
        for (std::size_t c : r.report.l0) out << ',' << c;
        out << ',' << fmt_sci(r.report.error) << ',' << fmt_sci(r.report.rms) << ','
            << r.report.iterations << ',' << fmt_sci(r.report.wall_time_seconds) << '\n';
    }
}

inline std::vector<ReportRow> parse_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_table: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_table: empty file");
    std::size_t levels = 0;
    for (std::size_t pos = 0; (pos = line.find(",l0_", pos)) != std::string::npos; ++pos) ++levels;
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        ReportRow r;
        std::getline(ss, r.method, ',');
        for (std::size_t j = 0; j < levels; ++j) {
            std::getline(ss, field, ',');
            r.report.l0.push_back(std::stoul(field));
        }
        std::getline(ss, field, ',');
        r.report.error = std::stod(field);
        std::getline(ss, field, ',');
        r.report.rms = std::stod(field);
        std::getline(ss, field, ',');
        r.report.iterations = std::stoul(field);
        std::getline(ss, field, ',');
        r.report.wall_time_seconds = std::stod(field);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace detail {

inline const char* level_color(std::size_t level_1based) {
    switch (level_1based) {
        case 1: return "red";
        case 2: return "green";
        case 3: return "blue";
        default: return "black";
    }
}

}  // namespace detail

/// SVG support map: one rectangle per nonzero coefficient, drawn at the
/// basis function's support box clipped to the domain, colored by level
/// (1 red, 2 green, 3 blue, 4+ black), with a domain frame and legend.
inline void emit_support_map(const Vec& x, const MultilevelBasis& basis, const std::string& path) {
    if (x.size() != basis.total_dim())
        throw std::invalid_argument("emit_support_map: coefficient length mismatch");
    const Domain& dom = basis.domain();
    const double px = 500.0;  // drawing area, plus margin for the legend
    const double sx = px / dom.width(), sy = px / dom.height();
    auto map_x = [&](double x_) { return 20.0 + (x_ - dom.x_min) * sx; };
    auto map_y = [&](double y_) { return 20.0 + (dom.y_max - y_) * sy; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_support_map: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"540\">\n";
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        const LevelGrid& g = basis.level(j);
        const std::size_t off = basis.offsets()[j];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[off + i] == 0.0) continue;
            auto [k1, k2] = g.index_at(i);
            const LevelGrid::Box b = g.support_box(k1, k2);
            out << "<rect class=\"support level" << j + 1 << "\" x=\"" << fmt_sci(map_x(b.x0))
                << "\" y=\"" << fmt_sci(map_y(b.y1)) << "\" width=\"" << fmt_sci((b.x1 - b.x0) * sx)
                << "\" height=\"" << fmt_sci((b.y1 - b.y0) * sy) << "\" fill=\"none\" stroke=\""
                << detail::level_color(j + 1) << "\"/>\n";
        }
    }
    out << "<rect x=\"20\" y=\"20\" width=\"500\" height=\"500\" fill=\"none\" stroke=\"gray\" stroke-width=\"2\"/>\n";
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        const double ly = 40.0 + 24.0 * j;
        out << "<rect x=\"540\" y=\"" << ly << "\" width=\"16\" height=\"16\" fill=\"none\" stroke=\""
            << detail::level_color(j + 1) << "\"/>\n"
            << "<text x=\"562\" y=\"" << ly + 13.0 << "\" font-size=\"14\">level " << j + 1
            << "</text>\n";
    }
    out << "</svg>\n";
}

/// Counts "support" rectangles per level in an SVG written by
/// emit_support_map. Used to check figure fidelity.
inline std::vector<std::size_t> count_svg_rectangles(const std::string& path, std::size_t levels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("count_svg_rectangles: cannot open " + path);
    std::vector<std::size_t> counts(levels, 0);
    std::string line;
    while (std::getline(in, line)) {
        for (std::size_t j = 0; j < levels; ++j) {
            const std::string tag = "class=\"support level" + std::to_string(j + 1) + "\"";
            if (line.find(tag) != std::string::npos) ++counts[j];
        }
    }
    return counts;
}

struct HeightmapRange {
    double min = 0.0, max = 0.0;
};

/// ASCII PGM of the fitted surface sampled on the metric grid, min/max
/// normalized to 0..255. Returns the normalization range so it can be
/// recorded alongside.
inline HeightmapRange emit_heightmap(const SurfaceEval& g, const MetricGrid& grid,
                                     const Domain& domain, const std::string& path) {
    std::vector<double> z;
    z.reserve(grid.m1 * grid.n1);
    for (std::size_t j = 0; j < grid.n1; ++j) {
        const double y = domain.y_max - domain.height() * static_cast<double>(j) / (grid.n1 - 1);
        for (std::size_t i = 0; i < grid.m1; ++i) {
            const double x = domain.x_min + domain.width() * static_cast<double>(i) / (grid.m1 - 1);
            z.push_back(g(x, y));
        }
    }
    HeightmapRange range{*std::min_element(z.begin(), z.end()),
                         *std::max_element(z.begin(), z.end())};
    const double span = range.max - range.min;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_heightmap: cannot open " + path);
    out << "P2\n" << grid.m1 << ' ' << grid.n1 << "\n255\n";
    for (std::size_t j = 0; j < grid.n1; ++j) {
        for (std::size_t i = 0; i < grid.m1; ++i) {
            const double v = span > 0.0 ? (z[j * grid.m1 + i] - range.min) / span : 0.0;
            out << static_cast<int>(std::lround(v * 255.0));
            out << (i + 1 == grid.m1 ? '\n' : ' ');
        }
    }
    return range;
}

/// Coefficient dump: one `level k1 k2 value` record per basis function
/// with a nonzero coefficient, in column order.
inline void emit_coefficients(const Vec& x, const MultilevelBasis& basis, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_coefficients: cannot open " + path);
    out << "# level k1 k2 value\n";
    for (std::size_t j = 0; j < basis.level_count(); ++j) {
        const LevelGrid& g = basis.level(j);
        const std::size_t off = basis.offsets()[j];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[off + i] == 0.0) continue;
            auto [k1, k2] = g.index_at(i);
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.17g", x[off + i]);
            out << j + 1 << ' ' << k1 << ' ' << k2 << ' ' << buf << '\n';
        }
    }
}

/// Scattered-data file: one `x y f` record per line, `#` comments.
inline void read_xyz(const std::string& path, std::vector<Point>& points, Vec& values) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_xyz: cannot open " + path);
    points.clear();
    values.clear();
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double x, y, f;
        if (ss >> x >> y >> f) {
            points.push_back({x, y});
            values.push_back(f);
        }
    }
    if (points.empty()) throw std::runtime_error("read_xyz: no records in " + path);
}

/// FNV-1a over the canonical config string; names the run's artifacts.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mlasso
