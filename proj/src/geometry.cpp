#include "minima/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "minima/error.hpp"

namespace minima {
namespace {

// Eigenvalues of the symmetric matrix [[a, b], [b, d]]. The smaller-magnitude
// root is recovered from the determinant to avoid cancellation.
Eigen2 eigen_sym(double a, double b, double d) {
    const double m = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), b);
    const double det = a * d - b * b;
    if (m > 0.0) {
        const double hi = m + r;
        return {hi, det / hi};
    }
    if (m < 0.0) {
        const double lo = m - r;
        return {det / lo, lo};
    }
    return {r, -r};
}

}  // namespace

Eigen2 eigen_2x2(const Mat2& h) {
    if (std::abs(h[0][1] - h[1][0]) > 1e-9) throw ContractError("eigen_2x2: matrix is not symmetric");
    const double b = 0.5 * (h[0][1] + h[1][0]);
    const double scale = std::max({std::abs(h[0][0]), std::abs(b), std::abs(h[1][1])});
    if (scale == 0.0) return {0.0, 0.0};
    if (!std::isfinite(scale)) throw DomainError("eigen_2x2: non-finite entry");
    const Eigen2 e = eigen_sym(h[0][0] / scale, b / scale, h[1][1] / scale);
    return {e.max * scale, e.min * scale};
}

HessianStats hessian_stats(const Mat2& h) {
    if (std::abs(h[0][1] - h[1][0]) > 1e-9) throw ContractError("hessian_stats: matrix is not symmetric");
    HessianStats s;
    s.trace = h[0][0] + h[1][1];
    s.determinant = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    const double b = 0.5 * (h[0][1] + h[1][0]);
    const double scale = std::max({std::abs(h[0][0]), std::abs(b), std::abs(h[1][1])});
    if (scale == 0.0) {
        s.singular = true;
        s.condition_number = std::numeric_limits<double>::infinity();
        return s;
    }
    // The ratio is taken on the scale-normalized matrix so that c*H and H
    // produce the same condition number whenever c*H is exactly representable.
    const Eigen2 unit = eigen_sym(h[0][0] / scale, b / scale, h[1][1] / scale);
    s.max_eigenvalue = unit.max * scale;
    const double big = std::max(std::abs(unit.max), std::abs(unit.min));
    const double small = std::min(std::abs(unit.max), std::abs(unit.min));
    if (small * scale < kSingularEps) {
        s.singular = true;
        s.condition_number = std::numeric_limits<double>::infinity();
    } else {
        s.condition_number = big / small;
    }
    return s;
}

Mat2 fd_hessian_oracle(Objective fn, Point2 p, double step) {
    if (!(step > 0.0)) throw ContractError("fd_hessian_oracle: step must be positive");
    const double x = p[0];
    const double y = p[1];
    const double h = step;
    const double f0 = evaluate(fn, p);
    const double hxx = (evaluate(fn, {x + h, y}) - 2.0 * f0 + evaluate(fn, {x - h, y})) / (h * h);
    const double hyy = (evaluate(fn, {x, y + h}) - 2.0 * f0 + evaluate(fn, {x, y - h})) / (h * h);
    const double hxy = (evaluate(fn, {x + h, y + h}) - evaluate(fn, {x + h, y - h}) -
                        evaluate(fn, {x - h, y + h}) + evaluate(fn, {x - h, y - h})) /
                       (4.0 * h * h);
    Mat2 out{{{hxx, hxy}, {hxy, hyy}}};
    const double sym = 0.5 * (out[0][1] + out[1][0]);
    out[0][1] = out[1][0] = sym;
    return out;
}

std::vector<MinimumRow> minima_table(Objective fn) {
    std::vector<MinimumRow> rows;
    for (const Point2& m : global_minima(fn)) rows.push_back({fn, m, hessian_stats(hessian(fn, m))});
    return rows;
}

std::string minima_csv(const std::vector<MinimumRow>& rows) {
    std::string out = "function,min_x,min_y,condition_number,hessian_trace,hessian_determinant,max_eigenvalue\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      std::string(objective_name(r.function)).c_str(), r.point[0], r.point[1],
                      r.stats.condition_number, r.stats.trace, r.stats.determinant, r.stats.max_eigenvalue);
        out += buf;
    }
    return out;
}

const std::vector<GoldenRow>& golden_minima_rows() {
    static const std::vector<GoldenRow> rows{
        {Objective::Himmelblau, {3.0, 2.0}, 3.200, 108.000, 2116.000, 82.284},
        {Objective::Himmelblau, {-2.805118, 3.131312}, 1.242, 145.39, 5222.890, 80.550},
        {Objective::Himmelblau, {-3.77931, -3.283186}, 1.892, 204.500, 9460.560, 133.786},
        {Objective::Himmelblau, {3.584428, -1.848126}, 3.674, 134.110, 3024.540, 105.419},
    };
    return rows;
}

const std::vector<GoldenRow>& golden_function_rows() {
    static const std::vector<GoldenRow> rows{
        {Objective::Sphere, {0.0, 0.0}, 1.000, 4.000, 4.000, 2.000},
        {Objective::Rosenbrock, {1.0, 1.0}, 2508.010, 1002.000, 400.000, 1001.600},
        {Objective::Rastrigin, {0.0, 0.0}, 1.000, 793.568, 157438.000, 396.784},
        {Objective::Beale, {3.0, 0.5}, 162.473, 49.281, 14.766, 48.980},
        {Objective::Booth, {1.0, 3.0}, 9.000, 20.000, 36.000, 18.000},
        {Objective::ThreeHumpCamel, {0.0, 0.0}, 2.784, 6.000, 7.000, 4.414},
    };
    return rows;
}

bool matches_printed(double printed, double computed) {
    if (std::abs(printed) < 100.0) return std::abs(printed - computed) <= 1e-3;
    return std::abs(printed - computed) <= 5e-4 * std::abs(printed);
}

std::vector<GoldenMismatch> check_golden() {
    std::vector<GoldenMismatch> out;
    auto check_rows = [&](const std::vector<GoldenRow>& golden) {
        for (const GoldenRow& g : golden) {
            // Match each golden row to the catalogue entry nearest its printed point.
            const auto table = minima_table(g.function);
            const auto it = std::min_element(table.begin(), table.end(), [&](const auto& a, const auto& b) {
                return std::hypot(a.point[0] - g.point[0], a.point[1] - g.point[1]) <
                       std::hypot(b.point[0] - g.point[0], b.point[1] - g.point[1]);
            });
            const HessianStats& s = it->stats;
            const std::pair<const char*, std::pair<double, double>> cells[] = {
                {"condition_number", {g.condition_number, s.condition_number}},
                {"hessian_trace", {g.trace, s.trace}},
                {"hessian_determinant", {g.determinant, s.determinant}},
                {"max_eigenvalue", {g.max_eigenvalue, s.max_eigenvalue}},
            };
            for (const auto& [column, values] : cells) {
                if (!matches_printed(values.first, values.second)) {
                    out.push_back({g.function, g.point, column, values.first, values.second});
                }
            }
        }
    };
    check_rows(golden_minima_rows());
    check_rows(golden_function_rows());
    return out;
}

}  // namespace minima
