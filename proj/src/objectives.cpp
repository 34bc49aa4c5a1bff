#include "minima/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "minima/error.hpp"

namespace minima {
namespace {

constexpr double kPi = std::numbers::pi;

// A residual r(x, y) with its gradient and Hessian; objectives that are sums
// of squared residuals assemble f = sum r^2, grad = 2 sum r dr and
// H = 2 sum (dr dr^T + r d2r).
struct Residual {
    double r;
    Point2 g;
    Mat2 h;
};

template <std::size_t N>
double sos_value(const std::array<Residual, N>& rs) {
    double f = 0.0;
    for (const auto& r : rs) f += r.r * r.r;
    return f;
}

template <std::size_t N>
Point2 sos_gradient(const std::array<Residual, N>& rs) {
    Point2 g{0.0, 0.0};
    for (const auto& r : rs) {
        g[0] += 2.0 * r.r * r.g[0];
        g[1] += 2.0 * r.r * r.g[1];
    }
    return g;
}

template <std::size_t N>
Mat2 sos_hessian(const std::array<Residual, N>& rs) {
    Mat2 h{};
    for (const auto& r : rs) {
        h[0][0] += 2.0 * (r.g[0] * r.g[0] + r.r * r.h[0][0]);
        h[0][1] += 2.0 * (r.g[0] * r.g[1] + r.r * r.h[0][1]);
        h[1][1] += 2.0 * (r.g[1] * r.g[1] + r.r * r.h[1][1]);
    }
    h[1][0] = h[0][1];
    return h;
}

std::array<Residual, 2> rosenbrock_residuals(double x, double y) {
    // (1 - x)^2 + 100 (y - x^2)^2 = r1^2 + r2^2 with r2 = 10 (y - x^2)
    return {Residual{1.0 - x, {-1.0, 0.0}, {}},
            Residual{10.0 * (y - x * x), {-20.0 * x, 10.0}, {{{-20.0, 0.0}, {0.0, 0.0}}}}};
}

std::array<Residual, 3> beale_residuals(double x, double y) {
    const double y2 = y * y;
    const double y3 = y2 * y;
    return {Residual{1.5 - x + x * y, {y - 1.0, x}, {{{0.0, 1.0}, {1.0, 0.0}}}},
            Residual{2.25 - x + x * y2, {y2 - 1.0, 2.0 * x * y}, {{{0.0, 2.0 * y}, {2.0 * y, 2.0 * x}}}},
            Residual{2.625 - x + x * y3,
                     {y3 - 1.0, 3.0 * x * y2},
                     {{{0.0, 3.0 * y2}, {3.0 * y2, 6.0 * x * y}}}}};
}

std::array<Residual, 2> booth_residuals(double x, double y) {
    return {Residual{x + 2.0 * y - 7.0, {1.0, 2.0}, {}}, Residual{2.0 * x + y - 5.0, {2.0, 1.0}, {}}};
}

std::array<Residual, 2> himmelblau_residuals(double x, double y) {
    return {Residual{x * x + y - 11.0, {2.0 * x, 1.0}, {{{2.0, 0.0}, {0.0, 0.0}}}},
            Residual{x + y * y - 7.0, {1.0, 2.0 * y}, {{{0.0, 0.0}, {0.0, 2.0}}}}};
}

void require_finite(Point2 p) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
        throw DomainError("objective evaluated at a non-finite point");
    }
}

std::vector<Point2> newton_polish(Objective fn, std::vector<Point2> seeds, int steps) {
    for (auto& p : seeds) {
        for (int it = 0; it < steps; ++it) {
            const Point2 g = gradient(fn, p);
            const Mat2 h = hessian(fn, p);
            const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if (det == 0.0) break;
            const double dx = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
            const double dy = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
            p[0] -= dx;
            p[1] -= dy;
        }
    }
    return seeds;
}

}  // namespace

std::string_view objective_name(Objective fn) noexcept {
    switch (fn) {
        case Objective::Sphere: return "sphere";
        case Objective::Rosenbrock: return "rosenbrock";
        case Objective::Rastrigin: return "rastrigin";
        case Objective::Beale: return "beale";
        case Objective::Booth: return "booth";
        case Objective::ThreeHumpCamel: return "three_hump_camel";
        case Objective::Himmelblau: return "himmelblau";
    }
    return "unknown";
}

std::string_view objective_label(Objective fn) noexcept {
    switch (fn) {
        case Objective::Sphere: return "Sphere";
        case Objective::Rosenbrock: return "Rosenbrock";
        case Objective::Rastrigin: return "Rastrigin";
        case Objective::Beale: return "Beale";
        case Objective::Booth: return "Booth";
        case Objective::ThreeHumpCamel: return "Three hump camel";
        case Objective::Himmelblau: return "Himmelblau";
    }
    return "unknown";
}

std::optional<Objective> parse_objective(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c == '_' || c == '-' || c == ' ') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "sphere") return Objective::Sphere;
    if (key == "rosenbrock") return Objective::Rosenbrock;
    if (key == "rastrigin") return Objective::Rastrigin;
    if (key == "beale") return Objective::Beale;
    if (key == "booth") return Objective::Booth;
    if (key == "threehumpcamel" || key == "camel") return Objective::ThreeHumpCamel;
    if (key == "himmelblau" || key == "himmelblaus") return Objective::Himmelblau;
    return std::nullopt;
}

double evaluate(Objective fn, Point2 p) {
    require_finite(p);
    const double x = p[0];
    const double y = p[1];
    switch (fn) {
        case Objective::Sphere: return x * x + y * y;
        case Objective::Rosenbrock: return sos_value(rosenbrock_residuals(x, y));
        case Objective::Rastrigin:
            return 20.0 + x * x - 10.0 * std::cos(2.0 * kPi * x) + y * y - 10.0 * std::cos(2.0 * kPi * y);
        case Objective::Beale: return sos_value(beale_residuals(x, y));
        case Objective::Booth: return sos_value(booth_residuals(x, y));
        case Objective::ThreeHumpCamel: {
            const double x2 = x * x;
            return 2.0 * x2 - 1.05 * x2 * x2 + x2 * x2 * x2 / 6.0 + x * y + y * y;
        }
        case Objective::Himmelblau: return sos_value(himmelblau_residuals(x, y));
    }
    return 0.0;
}

Point2 gradient(Objective fn, Point2 p) {
    require_finite(p);
    const double x = p[0];
    const double y = p[1];
    switch (fn) {
        case Objective::Sphere: return {2.0 * x, 2.0 * y};
        case Objective::Rosenbrock: return sos_gradient(rosenbrock_residuals(x, y));
        case Objective::Rastrigin:
            return {2.0 * x + 20.0 * kPi * std::sin(2.0 * kPi * x), 2.0 * y + 20.0 * kPi * std::sin(2.0 * kPi * y)};
        case Objective::Beale: return sos_gradient(beale_residuals(x, y));
        case Objective::Booth: return sos_gradient(booth_residuals(x, y));
        case Objective::ThreeHumpCamel: {
            const double x2 = x * x;
            return {4.0 * x - 4.2 * x2 * x + x2 * x2 * x + y, x + 2.0 * y};
        }
        case Objective::Himmelblau: return sos_gradient(himmelblau_residuals(x, y));
    }
    return {0.0, 0.0};
}

Mat2 hessian(Objective fn, Point2 p) {
    require_finite(p);
    const double x = p[0];
    const double y = p[1];
    switch (fn) {
        case Objective::Sphere: return {{{2.0, 0.0}, {0.0, 2.0}}};
        case Objective::Rosenbrock: return sos_hessian(rosenbrock_residuals(x, y));
        case Objective::Rastrigin: {
            const double c = 40.0 * kPi * kPi;
            return {{{2.0 + c * std::cos(2.0 * kPi * x), 0.0}, {0.0, 2.0 + c * std::cos(2.0 * kPi * y)}}};
        }
        case Objective::Beale: return sos_hessian(beale_residuals(x, y));
        case Objective::Booth: return sos_hessian(booth_residuals(x, y));
        case Objective::ThreeHumpCamel: {
            const double x2 = x * x;
            return {{{4.0 - 12.6 * x2 + 5.0 * x2 * x2, 1.0}, {1.0, 2.0}}};
        }
        case Objective::Himmelblau: return sos_hessian(himmelblau_residuals(x, y));
    }
    return {};
}

std::vector<Point2> tabulated_minima(Objective fn) {
    switch (fn) {
        case Objective::Sphere: return {{0.0, 0.0}};
        case Objective::Rosenbrock: return {{1.0, 1.0}};
        case Objective::Rastrigin: return {{0.0, 0.0}};
        case Objective::Beale: return {{3.0, 0.5}};
        case Objective::Booth: return {{1.0, 3.0}};
        case Objective::ThreeHumpCamel: return {{0.0, 0.0}};
        case Objective::Himmelblau:
            return {{3.0, 2.0}, {-2.805118, 3.131312}, {-3.77931, -3.283186}, {3.584428, -1.848126}};
    }
    return {};
}

const std::vector<Point2>& global_minima(Objective fn) {
    static const std::array<std::vector<Point2>, kAllObjectives.size()> catalogue = [] {
        std::array<std::vector<Point2>, kAllObjectives.size()> out;
        for (Objective f : kAllObjectives) {
            auto pts = tabulated_minima(f);
            if (f == Objective::Himmelblau) pts = newton_polish(f, std::move(pts), 10);
            out[static_cast<std::size_t>(f)] = std::move(pts);
        }
        return out;
    }();
    return catalogue[static_cast<std::size_t>(fn)];
}

}  // namespace minima
