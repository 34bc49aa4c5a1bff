#include <doctest.h>

#include <cmath>
#include <limits>

#include "minima/error.hpp"
#include "minima/objectives.hpp"
#include "minima/rng.hpp"
#include "oracles.hpp"

using namespace minima;

TEST_CASE("evaluate at known minima") {
    CHECK(evaluate(Objective::Sphere, {0, 0}) == 0.0);
    CHECK(evaluate(Objective::Rosenbrock, {1, 1}) == 0.0);
    CHECK(evaluate(Objective::Himmelblau, {3, 2}) == 0.0);
    CHECK(evaluate(Objective::Beale, {3, 0.5}) == 0.0);
    CHECK(evaluate(Objective::Booth, {1, 3}) == 0.0);
    CHECK(evaluate(Objective::ThreeHumpCamel, {0, 0}) == 0.0);
    CHECK(evaluate(Objective::Rastrigin, {0, 0}) == 0.0);
}

TEST_CASE("standard Booth form") {
    // (x + 2y - 7)^2 + (2x + y - 5)^2 at (0, 0) = 49 + 25
    CHECK(evaluate(Objective::Booth, {0, 0}) == 74.0);
}

TEST_CASE("gradient examples") {
    const auto g = gradient(Objective::Sphere, {1, 2});
    CHECK(g[0] == 2.0);
    CHECK(g[1] == 4.0);
    const auto h = gradient(Objective::Himmelblau, {3, 2});
    CHECK(h[0] == 0.0);
    CHECK(h[1] == 0.0);
    const auto r = gradient(Objective::Rastrigin, {0, 0});
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
}

TEST_CASE("hessian examples") {
    const Mat2 s = hessian(Objective::Sphere, {0, 0});
    CHECK(s[0][0] == 2.0);
    CHECK(s[0][1] == 0.0);
    CHECK(s[1][1] == 2.0);
    const Mat2 r = hessian(Objective::Rosenbrock, {1, 1});
    CHECK(r[0][0] == 802.0);
    CHECK(r[0][1] == -400.0);
    CHECK(r[1][0] == -400.0);
    CHECK(r[1][1] == 200.0);
    const Mat2 h = hessian(Objective::Himmelblau, {3, 2});
    CHECK(h[0][0] == 74.0);
    CHECK(h[0][1] == 20.0);
    CHECK(h[1][1] == 34.0);
}

TEST_CASE("non-finite input is a domain error") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    for (Objective fn : kAllObjectives) {
        CHECK_THROWS_AS(evaluate(fn, {nan, 0}), DomainError);
        CHECK_THROWS_AS(gradient(fn, {0, inf}), DomainError);
        CHECK_THROWS_AS(hessian(fn, {-inf, 0}), DomainError);
    }
}

TEST_CASE("gradient matches central differences at 1000 random points") {
    for (Objective fn : kAllObjectives) {
        CAPTURE(objective_name(fn));
        Rng rng(static_cast<std::uint64_t>(fn), Stream::Test);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const Point2 p{rng.uniform(-3.5, 3.5), rng.uniform(-3.5, 3.5)};
            const auto g = gradient(fn, p);
            const double h = 1e-5;
            const double gx = (evaluate(fn, {p[0] + h, p[1]}) - evaluate(fn, {p[0] - h, p[1]})) / (2 * h);
            const double gy = (evaluate(fn, {p[0], p[1] + h}) - evaluate(fn, {p[0], p[1] - h})) / (2 * h);
            const double a[2] = {g[0], g[1]};
            const double b[2] = {gx, gy};
            worst = std::max(worst, oracle::max_relative_error(a, b, 1.0));
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("hessian is symmetric and matches differences of the analytic gradient") {
    for (Objective fn : kAllObjectives) {
        CAPTURE(objective_name(fn));
        Rng rng(100 + static_cast<std::uint64_t>(fn), Stream::Test);
        for (int t = 0; t < 100; ++t) {
            const Point2 p{rng.uniform(-3.5, 3.5), rng.uniform(-3.5, 3.5)};
            const Mat2 h = hessian(fn, p);
            CHECK(h[0][1] == h[1][0]);
            const double s = 1e-5;
            Mat2 fd{};
            for (int j = 0; j < 2; ++j) {
                Point2 pp = p, pm = p;
                pp[j] += s;
                pm[j] -= s;
                const auto gp = gradient(fn, pp);
                const auto gm = gradient(fn, pm);
                for (int i = 0; i < 2; ++i) fd[i][j] = (gp[i] - gm[i]) / (2 * s);
            }
            const double a[4] = {h[0][0], h[0][1], h[1][0], h[1][1]};
            const double b[4] = {fd[0][0], 0.5 * (fd[0][1] + fd[1][0]), 0.5 * (fd[0][1] + fd[1][0]), fd[1][1]};
            CHECK(oracle::max_relative_error(a, b, 1.0) < 1e-4);
        }
    }
}

TEST_CASE("objectives are non-negative on a grid over the sampling box") {
    for (Objective fn : kAllObjectives) {
        for (int i = 0; i <= 70; ++i) {
            for (int j = 0; j <= 70; ++j) {
                const Point2 p{-3.5 + 0.1 * i, -3.5 + 0.1 * j};
                CHECK(evaluate(fn, p) >= 0.0);
            }
        }
    }
}

TEST_CASE("catalogued minima have zero value and gradient") {
    for (Objective fn : kAllObjectives) {
        for (const Point2& m : global_minima(fn)) {
            CAPTURE(objective_name(fn));
            CHECK(std::abs(evaluate(fn, m)) < 1e-12);
            const auto g = gradient(fn, m);
            CHECK(std::hypot(g[0], g[1]) < 1e-9);
        }
    }
    const auto& him = global_minima(Objective::Himmelblau);
    REQUIRE(him.size() == 4);
    for (const Point2& m : him) {
        const auto g = gradient(Objective::Himmelblau, m);
        CHECK(std::hypot(g[0], g[1]) < 1e-8);
    }
    const auto printed = tabulated_minima(Objective::Himmelblau);
    REQUIRE(printed.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(printed[i][0] - him[i][0]) < 1e-5);
        CHECK(std::abs(printed[i][1] - him[i][1]) < 1e-5);
    }
}

TEST_CASE("names round-trip and parse leniently") {
    for (Objective fn : kAllObjectives) {
        CHECK(parse_objective(objective_name(fn)) == fn);
    }
    CHECK(parse_objective("Three-Hump Camel") == Objective::ThreeHumpCamel);
    CHECK(parse_objective("HIMMELBLAU") == Objective::Himmelblau);
    CHECK_FALSE(parse_objective("ackley").has_value());
}
