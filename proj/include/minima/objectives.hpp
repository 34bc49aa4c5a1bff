#pragma once

// Two-dimensional benchmark objectives with closed-form value, gradient and
// Hessian, plus the catalogue of their global minima (all with value 0).
//
// Booth is the standard form (x + 2y - 7)^2 + (2x + y - 5)^2 with its minimum
// at (1, 3). Rosenbrock uses a = 1, b = 100 and Rastrigin a = 10.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minima {

using Point2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

enum class Objective { Sphere, Rosenbrock, Rastrigin, Beale, Booth, ThreeHumpCamel, Himmelblau };

inline constexpr std::array<Objective, 7> kAllObjectives{
    Objective::Sphere, Objective::Rosenbrock,     Objective::Rastrigin, Objective::Beale,
    Objective::Booth,  Objective::ThreeHumpCamel, Objective::Himmelblau};

/// Canonical lower-case identifier ("sphere", "three_hump_camel", ...).
std::string_view objective_name(Objective fn) noexcept;

/// Human-readable label used in tables ("Three hump camel").
std::string_view objective_label(Objective fn) noexcept;

/// Accepts canonical names and a few spellings ("threehumpcamel", "camel",
/// "himmelblaus"); case-insensitive.
std::optional<Objective> parse_objective(std::string_view name);

/// Throws DomainError when either coordinate is non-finite.
double evaluate(Objective fn, Point2 p);
Point2 gradient(Objective fn, Point2 p);
Mat2 hessian(Objective fn, Point2 p);

/// Global minima in catalogue order. Himmelblau's entries start from the
/// tabulated six-decimal coordinates and are polished by Newton iterations.
const std::vector<Point2>& global_minima(Objective fn);

/// Printed (unpolished) coordinates of the catalogue, same order.
std::vector<Point2> tabulated_minima(Objective fn);

}  // namespace minima
