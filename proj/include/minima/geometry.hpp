#pragma once

#include <limits>
#include <string>
#include <vector>

#include "minima/objectives.hpp"

namespace minima {

/// Condition numbers are reported as +inf when the smallest eigenvalue
/// magnitude falls below this.
inline constexpr double kSingularEps = 1e-12;
inline constexpr double kDefaultFdStep = 1e-4;

struct Eigen2 {
    double max;  // algebraically larger
    double min;
};

/// Closed-form eigenvalues of a symmetric 2x2 matrix.
/// Throws ContractError when |H01 - H10| > 1e-9.
Eigen2 eigen_2x2(const Mat2& h);

struct HessianStats {
    double condition_number = 0.0;  // max|lambda| / min|lambda|, +inf when singular
    double trace = 0.0;
    double determinant = 0.0;
    double max_eigenvalue = 0.0;
    bool singular = false;
};

HessianStats hessian_stats(const Mat2& h);

/// Central second differences of evaluate(); the mixed term uses the four
/// diagonal neighbours. Output is symmetrized. Throws ContractError if step <= 0.
Mat2 fd_hessian_oracle(Objective fn, Point2 p, double step = kDefaultFdStep);

struct MinimumRow {
    Objective function;
    Point2 point;
    HessianStats stats;
};

/// One row per catalogued global minimum, in catalogue order.
std::vector<MinimumRow> minima_table(Objective fn);

/// CSV with header function,min_x,min_y,condition_number,hessian_trace,
/// hessian_determinant,max_eigenvalue.
std::string minima_csv(const std::vector<MinimumRow>& rows);

/// Published reference values for the golden check.
struct GoldenRow {
    Objective function;
    Point2 point;
    double condition_number;
    double trace;
    double determinant;
    double max_eigenvalue;
};

/// Himmelblau's four minima.
const std::vector<GoldenRow>& golden_minima_rows();
/// The six single-minimum functions.
const std::vector<GoldenRow>& golden_function_rows();

/// |printed| < 100: absolute 1e-3; otherwise relative 5e-4.
bool matches_printed(double printed, double computed);

struct GoldenMismatch {
    Objective function;
    Point2 point;
    std::string column;
    double printed;
    double computed;
};

/// Compares every golden cell against minima_table(); empty result means pass.
std::vector<GoldenMismatch> check_golden();

}  // namespace minima
