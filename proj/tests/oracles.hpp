#pragma once

// Independent reference implementations used as test oracles. Plain loops,
// no library kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

struct NaiveResult {
    std::vector<double> outputs;  // rows x out
    double min_abs_preactivation = INFINITY;  // over hidden layers
};

// Flat layout: per layer, W (out x in, row-major) then b.
inline NaiveResult naive_forward(const std::vector<std::size_t>& widths, std::span<const double> theta,
                                 std::span<const double> inputs, std::size_t rows) {
    NaiveResult res;
    const std::size_t layers = widths.size() - 1;
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> a(inputs.begin() + static_cast<long>(r * widths[0]),
                              inputs.begin() + static_cast<long>((r + 1) * widths[0]));
        std::size_t off = 0;
        for (std::size_t k = 0; k < layers; ++k) {
            const std::size_t in = widths[k];
            const std::size_t out = widths[k + 1];
            std::vector<double> z(out);
            for (std::size_t o = 0; o < out; ++o) {
                double s = theta[off + out * in + o];
                for (std::size_t i = 0; i < in; ++i) s += theta[off + o * in + i] * a[i];
                z[o] = s;
            }
            off += out * in + out;
            if (k + 1 < layers) {
                for (double& v : z) {
                    res.min_abs_preactivation = std::min(res.min_abs_preactivation, std::abs(v));
                    v = v > 0.0 ? v : 0.0;
                }
            }
            a = std::move(z);
        }
        res.outputs.insert(res.outputs.end(), a.begin(), a.end());
    }
    return res;
}

inline double naive_mse(const std::vector<std::size_t>& widths, std::span<const double> theta,
                        std::span<const double> inputs, std::span<const double> targets, std::size_t rows) {
    const auto f = naive_forward(widths, theta, inputs, rows);
    double s = 0.0;
    for (std::size_t i = 0; i < f.outputs.size(); ++i) s += (f.outputs[i] - targets[i]) * (f.outputs[i] - targets[i]);
    return s / static_cast<double>(f.outputs.size());
}

inline double naive_ce(const std::vector<std::size_t>& widths, std::span<const double> theta,
                       std::span<const double> inputs, std::span<const double> labels, std::size_t rows) {
    const auto f = naive_forward(widths, theta, inputs, rows);
    const std::size_t m = widths.back();
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* z = f.outputs.data() + r * m;
        double denom = 0.0;
        for (std::size_t c = 0; c < m; ++c) denom += std::exp(z[c]);
        s += std::log(denom) - z[static_cast<std::size_t>(labels[r])];
    }
    return s / static_cast<double>(rows);
}

// Central differences of f at x with step h.
inline std::vector<double> central_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::span<const double> x, double h) {
    std::vector<double> g(x.size());
    std::vector<double> p(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = p[i];
        p[i] = xi + h;
        const double fp = f(p);
        p[i] = xi - h;
        const double fm = f(p);
        p[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / max(max_i |a_i|, max_i |b_i|, floor)
inline double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12) {
    double diff = 0.0;
    double scale = floor;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return diff / scale;
}

}  // namespace oracle
