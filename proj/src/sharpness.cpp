#include "minima/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "minima/error.hpp"
#include "minima/kernels.hpp"
#include "minima/rng.hpp"

namespace minima {
namespace {

// Features and per-example output Hessians of the data loss at the final layer.
// The final layer is affine in its weights, so Hessian-vector products w.r.t.
// those weights are exact: (H v) = sum_i Hz_i (V phi_i) phi_i^T.
class FinalLayerCurvature {
public:
    FinalLayerCurvature(const NetworkParams& params, const BatchView& data, LossKind kind)
        : layer_(params.layer_count() - 1),
          d_(params.in_width(layer_)),
          m_(params.out_width(layer_)),
          rows_(data.rows),
          kind_(kind) {
        if (rows_ == 0) throw ContractError("relative flatness: empty dataset");
        Evaluator ev(params.widths());
        ev.forward(params, data.inputs, data.rows);
        const auto f = ev.features();
        features_.assign(f.begin(), f.end());
        if (kind_ == LossKind::CrossEntropy) {
            const auto z = ev.outputs();
            probs_.resize(rows_ * m_);
            for (std::size_t i = 0; i < rows_; ++i) {
                const double* zi = z.data() + i * m_;
                double zmax = zi[0];
                for (std::size_t c = 1; c < m_; ++c) zmax = std::max(zmax, zi[c]);
                double denom = 0.0;
                for (std::size_t c = 0; c < m_; ++c) denom += std::exp(zi[c] - zmax);
                for (std::size_t c = 0; c < m_; ++c) probs_[i * m_ + c] = std::exp(zi[c] - zmax) / denom;
            }
        }
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return d_; }

    std::vector<double> hvp(std::span<const double> v) const {
        if (v.size() != m_ * d_) throw ContractError("final_layer_hvp: direction has wrong size");
        std::vector<double> out(m_ * d_, 0.0);
        std::vector<double> dz(m_);
        std::vector<double> u(m_);
        const auto& kt = kernels::scalar_table();
        const double mse_scale = 2.0 / static_cast<double>(rows_ * m_);
        const double inv_rows = 1.0 / static_cast<double>(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* phi = features_.data() + i * d_;
            for (std::size_t s = 0; s < m_; ++s) dz[s] = kt.dot(v.data() + s * d_, phi, d_);
            if (kind_ == LossKind::MSE) {
                for (std::size_t s = 0; s < m_; ++s) u[s] = mse_scale * dz[s];
            } else {
                const double* p = probs_.data() + i * m_;
                double pdz = 0.0;
                for (std::size_t s = 0; s < m_; ++s) pdz += p[s] * dz[s];
                for (std::size_t s = 0; s < m_; ++s) u[s] = inv_rows * p[s] * (dz[s] - pdz);
            }
            for (std::size_t s = 0; s < m_; ++s) {
                if (u[s] != 0.0) kt.axpy(u[s], phi, out.data() + s * d_, d_);
            }
        }
        return out;
    }

private:
    std::size_t layer_;
    std::size_t d_;
    std::size_t m_;
    std::size_t rows_;
    LossKind kind_;
    std::vector<double> features_;
    std::vector<double> probs_;
};

}  // namespace

std::vector<double> sphere_perturbation(std::size_t dim, double rho, std::uint64_t seed, std::size_t k) {
    Rng rng(seed, (static_cast<std::uint64_t>(Stream::Sharpness) << 32) | static_cast<std::uint64_t>(k));
    std::vector<double> d(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : d) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double scale = rho / std::sqrt(norm2);
    for (double& x : d) x *= scale;
    return d;
}

double sam_sharpness(std::span<const double> theta, const ScalarLossFn& loss, double rho, std::size_t k_count,
                     std::uint64_t seed) {
    if (!(rho > 0.0)) throw ContractError("sam_sharpness: rho must be positive");
    if (k_count == 0) throw ContractError("sam_sharpness: need at least one perturbation");
    const double base = loss(theta);
    std::vector<double> shifted(theta.size());
    // Neumaier-compensated sum of the K terms.
    double total = 0.0;
    double carry = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto d = sphere_perturbation(theta.size(), rho, seed, k);
        for (std::size_t i = 0; i < theta.size(); ++i) shifted[i] = theta[i] + d[i];
        const double term = std::abs((loss(shifted) - base) / rho);
        const double next = total + term;
        carry += std::abs(total) >= term ? (total - next) + term : (term - next) + total;
        total = next;
    }
    return (total + carry) / static_cast<double>(k_count);
}

double sam_sharpness(const NetworkParams& params, const BatchView& data, LossKind kind, double rho,
                     std::size_t k_count, std::uint64_t seed) {
    Evaluator ev(params.widths());
    NetworkParams probe = params;
    return sam_sharpness(
        params.values(),
        [&](std::span<const double> theta) {
            std::copy(theta.begin(), theta.end(), probe.values().begin());
            return ev.loss(probe, data, kind);
        },
        rho, k_count, seed);
}

FisherRao fisher_rao_from_mean_gradient(std::span<const double> theta, std::span<const double> mean_grad,
                                        std::size_t layer_count) {
    if (theta.size() != mean_grad.size()) throw ContractError("fisher_rao: size mismatch");
    FisherRao fr;
    for (std::size_t i = 0; i < theta.size(); ++i) fr.mean_inner_product += mean_grad[i] * theta[i];
    const double lp1 = static_cast<double>(layer_count) + 1.0;
    if (fr.mean_inner_product < 0.0) {
        fr.clamped = true;
        fr.value = 0.0;
    } else {
        fr.value = lp1 * std::sqrt(fr.mean_inner_product);
    }
    return fr;
}

FisherRao fisher_rao_norm(const NetworkParams& params, const BatchView& data, LossKind kind,
                          std::size_t layer_count) {
    const auto lg = loss_and_gradient(params, data, kind, 0.0);
    return fisher_rao_from_mean_gradient(params.values(), lg.gradient.values(),
                                         layer_count ? layer_count : params.layer_count());
}

std::vector<double> final_layer_hvp(const NetworkParams& params, const BatchView& data, LossKind kind,
                                    std::span<const double> v) {
    return FinalLayerCurvature(params, data, kind).hvp(v);
}

std::vector<double> final_layer_block_traces(const NetworkParams& params, const BatchView& data, LossKind kind) {
    const FinalLayerCurvature curv(params, data, kind);
    const std::size_t m = curv.rows();
    const std::size_t d = curv.cols();
    std::vector<double> traces(m * m, 0.0);
    std::vector<double> e(m * d, 0.0);
    for (std::size_t s2 = 0; s2 < m; ++s2) {
        for (std::size_t a = 0; a < d; ++a) {
            e[s2 * d + a] = 1.0;
            const auto col = curv.hvp(e);
            e[s2 * d + a] = 0.0;
            // Column (s2, a) of H; its (s, a) entries are the diagonal of block (s, s2).
            for (std::size_t s = 0; s < m; ++s) traces[s * m + s2] += col[s * d + a];
        }
    }
    return traces;
}

double relative_flatness(const NetworkParams& params, const BatchView& data, LossKind kind) {
    const std::size_t last = params.layer_count() - 1;
    const std::size_t m = params.out_width(last);
    const std::size_t d = params.in_width(last);
    const auto w = params.weights(last);
    const auto traces = final_layer_block_traces(params, data, kind);
    double kappa = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t s2 = 0; s2 < m; ++s2) {
            double inner = 0.0;
            for (std::size_t a = 0; a < d; ++a) inner += w[s * d + a] * w[s2 * d + a];
            kappa += inner * traces[s * m + s2];
        }
    }
    return kappa;
}

SharpnessReport measure_sharpness(const NetworkParams& params, const BatchView& data, LossKind kind,
                                  const SharpnessConfig& config) {
    SharpnessReport r;
    r.config = config;
    if (r.config.layer_count == 0) r.config.layer_count = params.layer_count();
    r.loss_kind = kind;
    r.sam_sharpness = sam_sharpness(params, data, kind, config.rho, config.num_perturbations, config.seed);
    const FisherRao fr = fisher_rao_norm(params, data, kind, r.config.layer_count);
    r.fisher_rao_norm = fr.value;
    r.fr_clamped = fr.clamped;
    r.fr_mean_inner_product = fr.mean_inner_product;
    r.relative_flatness = relative_flatness(params, data, kind);
    return r;
}

std::string sharpness_report_json(const SharpnessReport& r) {
    nlohmann::ordered_json j;
    j["sam_sharpness"] = r.sam_sharpness;
    j["fisher_rao_norm"] = r.fisher_rao_norm;
    j["fr_clamped"] = r.fr_clamped;
    j["fr_mean_inner_product"] = r.fr_mean_inner_product;
    j["fisher_rao_loss"] = std::string(loss_name(r.loss_kind));
    j["relative_flatness"] = r.relative_flatness;
    j["rho"] = r.config.rho;
    j["K"] = r.config.num_perturbations;
    j["L"] = r.config.layer_count;
    j["seed"] = r.config.seed;
    j["checkpoint_hash"] = r.checkpoint_hash;
    j["dataset_id"] = r.dataset_id;
    j["loss"] = std::string(loss_name(r.loss_kind));
    return j.dump(2) + "\n";
}

}  // namespace minima
