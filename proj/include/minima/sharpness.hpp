#pragma once

// Sharpness of a trained model around its parameters:
//
//   SAM-sharpness      S = (1/K) sum_k |L(theta + d_k) - L(theta)| / rho, with
//                      d_k uniform on the sphere of radius rho in parameter
//                      space (standard normal draw, normalized, scaled).
//   Fisher-Rao norm    (L + 1) * sqrt(max(m, 0)), m = (1/N) sum_i <grad l_i, theta>.
//   Relative flatness  sum_{s,s'} <w_s, w_s'> Tr(H_{s,s'}), H the Hessian of the
//                      empirical loss w.r.t. the final-layer weight rows w_s.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "minima/dataset.hpp"
#include "minima/network.hpp"

namespace minima {

inline constexpr double kDefaultSharpnessRho = 0.005;
inline constexpr std::size_t kDefaultPerturbations = 100;

using ScalarLossFn = std::function<double(std::span<const double> theta)>;

/// Direction k of the perturbation set: uniform on the radius-rho sphere,
/// drawn from its own stream so the set is independent of evaluation order.
std::vector<double> sphere_perturbation(std::size_t dim, double rho, std::uint64_t seed, std::size_t k);

double sam_sharpness(std::span<const double> theta, const ScalarLossFn& loss, double rho, std::size_t k_count,
                     std::uint64_t seed);

/// Full-batch data loss (no weight decay) of the network on the dataset.
double sam_sharpness(const NetworkParams& params, const BatchView& data, LossKind kind, double rho,
                     std::size_t k_count, std::uint64_t seed);

struct FisherRao {
    double value = 0.0;
    double mean_inner_product = 0.0;  // m before clamping
    bool clamped = false;             // m < 0 was clamped to 0
};

/// Inner products with theta are linear, so m = <mean gradient, theta>.
FisherRao fisher_rao_from_mean_gradient(std::span<const double> theta, std::span<const double> mean_grad,
                                        std::size_t layer_count);

/// layer_count 0 means params.layer_count().
FisherRao fisher_rao_norm(const NetworkParams& params, const BatchView& data, LossKind kind,
                          std::size_t layer_count = 0);

/// Tr(H_{s,s'}) for every pair of final-layer output rows, as an m x m matrix,
/// from Hessian-vector products against coordinate directions.
std::vector<double> final_layer_block_traces(const NetworkParams& params, const BatchView& data, LossKind kind);

/// Hessian-vector product of the data loss w.r.t. the final-layer weights
/// (m x d, row-major) in the direction v of the same shape.
std::vector<double> final_layer_hvp(const NetworkParams& params, const BatchView& data, LossKind kind,
                                    std::span<const double> v);

double relative_flatness(const NetworkParams& params, const BatchView& data, LossKind kind);

struct SharpnessConfig {
    double rho = kDefaultSharpnessRho;
    std::size_t num_perturbations = kDefaultPerturbations;
    std::size_t layer_count = 0;  // 0: number of affine layers
    std::uint64_t seed = 0;
};

struct SharpnessReport {
    double sam_sharpness = 0.0;
    double fisher_rao_norm = 0.0;
    bool fr_clamped = false;
    double fr_mean_inner_product = 0.0;
    double relative_flatness = 0.0;
    SharpnessConfig config;
    LossKind loss_kind = LossKind::MSE;
    std::string checkpoint_hash;
    std::string dataset_id;
};

/// All three metrics. checkpoint_hash and dataset_id are left for the caller.
SharpnessReport measure_sharpness(const NetworkParams& params, const BatchView& data, LossKind kind,
                                  const SharpnessConfig& config);

/// {sam_sharpness, fisher_rao_norm, fr_clamped, relative_flatness, rho, K, L,
///  seed, checkpoint_hash, dataset_id, loss}
std::string sharpness_report_json(const SharpnessReport& report);

}  // namespace minima
