#pragma once

// Fully connected ReLU network with reverse-mode gradients.
//
// Parameters live in one flat buffer, layer by layer: the weight matrix
// (out x in, row-major) followed by the bias vector. Hidden layers apply ReLU,
// the last layer is affine. The default architecture is 2 -> 64 -> 64 -> 1,
// i.e. three affine layers and 4,417 parameters.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace minima {

enum class LossKind { MSE, CrossEntropy };

std::string_view loss_name(LossKind kind) noexcept;

class NetworkParams {
public:
    NetworkParams() = default;
    /// Zero-initialised network with the given layer widths (at least two).
    explicit NetworkParams(std::vector<std::size_t> widths);

    static NetworkParams toy_mlp() { return NetworkParams({2, 64, 64, 1}); }

    const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    std::size_t layer_count() const noexcept { return widths_.empty() ? 0 : widths_.size() - 1; }
    std::size_t in_width(std::size_t layer) const { return widths_.at(layer); }
    std::size_t out_width(std::size_t layer) const { return widths_.at(layer + 1); }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t output_width() const { return widths_.back(); }

    std::size_t size() const noexcept { return values_.size(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_.at(layer) + out_width(layer) * in_width(layer);
    }
    std::span<double> weights(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<double> bias(std::size_t layer);
    std::span<const double> bias(std::size_t layer) const;

    bool same_shape(const NetworkParams& other) const noexcept { return widths_ == other.widths_; }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

private:
    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;
    std::vector<double> values_;
};

/// Sum over layers of out * in + out.
std::size_t parameter_count(std::span<const std::size_t> widths);

/// Kaiming-uniform weights, U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), and zero
/// biases, drawn from Rng(seed, Stream::Init) in flat-buffer order.
void kaiming_uniform_init(NetworkParams& params, std::uint64_t seed);

/// Row-major inputs (rows x input_width) and one target per row. For MSE the
/// targets are output values (rows x output_width); for cross-entropy they are
/// class indices stored as doubles (one per row).
struct BatchView {
    std::span<const double> inputs;
    std::span<const double> targets;
    std::size_t rows = 0;
};

/// Reusable forward/backward buffers for one network shape. Not thread-safe;
/// use one evaluator per thread.
class Evaluator {
public:
    explicit Evaluator(std::vector<std::size_t> widths);

    /// Network outputs (rows x output_width). Throws NumericError on non-finite
    /// activations and ContractError on shape mismatch.
    std::span<const double> forward(const NetworkParams& params, std::span<const double> inputs,
                                    std::size_t rows);

    /// Mean data loss plus weight_decay * 0.5 * ||theta||^2.
    double loss(const NetworkParams& params, const BatchView& batch, LossKind kind, double weight_decay = 0.0);

    /// Same loss; writes the full gradient into grad (params.size() entries).
    double loss_and_gradient(const NetworkParams& params, const BatchView& batch, LossKind kind,
                             double weight_decay, std::span<double> grad);

    /// Penultimate activations (rows x in_width(last layer)) from the last
    /// forward call.
    std::span<const double> features() const;
    std::span<const double> outputs() const;
    std::size_t rows() const noexcept { return rows_; }

private:
    void prepare(std::size_t rows);
    double data_loss(const BatchView& batch, LossKind kind, std::vector<double>* d_out) const;

    std::vector<std::size_t> widths_;
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> acts_;          // acts_[k]: input to layer k; acts_[L]: outputs
    std::vector<std::vector<double>> wt_;            // transposed weights per layer
    std::vector<double> delta_;
    std::vector<double> delta_prev_;
    mutable std::vector<double> terms_;  // per-example losses, summed in sorted order
};

double loss(const NetworkParams& params, const BatchView& batch, LossKind kind, double weight_decay = 0.0);

struct LossGradient {
    double loss = 0.0;
    NetworkParams gradient;
};

LossGradient loss_and_gradient(const NetworkParams& params, const BatchView& batch, LossKind kind,
                               double weight_decay = 0.0);

std::vector<double> forward(const NetworkParams& params, std::span<const double> inputs, std::size_t rows);

/// grad[i] += weight_decay * theta[i].
void add_weight_decay_gradient(std::span<const double> theta, double weight_decay, std::span<double> grad);

}  // namespace minima
