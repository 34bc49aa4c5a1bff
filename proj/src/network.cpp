#include "minima/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "minima/error.hpp"
#include "minima/kernels.hpp"
#include "minima/rng.hpp"

namespace minima {

std::string_view loss_name(LossKind kind) noexcept {
    return kind == LossKind::MSE ? "mse" : "cross_entropy";
}

std::size_t parameter_count(std::span<const std::size_t> widths) {
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) n += widths[k + 1] * widths[k] + widths[k + 1];
    return n;
}

NetworkParams::NetworkParams(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw ContractError("network needs at least an input and an output width");
    if (std::find(widths_.begin(), widths_.end(), std::size_t{0}) != widths_.end()) {
        throw ContractError("network widths must be positive");
    }
    std::size_t offset = 0;
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
        offsets_.push_back(offset);
        offset += widths_[k + 1] * widths_[k] + widths_[k + 1];
    }
    values_.assign(offset, 0.0);
}

std::span<double> NetworkParams::weights(std::size_t layer) {
    return std::span(values_).subspan(weight_offset(layer), out_width(layer) * in_width(layer));
}
std::span<const double> NetworkParams::weights(std::size_t layer) const {
    return std::span(values_).subspan(weight_offset(layer), out_width(layer) * in_width(layer));
}
std::span<double> NetworkParams::bias(std::size_t layer) {
    return std::span(values_).subspan(bias_offset(layer), out_width(layer));
}
std::span<const double> NetworkParams::bias(std::size_t layer) const {
    return std::span(values_).subspan(bias_offset(layer), out_width(layer));
}

void kaiming_uniform_init(NetworkParams& params, std::uint64_t seed) {
    Rng rng(seed, Stream::Init);
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        const double bound = std::sqrt(6.0 / static_cast<double>(params.in_width(k)));
        for (double& w : params.weights(k)) w = rng.uniform(-bound, bound);
        std::ranges::fill(params.bias(k), 0.0);
    }
}

Evaluator::Evaluator(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw ContractError("network needs at least an input and an output width");
    acts_.resize(widths_.size());
    wt_.resize(widths_.size() - 1);
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) wt_[k].resize(widths_[k] * widths_[k + 1]);
}

void Evaluator::prepare(std::size_t rows) {
    rows_ = rows;
    for (std::size_t k = 1; k < widths_.size(); ++k) acts_[k].resize(rows * widths_[k]);
}

std::span<const double> Evaluator::forward(const NetworkParams& params, std::span<const double> inputs,
                                           std::size_t rows) {
    if (params.widths() != widths_) throw ContractError("forward: parameter shape does not match evaluator");
    if (inputs.size() != rows * widths_.front()) {
        throw ContractError("forward: expected " + std::to_string(rows * widths_.front()) + " input values, got " +
                            std::to_string(inputs.size()));
    }
    const auto& kt = kernels::active();
    prepare(rows);
    acts_[0].assign(inputs.begin(), inputs.end());
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t k = 0; k < layers; ++k) {
        const std::size_t in = widths_[k];
        const std::size_t out = widths_[k + 1];
        // W is out x in; the kernel wants B = W^T (in x out).
        const auto w = params.weights(k);
        auto& wt = wt_[k];
        for (std::size_t o = 0; o < out; ++o) {
            for (std::size_t i = 0; i < in; ++i) wt[i * out + o] = w[o * in + i];
        }
        double* z = acts_[k + 1].data();
        if (rows > 0) {
            kt.gemm_nn(rows, out, in, acts_[k].data(), in, wt.data(), out, z, out, false);
            kt.bias_activate(z, rows, out, out, params.bias(k).data(), k + 1 < layers);
            if (!kt.all_finite(z, rows * out)) throw NumericError("non-finite activation", k);
        }
    }
    return acts_.back();
}

std::span<const double> Evaluator::features() const { return acts_[widths_.size() - 2]; }
std::span<const double> Evaluator::outputs() const { return acts_.back(); }

namespace {

// Ascending-order sum, independent of the order of the terms.
double sorted_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
}

}  // namespace

double Evaluator::data_loss(const BatchView& batch, LossKind kind, std::vector<double>* d_out) const {
    const std::size_t rows = rows_;
    const std::size_t m = widths_.back();
    const auto& out = acts_.back();
    if (d_out) d_out->resize(rows * m);
    if (kind == LossKind::MSE) {
        if (batch.targets.size() != rows * m) throw ContractError("loss: MSE needs rows * output_width targets");
        const double scale = 2.0 / static_cast<double>(rows * m);
        terms_.resize(rows * m);
        for (std::size_t i = 0; i < rows * m; ++i) {
            const double r = out[i] - batch.targets[i];
            terms_[i] = r * r;
            if (d_out) (*d_out)[i] = scale * r;
        }
        return sorted_sum(terms_) / static_cast<double>(rows * m);
    }
    if (batch.targets.size() != rows) throw ContractError("loss: cross-entropy needs one class index per row");
    const double inv_rows = 1.0 / static_cast<double>(rows);
    terms_.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double t = batch.targets[i];
        if (!(t >= 0.0) || t != std::floor(t) || t >= static_cast<double>(m)) {
            throw ContractError("loss: class index out of range at row " + std::to_string(i));
        }
        const auto label = static_cast<std::size_t>(t);
        const double* z = out.data() + i * m;
        const double zmax = *std::max_element(z, z + m);
        double denom = 0.0;
        for (std::size_t c = 0; c < m; ++c) denom += std::exp(z[c] - zmax);
        terms_[i] = std::log(denom) + zmax - z[label];
        if (d_out) {
            for (std::size_t c = 0; c < m; ++c) {
                const double p = std::exp(z[c] - zmax) / denom;
                (*d_out)[i * m + c] = (p - (c == label ? 1.0 : 0.0)) * inv_rows;
            }
        }
    }
    return sorted_sum(terms_) * inv_rows;
}

double Evaluator::loss(const NetworkParams& params, const BatchView& batch, LossKind kind, double weight_decay) {
    if (batch.rows == 0) throw ContractError("loss: empty batch");
    forward(params, batch.inputs, batch.rows);
    double value = data_loss(batch, kind, nullptr);
    if (weight_decay != 0.0) {
        const auto theta = params.values();
        value += 0.5 * weight_decay * kernels::active().dot(theta.data(), theta.data(), theta.size());
    }
    return value;
}

double Evaluator::loss_and_gradient(const NetworkParams& params, const BatchView& batch, LossKind kind,
                                    double weight_decay, std::span<double> grad) {
    if (batch.rows == 0) throw ContractError("loss_and_gradient: empty batch");
    if (grad.size() != params.size()) throw ContractError("loss_and_gradient: gradient buffer has wrong size");
    const auto& kt = kernels::active();
    forward(params, batch.inputs, batch.rows);
    double value = data_loss(batch, kind, &delta_);
    const std::size_t rows = batch.rows;
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t k = layers; k-- > 0;) {
        const std::size_t in = widths_[k];
        const std::size_t out = widths_[k + 1];
        // dW = delta^T A_k (out x in), db = column sums of delta.
        kt.gemm_tn(rows, in, out, delta_.data(), out, acts_[k].data(), in, grad.data() + params.weight_offset(k), in,
                   false);
        kt.column_sums(delta_.data(), rows, out, out, grad.data() + params.bias_offset(k));
        if (!kt.all_finite(grad.data() + params.weight_offset(k), out * in + out)) {
            throw NumericError("non-finite gradient", k);
        }
        if (k == 0) break;
        // delta_{k-1} = (delta W) masked by the ReLU of layer k-1.
        delta_prev_.resize(rows * in);
        kt.gemm_nn(rows, in, out, delta_.data(), out, params.weights(k).data(), in, delta_prev_.data(), in, false);
        kt.relu_backward(acts_[k].data(), delta_prev_.data(), rows * in);
        delta_.swap(delta_prev_);
    }
    if (weight_decay != 0.0) {
        const auto theta = params.values();
        value += 0.5 * weight_decay * kt.dot(theta.data(), theta.data(), theta.size());
        add_weight_decay_gradient(theta, weight_decay, grad);
    }
    return value;
}

void add_weight_decay_gradient(std::span<const double> theta, double weight_decay, std::span<double> grad) {
    if (theta.size() != grad.size()) throw ContractError("weight decay: size mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += weight_decay * theta[i];
}

double loss(const NetworkParams& params, const BatchView& batch, LossKind kind, double weight_decay) {
    Evaluator ev(params.widths());
    return ev.loss(params, batch, kind, weight_decay);
}

LossGradient loss_and_gradient(const NetworkParams& params, const BatchView& batch, LossKind kind,
                               double weight_decay) {
    Evaluator ev(params.widths());
    LossGradient out{0.0, NetworkParams(params.widths())};
    out.loss = ev.loss_and_gradient(params, batch, kind, weight_decay, out.gradient.values());
    return out;
}

std::vector<double> forward(const NetworkParams& params, std::span<const double> inputs, std::size_t rows) {
    Evaluator ev(params.widths());
    const auto out = ev.forward(params, inputs, rows);
    return {out.begin(), out.end()};
}

}  // namespace minima
