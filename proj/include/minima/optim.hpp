#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace minima {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double momentum = 0.9;  // SGD only
    double beta1 = 0.9;     // Adam only
    double beta2 = 0.999;
    double eps = 1e-8;
    bool sam = false;  // wrap the inner optimizer in a SAM ascent step
    double rho = 0.05;
    double weight_decay = 0.0;  // L2 term added to the loss, not a decoupled decay

    /// Throws ValidationError naming the offending field.
    void validate() const;
    std::string describe() const;
};

struct SgdState {
    std::vector<double> velocity;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

/// v <- momentum * v + g;  theta <- theta - lr * v.
void sgd_momentum_step(SgdState& state, std::span<double> params, std::span<const double> grad,
                       const OptimizerConfig& config);

/// Bias-corrected Adam update.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               const OptimizerConfig& config);

/// Computes the loss at params and writes its gradient into grad.
using GradientFn = std::function<double(std::span<const double> params, std::span<double> grad)>;

/// Gradients below this norm skip the SAM ascent (epsilon = 0).
inline constexpr double kSamMinGradNorm = 1e-12;

/// Inner optimizer state plus the optional SAM wrapper.
class Optimizer {
public:
    Optimizer(const OptimizerConfig& config, std::size_t parameter_count);

    const OptimizerConfig& config() const noexcept { return config_; }

    /// Applies the inner update rule with the supplied gradient.
    void apply(std::span<double> params, std::span<const double> grad);

    /// One training step. grad must hold the gradient at params (it is
    /// overwritten for SAM). Returns the number of gradient evaluations made
    /// here through grad_fn (0 for plain steps, 1 for SAM).
    int step(std::span<double> params, std::span<double> grad, const GradientFn& grad_fn);

private:
    OptimizerConfig config_;
    SgdState sgd_;
    AdamState adam_;
    std::vector<double> perturbed_;
};

/// SAM update: eps = rho * g / ||g||, then the inner optimizer is applied with
/// the gradient at params + eps. grad holds g on entry and is overwritten with
/// the perturbed gradient. Returns false when ||g|| < kSamMinGradNorm and the
/// perturbation was skipped.
bool sam_step(Optimizer& inner, std::span<double> params, std::span<double> grad, const GradientFn& grad_fn,
              double rho, std::vector<double>& scratch);

}  // namespace minima
