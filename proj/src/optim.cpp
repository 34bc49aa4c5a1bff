#include "minima/optim.hpp"

#include <cmath>
#include <sstream>

#include "minima/error.hpp"
#include "minima/kernels.hpp"

namespace minima {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("optimizer.learning_rate: must be a positive finite number");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("optimizer.momentum: must be in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("optimizer.beta1: must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("optimizer.beta2: must be in [0, 1)");
    if (!(eps > 0.0)) throw ValidationError("optimizer.eps: must be positive");
    if (sam && !(rho > 0.0)) throw ValidationError("optimizer.rho: must be positive when SAM is enabled");
    if (!(weight_decay >= 0.0)) throw ValidationError("optimizer.weight_decay: must be non-negative");
}

std::string OptimizerConfig::describe() const {
    std::ostringstream os;
    if (sam) os << "sam(rho=" << rho << ")+";
    if (kind == OptimizerKind::Adam) {
        os << "adam(lr=" << learning_rate << ",betas=" << beta1 << "/" << beta2 << ",eps=" << eps << ")";
    } else {
        os << "sgd(lr=" << learning_rate << ",momentum=" << momentum << ")";
    }
    if (weight_decay > 0.0) os << "+wd(" << weight_decay << ")";
    return os.str();
}

void sgd_momentum_step(SgdState& state, std::span<double> params, std::span<const double> grad,
                       const OptimizerConfig& config) {
    if (grad.size() != params.size()) throw ContractError("sgd step: gradient size mismatch");
    if (state.velocity.size() != params.size()) state.velocity.assign(params.size(), 0.0);
    const double mu = config.momentum;
    const double lr = config.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.velocity[i] = mu * state.velocity[i] + grad[i];
        params[i] -= lr * state.velocity[i];
    }
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               const OptimizerConfig& config) {
    if (grad.size() != params.size()) throw ContractError("adam step: gradient size mismatch");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    const double lr = config.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
}

Optimizer::Optimizer(const OptimizerConfig& config, std::size_t parameter_count) : config_(config) {
    config_.validate();
    sgd_.velocity.assign(parameter_count, 0.0);
    adam_.m.assign(parameter_count, 0.0);
    adam_.v.assign(parameter_count, 0.0);
}

void Optimizer::apply(std::span<double> params, std::span<const double> grad) {
    if (config_.kind == OptimizerKind::Adam) {
        adam_step(adam_, params, grad, config_);
    } else {
        sgd_momentum_step(sgd_, params, grad, config_);
    }
}

int Optimizer::step(std::span<double> params, std::span<double> grad, const GradientFn& grad_fn) {
    if (!config_.sam) {
        apply(params, grad);
        return 0;
    }
    return sam_step(*this, params, grad, grad_fn, config_.rho, perturbed_) ? 1 : 0;
}

bool sam_step(Optimizer& inner, std::span<double> params, std::span<double> grad, const GradientFn& grad_fn,
              double rho, std::vector<double>& scratch) {
    if (!(rho > 0.0)) throw ContractError("sam_step: rho must be positive");
    if (grad.size() != params.size()) throw ContractError("sam_step: gradient size mismatch");
    const double norm = std::sqrt(kernels::active().dot(grad.data(), grad.data(), grad.size()));
    if (norm < kSamMinGradNorm) {
        inner.apply(params, grad);
        return false;
    }
    scratch.assign(params.begin(), params.end());
    const double scale = rho / norm;
    for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] += scale * grad[i];
    grad_fn(scratch, grad);
    inner.apply(params, grad);
    return true;
}

}  // namespace minima
