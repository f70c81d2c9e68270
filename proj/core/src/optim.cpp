#include "bond/optim.hpp"

#include "bond/errors.hpp"

#include <cmath>

namespace bond {

void sgd_step(Tensor2& params, const Tensor2& grads, double eta) {
    if (!params.same_shape(grads)) throw dimension_error("sgd_step: shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= eta * grads[i];
}

void adam_step(AdamState& state, Tensor2& params, const Tensor2& grads, double eta) {
    if (!params.same_shape(grads)) throw dimension_error("adam_step: shape mismatch");
    if (!params.same_shape(state.m)) throw dimension_error("adam_step: stale state shape");
    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= eta * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

LambdaSchedule::LambdaSchedule()
    : LambdaSchedule({{0.5, 1.0}, {0.75, 0.1}, {1.0, 0.01}}) {}

LambdaSchedule::LambdaSchedule(std::vector<std::pair<double, double>> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) throw parameter_error("LambdaSchedule: no breakpoints");
    double prev = 0.0;
    for (const auto& [fraction, multiplier] : breakpoints_) {
        if (fraction <= prev || fraction > 1.0) {
            throw parameter_error("LambdaSchedule: fractions must increase strictly in (0, 1]");
        }
        if (multiplier <= 0.0) throw parameter_error("LambdaSchedule: multipliers must be > 0");
        prev = fraction;
    }
}

double LambdaSchedule::multiplier(std::size_t epoch, std::size_t total_epochs) const {
    if (total_epochs == 0 || epoch >= total_epochs) {
        throw parameter_error("LambdaSchedule: epoch outside [0, total_epochs)");
    }
    const double progress = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    for (const auto& [fraction, multiplier] : breakpoints_) {
        if (progress < fraction) return multiplier;
    }
    return breakpoints_.back().second;
}

NetOptimizer::NetOptimizer(OptimizerKind kind, const FeedForwardNet& net) : kind_(kind) {
    for (const auto& layer : net.layers()) {
        weight_states_.emplace_back(layer.weights.rows(), layer.weights.cols());
        bias_states_.emplace_back(layer.bias.rows(), layer.bias.cols());
    }
}

void NetOptimizer::step(FeedForwardNet& net, double eta) {
    if (net.layers().size() != weight_states_.size()) {
        throw state_error("NetOptimizer: layer count changed since construction");
    }
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        auto& layer = net.layers()[i];
        if (kind_ == OptimizerKind::Adam) {
            adam_step(weight_states_[i], layer.weights, layer.grad_weights, eta);
            adam_step(bias_states_[i], layer.bias, layer.grad_bias, eta);
        } else {
            sgd_step(layer.weights, layer.grad_weights, eta);
            sgd_step(layer.bias, layer.grad_bias, eta);
        }
    }
}

} // namespace bond
