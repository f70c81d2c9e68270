#pragma once

#include "bond/net.hpp"
#include "bond/tensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace bond {

/// theta <- theta - eta * grad
void sgd_step(Tensor2& params, const Tensor2& grads, double eta);

/// Adam moment buffers for one parameter tensor.
struct AdamState {
    Tensor2 m;
    Tensor2 v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t rows, std::size_t cols) : m(rows, cols), v(rows, cols) {}
};

/// Standard bias-corrected Adam update.
void adam_step(AdamState& state, Tensor2& params, const Tensor2& grads, double eta);

/// Piecewise-constant learning-rate multiplier over training progress.
/// Breakpoints are (fraction-of-epochs, multiplier) pairs with strictly
/// increasing fractions in (0, 1]; a boundary belongs to the later segment,
/// so epoch/total == 0.5 already takes the second multiplier.
class LambdaSchedule {
  public:
    LambdaSchedule();  // the 1.0 / 0.1 / 0.01 schedule at 50% / 75%
    explicit LambdaSchedule(std::vector<std::pair<double, double>> breakpoints);

    double multiplier(std::size_t epoch, std::size_t total_epochs) const;
    const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }

  private:
    std::vector<std::pair<double, double>> breakpoints_;
};

enum class OptimizerKind { Adam, Sgd };

/// Per-layer optimizer state for one network.
class NetOptimizer {
  public:
    NetOptimizer(OptimizerKind kind, const FeedForwardNet& net);

    /// Applies one update from the net's accumulated gradients.
    void step(FeedForwardNet& net, double eta);

    OptimizerKind kind() const { return kind_; }

  private:
    OptimizerKind kind_;
    std::vector<AdamState> weight_states_;
    std::vector<AdamState> bias_states_;
};

} // namespace bond
