#pragma once

#include "bond/loss.hpp"
#include "bond/rng.hpp"
#include "bond/tensor.hpp"

#include <cstdint>
#include <vector>

namespace bond {

enum class Activation { Identity, ReLU, Tanh };

/// Fully connected layer followed by an elementwise activation.
/// Weights are out x in, bias is 1 x out. Gradient buffers accumulate until
/// zero_grads(); forward caches input and post-activation output so that a
/// backward pass (or several) can run against the same graph.
struct LinearLayer {
    Tensor2 weights;
    Tensor2 bias;
    Activation activation = Activation::Identity;

    Tensor2 grad_weights;
    Tensor2 grad_bias;

    Tensor2 cached_input;
    Tensor2 cached_output;
    bool has_cache = false;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }
};

/// Describes a plain MLP: input -> hidden... -> output.
struct NetSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_dim = 0;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Identity;
};

/// Feedforward stack with explicit caching and two backward entry points:
/// from a loss at the output, or from an externally supplied output gradient.
class FeedForwardNet {
  public:
    FeedForwardNet() = default;

    /// Seeded construction; Kaiming-uniform weights ahead of ReLU layers,
    /// Xavier-uniform otherwise, zero biases.
    static FeedForwardNet make(const NetSpec& spec, Rng& rng);

    /// Assembles a net from pre-built layers (dimension chain is validated).
    static FeedForwardNet from_layers(std::vector<LinearLayer> layers);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const;
    std::uint64_t param_hash() const;

    std::vector<LinearLayer>& layers() { return layers_; }
    const std::vector<LinearLayer>& layers() const { return layers_; }

    /// Forward pass that caches per-layer activations for backward.
    /// A second forward overwrites the previous cache.
    Tensor2 forward(const Tensor2& x);

    /// Pure forward pass; touches no caches, safe to call concurrently on a
    /// const net.
    Tensor2 evaluate(const Tensor2& x) const;

    /// Backward from a loss evaluated at the cached output. Accumulates
    /// parameter gradients and returns the gradient at the net input.
    Tensor2 backward_from_loss(const LossFn& loss, const Tensor2& y_true);

    /// Backward from an injected output gradient (the estimate splice point).
    /// Accumulates parameter gradients and returns the input gradient.
    Tensor2 backward_from_gradient(const Tensor2& upstream);

    /// Input gradient for the cached forward without touching any gradient
    /// buffer; used for frozen nets.
    Tensor2 input_gradient(const Tensor2& upstream) const;

    void zero_grads();
    void detach_cache();
    bool has_cache() const;

    const Tensor2& cached_output() const;

  private:
    Tensor2 backprop(const Tensor2& upstream, bool accumulate);
    std::vector<LinearLayer> layers_;
};

/// Initializes a weight matrix in place for the given downstream activation.
void init_weights(Tensor2& weights, Activation activation, Rng& rng);

} // namespace bond
