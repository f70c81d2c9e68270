#include "bond/net.hpp"

#include "bond/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace bond {

namespace {

Tensor2 layer_forward(const LinearLayer& layer, const Tensor2& x) {
    if (x.cols() != layer.in_dim()) {
        throw dimension_error("forward: input width " + std::to_string(x.cols()) +
                              " does not match layer width " + std::to_string(layer.in_dim()));
    }
    Tensor2 z = matmul_nt(x, layer.weights);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double* row = z.row_ptr(i);
        for (std::size_t j = 0; j < z.cols(); ++j) row[j] += layer.bias[j];
    }
    switch (layer.activation) {
        case Activation::ReLU:
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i]);
            break;
        case Activation::Identity:
            break;
    }
    return z;
}

// d(post-activation) -> d(pre-activation), using the cached output.
void apply_activation_grad(const LinearLayer& layer, Tensor2& d) {
    switch (layer.activation) {
        case Activation::ReLU:
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (layer.cached_output[i] <= 0.0) d[i] = 0.0;
            }
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double a = layer.cached_output[i];
                d[i] *= 1.0 - a * a;
            }
            break;
        case Activation::Identity:
            break;
    }
}

} // namespace

void init_weights(Tensor2& weights, Activation activation, Rng& rng) {
    const double fan_in = static_cast<double>(weights.cols());
    const double fan_out = static_cast<double>(weights.rows());
    const double bound = activation == Activation::ReLU
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-bound, bound);
}

FeedForwardNet FeedForwardNet::make(const NetSpec& spec, Rng& rng) {
    if (spec.input_dim == 0 || spec.output_dim == 0) {
        throw parameter_error("NetSpec: zero input or output dimension");
    }
    std::vector<LinearLayer> layers;
    std::size_t in = spec.input_dim;
    for (std::size_t width : spec.hidden) {
        LinearLayer l;
        l.activation = spec.hidden_activation;
        l.weights = Tensor2(width, in);
        l.bias = Tensor2(1, width);
        init_weights(l.weights, l.activation, rng);
        layers.push_back(std::move(l));
        in = width;
    }
    LinearLayer out;
    out.activation = spec.output_activation;
    out.weights = Tensor2(spec.output_dim, in);
    out.bias = Tensor2(1, spec.output_dim);
    init_weights(out.weights, out.activation, rng);
    layers.push_back(std::move(out));
    return from_layers(std::move(layers));
}

FeedForwardNet FeedForwardNet::from_layers(std::vector<LinearLayer> layers) {
    if (layers.empty()) throw parameter_error("from_layers: no layers");
    for (std::size_t i = 1; i < layers.size(); ++i) {
        if (layers[i].in_dim() != layers[i - 1].out_dim()) {
            throw dimension_error("from_layers: layer " + std::to_string(i) +
                                  " input width does not chain");
        }
    }
    FeedForwardNet net;
    net.layers_ = std::move(layers);
    for (auto& l : net.layers_) {
        l.grad_weights = Tensor2(l.weights.rows(), l.weights.cols());
        l.grad_bias = Tensor2(1, l.bias.cols());
        l.has_cache = false;
    }
    return net;
}

std::size_t FeedForwardNet::input_dim() const { return layers_.front().in_dim(); }
std::size_t FeedForwardNet::output_dim() const { return layers_.back().out_dim(); }

std::size_t FeedForwardNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

std::uint64_t FeedForwardNet::param_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& l : layers_) {
        h = fnv1a_hash(l.weights.data(), h);
        h = fnv1a_hash(l.bias.data(), h);
    }
    return h;
}

Tensor2 FeedForwardNet::forward(const Tensor2& x) {
    Tensor2 a = x;
    for (auto& layer : layers_) {
        layer.cached_input = a;
        a = layer_forward(layer, a);
        layer.cached_output = a;
        layer.has_cache = true;
    }
    return a;
}

Tensor2 FeedForwardNet::evaluate(const Tensor2& x) const {
    Tensor2 a = x;
    for (const auto& layer : layers_) a = layer_forward(layer, a);
    return a;
}

bool FeedForwardNet::has_cache() const {
    for (const auto& l : layers_) {
        if (!l.has_cache) return false;
    }
    return true;
}

const Tensor2& FeedForwardNet::cached_output() const {
    if (!has_cache()) throw state_error("cached_output: no forward pass cached");
    return layers_.back().cached_output;
}

Tensor2 FeedForwardNet::backprop(const Tensor2& upstream, bool accumulate) {
    if (!has_cache()) throw state_error("backward: no forward pass cached");
    if (!upstream.same_shape(layers_.back().cached_output)) {
        throw dimension_error("backward: upstream gradient shape mismatch");
    }
    Tensor2 d = upstream;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        LinearLayer& layer = *it;
        apply_activation_grad(layer, d);
        if (accumulate) {
            layer.grad_weights += matmul_tn(d, layer.cached_input);
            layer.grad_bias += col_sum(d);
        }
        d = matmul(d, layer.weights);
    }
    return d;
}

Tensor2 FeedForwardNet::backward_from_loss(const LossFn& loss, const Tensor2& y_true) {
    if (!has_cache()) throw state_error("backward_from_loss: no forward pass cached");
    const Tensor2 upstream = loss.gradient(layers_.back().cached_output, y_true);
    return backprop(upstream, true);
}

Tensor2 FeedForwardNet::backward_from_gradient(const Tensor2& upstream) {
    return backprop(upstream, true);
}

Tensor2 FeedForwardNet::input_gradient(const Tensor2& upstream) const {
    // Same chain as backprop but without parameter accumulation; kept const
    // so frozen nets can expose exact input gradients.
    if (!has_cache()) throw state_error("input_gradient: no forward pass cached");
    if (!upstream.same_shape(layers_.back().cached_output)) {
        throw dimension_error("input_gradient: upstream gradient shape mismatch");
    }
    Tensor2 d = upstream;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        const LinearLayer& layer = *it;
        apply_activation_grad(layer, d);
        d = matmul(d, layer.weights);
    }
    return d;
}

void FeedForwardNet::zero_grads() {
    for (auto& l : layers_) {
        l.grad_weights.fill(0.0);
        l.grad_bias.fill(0.0);
    }
}

void FeedForwardNet::detach_cache() {
    for (auto& l : layers_) {
        l.cached_input = Tensor2();
        l.cached_output = Tensor2();
        l.has_cache = false;
    }
}

} // namespace bond
