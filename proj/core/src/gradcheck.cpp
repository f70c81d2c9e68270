#include "bond/gradcheck.hpp"

#include "bond/errors.hpp"

#include <cmath>

namespace bond {

Tensor2 finite_diff_gradient(const std::function<double(const Tensor2&)>& f, const Tensor2& x,
                             double step) {
    Tensor2 grad(x.rows(), x.cols());
    Tensor2 probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + step;
        const double up = f(probe);
        probe[i] = saved - step;
        const double down = f(probe);
        probe[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

std::vector<Tensor2> finite_diff_param_gradients(FeedForwardNet& net,
                                                 const std::function<double()>& objective,
                                                 double step) {
    std::vector<Tensor2> grads;
    auto diff_tensor = [&](Tensor2& param) {
        Tensor2 g(param.rows(), param.cols());
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param[i];
            param[i] = saved + step;
            const double up = objective();
            param[i] = saved - step;
            const double down = objective();
            param[i] = saved;
            g[i] = (up - down) / (2.0 * step);
        }
        return g;
    };
    for (auto& layer : net.layers()) {
        grads.push_back(diff_tensor(layer.weights));
        grads.push_back(diff_tensor(layer.bias));
    }
    return grads;
}

double max_relative_error(const Tensor2& a, const Tensor2& b, double floor) {
    if (!a.same_shape(b)) throw dimension_error("max_relative_error: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(std::fabs(a[i]) + std::fabs(b[i]), floor);
        const double rel = std::fabs(a[i] - b[i]) / denom;
        if (rel > worst) worst = rel;
    }
    return worst;
}

} // namespace bond
