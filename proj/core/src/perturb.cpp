#include "bond/perturb.hpp"

#include "bond/errors.hpp"

#include <cmath>

namespace bond {

namespace {
constexpr double kVarianceEps = 1e-12;
}

PerturbationBounds compute_bounds(const RollingMoments& moments, double delta_min) {
    if (delta_min <= 0.0) throw parameter_error("compute_bounds: delta_min must be positive");
    const Tensor2& m_hat = moments.m_hat();
    const Tensor2& v_hat = moments.v_hat();
    PerturbationBounds bounds;
    bounds.delta_min = delta_min;
    bounds.alpha_t = max_abs(m_hat);
    bounds.lower = Tensor2(1, m_hat.cols());
    bounds.upper = Tensor2(1, m_hat.cols());
    for (std::size_t j = 0; j < m_hat.cols(); ++j) {
        const double am = std::fabs(m_hat[j]);
        const double denom = std::sqrt(v_hat[j] + kVarianceEps);
        double branch = 0.0;  // indeterminate 0/0 at m_hat == 0 clamps to delta_min
        if (am > 0.0) {
            branch = (std::sqrt(m_hat[j] * m_hat[j] + 2.0 * delta_min * v_hat[j]) - am) / denom;
        }
        const double lower = std::max(delta_min, branch);
        const double upper = std::max(lower, bounds.alpha_t * am / denom);
        bounds.lower[j] = lower;
        bounds.upper[j] = upper;
    }
    return bounds;
}

Tensor2 set_perturbations(const RollingMoments& moments, Rng& rng, std::size_t batch,
                          const PerturbOptions& options, PerturbationBounds* bounds_out) {
    if (batch == 0) throw parameter_error("set_perturbations: empty batch");
    const std::size_t d_r = moments.dim();
    if (moments.t() == 0) {
        const double sigma = options.first_step_sigma == FirstStepSigma::SqrtEta
                                 ? std::sqrt(options.eta)
                                 : options.eta;
        Tensor2 delta = sample_normal(rng, 0.0, sigma, batch, d_r);
        // keep the central-difference division well defined
        for (std::size_t i = 0; i < delta.size(); ++i) {
            const double magnitude = std::max(std::fabs(delta[i]), options.delta_min);
            delta[i] = delta[i] < 0.0 ? -magnitude : magnitude;
        }
        if (bounds_out) *bounds_out = PerturbationBounds{};
        return delta;
    }
    const PerturbationBounds bounds = compute_bounds(moments, options.delta_min);
    Tensor2 delta(batch, d_r);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < d_r; ++j) {
            delta(i, j) = rng.uniform(bounds.lower[j], bounds.upper[j]) * rng.sign();
        }
    }
    if (bounds_out) *bounds_out = bounds;
    return delta;
}

} // namespace bond
