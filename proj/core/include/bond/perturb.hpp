#pragma once

#include "bond/moments.hpp"
#include "bond/rng.hpp"
#include "bond/tensor.hpp"

#include <cstdint>

namespace bond {

/// Default minimum perturbation magnitude: the point at which float32
/// round-off reaches a 0.1% relative error rate. Kept as a configuration
/// value even though this library computes in doubles.
inline constexpr double kDefaultDeltaMin = 8.16e-6;

/// Per-dimension perturbation magnitude bounds derived from the rolling
/// moments:
///   lower = max[delta_min, (sqrt(m_hat^2 + 2*delta_min*v_hat) - |m_hat|)
///                          / sqrt(v_hat + eps)]
///   upper = max(lower, alpha * |m_hat| / sqrt(v_hat + eps)),
///   alpha = max_j |m_hat_j|.
/// The lower-bound expression is the stable algebraic form of
/// (m_hat/sqrt(v_hat)) * (-1 + sqrt(1 + delta_min*2*v_hat/m_hat^2)); an
/// exactly zero m_hat component takes the degenerate clamp lower = delta_min.
struct PerturbationBounds {
    Tensor2 lower;  // 1 x d_R
    Tensor2 upper;  // 1 x d_R
    double delta_min = kDefaultDeltaMin;
    double alpha_t = 0.0;
};

PerturbationBounds compute_bounds(const RollingMoments& moments,
                                  double delta_min = kDefaultDeltaMin);

enum class FirstStepSigma { SqrtEta, Eta };

struct PerturbOptions {
    double delta_min = kDefaultDeltaMin;
    /// Learning rate eta used by the t == 0 normal draw.
    double eta = 1e-3;
    FirstStepSigma first_step_sigma = FirstStepSigma::SqrtEta;
};

/// Samples the perturbation matrix for one estimate (batch x d_R). At
/// moments.t() == 0 entries are normal draws with sigma = sqrt(eta) (or eta
/// under the config override), magnitudes floored at delta_min; afterwards
/// magnitudes are uniform in [lower_j, upper_j] with independent signs.
/// When bounds_out is non-null it receives the bounds used (empty at t==0).
Tensor2 set_perturbations(const RollingMoments& moments, Rng& rng, std::size_t batch,
                          const PerturbOptions& options, PerturbationBounds* bounds_out = nullptr);

} // namespace bond
