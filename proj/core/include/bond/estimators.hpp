#pragma once

#include "bond/loss.hpp"
#include "bond/moments.hpp"
#include "bond/net.hpp"
#include "bond/perturb.hpp"
#include "bond/reservoir.hpp"
#include "bond/rng.hpp"

#include <cstdint>
#include <optional>

namespace bond {

enum class EstimatorKind { Bond, Bonds, Spsa, Fdsa, Ad };

enum class RowNormMode { Auto, On, Off };

enum class PerturbDistribution { Rademacher, Uniform, Normal };

/// Baseline simultaneous-perturbation settings. mu_t decays as
/// mu0 / (1 + t)^mu_decay.
struct SpsaConfig {
    double mu0 = 1e-3;
    double mu_decay = 0.101;
    std::size_t n_pert = 1;
    PerturbDistribution distribution = PerturbDistribution::Rademacher;

    double mu_at(std::int64_t t) const;
};

struct EstimatorSettings {
    PerturbOptions perturb;
    RowNormMode row_norm = RowNormMode::Auto;
    /// Worker threads for the per-column perturbation passes; results are
    /// reduced in column order so the output does not depend on scheduling.
    std::size_t threads = 1;
};

/// Gradient estimate at the reservoir inputs plus the diagnostics needed by
/// the bound-containment and variance-tracking checks.
struct GradientEstimate {
    Tensor2 g_hat;    // batch x d_R, after row norm / rescaling where applied
    Tensor2 delta_x;  // perturbations used
    double sigma2_g = 0.0;
    double var_raw = 0.0;  // variance before rescaling
    bool rescaled = false; // false flags the skipped-rescale path
    bool row_normalized = false;
    PerturbationBounds bounds;  // empty tensors when no bounds were in play
    std::optional<double> sign_agreement_vs_ad;
};

/// Everything an estimator may read. The unperturbed forward pass has
/// already run: y_r is its reservoir output and dl_dyr the gradient of the
/// batch loss at the reservoir outputs from f_b's backward pass.
struct EstimateContext {
    const FeedForwardNet& f_b;
    const Reservoir& reservoir;
    const Tensor2& y_a;
    const Tensor2& y_r;
    const Tensor2& y_true;
    const LossFn& loss;
    const Tensor2& dl_dyr;
};

/// Per-column central differences with bounded per-element perturbations,
/// variance rescaling, and (for echo-state reservoirs under Auto) row
/// normalization. Updates the rolling moments with the returned estimate.
GradientEstimate bond_estimate(const EstimateContext& ctx, RollingMoments& moments, Rng& rng,
                               const EstimatorSettings& settings);

/// Simultaneous variant: one perturbed pair for the whole input matrix,
/// then row normalization and variance rescaling.
GradientEstimate bonds_estimate(const EstimateContext& ctx, RollingMoments& moments, Rng& rng,
                                const EstimatorSettings& settings);

/// Central-difference SPSA baseline averaged over n_pert full-vector
/// perturbations; no bounds, no rescaling.
GradientEstimate spsa_estimate(const EstimateContext& ctx, const SpsaConfig& config,
                               std::int64_t t, Rng& rng);

/// Central-difference FDSA baseline: per-coordinate unit-vector
/// perturbations of a common scalar magnitude mu_t.
GradientEstimate fdsa_estimate(const EstimateContext& ctx, double mu_t, Rng& rng);

/// Fraction of entries whose sign matches; zero agrees only with zero.
double sign_agreement(const Tensor2& a, const Tensor2& b);

/// Divides each row by its Euclidean norm; zero-norm rows are left as they
/// are. Returns the number of rows scaled.
std::size_t row_normalize(Tensor2& t);

} // namespace bond
