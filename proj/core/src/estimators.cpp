#include "bond/estimators.hpp"

#include "bond/errors.hpp"

#include <cmath>
#include <thread>
#include <vector>

namespace bond {

namespace {

bool apply_row_norm(RowNormMode mode, bool default_on) {
    switch (mode) {
        case RowNormMode::On: return true;
        case RowNormMode::Off: return false;
        case RowNormMode::Auto: return default_on;
    }
    return default_on;
}

/// sigma2_ghat = Var(Y_R)/Var(Y_a) * Var(dL/dY_R); the degenerate
/// Var(Y_a) == 0 case is signalled with a negative return.
double rescale_target(const EstimateContext& ctx) {
    const double var_ya = variance(ctx.y_a);
    if (var_ya <= 0.0) return -1.0;
    return variance(ctx.y_r) / var_ya * variance(ctx.dl_dyr);
}

void rescale_to_target(GradientEstimate& est) {
    est.var_raw = variance(est.g_hat);
    if (est.var_raw > 0.0 && est.sigma2_g >= 0.0) {
        est.g_hat *= std::sqrt(est.sigma2_g / est.var_raw);
        est.rescaled = true;
    }
}

Tensor2 per_sample_loss(const EstimateContext& ctx, const Tensor2& reservoir_out) {
    return ctx.loss.per_sample(ctx.f_b.evaluate(reservoir_out), ctx.y_true);
}

void check_context(const EstimateContext& ctx) {
    if (ctx.y_a.cols() != ctx.reservoir.input_dim()) {
        throw dimension_error("estimate: y_a width does not match reservoir input");
    }
    if (ctx.y_a.rows() == 0) throw parameter_error("estimate: empty batch");
}

/// Runs fn(column) across [0, n_cols), optionally on several threads.
/// Columns write disjoint outputs, so the result is scheduling-independent.
template <typename Fn>
void for_each_column(std::size_t n_cols, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || n_cols < 2) {
        for (std::size_t i = 0; i < n_cols; ++i) fn(i);
        return;
    }
    const std::size_t n_workers = std::min(threads, n_cols);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n_cols; i += n_workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

double nonzero_draw(Rng& rng, PerturbDistribution distribution) {
    double x = 0.0;
    do {
        switch (distribution) {
            case PerturbDistribution::Rademacher: x = rng.sign(); break;
            case PerturbDistribution::Uniform: x = rng.uniform(-1.0, 1.0); break;
            case PerturbDistribution::Normal: x = rng.normal(); break;
        }
    } while (x == 0.0);
    return x;
}

} // namespace

double SpsaConfig::mu_at(std::int64_t t) const {
    if (mu0 <= 0.0) throw parameter_error("SpsaConfig: mu0 must be positive");
    return mu0 / std::pow(1.0 + static_cast<double>(t), mu_decay);
}

std::size_t row_normalize(Tensor2& t) {
    std::size_t scaled = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        double* row = t.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < t.cols(); ++j) acc += row[j] * row[j];
        const double norm = std::sqrt(acc);
        if (norm == 0.0) continue;
        for (std::size_t j = 0; j < t.cols(); ++j) row[j] /= norm;
        ++scaled;
    }
    return scaled;
}

double sign_agreement(const Tensor2& a, const Tensor2& b) {
    if (!a.same_shape(b)) throw dimension_error("sign_agreement: shape mismatch");
    if (a.size() == 0) throw parameter_error("sign_agreement: empty tensors");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int sa = (a[i] > 0.0) - (a[i] < 0.0);
        const int sb = (b[i] > 0.0) - (b[i] < 0.0);
        if (sa == sb) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(a.size());
}

GradientEstimate bond_estimate(const EstimateContext& ctx, RollingMoments& moments, Rng& rng,
                               const EstimatorSettings& settings) {
    check_context(ctx);
    const std::size_t batch = ctx.y_a.rows();
    const std::size_t d_r = ctx.y_a.cols();

    GradientEstimate est;
    est.sigma2_g = rescale_target(ctx);
    est.delta_x = set_perturbations(moments, rng, batch, settings.perturb, &est.bounds);
    est.g_hat = Tensor2(batch, d_r);

    const Tensor2& delta = est.delta_x;
    for_each_column(d_r, settings.threads, [&](std::size_t i) {
        const Tensor2 loss_minus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, delta, -1.0, i));
        const Tensor2 loss_plus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, delta, +1.0, i));
        for (std::size_t k = 0; k < batch; ++k) {
            est.g_hat(k, i) = (loss_plus(k, 0) - loss_minus(k, 0)) / (2.0 * delta(k, i));
        }
    });

    if (apply_row_norm(settings.row_norm,
                       ctx.reservoir.kind() == ReservoirKind::EchoState)) {
        row_normalize(est.g_hat);
        est.row_normalized = true;
    }
    rescale_to_target(est);
    moments.update(est.g_hat);
    return est;
}

GradientEstimate bonds_estimate(const EstimateContext& ctx, RollingMoments& moments, Rng& rng,
                                const EstimatorSettings& settings) {
    check_context(ctx);
    const std::size_t batch = ctx.y_a.rows();
    const std::size_t d_r = ctx.y_a.cols();

    GradientEstimate est;
    est.sigma2_g = rescale_target(ctx);
    est.delta_x = set_perturbations(moments, rng, batch, settings.perturb, &est.bounds);
    est.g_hat = Tensor2(batch, d_r);

    const Tensor2 loss_minus =
        per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, est.delta_x, -1.0,
                                                             kAllColumns));
    const Tensor2 loss_plus =
        per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, est.delta_x, +1.0,
                                                             kAllColumns));
    for (std::size_t k = 0; k < batch; ++k) {
        const double dy = loss_plus(k, 0) - loss_minus(k, 0);
        for (std::size_t i = 0; i < d_r; ++i) {
            est.g_hat(k, i) = dy / (2.0 * est.delta_x(k, i));
        }
    }

    if (apply_row_norm(settings.row_norm, /*default_on=*/true)) {
        row_normalize(est.g_hat);
        est.row_normalized = true;
    }
    rescale_to_target(est);
    moments.update(est.g_hat);
    return est;
}

GradientEstimate spsa_estimate(const EstimateContext& ctx, const SpsaConfig& config,
                               std::int64_t t, Rng& rng) {
    check_context(ctx);
    if (config.n_pert == 0) throw parameter_error("spsa_estimate: n_pert must be >= 1");
    const std::size_t batch = ctx.y_a.rows();
    const std::size_t d_r = ctx.y_a.cols();
    const double mu = config.mu_at(t);

    GradientEstimate est;
    est.g_hat = Tensor2(batch, d_r);
    for (std::size_t k = 0; k < config.n_pert; ++k) {
        Tensor2 delta(batch, d_r);
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] = mu * nonzero_draw(rng, config.distribution);
        }
        const Tensor2 loss_minus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, delta, -1.0,
                                                                 kAllColumns));
        const Tensor2 loss_plus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, delta, +1.0,
                                                                 kAllColumns));
        for (std::size_t r = 0; r < batch; ++r) {
            const double dy = loss_plus(r, 0) - loss_minus(r, 0);
            for (std::size_t i = 0; i < d_r; ++i) {
                est.g_hat(r, i) += dy / (2.0 * delta(r, i));
            }
        }
        est.delta_x = std::move(delta);
    }
    est.g_hat *= 1.0 / static_cast<double>(config.n_pert);
    return est;
}

GradientEstimate fdsa_estimate(const EstimateContext& ctx, double mu_t, Rng& rng) {
    check_context(ctx);
    if (mu_t <= 0.0) throw parameter_error("fdsa_estimate: mu_t must be positive");
    const std::size_t batch = ctx.y_a.rows();
    const std::size_t d_r = ctx.y_a.cols();

    // the shared scalar magnitude mu_t * Delta_t; a sign flip cancels in the
    // central difference, so the draw only advances the stream
    const double step = mu_t * rng.sign();

    GradientEstimate est;
    est.delta_x = Tensor2(batch, d_r, step);
    est.g_hat = Tensor2(batch, d_r);
    for (std::size_t i = 0; i < d_r; ++i) {
        const Tensor2 loss_minus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, est.delta_x, -1.0, i));
        const Tensor2 loss_plus =
            per_sample_loss(ctx, ctx.reservoir.forward_perturbed(ctx.y_a, est.delta_x, +1.0, i));
        for (std::size_t k = 0; k < batch; ++k) {
            est.g_hat(k, i) = (loss_plus(k, 0) - loss_minus(k, 0)) / (2.0 * step);
        }
    }
    return est;
}

} // namespace bond
