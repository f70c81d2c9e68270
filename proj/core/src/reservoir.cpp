#include "bond/reservoir.hpp"

#include "bond/errors.hpp"
#include "bond/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <utility>

namespace bond {

namespace {

/// y_a + sign * delta restricted to `column` (or everywhere for kAllColumns).
Tensor2 perturbed_input(const Tensor2& y_a, const Tensor2& delta, double sign,
                        std::size_t column) {
    if (!y_a.same_shape(delta)) {
        throw dimension_error("forward_perturbed: delta shape must match input");
    }
    if (column != kAllColumns && column >= y_a.cols()) {
        throw dimension_error("forward_perturbed: column " + std::to_string(column) +
                              " out of range");
    }
    Tensor2 x = y_a;
    if (column == kAllColumns) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += sign * delta[i];
    } else {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            x(r, column) += sign * delta(r, column);
        }
    }
    return x;
}

} // namespace

double spectral_radius(const Tensor2& m) {
    if (m.rows() != m.cols()) throw dimension_error("spectral_radius: matrix must be square");
    Eigen::MatrixXd em(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) em(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j)) = m(i, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(em, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw error("spectral_radius: eigensolve failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// -- FixedReservoir ---------------------------------------------------------

FixedReservoir::FixedReservoir(const NetSpec& spec, std::uint64_t seed) {
    NetSpec frozen = spec;
    frozen.hidden_activation = Activation::Tanh;
    frozen.output_activation = Activation::Tanh;
    Rng rng(seed);
    net_ = FeedForwardNet::make(frozen, rng);
}

Tensor2 FixedReservoir::forward(const Tensor2& y_a) { return net_.forward(y_a); }

Tensor2 FixedReservoir::forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                                          std::size_t column) const {
    return net_.evaluate(perturbed_input(y_a, delta, sign, column));
}

Tensor2 FixedReservoir::evaluate(const Tensor2& y_a) const { return net_.evaluate(y_a); }

Tensor2 FixedReservoir::ad_gradient(const Tensor2& upstream) const {
    return net_.input_gradient(upstream);
}

// -- ParallelReservoir --------------------------------------------------------

ParallelReservoir::ParallelReservoir(std::vector<std::unique_ptr<FixedReservoir>> subs)
    : subs_(std::move(subs)) {
    if (subs_.empty()) throw parameter_error("ParallelReservoir: no sub-reservoirs");
    for (const auto& sub : subs_) {
        in_offset_.push_back(d_in_);
        out_offset_.push_back(d_out_);
        d_in_ += sub->input_dim();
        d_out_ += sub->output_dim();
    }
}

Tensor2 ParallelReservoir::forward(const Tensor2& y_a) {
    if (y_a.cols() != d_in_) throw dimension_error("ParallelReservoir: input width mismatch");
    Tensor2 out(y_a.rows(), d_out_);
    for (std::size_t s = 0; s < subs_.size(); ++s) {
        Tensor2 block(y_a.rows(), subs_[s]->input_dim());
        for (std::size_t r = 0; r < y_a.rows(); ++r) {
            for (std::size_t c = 0; c < block.cols(); ++c) block(r, c) = y_a(r, in_offset_[s] + c);
        }
        const Tensor2 sub_out = subs_[s]->forward(block);
        for (std::size_t r = 0; r < sub_out.rows(); ++r) {
            for (std::size_t c = 0; c < sub_out.cols(); ++c) {
                out(r, out_offset_[s] + c) = sub_out(r, c);
            }
        }
    }
    return out;
}

Tensor2 ParallelReservoir::forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                                             std::size_t column) const {
    const Tensor2 x = perturbed_input(y_a, delta, sign, column);
    Tensor2 out(x.rows(), d_out_);
    for (std::size_t s = 0; s < subs_.size(); ++s) {
        Tensor2 block(x.rows(), subs_[s]->input_dim());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < block.cols(); ++c) block(r, c) = x(r, in_offset_[s] + c);
        }
        const Tensor2 sub_out = subs_[s]->evaluate(block);
        for (std::size_t r = 0; r < sub_out.rows(); ++r) {
            for (std::size_t c = 0; c < sub_out.cols(); ++c) {
                out(r, out_offset_[s] + c) = sub_out(r, c);
            }
        }
    }
    return out;
}

Tensor2 ParallelReservoir::evaluate(const Tensor2& y_a) const {
    const Tensor2 zero(y_a.rows(), y_a.cols());
    return forward_perturbed(y_a, zero, 1.0, kAllColumns);
}

Tensor2 ParallelReservoir::ad_gradient(const Tensor2& upstream) const {
    if (upstream.cols() != d_out_) {
        throw dimension_error("ParallelReservoir: upstream width mismatch");
    }
    Tensor2 grad(upstream.rows(), d_in_);
    for (std::size_t s = 0; s < subs_.size(); ++s) {
        Tensor2 up_block(upstream.rows(), subs_[s]->output_dim());
        for (std::size_t r = 0; r < upstream.rows(); ++r) {
            for (std::size_t c = 0; c < up_block.cols(); ++c) {
                up_block(r, c) = upstream(r, out_offset_[s] + c);
            }
        }
        const Tensor2 sub_grad = subs_[s]->ad_gradient(up_block);
        for (std::size_t r = 0; r < sub_grad.rows(); ++r) {
            for (std::size_t c = 0; c < sub_grad.cols(); ++c) {
                grad(r, in_offset_[s] + c) = sub_grad(r, c);
            }
        }
    }
    return grad;
}

std::uint64_t ParallelReservoir::param_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& sub : subs_) h ^= sub->param_hash() + 0x9e3779b97f4a7c15ULL + (h << 6);
    return h;
}

// -- EchoStateReservoir -------------------------------------------------------

EchoStateReservoir::EchoStateReservoir(std::size_t input_dim, std::size_t output_dim,
                                       const EsnOptions& options, std::uint64_t seed) {
    if (options.spectral_radius >= 1.0 || options.spectral_radius <= 0.0) {
        throw parameter_error("EchoStateReservoir: spectral radius must lie in (0, 1)");
    }
    if (options.leak <= 0.0 || options.leak > 1.0) {
        throw parameter_error("EchoStateReservoir: leak must lie in (0, 1]");
    }
    if (options.state_size == 0 || input_dim == 0 || output_dim == 0) {
        throw parameter_error("EchoStateReservoir: zero dimension");
    }
    leak_ = options.leak;
    tanh_readout_ = options.tanh_readout;
    reset_per_epoch_ = options.reset_state_per_epoch;

    Rng rng(seed);
    w_in_ = Tensor2(options.state_size, input_dim);
    init_weights(w_in_, Activation::Tanh, rng);
    w_in_ *= options.input_scale;

    w_rec_ = Tensor2(options.state_size, options.state_size);
    for (std::size_t i = 0; i < w_rec_.size(); ++i) w_rec_[i] = rng.uniform(-1.0, 1.0);
    const double raw_radius = spectral_radius(w_rec_);
    if (raw_radius <= 0.0) throw error("EchoStateReservoir: degenerate recurrent matrix");
    w_rec_ *= options.spectral_radius / raw_radius;
    measured_radius_ = spectral_radius(w_rec_);
    if (std::fabs(measured_radius_ - options.spectral_radius) > 1e-6) {
        throw error("EchoStateReservoir: spectral radius rescaling failed");
    }

    w_out_ = Tensor2(output_dim, options.state_size);
    init_weights(w_out_, Activation::Tanh, rng);

    state_ = Tensor2(1, options.state_size);
    pre_state_ = state_;
}

Tensor2 EchoStateReservoir::run_sequence(const Tensor2& input, Tensor2& state) const {
    Tensor2 out(input.rows(), w_out_.rows());
    Tensor2 u(1, input.cols());
    for (std::size_t t = 0; t < input.rows(); ++t) {
        for (std::size_t c = 0; c < input.cols(); ++c) u(0, c) = input(t, c);
        Tensor2 z = matmul_nt(u, w_in_);
        z += matmul_nt(state, w_rec_);
        for (std::size_t j = 0; j < z.size(); ++j) z[j] = std::tanh(z[j]);
        for (std::size_t j = 0; j < state.size(); ++j) {
            state[j] = (1.0 - leak_) * state[j] + leak_ * z[j];
        }
        Tensor2 r = matmul_nt(state, w_out_);
        for (std::size_t j = 0; j < r.size(); ++j) {
            out(t, j) = tanh_readout_ ? std::tanh(r[j]) : r[j];
        }
    }
    return out;
}

Tensor2 EchoStateReservoir::forward(const Tensor2& y_a) {
    if (y_a.cols() != input_dim()) throw dimension_error("EchoStateReservoir: input width");
    pre_state_ = state_;
    const std::size_t b = y_a.rows();
    const std::size_t n = w_rec_.rows();
    cached_prev_states_ = Tensor2(b, n);
    cached_tanh_z_ = Tensor2(b, n);
    cached_states_ = Tensor2(b, n);
    cached_outputs_ = Tensor2(b, output_dim());

    Tensor2 u(1, y_a.cols());
    for (std::size_t t = 0; t < b; ++t) {
        for (std::size_t j = 0; j < n; ++j) cached_prev_states_(t, j) = state_[j];
        for (std::size_t c = 0; c < y_a.cols(); ++c) u(0, c) = y_a(t, c);
        Tensor2 z = matmul_nt(u, w_in_);
        z += matmul_nt(state_, w_rec_);
        for (std::size_t j = 0; j < n; ++j) {
            const double h = std::tanh(z[j]);
            cached_tanh_z_(t, j) = h;
            state_[j] = (1.0 - leak_) * state_[j] + leak_ * h;
            cached_states_(t, j) = state_[j];
        }
        Tensor2 r = matmul_nt(state_, w_out_);
        for (std::size_t j = 0; j < r.size(); ++j) {
            cached_outputs_(t, j) = tanh_readout_ ? std::tanh(r[j]) : r[j];
        }
    }
    has_cache_ = true;
    return cached_outputs_;
}

Tensor2 EchoStateReservoir::forward_perturbed(const Tensor2& y_a, const Tensor2& delta,
                                              double sign, std::size_t column) const {
    const Tensor2 x = perturbed_input(y_a, delta, sign, column);
    Tensor2 state = pre_state_;
    return run_sequence(x, state);
}

Tensor2 EchoStateReservoir::evaluate(const Tensor2& y_a) const {
    Tensor2 state = state_;
    return run_sequence(y_a, state);
}

Tensor2 EchoStateReservoir::ad_gradient(const Tensor2& upstream) const {
    if (!has_cache_) throw state_error("EchoStateReservoir: ad_gradient before forward");
    if (!upstream.same_shape(cached_outputs_)) {
        throw dimension_error("EchoStateReservoir: upstream shape mismatch");
    }
    const std::size_t b = upstream.rows();
    const std::size_t n = w_rec_.rows();
    Tensor2 grad(b, input_dim());
    Tensor2 psi(1, n);  // dL/d(state) flowing backwards through time
    Tensor2 dr(1, output_dim());
    for (std::size_t t = b; t-- > 0;) {
        for (std::size_t j = 0; j < output_dim(); ++j) {
            double g = upstream(t, j);
            if (tanh_readout_) {
                const double o = cached_outputs_(t, j);
                g *= 1.0 - o * o;
            }
            dr[j] = g;
        }
        Tensor2 psi_t = matmul(dr, w_out_);
        psi_t += psi;
        Tensor2 dz(1, n);
        for (std::size_t j = 0; j < n; ++j) {
            const double h = cached_tanh_z_(t, j);
            dz[j] = leak_ * psi_t[j] * (1.0 - h * h);
        }
        const Tensor2 du = matmul(dz, w_in_);
        for (std::size_t c = 0; c < grad.cols(); ++c) grad(t, c) = du[c];
        const Tensor2 rec = matmul(dz, w_rec_);
        for (std::size_t j = 0; j < n; ++j) psi[j] = (1.0 - leak_) * psi_t[j] + rec[j];
    }
    return grad;
}

void EchoStateReservoir::start_epoch() {
    if (reset_per_epoch_) reset_state();
}

void EchoStateReservoir::reset_state() {
    state_.fill(0.0);
    pre_state_ = state_;
    has_cache_ = false;
}

std::uint64_t EchoStateReservoir::param_hash() const {
    std::uint64_t h = fnv1a_hash(w_in_.data());
    h = fnv1a_hash(w_rec_.data(), h);
    h = fnv1a_hash(w_out_.data(), h);
    return h;
}

// -- factory ------------------------------------------------------------------

std::unique_ptr<Reservoir> make_reservoir(const ReservoirSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case ReservoirKind::Fixed: {
            NetSpec net;
            net.input_dim = spec.input_dim;
            net.hidden = spec.hidden;
            net.output_dim = spec.output_dim;
            return std::make_unique<FixedReservoir>(net, seed);
        }
        case ReservoirKind::Parallel: {
            if (spec.n_subs == 0 || spec.input_dim % spec.n_subs != 0 ||
                spec.output_dim % spec.n_subs != 0) {
                throw parameter_error(
                    "ParallelReservoir: n_subs must evenly divide input and output widths");
            }
            std::vector<std::unique_ptr<FixedReservoir>> subs;
            NetSpec sub_spec;
            sub_spec.input_dim = spec.input_dim / spec.n_subs;
            sub_spec.hidden = spec.hidden;
            sub_spec.output_dim = spec.output_dim / spec.n_subs;
            for (std::size_t s = 0; s < spec.n_subs; ++s) {
                subs.push_back(
                    std::make_unique<FixedReservoir>(sub_spec, derive_seed(seed, 0x5u + s)));
            }
            return std::make_unique<ParallelReservoir>(std::move(subs));
        }
        case ReservoirKind::EchoState:
            return std::make_unique<EchoStateReservoir>(spec.input_dim, spec.output_dim, spec.esn,
                                                        seed);
    }
    throw parameter_error("make_reservoir: unknown kind");
}

} // namespace bond
