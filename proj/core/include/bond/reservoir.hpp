#pragma once

#include "bond/net.hpp"
#include "bond/tensor.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace bond {

enum class ReservoirKind { Fixed, Parallel, EchoState };

/// Column selector for forward_perturbed meaning "perturb every column".
inline constexpr std::size_t kAllColumns = ~std::size_t{0};

/// A black-box transform exposing only forward evaluation to the training
/// path. The simulated realizations additionally expose exact input
/// gradients (ad_gradient) for metrics and AD baselines; estimator code must
/// never feed those into parameter updates.
class Reservoir {
  public:
    virtual ~Reservoir() = default;

    virtual ReservoirKind kind() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;

    /// Training-path forward. Echo-state realizations advance their state
    /// row by row and snapshot the pre-pass state for perturbed replays.
    virtual Tensor2 forward(const Tensor2& y_a) = 0;

    /// Re-evaluates the last forward's batch with y_a + sign*delta applied to
    /// `column` (or to every column when column == kAllColumns). Echo-state
    /// realizations replay from the pre-pass state snapshot; the live state
    /// is never touched.
    virtual Tensor2 forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                                      std::size_t column) const = 0;

    /// Pure evaluation for held-out data: no caches, no state advance.
    virtual Tensor2 evaluate(const Tensor2& y_a) const = 0;

    /// Exact gradient at the inputs of the last forward() batch, given the
    /// upstream gradient at the outputs. Metrics/baseline use only.
    virtual Tensor2 ad_gradient(const Tensor2& upstream) const = 0;

    virtual void start_epoch() {}
    virtual void reset_state() {}

    virtual std::uint64_t param_hash() const = 0;
};

struct EsnOptions {
    std::size_t state_size = 200;
    double spectral_radius = 0.9;
    double leak = 1.0;
    double input_scale = 1.0;
    bool tanh_readout = true;
    bool reset_state_per_epoch = true;
};

struct ReservoirSpec {
    ReservoirKind kind = ReservoirKind::Fixed;
    std::size_t input_dim = 5;
    std::size_t output_dim = 5;
    /// Hidden widths of the frozen FFNN (per sub-reservoir when Parallel).
    std::vector<std::size_t> hidden = {100};
    /// Number of contiguous equal-width blocks for Parallel.
    std::size_t n_subs = 1;
    EsnOptions esn;
};

/// Frozen randomly initialized Tanh FFNN (hidden and output activations).
class FixedReservoir final : public Reservoir {
  public:
    FixedReservoir(const NetSpec& spec, std::uint64_t seed);

    ReservoirKind kind() const override { return ReservoirKind::Fixed; }
    std::size_t input_dim() const override { return net_.input_dim(); }
    std::size_t output_dim() const override { return net_.output_dim(); }

    Tensor2 forward(const Tensor2& y_a) override;
    Tensor2 forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                              std::size_t column) const override;
    Tensor2 evaluate(const Tensor2& y_a) const override;
    Tensor2 ad_gradient(const Tensor2& upstream) const override;
    std::uint64_t param_hash() const override { return net_.param_hash(); }

    const FeedForwardNet& net() const { return net_; }

  private:
    FeedForwardNet net_;
};

/// Bank of independent frozen FFNNs over contiguous input blocks; outputs
/// are concatenated in block order.
class ParallelReservoir final : public Reservoir {
  public:
    ParallelReservoir(std::vector<std::unique_ptr<FixedReservoir>> subs);

    ReservoirKind kind() const override { return ReservoirKind::Parallel; }
    std::size_t input_dim() const override { return d_in_; }
    std::size_t output_dim() const override { return d_out_; }

    Tensor2 forward(const Tensor2& y_a) override;
    Tensor2 forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                              std::size_t column) const override;
    Tensor2 evaluate(const Tensor2& y_a) const override;
    Tensor2 ad_gradient(const Tensor2& upstream) const override;
    std::uint64_t param_hash() const override;

    const std::vector<std::unique_ptr<FixedReservoir>>& subs() const { return subs_; }

  private:
    std::vector<std::unique_ptr<FixedReservoir>> subs_;
    std::vector<std::size_t> in_offset_, out_offset_;
    std::size_t d_in_ = 0, d_out_ = 0;
};

/// Leaky echo state network with fixed random weights. Rows of a batch are
/// processed in order; the state persists across batches and is reset per
/// epoch when configured. The recurrent matrix is rescaled at construction
/// to the configured spectral radius.
class EchoStateReservoir final : public Reservoir {
  public:
    EchoStateReservoir(std::size_t input_dim, std::size_t output_dim, const EsnOptions& options,
                       std::uint64_t seed);

    ReservoirKind kind() const override { return ReservoirKind::EchoState; }
    std::size_t input_dim() const override { return w_in_.cols(); }
    std::size_t output_dim() const override { return w_out_.rows(); }

    Tensor2 forward(const Tensor2& y_a) override;
    Tensor2 forward_perturbed(const Tensor2& y_a, const Tensor2& delta, double sign,
                              std::size_t column) const override;
    Tensor2 evaluate(const Tensor2& y_a) const override;
    Tensor2 ad_gradient(const Tensor2& upstream) const override;

    void start_epoch() override;
    void reset_state() override;
    std::uint64_t param_hash() const override;

    const Tensor2& state() const { return state_; }
    const Tensor2& recurrent_weights() const { return w_rec_; }
    double measured_spectral_radius() const { return measured_radius_; }

  private:
    Tensor2 run_sequence(const Tensor2& input, Tensor2& state) const;

    Tensor2 w_in_;   // state x in
    Tensor2 w_rec_;  // state x state
    Tensor2 w_out_;  // out x state
    double leak_;
    bool tanh_readout_;
    bool reset_per_epoch_;
    double measured_radius_ = 0.0;

    Tensor2 state_;      // 1 x state, live
    Tensor2 pre_state_;  // snapshot taken at the top of forward()

    // caches from the last forward() for ad_gradient
    Tensor2 cached_prev_states_;  // B x state
    Tensor2 cached_tanh_z_;       // B x state
    Tensor2 cached_states_;       // B x state
    Tensor2 cached_outputs_;      // B x out
    bool has_cache_ = false;
};

/// Seeded construction from a spec; validates the echo-state property
/// (spectral radius < 1) and Parallel partition divisibility.
std::unique_ptr<Reservoir> make_reservoir(const ReservoirSpec& spec, std::uint64_t seed);

/// Spectral radius of a square matrix via a dense general eigensolve.
double spectral_radius(const Tensor2& m);

} // namespace bond
