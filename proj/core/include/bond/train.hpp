#pragma once

#include "bond/architecture.hpp"
#include "bond/config.hpp"
#include "bond/dataset.hpp"
#include "bond/estimators.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bond {

/// One line of the metrics stream. test_loss carries the most recent
/// epoch-boundary evaluation; sign_agreement_pct is present only on
/// estimator runs with the AD comparison enabled.
struct MetricsRecord {
    std::size_t iteration = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    std::optional<double> sign_agreement_pct;
    double loop_time_ms = 0.0;
    std::uint64_t seed = 0;
};

/// Extra per-iteration diagnostics handed to an observer; pointers are valid
/// only during the callback.
struct IterationStats {
    std::size_t iteration = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    const GradientEstimate* estimate = nullptr;   // null for AD / read-out-only runs
    const Tensor2* exact_gradient = nullptr;      // null unless compare_ad
    const Tensor2* injected_gradient = nullptr;   // what f_a's backward received
    std::uint64_t f_a_hash = 0;
    std::uint64_t f_b_hash = 0;
    std::uint64_t reservoir_hash = 0;
};

using IterationCallback = std::function<void(const IterationStats&)>;

struct TrainResult {
    std::vector<MetricsRecord> metrics;
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
    std::optional<double> mean_sign_agreement_pct;
    double loop_time_mean_ms = 0.0;  // warmup iterations excluded
    double loop_time_std_ms = 0.0;
    bool reservoir_frozen = true;
    std::size_t trainable_parameters = 0;
};

/// Mini-batch training per the run config: forward read-in/reservoir/
/// read-out, read-out backward from the loss, gradient estimation (or exact
/// AD) at the reservoir inputs, read-in backward from the injected estimate,
/// then optimizer steps. Aborts with divergence_error when the loss exceeds
/// divergence_factor times the initial loss.
TrainResult train(Architecture& arch, const Dataset& data, const RunConfig& config,
                  const IterationCallback& callback = {});

/// Test-split loss through pure evaluation paths (no caches disturbed).
double evaluate_loss(const Architecture& arch, const LossFn& loss, const Tensor2& x,
                     const Tensor2& y);

/// Classification accuracy on (x, y) where y holds class indices.
double evaluate_accuracy(const Architecture& arch, const Tensor2& x, const Tensor2& y);

struct LoopTimeStats {
    double mean_ms = 0.0;
    double std_ms = 0.0;
    std::size_t timed_iterations = 0;
};

/// Times full training iterations of the given config: runs warmup + timed
/// iterations and reports mean and standard deviation.
LoopTimeStats measure_loop_time(const RunConfig& config, std::size_t timed_iterations,
                                std::size_t warmup_iterations);

/// Serializes records as JSON lines in a fixed key order.
std::string metrics_to_jsonl(const std::vector<MetricsRecord>& records);
void write_metrics_jsonl(const std::string& path, const std::vector<MetricsRecord>& records);

/// Hash of the stream with loop_time_ms canonicalized to zero, so that
/// reruns of the same config + seed hash identically.
std::uint64_t metrics_canonical_hash(const std::vector<MetricsRecord>& records);

} // namespace bond
