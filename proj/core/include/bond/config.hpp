#pragma once

#include "bond/architecture.hpp"
#include "bond/dataset.hpp"
#include "bond/estimators.hpp"
#include "bond/loss.hpp"
#include "bond/optim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bond {

struct DatasetConfig {
    enum class Kind { HousingCsv, SyntheticRegression, SyntheticClassification };
    Kind kind = Kind::HousingCsv;
    std::string path;
    double target_scale = 10000.0;
    double split_ratio = 0.8;
    std::size_t n = 2000;
    std::size_t d_in = 8;
    double noise = 0.0;
    std::size_t classes = 10;
};

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Bond;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double delta_min = kDefaultDeltaMin;
    double mu0 = 1e-3;
    double mu_decay = 0.101;
    std::size_t n_pert = 1;
    RowNormMode row_norm = RowNormMode::Auto;
    PerturbDistribution distribution = PerturbDistribution::Rademacher;
    FirstStepSigma first_step_sigma = FirstStepSigma::SqrtEta;
};

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double eta = 1e-3;
    LambdaSchedule schedule;
};

struct LossConfig {
    LossKind kind = LossKind::Huber;
    double huber_delta = 1.0;

    LossFn make() const {
        return kind == LossKind::Huber ? LossFn::huber(huber_delta) : LossFn::cross_entropy();
    }
};

/// One experiment description: what to train, how to estimate gradients,
/// and where outputs go. Parsed strictly (unknown keys are rejected).
struct RunConfig {
    DatasetConfig dataset;
    ArchitectureSpec architecture;
    EstimatorConfig estimator;
    /// Estimators exercised by the compare command.
    std::vector<EstimatorKind> compare_estimators;
    OptimizerConfig optimizer;
    LossConfig loss;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::uint64_t seed = 42;
    std::vector<std::uint64_t> seeds;  // sweep defaults; falls back to {seed}
    bool compare_ad = true;
    bool snapshot = false;
    std::string out_dir;
    std::size_t threads = 1;
    std::size_t warmup_iterations = 10;
    double divergence_factor = 1e6;
};

/// Parses the JSON document (comments allowed). Unknown keys, bad enums and
/// missing referenced files raise config_error.
RunConfig parse_run_config(const std::string& json_text);

/// Reads a config file and applies dotted-path overrides ("a.b.c=value")
/// before validation.
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Serializes the resolved config back to JSON for provenance embedding.
std::string run_config_to_json(const RunConfig& config);

Dataset load_dataset(const DatasetConfig& config, std::uint64_t seed);

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

} // namespace bond
