#pragma once

#include "bond/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bond {

/// Ingested table with a seeded train/test split. Features are standardized
/// with statistics taken from the train split only; regression targets are
/// divided by target_scale.
struct Dataset {
    Tensor2 x_train, y_train;
    Tensor2 x_test, y_test;
    std::vector<std::size_t> train_indices, test_indices;  // into the source row order
    Tensor2 feature_mean, feature_std;                     // 1 x d, train statistics
    double target_scale = 1.0;
    bool classification = false;
    std::size_t n_classes = 0;

    std::size_t feature_dim() const { return x_train.cols(); }
    std::size_t target_dim() const { return y_train.cols(); }
};

/// Loads a CSV of 8 numeric features plus one trailing target column.
/// A non-numeric first row is treated as a header; any malformed data row
/// raises parse_error with its line number. Constant features keep std 1.
Dataset load_housing(const std::string& path, double target_scale = 10000.0,
                     double split_ratio = 0.8, std::uint64_t seed = 42);

enum class SyntheticTask { Regression, Classification };

struct SyntheticSpec {
    SyntheticTask task = SyntheticTask::Regression;
    std::size_t n = 2000;
    std::size_t d_in = 8;
    double noise = 0.0;        // regression target noise std
    std::size_t classes = 10;  // classification only
    double split_ratio = 0.8;
};

/// Teacher-generated data: a smooth random Tanh MLP labels standard-normal
/// inputs (argmax labels for classification).
Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);
Dataset make_synthetic(SyntheticTask task, std::size_t n, std::size_t d_in, std::uint64_t seed);

/// Writes rows in the housing CSV schema (8 features, trailing target).
void write_csv(const std::string& path, const Tensor2& features, const Tensor2& target,
               bool header = true);

} // namespace bond
