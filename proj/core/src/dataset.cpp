#include "bond/dataset.hpp"

#include "bond/errors.hpp"
#include "bond/net.hpp"
#include "bond/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

namespace bond {

namespace {

constexpr std::uint64_t kSplitTag = 0x1001;
constexpr std::uint64_t kTeacherTag = 0x1002;
constexpr std::uint64_t kInputTag = 0x1003;
constexpr std::uint64_t kNoiseTag = 0x1004;

bool parse_field(std::string_view field, double& out) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
        field.remove_suffix(1);
    }
    if (field.empty()) return false;
    const auto result = std::from_chars(field.data(), field.data() + field.size(), out);
    return result.ec == std::errc{} && result.ptr == field.data() + field.size() &&
           std::isfinite(out);
}

bool parse_row(const std::string& line, std::vector<double>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view field(line.data() + start,
                                     (comma == std::string::npos ? line.size() : comma) - start);
        double value = 0.0;
        if (!parse_field(field, value)) return false;
        out.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return true;
}

/// Shuffle-split, train-statistics standardization and target scaling shared
/// by the CSV and synthetic paths.
Dataset split_and_standardize(Tensor2 x, Tensor2 y, double split_ratio, std::uint64_t seed,
                              double target_scale, bool classification,
                              std::size_t n_classes) {
    const std::size_t n = x.rows();
    if (n < 2) throw parameter_error("dataset: need at least two rows");
    if (split_ratio <= 0.0 || split_ratio >= 1.0) {
        throw parameter_error("dataset: split_ratio must lie in (0, 1)");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, kSplitTag));
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }
    std::size_t n_train = static_cast<std::size_t>(split_ratio * static_cast<double>(n));
    n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

    Dataset ds;
    ds.target_scale = target_scale;
    ds.classification = classification;
    ds.n_classes = n_classes;
    ds.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    const std::size_t d = x.cols();
    ds.feature_mean = Tensor2(1, d);
    ds.feature_std = Tensor2(1, d);
    for (std::size_t idx : ds.train_indices) {
        for (std::size_t j = 0; j < d; ++j) ds.feature_mean[j] += x(idx, j);
    }
    ds.feature_mean *= 1.0 / static_cast<double>(n_train);
    for (std::size_t idx : ds.train_indices) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = x(idx, j) - ds.feature_mean[j];
            ds.feature_std[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        ds.feature_std[j] = std::sqrt(ds.feature_std[j] / static_cast<double>(n_train));
        if (ds.feature_std[j] == 0.0) ds.feature_std[j] = 1.0;  // constant feature
    }

    auto gather = [&](const std::vector<std::size_t>& indices, Tensor2& xo, Tensor2& yo) {
        xo = Tensor2(indices.size(), d);
        yo = Tensor2(indices.size(), y.cols());
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const std::size_t idx = indices[r];
            for (std::size_t j = 0; j < d; ++j) {
                xo(r, j) = (x(idx, j) - ds.feature_mean[j]) / ds.feature_std[j];
            }
            for (std::size_t j = 0; j < y.cols(); ++j) {
                yo(r, j) = classification ? y(idx, j) : y(idx, j) / target_scale;
            }
        }
    };
    gather(ds.train_indices, ds.x_train, ds.y_train);
    gather(ds.test_indices, ds.x_test, ds.y_test);
    return ds;
}

} // namespace

Dataset load_housing(const std::string& path, double target_scale, double split_ratio,
                     std::uint64_t seed) {
    if (target_scale <= 0.0) throw parameter_error("load_housing: target_scale must be > 0");
    std::ifstream in(path);
    if (!in) throw parse_error("load_housing: cannot open " + path);

    std::vector<double> features;
    std::vector<double> targets;
    std::vector<double> row;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_rows = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!parse_row(line, row)) {
            if (first_content_row) {  // header row
                first_content_row = false;
                continue;
            }
            throw parse_error("load_housing: malformed row at line " + std::to_string(line_no));
        }
        first_content_row = false;
        if (row.size() != 9) {
            throw parse_error("load_housing: expected 9 columns at line " +
                              std::to_string(line_no) + ", got " + std::to_string(row.size()));
        }
        features.insert(features.end(), row.begin(), row.begin() + 8);
        targets.push_back(row.back());
        ++n_rows;
    }
    if (n_rows == 0) throw parse_error("load_housing: no data rows in " + path);

    Tensor2 x = Tensor2::from_data(n_rows, 8, std::move(features));
    Tensor2 y = Tensor2::from_data(n_rows, 1, std::move(targets));
    return split_and_standardize(std::move(x), std::move(y), split_ratio, seed, target_scale,
                                 /*classification=*/false, 0);
}

Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n == 0 || spec.d_in == 0) throw parameter_error("make_synthetic: n, d_in must be > 0");
    if (spec.task == SyntheticTask::Classification && spec.classes < 2) {
        throw parameter_error("make_synthetic: need at least two classes");
    }
    Rng input_rng(derive_seed(seed, kInputTag));
    Tensor2 x = sample_normal(input_rng, 0.0, 1.0, spec.n, spec.d_in);

    NetSpec teacher_spec;
    teacher_spec.input_dim = spec.d_in;
    teacher_spec.hidden = {32, 32};
    teacher_spec.output_dim = spec.task == SyntheticTask::Regression ? 1 : spec.classes;
    teacher_spec.hidden_activation = Activation::Tanh;
    teacher_spec.output_activation = Activation::Identity;
    Rng teacher_rng(derive_seed(seed, kTeacherTag));
    const FeedForwardNet teacher = FeedForwardNet::make(teacher_spec, teacher_rng);
    const Tensor2 teacher_out = teacher.evaluate(x);

    Tensor2 y(spec.n, 1);
    if (spec.task == SyntheticTask::Regression) {
        Rng noise_rng(derive_seed(seed, kNoiseTag));
        for (std::size_t i = 0; i < spec.n; ++i) {
            y(i, 0) = teacher_out(i, 0) +
                      (spec.noise > 0.0 ? spec.noise * noise_rng.normal() : 0.0);
        }
    } else {
        for (std::size_t i = 0; i < spec.n; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < spec.classes; ++c) {
                if (teacher_out(i, c) > teacher_out(i, best)) best = c;
            }
            y(i, 0) = static_cast<double>(best);
        }
    }
    return split_and_standardize(std::move(x), std::move(y), spec.split_ratio, seed,
                                 /*target_scale=*/1.0,
                                 spec.task == SyntheticTask::Classification,
                                 spec.task == SyntheticTask::Classification ? spec.classes : 0);
}

Dataset make_synthetic(SyntheticTask task, std::size_t n, std::size_t d_in, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.task = task;
    spec.n = n;
    spec.d_in = d_in;
    return make_synthetic(spec, seed);
}

void write_csv(const std::string& path, const Tensor2& features, const Tensor2& target,
               bool header) {
    if (features.rows() != target.rows()) throw dimension_error("write_csv: row count mismatch");
    std::ofstream out(path);
    if (!out) throw parse_error("write_csv: cannot open " + path + " for writing");
    out.precision(17);
    if (header) {
        for (std::size_t j = 0; j < features.cols(); ++j) out << "f" << j << ",";
        out << "target\n";
    }
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (std::size_t j = 0; j < features.cols(); ++j) out << features(i, j) << ",";
        for (std::size_t j = 0; j < target.cols(); ++j) {
            out << target(i, j) << (j + 1 == target.cols() ? '\n' : ',');
        }
    }
}

} // namespace bond
