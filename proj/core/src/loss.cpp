#include "bond/loss.hpp"

#include "bond/errors.hpp"

#include <cmath>
#include <string>

namespace bond {

namespace {

void check_huber_shapes(const Tensor2& y_pred, const Tensor2& y_true) {
    if (!y_pred.same_shape(y_true)) throw dimension_error("huber: shape mismatch");
    if (y_pred.size() == 0) throw parameter_error("huber: empty batch");
}

std::size_t class_index(const Tensor2& y_true, std::size_t row, std::size_t n_classes) {
    const double raw = y_true(row, 0);
    const double rounded = std::nearbyint(raw);
    if (std::fabs(raw - rounded) > 1e-9 || rounded < 0.0 ||
        rounded >= static_cast<double>(n_classes)) {
        throw parameter_error("cross_entropy: label " + std::to_string(raw) +
                              " outside [0, " + std::to_string(n_classes) + ")");
    }
    return static_cast<std::size_t>(rounded);
}

void check_ce_shapes(const Tensor2& y_pred, const Tensor2& y_true) {
    if (y_true.cols() != 1 || y_true.rows() != y_pred.rows()) {
        throw dimension_error("cross_entropy: labels must be batch x 1");
    }
    if (y_pred.cols() == 0 || y_pred.rows() == 0) {
        throw parameter_error("cross_entropy: empty batch or class count");
    }
}

double log_sum_exp(const double* row, std::size_t n) {
    double m = row[0];
    for (std::size_t j = 1; j < n; ++j) m = std::max(m, row[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::exp(row[j] - m);
    return m + std::log(acc);
}

} // namespace

LossFn LossFn::huber(double delta) {
    if (delta <= 0.0) throw parameter_error("huber: delta must be positive");
    LossFn l;
    l.kind_ = LossKind::Huber;
    l.huber_delta_ = delta;
    return l;
}

LossFn LossFn::cross_entropy() {
    LossFn l;
    l.kind_ = LossKind::CrossEntropy;
    return l;
}

Tensor2 LossFn::per_sample(const Tensor2& y_pred, const Tensor2& y_true) const {
    Tensor2 out(y_pred.rows(), 1);
    if (kind_ == LossKind::Huber) {
        check_huber_shapes(y_pred, y_true);
        const double d = huber_delta_;
        for (std::size_t i = 0; i < y_pred.rows(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < y_pred.cols(); ++j) {
                const double r = std::fabs(y_pred(i, j) - y_true(i, j));
                acc += r <= d ? 0.5 * r * r : d * (r - 0.5 * d);
            }
            out(i, 0) = acc / static_cast<double>(y_pred.cols());
        }
    } else {
        check_ce_shapes(y_pred, y_true);
        for (std::size_t i = 0; i < y_pred.rows(); ++i) {
            const std::size_t label = class_index(y_true, i, y_pred.cols());
            const double* row = y_pred.row_ptr(i);
            out(i, 0) = log_sum_exp(row, y_pred.cols()) - row[label];
        }
    }
    return out;
}

double LossFn::eval(const Tensor2& y_pred, const Tensor2& y_true) const {
    return mean(per_sample(y_pred, y_true));
}

Tensor2 LossFn::gradient(const Tensor2& y_pred, const Tensor2& y_true) const {
    Tensor2 out(y_pred.rows(), y_pred.cols());
    if (kind_ == LossKind::Huber) {
        check_huber_shapes(y_pred, y_true);
        const double d = huber_delta_;
        const double inv = 1.0 / static_cast<double>(y_pred.size());
        for (std::size_t i = 0; i < y_pred.size(); ++i) {
            const double r = y_pred[i] - y_true[i];
            out[i] = inv * (r > d ? d : (r < -d ? -d : r));
        }
    } else {
        check_ce_shapes(y_pred, y_true);
        const double inv = 1.0 / static_cast<double>(y_pred.rows());
        for (std::size_t i = 0; i < y_pred.rows(); ++i) {
            const std::size_t label = class_index(y_true, i, y_pred.cols());
            const double* row = y_pred.row_ptr(i);
            const double lse = log_sum_exp(row, y_pred.cols());
            for (std::size_t j = 0; j < y_pred.cols(); ++j) {
                const double softmax = std::exp(row[j] - lse);
                out(i, j) = inv * (softmax - (j == label ? 1.0 : 0.0));
            }
        }
    }
    return out;
}

} // namespace bond
