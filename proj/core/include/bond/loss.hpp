#pragma once

#include "bond/tensor.hpp"

namespace bond {

enum class LossKind { Huber, CrossEntropy };

/// Batch loss with mean reduction. Cross-entropy expects raw logits and a
/// batch x 1 tensor of class indices; Huber expects matching shapes.
class LossFn {
  public:
    static LossFn huber(double delta = 1.0);
    static LossFn cross_entropy();

    LossKind kind() const { return kind_; }
    double huber_delta() const { return huber_delta_; }

    /// Mean-reduced scalar loss over the batch.
    double eval(const Tensor2& y_pred, const Tensor2& y_true) const;

    /// Unreduced per-sample losses as a batch x 1 tensor.
    Tensor2 per_sample(const Tensor2& y_pred, const Tensor2& y_true) const;

    /// Gradient of eval() with respect to y_pred.
    Tensor2 gradient(const Tensor2& y_pred, const Tensor2& y_true) const;

  private:
    LossKind kind_ = LossKind::Huber;
    double huber_delta_ = 1.0;
};

} // namespace bond
