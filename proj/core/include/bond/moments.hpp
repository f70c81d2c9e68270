#pragma once

#include "bond/tensor.hpp"

#include <cstdint>

namespace bond {

/// Bias-corrected exponential moving moments of the gradient estimates at
/// the reservoir inputs, tracked independently of any optimizer:
///   m_t = b1*m_{t-1} + (1-b1)*g,   v_t = b2*v_{t-1} + (1-b2)*g^2,
///   m_hat = m_t/(1-b1^t),          v_hat = v_t/(1-b2^t).
class RollingMoments {
  public:
    RollingMoments(std::size_t dim, double beta1 = 0.9, double beta2 = 0.999);

    /// g may be batch x dim or 1 x dim; batch inputs are column-reduced by
    /// mean before the recurrence. Increments the iteration counter.
    void update(const Tensor2& g);

    const Tensor2& m() const { return m_; }
    const Tensor2& v() const { return v_; }
    const Tensor2& m_hat() const { return m_hat_; }
    const Tensor2& v_hat() const { return v_hat_; }
    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }
    std::int64_t t() const { return t_; }
    std::size_t dim() const { return m_.cols(); }

  private:
    Tensor2 m_, v_, m_hat_, v_hat_;
    double beta1_, beta2_;
    std::int64_t t_ = 0;
};

} // namespace bond
