#include "bond/moments.hpp"

#include "bond/errors.hpp"

#include <cmath>

namespace bond {

RollingMoments::RollingMoments(std::size_t dim, double beta1, double beta2)
    : m_(1, dim), v_(1, dim), m_hat_(1, dim), v_hat_(1, dim), beta1_(beta1), beta2_(beta2) {
    if (dim == 0) throw parameter_error("RollingMoments: zero dimension");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw parameter_error("RollingMoments: betas must lie in [0, 1)");
    }
}

void RollingMoments::update(const Tensor2& g) {
    if (g.cols() != m_.cols()) throw dimension_error("RollingMoments: width mismatch");
    const Tensor2 reduced = g.rows() == 1 ? g : col_mean(g);
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t j = 0; j < m_.cols(); ++j) {
        const double gj = reduced[j];
        m_[j] = beta1_ * m_[j] + (1.0 - beta1_) * gj;
        v_[j] = beta2_ * v_[j] + (1.0 - beta2_) * gj * gj;
        m_hat_[j] = m_[j] / bc1;
        v_hat_[j] = v_[j] / bc2;
    }
}

} // namespace bond
