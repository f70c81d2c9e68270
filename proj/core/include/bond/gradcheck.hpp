#pragma once

#include "bond/net.hpp"
#include "bond/tensor.hpp"

#include <functional>

namespace bond {

/// Finite-difference oracles. These use only forward evaluation, so they are
/// independent of every backward implementation they are used to check.

/// Central finite-difference gradient of a scalar objective at x.
Tensor2 finite_diff_gradient(const std::function<double(const Tensor2&)>& f, const Tensor2& x,
                             double step = 1e-5);

/// Central finite differences over every parameter of `net`. The objective
/// must evaluate the scalar loss through forward paths only (it sees the
/// perturbed parameters because it captures the net). Returns one tensor per
/// layer parameter in order: layer0 weights, layer0 bias, layer1 weights, ...
std::vector<Tensor2> finite_diff_param_gradients(FeedForwardNet& net,
                                                 const std::function<double()>& objective,
                                                 double step = 1e-5);

/// max_ij |a-b| / max(|a|+|b|, floor); the floor keeps near-zero entries from
/// inflating the ratio beyond finite-difference noise.
double max_relative_error(const Tensor2& a, const Tensor2& b, double floor = 1e-4);

} // namespace bond
