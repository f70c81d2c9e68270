#pragma once

#include "bond/net.hpp"
#include "bond/tensor.hpp"

#include <string>
#include <vector>

namespace bond {

/// Weight snapshot format: a text header listing named tensor shapes
/// followed by raw little-endian doubles in row-major order.
///
///   BONDW 1
///   tensors <count>
///   tensor <name> <rows> <cols> <tag>
///   ...
///   data
///   <rows*cols doubles per tensor, in listing order>
///
/// The tag carries the activation name for network layers and "-" otherwise.
struct NamedTensor {
    std::string name;
    std::string tag;
    Tensor2 value;
};

void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::string& path);

/// Round-trips a network bit-exactly (weights, biases, activation tags).
void save_net(const FeedForwardNet& net, const std::string& path);
FeedForwardNet load_net(const std::string& path);

} // namespace bond
