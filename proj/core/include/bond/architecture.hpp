#pragma once

#include "bond/net.hpp"
#include "bond/reservoir.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace bond {

/// LFN/LEN: fixed random linear read-in, trainable read-out.
/// NFN/NEN: trainable read-in and read-out networks.
/// NoReservoir: read-in and read-out connected directly.
enum class ArchKind { LFN, LEN, NFN, NEN, NoReservoir };

struct ArchitectureSpec {
    ArchKind kind = ArchKind::NFN;
    NetSpec f_a;
    ReservoirSpec reservoir;
    NetSpec f_b;
    /// When set, the first hidden layer of f_b is widened until the total
    /// trainable count matches this target exactly.
    std::optional<std::size_t> parity_target;
};

/// An assembled, seeded model instance. The reservoir pointer is null for
/// NoReservoir; f_a is a single frozen linear map for LFN/LEN.
struct Architecture {
    ArchKind kind = ArchKind::NFN;
    FeedForwardNet f_a;
    bool f_a_trainable = true;
    std::unique_ptr<Reservoir> reservoir;
    FeedForwardNet f_b;

    std::size_t trainable_parameter_count() const;
    std::size_t input_dim() const { return f_a.input_dim(); }
    std::size_t output_dim() const { return f_b.output_dim(); }
};

/// Total parameter count an assembled NetSpec would have.
std::size_t net_parameter_count(const NetSpec& spec);

/// Widens the first hidden layer until the spec's count reaches target;
/// throws config_error when exact parity is unreachable.
NetSpec pad_to_parameter_count(const NetSpec& spec, std::size_t target);

/// Validates the dimension chain and reservoir-kind pairing, then builds the
/// seeded instance (sub-seeds are derived per component).
Architecture assemble(const ArchitectureSpec& spec, std::uint64_t seed);

} // namespace bond
