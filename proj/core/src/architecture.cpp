#include "bond/architecture.hpp"

#include "bond/errors.hpp"
#include "bond/rng.hpp"

#include <string>

namespace bond {

namespace {

constexpr std::uint64_t kFaTag = 0x2001;
constexpr std::uint64_t kReservoirTag = 0x2002;
constexpr std::uint64_t kFbTag = 0x2003;

bool uses_echo_state(ArchKind kind) { return kind == ArchKind::LEN || kind == ArchKind::NEN; }

void validate_reservoir_pairing(const ArchitectureSpec& spec) {
    if (spec.kind == ArchKind::NoReservoir) return;
    const bool is_esn = spec.reservoir.kind == ReservoirKind::EchoState;
    if (uses_echo_state(spec.kind) != is_esn) {
        throw config_error("architecture: LEN/NEN require an echo-state reservoir, "
                           "LFN/NFN a frozen one");
    }
}

} // namespace

std::size_t net_parameter_count(const NetSpec& spec) {
    std::size_t count = 0;
    std::size_t in = spec.input_dim;
    for (std::size_t width : spec.hidden) {
        count += width * in + width;
        in = width;
    }
    count += spec.output_dim * in + spec.output_dim;
    return count;
}

NetSpec pad_to_parameter_count(const NetSpec& spec, std::size_t target) {
    const std::size_t current = net_parameter_count(spec);
    if (current == target) return spec;
    if (current > target) {
        throw config_error("parity padding: spec already exceeds target count (" +
                           std::to_string(current) + " > " + std::to_string(target) + ")");
    }
    if (spec.hidden.empty()) {
        throw config_error("parity padding: no hidden layer to widen");
    }
    // widening hidden[0] by one unit adds (input_dim + 1 + next_width) params
    const std::size_t next_width = spec.hidden.size() > 1 ? spec.hidden[1] : spec.output_dim;
    const std::size_t per_unit = spec.input_dim + 1 + next_width;
    const std::size_t gap = target - current;
    if (gap % per_unit != 0) {
        throw config_error("parity padding: gap of " + std::to_string(gap) +
                           " parameters is not a multiple of " + std::to_string(per_unit) +
                           " (one extra unit in the first hidden layer)");
    }
    NetSpec padded = spec;
    padded.hidden[0] += gap / per_unit;
    return padded;
}

std::size_t Architecture::trainable_parameter_count() const {
    return (f_a_trainable ? f_a.parameter_count() : 0) + f_b.parameter_count();
}

Architecture assemble(const ArchitectureSpec& spec, std::uint64_t seed) {
    validate_reservoir_pairing(spec);

    Architecture arch;
    arch.kind = spec.kind;

    NetSpec f_b_spec = spec.f_b;
    if (spec.parity_target) f_b_spec = pad_to_parameter_count(f_b_spec, *spec.parity_target);

    if (spec.kind == ArchKind::LFN || spec.kind == ArchKind::LEN) {
        NetSpec read_in;
        read_in.input_dim = spec.f_a.input_dim;
        read_in.output_dim = spec.reservoir.input_dim;
        read_in.output_activation = Activation::Identity;
        Rng rng(derive_seed(seed, kFaTag));
        arch.f_a = FeedForwardNet::make(read_in, rng);
        arch.f_a_trainable = false;
    } else {
        Rng rng(derive_seed(seed, kFaTag));
        arch.f_a = FeedForwardNet::make(spec.f_a, rng);
        arch.f_a_trainable = true;
    }

    if (spec.kind != ArchKind::NoReservoir) {
        if (arch.f_a.output_dim() != spec.reservoir.input_dim) {
            throw config_error("architecture: read-in output width " +
                               std::to_string(arch.f_a.output_dim()) +
                               " does not match reservoir input " +
                               std::to_string(spec.reservoir.input_dim));
        }
        arch.reservoir = make_reservoir(spec.reservoir, derive_seed(seed, kReservoirTag));
        if (arch.reservoir->output_dim() != f_b_spec.input_dim) {
            throw config_error("architecture: reservoir output width " +
                               std::to_string(arch.reservoir->output_dim()) +
                               " does not match read-out input " +
                               std::to_string(f_b_spec.input_dim));
        }
    } else if (arch.f_a.output_dim() != f_b_spec.input_dim) {
        throw config_error("architecture: read-in output width does not match read-out input");
    }

    Rng rng_b(derive_seed(seed, kFbTag));
    arch.f_b = FeedForwardNet::make(f_b_spec, rng_b);
    return arch;
}

} // namespace bond
