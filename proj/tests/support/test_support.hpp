#pragma once

#include "bond/architecture.hpp"
#include "bond/config.hpp"
#include "bond/dataset.hpp"

#include <cstdint>
#include <string>

namespace bond::testsupport {

/// The small-scale experiment layout: 8 -> [100,100] -> 5 read-in, frozen
/// 5 -> [100] -> 5 reservoir, 5 -> [100,100] -> 1 read-out.
inline ArchitectureSpec desk_nfn_spec() {
    ArchitectureSpec spec;
    spec.kind = ArchKind::NFN;
    spec.f_a.input_dim = 8;
    spec.f_a.hidden = {100, 100};
    spec.f_a.output_dim = 5;
    spec.reservoir.kind = ReservoirKind::Fixed;
    spec.reservoir.input_dim = 5;
    spec.reservoir.output_dim = 5;
    spec.reservoir.hidden = {100};
    spec.f_b.input_dim = 5;
    spec.f_b.hidden = {100, 100};
    spec.f_b.output_dim = 1;
    return spec;
}

inline ArchitectureSpec desk_nen_spec() {
    ArchitectureSpec spec = desk_nfn_spec();
    spec.kind = ArchKind::NEN;
    spec.reservoir.kind = ReservoirKind::EchoState;
    spec.reservoir.esn.state_size = 200;
    return spec;
}

/// Housing-like stand-in table in the documented CSV schema: 8 features on
/// mixed scales, smooth teacher target in dollars. Returns the path.
std::string write_housing_like_csv(const std::string& path, std::size_t n, std::uint64_t seed);

/// Config used by the short training smoke tests.
inline RunConfig quick_run_config() {
    RunConfig cfg;
    cfg.dataset.kind = DatasetConfig::Kind::SyntheticRegression;
    cfg.dataset.n = 600;
    cfg.dataset.d_in = 8;
    cfg.architecture = desk_nfn_spec();
    cfg.epochs = 3;
    cfg.batch_size = 64;
    cfg.seed = 42;
    return cfg;
}

} // namespace bond::testsupport
