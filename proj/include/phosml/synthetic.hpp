#pragma once

#include <cstdint>

#include "phosml/dataset.hpp"

namespace phosml {

// Random emitters with descriptors in plausible ranges and all three targets
// drawn from fixed nonlinear functions of a few descriptors plus noise.
// Useful for demos, tests and timing; the numbers mean nothing chemically.
Dataset synthetic_emitters(std::size_t n, std::uint64_t seed,
                           const FeatureSchema& schema = FeatureSchema::pt_emitters());

}  // namespace phosml
