#pragma once

#include <random>

#include "lrd/model.hpp"

namespace lrd::test {

inline RawParams canonical_raw() { return RawParams{{0.8, 0.6}, {0.2, 0.3}, {0.1, 0.1}}; }
inline ModelParams canonical() { return ModelParams::validated(canonical_raw()); }

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace lrd::test
