#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "lrd/frontier.hpp"
#include "lrd/model.hpp"

namespace lrd {

// Seed for replicate r of a batch: the SplitMix64 finalizer applied to
// base_seed + (r + 1) * 0x9E3779B97F4A7C15. Each path then draws from a
// std::mt19937_64 seeded with its derived seed, and uniforms are built from the
// top 53 bits of one 64-bit draw, so streams are bit-exact across platforms.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replicate) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Uniform in [0, 1) from one generator draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

struct PathSample {
  std::vector<std::uint8_t> states;  // X_1..X_n
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;
  // Cost counters: largest frontier and total frontier entries touched.
  std::size_t peak_frontier = 0;
  double work = 0.0;

  std::size_t size() const noexcept { return states.size(); }
};

struct SampleBatch {
  std::size_t replicates = 0;
  std::size_t length = 0;
  std::uint64_t base_seed = 0;
  std::uint64_t params_hash = 0;
  std::vector<PathSample> paths;
  double elapsed_seconds = 0.0;
};

struct SamplerOptions {
  FrontierLimits limits{1 << 22, 10'000'000};
};

// Draws one path step by step; each call to next() samples X_t from its exact
// conditional law given X_1..X_{t-1}.
class PathSampler {
 public:
  PathSampler(const ModelParams& params, std::uint64_t seed, const SamplerOptions& options = {});

  State next();
  const std::vector<std::uint8_t>& states() const noexcept { return states_; }
  std::size_t length() const noexcept { return states_.size(); }
  PathSample finish() &&;

 private:
  std::mt19937_64 gen_;
  DpFrontier frontier_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> states_;
};

// Exact sequential sampling: X_1 from (p_0, ..., p_m), then each X_i from its
// conditional law given the realized prefix, by inverse CDF over states in
// ascending order. Deterministic in (params, n, seed).
PathSample sample_path(const ModelParams& params, std::size_t n, std::uint64_t seed,
                       const SamplerOptions& options = {});

// Replicate r uses derive_seed(base_seed, r). The result does not depend on
// parallelism. Throws InvalidArgument when replicates == 0.
SampleBatch sample_batch(const ModelParams& params, std::size_t n, std::size_t replicates,
                         std::uint64_t base_seed, unsigned parallelism = 1,
                         const SamplerOptions& options = {});

// Runs body(r) for r in [0, replicates) on up to `parallelism` threads and
// rethrows the first failure.
void for_each_replicate(std::size_t replicates, unsigned parallelism,
                        const std::function<void(std::size_t)>& body);

// One compact state string per line.
void write_compact(std::ostream& os, const SampleBatch& batch);
// "replicate,index,state" rows.
void write_long_csv(std::ostream& os, const SampleBatch& batch);

}  // namespace lrd
