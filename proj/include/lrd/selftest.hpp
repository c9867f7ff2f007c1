#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lrd/engine.hpp"
#include "lrd/model.hpp"
#include "lrd/pattern.hpp"

namespace lrd {

// Random scenario generators shared by the self-test and the test suites.
namespace scenarios {

// A parameter set with m states that passes validation. H, p and c are drawn
// uniformly from (0.05, 0.95), (0, 0.8/m) and (0, 0.5) and redrawn until the
// assumption holds.
RawParams random_params(std::mt19937_64& gen, int m);

// Partial pattern on a random subset of 1..span with random states.
OccupancyPattern random_pattern(std::mt19937_64& gen, int m, TimeIndex span, std::size_t size);

// Pattern with exactly `zeros` base-state entries among the first span times.
OccupancyPattern random_pattern_with_zeros(std::mt19937_64& gen, int m, TimeIndex span,
                                           std::size_t zeros, std::size_t others);

struct MarkovCase {
  OccupancyPattern history;
  State state = 1;
  TimeIndex query = 0;
};

// History in which `state` occurs after the last base-state time.
MarkovCase random_markov_case(std::mt19937_64& gen, int m, TimeIndex span);

struct InterruptionCase {
  OccupancyPattern history;
  State state = 1;
  TimeIndex first_query = 0;
  TimeIndex later_query = 0;
  TimeIndex earlier_query = 0;
};

// History in which `state` occurs, followed later by a base-state time.
InterruptionCase random_interruption_case(std::mt19937_64& gen, int m, TimeIndex span);

}  // namespace scenarios

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestReport {
  std::vector<SelfTestCheck> checks;
  bool passed() const;
  // Null when every check passed.
  const SelfTestCheck* first_failure() const;
};

struct SelfTestOptions {
  std::uint64_t seed = 1;
  unsigned parallelism = 1;
  // Called after each check, for progress output.
  std::function<void(const SelfTestCheck&)> on_check;
};

// Desk-scale invariant suite on one parameter set: normalization and
// positivity, oracle agreement of both strategies, marginal consistency and
// stationarity, covariance identities, the generalized Markov property, the
// interruption inequalities, sampler determinism and a chi-square check.
SelfTestReport run_selftest(const ModelParams& params, const SelfTestOptions& options = {});

}  // namespace lrd
