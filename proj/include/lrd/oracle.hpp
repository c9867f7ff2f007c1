#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lrd/model.hpp"

namespace lrd::oracle {

// Probabilities of every state sequence of length n, by literal evaluation of
// the inclusion-exclusion definition: a signed sum over subsets B of the
// base-state times and over every ordered split of B among the non-base
// states. Shares nothing with the engine except l_star.
struct EnumerationTable {
  int n = 0;
  int m = 0;
  // Index encodes X_1..X_n in base m+1, X_1 most significant.
  std::vector<double> probs;

  std::size_t index_of(const std::vector<State>& seq) const;
  std::vector<State> sequence_of(std::size_t index) const;
  std::string key_of(std::size_t index) const;
  double at(const std::string& key) const;
  double sum() const;
};

inline constexpr std::size_t kMaxTableSize = 10'000'000;

// Throws SizeExceeded when (m+1)^n > kMaxTableSize.
EnumerationTable enumerate_all(const ModelParams& params, int n);

// Probability of one total sequence by the literal definition.
double literal_probability(const ModelParams& params, const std::vector<State>& seq);

// Sums out one coordinate (1-based). Requires n >= 2.
EnumerationTable marginalize(const EnumerationTable& table, int coordinate);

// "sequence,probability" rows with 17 significant digits.
void write_csv(std::ostream& os, const EnumerationTable& table);

}  // namespace lrd::oracle
