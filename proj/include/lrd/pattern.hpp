#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lrd/model.hpp"

namespace lrd {

// Assignment of time indices to states; equivalently the pairwise disjoint
// sets A_0, ..., A_m. Disjointness holds by construction (one state per index).
class OccupancyPattern {
 public:
  OccupancyPattern() = default;

  // Total assignment X_1..X_n from a sequence of states.
  static OccupancyPattern from_states(const std::vector<State>& states);
  // Compact string over the alphabet {0..m}, starting at index 1.
  static OccupancyPattern from_compact(std::string_view compact);
  // Lines of "index state"; blank lines and '#' comments are ignored.
  static OccupancyPattern parse_lines(const std::string& text);

  // Throws InvalidArgument if index < 1, state < 0, or the index is taken by
  // a different state. Re-assigning the same state is a no-op.
  OccupancyPattern& assign(TimeIndex index, State state);
  bool contains(TimeIndex index) const { return assignments_.count(index) != 0; }
  State at(TimeIndex index) const;

  const std::map<TimeIndex, State>& assignments() const noexcept { return assignments_; }
  std::size_t size() const noexcept { return assignments_.size(); }
  bool empty() const noexcept { return assignments_.empty(); }

  // Ascending members of A_k.
  std::vector<TimeIndex> set_of(State k) const;
  std::size_t count_of(State k) const;
  // Largest index assigned to k, or 0 if A_k is empty.
  TimeIndex max_of(State k) const;
  TimeIndex max_index() const { return empty() ? 0 : assignments_.rbegin()->first; }
  State max_state() const;

  // True if the indices are exactly 1..n for n = size().
  bool is_total() const;

  OccupancyPattern shifted(TimeIndex offset) const;
  // Throws InvalidArgument if a state exceeds m.
  void check_states(int m) const;

  std::string to_lines() const;

  friend bool operator==(const OccupancyPattern&, const OccupancyPattern&) = default;

 private:
  std::map<TimeIndex, State> assignments_;
};

}  // namespace lrd
