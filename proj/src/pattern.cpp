#include "lrd/pattern.hpp"

#include <charconv>
#include <sstream>

#include "lrd/error.hpp"

namespace lrd {

OccupancyPattern OccupancyPattern::from_states(const std::vector<State>& states) {
  OccupancyPattern out;
  for (std::size_t i = 0; i < states.size(); ++i) out.assign(static_cast<TimeIndex>(i + 1), states[i]);
  return out;
}

OccupancyPattern OccupancyPattern::from_compact(std::string_view compact) {
  OccupancyPattern out;
  TimeIndex i = 0;
  for (char ch : compact) {
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') continue;
    if (ch < '0' || ch > '9') {
      throw Error(ErrorKind::Parse, std::string("bad state character '") + ch + "'");
    }
    out.assign(++i, ch - '0');
  }
  return out;
}

OccupancyPattern OccupancyPattern::parse_lines(const std::string& text) {
  OccupancyPattern out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra)) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected 'index state'");
    }
    TimeIndex idx = 0;
    State st = 0;
    const auto r1 = std::from_chars(a.data(), a.data() + a.size(), idx);
    const auto r2 = std::from_chars(b.data(), b.data() + b.size(), st);
    if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || r2.ec != std::errc() ||
        r2.ptr != b.data() + b.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": not integers");
    }
    out.assign(idx, st);
  }
  return out;
}

OccupancyPattern& OccupancyPattern::assign(TimeIndex index, State state) {
  if (index < 1) throw Error(ErrorKind::InvalidArgument, "time indices must be positive");
  if (state < 0) throw Error(ErrorKind::InvalidArgument, "states must be non-negative");
  auto [it, inserted] = assignments_.emplace(index, state);
  if (!inserted && it->second != state) {
    throw Error(ErrorKind::InvalidArgument,
                "index " + std::to_string(index) + " already assigned to another state");
  }
  return *this;
}

State OccupancyPattern::at(TimeIndex index) const {
  auto it = assignments_.find(index);
  if (it == assignments_.end()) {
    throw Error(ErrorKind::InvalidArgument, "index " + std::to_string(index) + " not assigned");
  }
  return it->second;
}

std::vector<TimeIndex> OccupancyPattern::set_of(State k) const {
  std::vector<TimeIndex> out;
  for (const auto& [i, s] : assignments_) {
    if (s == k) out.push_back(i);
  }
  return out;
}

std::size_t OccupancyPattern::count_of(State k) const {
  std::size_t n = 0;
  for (const auto& [i, s] : assignments_) n += (s == k);
  return n;
}

TimeIndex OccupancyPattern::max_of(State k) const {
  for (auto it = assignments_.rbegin(); it != assignments_.rend(); ++it) {
    if (it->second == k) return it->first;
  }
  return 0;
}

State OccupancyPattern::max_state() const {
  State s = 0;
  for (const auto& kv : assignments_) s = std::max(s, kv.second);
  return s;
}

bool OccupancyPattern::is_total() const {
  return empty() || (assignments_.begin()->first == 1 &&
                     max_index() == static_cast<TimeIndex>(assignments_.size()));
}

OccupancyPattern OccupancyPattern::shifted(TimeIndex offset) const {
  OccupancyPattern out;
  for (const auto& [i, s] : assignments_) out.assign(i + offset, s);
  return out;
}

void OccupancyPattern::check_states(int m) const {
  if (max_state() > m) {
    throw Error(ErrorKind::InvalidArgument,
                "pattern uses state " + std::to_string(max_state()) + " but m = " + std::to_string(m));
  }
}

std::string OccupancyPattern::to_lines() const {
  std::string out;
  for (const auto& [i, s] : assignments_) out += std::to_string(i) + " " + std::to_string(s) + "\n";
  return out;
}

}  // namespace lrd
