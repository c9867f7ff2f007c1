#include "lrd/oracle.hpp"

#include <algorithm>
#include <cstdio>

#include "lrd/error.hpp"

namespace lrd::oracle {

std::size_t EnumerationTable::index_of(const std::vector<State>& seq) const {
  std::size_t idx = 0;
  for (State s : seq) idx = idx * static_cast<std::size_t>(m + 1) + static_cast<std::size_t>(s);
  return idx;
}

std::vector<State> EnumerationTable::sequence_of(std::size_t index) const {
  std::vector<State> seq(n);
  for (int i = n - 1; i >= 0; --i) {
    seq[i] = static_cast<State>(index % static_cast<std::size_t>(m + 1));
    index /= static_cast<std::size_t>(m + 1);
  }
  return seq;
}

std::string EnumerationTable::key_of(std::size_t index) const {
  std::string key;
  for (State s : sequence_of(index)) key += static_cast<char>('0' + s);
  return key;
}

double EnumerationTable::at(const std::string& key) const {
  if (static_cast<int>(key.size()) != n) throw Error(ErrorKind::InvalidArgument, "key length != n");
  std::vector<State> seq;
  for (char ch : key) seq.push_back(ch - '0');
  return probs.at(index_of(seq));
}

double EnumerationTable::sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double literal_probability(const ModelParams& params, const std::vector<State>& seq) {
  const int m = params.m();
  std::vector<std::vector<TimeIndex>> sets(m + 1);
  for (std::size_t i = 0; i < seq.size(); ++i) sets[seq[i]].push_back(static_cast<TimeIndex>(i + 1));
  const std::vector<TimeIndex>& zeros = sets[0];
  const std::size_t nz = zeros.size();

  double total = 0.0;
  std::vector<TimeIndex> merged;
  std::vector<int> owner;  // owner[j] in 1..m for each member of B
  for (std::size_t mask = 0; mask < (std::size_t{1} << nz); ++mask) {
    std::vector<TimeIndex> subset;
    for (std::size_t j = 0; j < nz; ++j) {
      if (mask & (std::size_t{1} << j)) subset.push_back(zeros[j]);
    }
    const double sign = (subset.size() % 2 == 0) ? 1.0 : -1.0;
    // Every map from B to {1..m}: ordered disjoint B_1..B_m covering B.
    owner.assign(subset.size(), 1);
    while (true) {
      double term = 1.0;
      for (State k = 1; k <= m; ++k) {
        merged = sets[k];
        for (std::size_t j = 0; j < subset.size(); ++j) {
          if (owner[j] == k) merged.push_back(subset[j]);
        }
        std::sort(merged.begin(), merged.end());
        term *= l_star(params, k, merged);
      }
      total += sign * term;
      std::size_t j = 0;
      while (j < owner.size() && owner[j] == m) owner[j++] = 1;
      if (j == owner.size()) break;
      ++owner[j];
    }
  }
  return total;
}

EnumerationTable enumerate_all(const ModelParams& params, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  EnumerationTable table;
  table.n = n;
  table.m = params.m();
  std::size_t size = 1;
  for (int i = 0; i < n; ++i) {
    size *= static_cast<std::size_t>(table.m + 1);
    if (size > kMaxTableSize) {
      throw Error(ErrorKind::SizeExceeded, "(m+1)^n exceeds " + std::to_string(kMaxTableSize));
    }
  }
  table.probs.resize(size);
  for (std::size_t idx = 0; idx < size; ++idx) {
    table.probs[idx] = literal_probability(params, table.sequence_of(idx));
  }
  return table;
}

EnumerationTable marginalize(const EnumerationTable& table, int coordinate) {
  if (table.n < 2) throw Error(ErrorKind::InvalidArgument, "cannot marginalize a length-1 table");
  if (coordinate < 1 || coordinate > table.n) {
    throw Error(ErrorKind::InvalidArgument, "coordinate out of range");
  }
  EnumerationTable out;
  out.n = table.n - 1;
  out.m = table.m;
  out.probs.assign(table.probs.size() / static_cast<std::size_t>(table.m + 1), 0.0);
  for (std::size_t idx = 0; idx < table.probs.size(); ++idx) {
    auto seq = table.sequence_of(idx);
    seq.erase(seq.begin() + (coordinate - 1));
    out.probs[out.index_of(seq)] += table.probs[idx];
  }
  return out;
}

void write_csv(std::ostream& os, const EnumerationTable& table) {
  os << "sequence,probability\n";
  char buf[64];
  for (std::size_t idx = 0; idx < table.probs.size(); ++idx) {
    std::snprintf(buf, sizeof buf, "%.17g", table.probs[idx]);
    os << table.key_of(idx) << ',' << buf << '\n';
  }
}

}  // namespace lrd::oracle
