#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lrd {

// Time index of a process observation. Indices are strictly positive.
using TimeIndex = std::int64_t;
// A state in S = {0, 1, ..., m}; 0 is the base state.
using State = int;

// Raw, unvalidated parameter vectors as read from a file or the command line.
struct RawParams {
  std::vector<double> hurst;
  std::vector<double> prob;
  std::vector<double> coupling;
};

struct ValidationReport {
  // Per-state terms (p_k + c_k)^2 / (p_k + c_k 2^(2H_k - 2)) and their sum.
  std::vector<double> terms;
  double sum = 0.0;
  bool passed = false;
};

// Evaluates the adjacent-triple sufficient condition without throwing.
// Vectors must have equal length; entries outside (0,1) make the terms
// meaningless but still computable.
ValidationReport assumption_report(const RawParams& raw);

// Largest value of sum_k g_k(i1-i0) g_k(i2-i1) / g_k(i2-i0) over all triples
// i0 < i1 < i2 with i2 - i0 <= horizon. Debug corroboration of the
// adjacent-triple check; O(horizon^2 * m).
double scan_triple_sum(const RawParams& raw, TimeIndex horizon);

// Immutable parameter set (H, p, c) for the m non-base states. The base state
// probability p0 is derived. Gap factors p_k + c_k g^(2H_k - 2) are tabulated
// eagerly for small gaps so a shared instance never mutates.
class ModelParams {
 public:
  static constexpr TimeIndex kDefaultGapTable = 4096;

  // Strict construction: throws lrd::Error (RangeViolation, SimplexViolation,
  // AssumptionViolation, InvalidArgument) naming the violated condition.
  static ModelParams validated(const RawParams& raw, TimeIndex gap_table = kDefaultGapTable);

  // Skips the sufficient condition for positivity. Range and simplex checks
  // still apply (p0 must be a probability), except that c_k = 0 is accepted.
  // The result reports tainted() and
  // downstream results inherit that flag.
  static ModelParams unchecked(const RawParams& raw, TimeIndex gap_table = kDefaultGapTable);

  int m() const noexcept { return static_cast<int>(hurst_.size()); }
  double hurst(State k) const { return hurst_[k - 1]; }
  double prob(State k) const { return k == 0 ? p0_ : prob_[k - 1]; }
  double coupling(State k) const { return coupling_[k - 1]; }
  double p0() const noexcept { return p0_; }
  bool tainted() const noexcept { return tainted_; }
  const ValidationReport& validation() const noexcept { return report_; }
  const RawParams& raw() const noexcept { return raw_; }

  // p_k + c_k * gap^(2 H_k - 2) for gap >= 1.
  double gap_factor(State k, TimeIndex gap) const {
    const std::size_t row = static_cast<std::size_t>(k - 1);
    if (gap <= table_size_) return table_[row * static_cast<std::size_t>(table_size_) + (gap - 1)];
    return gap_factor_uncached(k, gap);
  }
  double gap_factor_uncached(State k, TimeIndex gap) const;

  // Stable 64-bit digest of the parameter bit patterns.
  std::uint64_t digest() const noexcept { return digest_; }
  std::string digest_hex() const;

 private:
  ModelParams(const RawParams& raw, bool strict, TimeIndex gap_table);

  RawParams raw_;
  std::vector<double> hurst_, prob_, coupling_;
  double p0_ = 0.0;
  bool tainted_ = false;
  ValidationReport report_;
  TimeIndex table_size_ = 0;
  std::vector<double> table_;
  std::uint64_t digest_ = 0;
};

// The product-form weight p_k * prod_j (p_k + c_k |i_j - i_{j-1}|^(2H_k - 2))
// over an ascending index set. 1 for the empty set, p_k for a singleton.
double l_star(const ModelParams& params, State k, std::span<const TimeIndex> ascending);

// Parameter file: "key = value" lines with keys H, p, c and optionally m;
// lists are comma or whitespace separated; '#' starts a comment.
RawParams parse_params_text(const std::string& text);
RawParams read_params_file(const std::string& path);
std::string format_params_text(const RawParams& raw);

}  // namespace lrd
