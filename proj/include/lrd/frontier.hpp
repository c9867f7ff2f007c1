#pragma once

#include <cstddef>
#include <vector>

#include "lrd/model.hpp"

namespace lrd {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  static double abs(double v) noexcept { return v < 0 ? -v : v; }
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct FrontierLimits {
  TimeIndex horizon = 10'000;
  std::size_t max_entries = 10'000'000;
};

// Signed weights keyed by the vector of last-occurrence times (one per
// non-base state, "never" allowed). Each axis k holds the candidate last
// times for state k: its last observed occurrence (or never) followed by the
// base-state times seen since. Entries are stored densely over the product of
// candidate lists, so equal keys are merged by construction; entries where two
// states claim the same base-state time are structurally zero.
//
// Processing a time observed in state k >= 1 multiplies by the gap factor to
// the candidate last time and collapses axis k. Processing a base-state time
// branches every entry into "excluded" plus one negated "assigned to k" branch
// per state, which appends that time to every axis.
//
// Stored entries equal the true weights times exp(-log_scale()).
class DpFrontier {
 public:
  static constexpr TimeIndex kNever = -1;

  explicit DpFrontier(const ModelParams& params, FrontierLimits limits = {});

  // Requires time > horizon(). Throws HorizonExceeded / FrontierOverflow.
  void observe(TimeIndex time, State state);

  // Weights (same scale as total()) of the current entries extended by
  // X_time = s, for s = 0..m. Element 0 is total() minus the others.
  std::vector<double> extension_weights(TimeIndex time) const;

  // Compensated sum of entries, relative to the current scale.
  double total() const;
  double abs_total() const;
  // Sum |w| / |sum w|; large values flag inclusion-exclusion cancellation.
  double condition() const;
  double log_scale() const noexcept { return log_scale_; }
  // log of the represented D* value.
  double log_value() const;

  // Divide entries by sum |w| and fold the factor into log_scale().
  void rescale();

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t peak_size() const noexcept { return peak_size_; }
  // Sum over processed times of the entry count touched.
  double work() const noexcept { return work_; }
  TimeIndex horizon() const noexcept { return horizon_; }
  std::size_t processed() const noexcept { return processed_; }
  const std::vector<TimeIndex>& candidates(State k) const { return axes_[k - 1]; }
  const ModelParams& params() const noexcept { return *params_; }

 private:
  double factor(int axis, TimeIndex time, TimeIndex last) const {
    return last == kNever ? params_->prob(axis + 1) : params_->gap_factor(axis + 1, time - last);
  }
  std::vector<double> axis_factors(int axis, TimeIndex time) const;
  void update_strides();
  // Contract the given axis with a vector, writing a tensor with that axis
  // removed (same order for the other axes).
  void contract(int axis, const std::vector<double>& vec, std::vector<double>& out) const;

  const ModelParams* params_;
  FrontierLimits limits_;
  std::vector<std::vector<TimeIndex>> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> weights_;
  std::vector<double> scratch_;
  double log_scale_ = 0.0;
  TimeIndex horizon_ = 0;
  std::size_t processed_ = 0;
  std::size_t peak_size_ = 1;
  double work_ = 0.0;
};

}  // namespace lrd
