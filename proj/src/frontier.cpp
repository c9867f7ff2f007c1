#include "lrd/frontier.hpp"

#include <cmath>

#include "lrd/error.hpp"

namespace lrd {

namespace {

// Writes a contiguous row-major tensor of the given shape into dst using
// dst_strides, starting at base, multiplied by scale.
void scatter(const std::vector<double>& src, const std::vector<std::size_t>& shape,
             std::vector<double>& dst, const std::vector<std::size_t>& dst_strides,
             std::size_t base, double scale) {
  const std::size_t dims = shape.size();
  const std::size_t last = shape[dims - 1];
  std::size_t outer = 1;
  for (std::size_t d = 0; d + 1 < dims; ++d) outer *= shape[d];
  std::vector<std::size_t> idx(dims, 0);
  std::size_t src_off = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t dst_off = base;
    for (std::size_t d = 0; d + 1 < dims; ++d) dst_off += idx[d] * dst_strides[d];
    const double* s = src.data() + src_off;
    double* t = dst.data() + dst_off;
    const std::size_t step = dst_strides[dims - 1];
    for (std::size_t j = 0; j < last; ++j) t[j * step] = scale * s[j];
    src_off += last;
    for (std::size_t d = dims - 1; d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
}

}  // namespace

DpFrontier::DpFrontier(const ModelParams& params, FrontierLimits limits)
    : params_(&params), limits_(limits), axes_(params.m(), std::vector<TimeIndex>{kNever}),
      weights_{1.0} {
  update_strides();
}

void DpFrontier::update_strides() {
  const std::size_t m = axes_.size();
  strides_.assign(m, 1);
  for (std::size_t k = m - 1; k-- > 0;) strides_[k] = strides_[k + 1] * axes_[k + 1].size();
}

std::vector<double> DpFrontier::axis_factors(int axis, TimeIndex time) const {
  const auto& cand = axes_[axis];
  std::vector<double> g(cand.size());
  for (std::size_t j = 0; j < cand.size(); ++j) g[j] = factor(axis, time, cand[j]);
  return g;
}

void DpFrontier::contract(int axis, const std::vector<double>& vec, std::vector<double>& out) const {
  const std::size_t len = axes_[axis].size();
  const std::size_t inner = strides_[axis];
  const std::size_t outer = weights_.size() / (len * inner);
  out.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    double* dst = out.data() + o * inner;
    const double* src = weights_.data() + o * len * inner;
    for (std::size_t j = 0; j < len; ++j) {
      const double g = vec[j];
      const double* row = src + j * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += g * row[i];
    }
  }
}

void DpFrontier::observe(TimeIndex time, State state) {
  if (time <= horizon_) {
    throw Error(ErrorKind::InvalidArgument, "frontier times must be strictly increasing");
  }
  if (time > limits_.horizon) {
    throw Error(ErrorKind::HorizonExceeded,
                "time " + std::to_string(time) + " beyond horizon " + std::to_string(limits_.horizon));
  }
  const int m = static_cast<int>(axes_.size());
  if (state < 0 || state > m) {
    throw Error(ErrorKind::InvalidArgument, "state " + std::to_string(state) + " outside 0..m");
  }
  work_ += static_cast<double>(weights_.size());

  if (state > 0) {
    const int axis = state - 1;
    contract(axis, axis_factors(axis, time), scratch_);
    weights_.swap(scratch_);
    axes_[axis].assign(1, time);
    update_strides();
  } else {
    std::vector<std::size_t> old_shape(m), new_shape(m);
    std::size_t new_size = 1;
    for (int k = 0; k < m; ++k) {
      old_shape[k] = axes_[k].size();
      new_shape[k] = old_shape[k] + 1;
      if (new_size > limits_.max_entries / new_shape[k]) {
        throw Error(ErrorKind::FrontierOverflow,
                    "frontier would exceed " + std::to_string(limits_.max_entries) + " entries");
      }
      new_size *= new_shape[k];
    }
    std::vector<std::size_t> new_strides(m, 1);
    for (int k = m - 1; k-- > 0;) new_strides[k] = new_strides[k + 1] * new_shape[k + 1];

    std::vector<double> next(new_size, 0.0);
    scatter(weights_, old_shape, next, new_strides, 0, 1.0);
    for (int k = 0; k < m; ++k) {
      contract(k, axis_factors(k, time), scratch_);
      std::vector<std::size_t> slab_shape = old_shape;
      slab_shape[k] = 1;
      scatter(scratch_, slab_shape, next, new_strides, old_shape[k] * new_strides[k], -1.0);
    }
    weights_.swap(next);
    for (auto& axis : axes_) axis.push_back(time);
    strides_ = std::move(new_strides);
  }
  horizon_ = time;
  ++processed_;
  if (weights_.size() > peak_size_) peak_size_ = weights_.size();
}

std::vector<double> DpFrontier::extension_weights(TimeIndex time) const {
  if (time <= horizon_) {
    throw Error(ErrorKind::InvalidArgument, "extension time must follow the frontier horizon");
  }
  const int m = static_cast<int>(axes_.size());
  std::vector<double> out(m + 1, 0.0);
  const double whole = total();
  double assigned = 0.0;
  for (int k = 0; k < m; ++k) {
    const std::size_t len = axes_[k].size();
    const std::size_t inner = strides_[k];
    const std::size_t outer = weights_.size() / (len * inner);
    if (len == 1) {
      // No base-state time since the last occurrence: the marginal is the total.
      const double acc = whole * factor(k, time, axes_[k][0]);
      out[k + 1] = acc;
      assigned += acc;
      continue;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      double marginal = 0.0;
      for (std::size_t o = 0; o < outer; ++o) {
        const double* row = weights_.data() + (o * len + j) * inner;
        for (std::size_t i = 0; i < inner; ++i) marginal += row[i];
      }
      acc += marginal * factor(k, time, axes_[k][j]);
    }
    out[k + 1] = acc;
    assigned += acc;
  }
  out[0] = whole - assigned;
  return out;
}

double DpFrontier::total() const {
  CompensatedSum s;
  for (double w : weights_) s.add(w);
  return s.value();
}

double DpFrontier::abs_total() const {
  double s = 0.0;
  for (double w : weights_) s += std::abs(w);
  return s;
}

double DpFrontier::condition() const {
  const double t = std::abs(total());
  return t > 0.0 ? abs_total() / t : INFINITY;
}

double DpFrontier::log_value() const {
  const double t = total();
  return t > 0.0 ? log_scale_ + std::log(t) : -INFINITY;
}

void DpFrontier::rescale() {
  const double a = abs_total();
  if (!(a > 0.0) || !std::isfinite(a)) return;
  const double inv = 1.0 / a;
  for (double& w : weights_) w *= inv;
  log_scale_ += std::log(a);
}

}  // namespace lrd
