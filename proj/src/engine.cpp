#include "lrd/engine.hpp"

#include <algorithm>
#include <cmath>

#include "lrd/error.hpp"

namespace lrd {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Recursive: return "recursive";
    case Strategy::DynamicProgram: return "dp";
    case Strategy::ClosedForm: return "closed-form";
    case Strategy::Auto: return "auto";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "recursive") return Strategy::Recursive;
  if (text == "dp") return Strategy::DynamicProgram;
  if (text == "auto") return Strategy::Auto;
  throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

namespace {

// L*_k(A + {i}) / L*_k(A) for i not in A.
double insertion_ratio(const ModelParams& params, State k, const std::vector<TimeIndex>& set,
                       TimeIndex i) {
  if (set.empty()) return params.prob(k);
  const auto pos = std::lower_bound(set.begin(), set.end(), i);
  if (pos == set.end()) return params.gap_factor(k, i - set.back());
  if (pos == set.begin()) return params.gap_factor(k, set.front() - i);
  const TimeIndex prev = *(pos - 1), next = *pos;
  return params.gap_factor(k, i - prev) * params.gap_factor(k, next - i) /
         params.gap_factor(k, next - prev);
}

class Peeler {
 public:
  Peeler(const ModelParams& params, const OccupancyPattern& pattern)
      : params_(params), zeros_(pattern.set_of(0)) {
    for (State k = 1; k <= params.m(); ++k) sets_.push_back(pattern.set_of(k));
  }

  double run() {
    double lprod = 1.0;
    for (State k = 1; k <= params_.m(); ++k) lprod *= l_star(params_, k, sets_[k - 1]);
    return peel(zeros_.size(), lprod);
  }

  std::size_t zero_count() const { return zeros_.size(); }

 private:
  // lprod = prod_k L*_k(A_k) for the current sets; zeros_[0..n) remain.
  double peel(std::size_t n, double lprod) {
    if (n == 0) return lprod;
    const TimeIndex i = zeros_[n - 1];
    if (n == 1) {
      double s = 0.0;
      for (State k = 1; k <= params_.m(); ++k) s += insertion_ratio(params_, k, sets_[k - 1], i);
      return lprod * (1.0 - s);
    }
    CompensatedSum acc;
    acc.add(peel(n - 1, lprod));
    for (State k = 1; k <= params_.m(); ++k) {
      auto& set = sets_[k - 1];
      const double r = insertion_ratio(params_, k, set, i);
      const auto pos = std::lower_bound(set.begin(), set.end(), i) - set.begin();
      set.insert(set.begin() + pos, i);
      acc.add(-peel(n - 1, lprod * r));
      sets_[k - 1].erase(sets_[k - 1].begin() + pos);
    }
    return acc.value();
  }

  const ModelParams& params_;
  std::vector<TimeIndex> zeros_;
  std::vector<std::vector<TimeIndex>> sets_;
};

double signed_exp(double total, double log_scale) {
  if (total == 0.0) return 0.0;
  const double mag = std::exp(log_scale + std::log(std::abs(total)));
  return total < 0 ? -mag : mag;
}

}  // namespace

ExactProbability d_star_recursive(const ModelParams& params, const OccupancyPattern& pattern,
                                  std::size_t cap) {
  pattern.check_states(params.m());
  Peeler peeler(params, pattern);
  if (peeler.zero_count() > cap) {
    throw Error(ErrorKind::CapExceeded, "|A_0| = " + std::to_string(peeler.zero_count()) +
                                            " exceeds recursion cap " + std::to_string(cap));
  }
  ExactProbability out;
  out.value = peeler.run();
  out.log_value = out.value > 0.0 ? std::log(out.value) : -INFINITY;
  out.strategy = Strategy::Recursive;
  out.condition_count = peeler.zero_count();
  out.tainted = params.tainted();
  return out;
}

DpFrontier build_frontier(const ModelParams& params, const OccupancyPattern& pattern,
                          FrontierLimits limits) {
  pattern.check_states(params.m());
  DpFrontier frontier(params, limits);
  for (const auto& [time, state] : pattern.assignments()) {
    frontier.observe(time, state);
    frontier.rescale();
  }
  return frontier;
}

ExactProbability d_star_dp(const ModelParams& params, const OccupancyPattern& pattern,
                           FrontierLimits limits) {
  const DpFrontier frontier = build_frontier(params, pattern, limits);
  ExactProbability out;
  const double total = frontier.total();
  out.value = signed_exp(total, frontier.log_scale());
  out.log_value = frontier.log_value();
  out.strategy = Strategy::DynamicProgram;
  out.condition_count = pattern.count_of(0);
  out.condition_estimate = frontier.condition();
  out.tainted = params.tainted();
  return out;
}

ExactProbability joint_probability(const ModelParams& params, const OccupancyPattern& pattern,
                                   const EngineOptions& options) {
  pattern.check_states(params.m());
  if (pattern.count_of(0) == 0) {
    ExactProbability out;
    double log_v = 0.0;
    for (State k = 1; k <= params.m(); ++k) log_v += std::log(l_star(params, k, pattern.set_of(k)));
    out.log_value = log_v;
    out.value = std::exp(log_v);
    out.strategy = Strategy::ClosedForm;
    out.tainted = params.tainted();
    return out;
  }
  if (options.strategy == Strategy::Recursive) {
    return d_star_recursive(params, pattern, options.recursion_cap);
  }
  return d_star_dp(params, pattern, options.limits);
}

ConditionalDistribution conditional_from_frontier(const DpFrontier& frontier, TimeIndex query) {
  const auto weights = frontier.extension_weights(query);
  const double total = frontier.total();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::ZeroDenominator,
                "history weight is not positive; the conditional is undefined");
  }
  ConditionalDistribution out;
  out.probs.resize(weights.size());
  out.closed_form.assign(weights.size(), false);
  for (std::size_t s = 0; s < weights.size(); ++s) out.probs[s] = weights[s] / total;
  return out;
}

ConditionalDistribution conditional_next(const ModelParams& params, const OccupancyPattern& history,
                                         TimeIndex query, const ConditionalOptions& options) {
  history.check_states(params.m());
  if (query <= history.max_index()) {
    throw Error(ErrorKind::InvalidArgument, "query time must follow the history");
  }
  const DpFrontier frontier = build_frontier(params, history, options.limits);
  if (frontier.log_value() < std::log(1e-300) && frontier.total() <= 0.0) {
    throw Error(ErrorKind::ZeroDenominator, "history probability underflowed");
  }
  ConditionalDistribution out = conditional_from_frontier(frontier, query);
  if (options.closed_form_fast_path) {
    const TimeIndex last_base = history.max_of(0);
    for (State l = 1; l <= params.m(); ++l) {
      const TimeIndex last = history.max_of(l);
      if (last > 0 && last > last_base) {
        out.probs[l] = params.gap_factor(l, query - last);
        out.closed_form[l] = true;
      } else if (last == 0 && last_base == 0) {
        out.probs[l] = params.prob(l);
        out.closed_form[l] = true;
      }
    }
  }
  return out;
}

CovarianceTable theoretical_covariances(const ModelParams& params, TimeIndex lag) {
  if (lag < 1) throw Error(ErrorKind::InvalidArgument, "lag must be positive");
  const int m = params.m();
  CovarianceTable out;
  out.lag = lag;
  out.indicator.assign(m + 1, std::vector<double>(m + 1, 0.0));
  const double log_lag = std::log(static_cast<double>(lag));
  double base = 0.0;
  for (State k = 1; k <= m; ++k) {
    const double term =
        params.prob(k) * params.coupling(k) * std::exp((2.0 * params.hurst(k) - 2.0) * log_lag);
    out.indicator[k][k] = term;
    out.indicator[k][0] = -term;
    out.indicator[0][k] = -term;
    base += term;
    out.process += static_cast<double>(k) * k * term;
  }
  out.indicator[0][0] = base;
  return out;
}

double base_state_leading_covariance(const ModelParams& params, TimeIndex lag) {
  double hmax = 0.0;
  for (State k = 1; k <= params.m(); ++k) hmax = std::max(hmax, params.hurst(k));
  const double log_lag = std::log(static_cast<double>(lag));
  double out = 0.0;
  for (State k = 1; k <= params.m(); ++k) {
    if (params.hurst(k) == hmax) {
      out += params.prob(k) * params.coupling(k) * std::exp((2.0 * hmax - 2.0) * log_lag);
    }
  }
  return out;
}

InterruptionReport interruption_bounds(const ModelParams& params, const OccupancyPattern& history,
                                       State state, TimeIndex first_query, TimeIndex later_query,
                                       TimeIndex earlier_query, FrontierLimits limits) {
  history.check_states(params.m());
  if (state < 1 || state > params.m()) {
    throw Error(ErrorKind::InvalidArgument, "state must be in 1..m");
  }
  InterruptionReport rep;
  rep.state = state;
  rep.last_state = history.max_of(state);
  rep.last_base = history.max_of(0);
  if (rep.last_state == 0) {
    throw Error(ErrorKind::PreconditionUnmet, "state never occurs in the history");
  }
  if (rep.last_base == 0 || rep.last_state > rep.last_base) {
    throw Error(ErrorKind::PreconditionUnmet,
                "the last occurrence of the state must precede the last base-state time");
  }
  for (TimeIndex q : {first_query, later_query, earlier_query}) {
    if (q <= rep.last_base || history.contains(q)) {
      throw Error(ErrorKind::PreconditionUnmet,
                  "query " + std::to_string(q) + " must be unobserved and after the last base-state time");
    }
  }
  if (later_query <= earlier_query) {
    throw Error(ErrorKind::PreconditionUnmet, "later query must exceed earlier query");
  }

  const EngineOptions opts{Strategy::DynamicProgram, 18, limits};
  const double log_hist = joint_probability(params, history, opts).log_value;
  auto conditional = [&](TimeIndex q) {
    OccupancyPattern ext = history;
    ext.assign(q, state);
    return std::exp(joint_probability(params, ext, opts).log_value - log_hist);
  };

  rep.first_query = first_query;
  rep.closed_form = params.gap_factor(state, first_query - rep.last_state);
  rep.exact = conditional(first_query);
  rep.bound_margin = rep.closed_form - rep.exact;

  rep.later_query = later_query;
  rep.earlier_query = earlier_query;
  rep.exact_ratio = conditional(later_query) / conditional(earlier_query);
  rep.closed_form_ratio = params.gap_factor(state, later_query - rep.last_state) /
                          params.gap_factor(state, earlier_query - rep.last_state);
  rep.ratio_margin = rep.exact_ratio - rep.closed_form_ratio;
  return rep;
}

}  // namespace lrd
