#pragma once

#include <string_view>
#include <vector>

#include "lrd/frontier.hpp"
#include "lrd/model.hpp"
#include "lrd/pattern.hpp"

namespace lrd {

enum class Strategy { Recursive, DynamicProgram, ClosedForm, Auto };

std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view text);

struct ExactProbability {
  double value = 0.0;
  // log(value); finite even when value underflows (DP path only).
  double log_value = 0.0;
  Strategy strategy = Strategy::ClosedForm;
  // |A_0| processed.
  std::size_t condition_count = 0;
  // sum |w| / |sum w| of the final frontier, 1 when no cancellation occurred.
  double condition_estimate = 1.0;
  // Parameters were constructed unchecked; positivity is not guaranteed.
  bool tainted = false;
};

struct EngineOptions {
  Strategy strategy = Strategy::Auto;
  // Largest |A_0| the recursion accepts: (m+1)^cap leaves.
  std::size_t recursion_cap = 18;
  FrontierLimits limits{};
};

// Condition estimates above this are surfaced by the CLI.
inline constexpr double kConditionWarning = 1e6;

// D*(A_1..A_m; A_0) by peeling max(A_0):
//   D*(..; A_0) = D*(..; A_0 \ {i}) - sum_k D*(.., A_k + {i}, ..; A_0 \ {i}),
// down to the |A_0| <= 1 closed forms. Throws CapExceeded.
ExactProbability d_star_recursive(const ModelParams& params, const OccupancyPattern& pattern,
                                  std::size_t cap = 18);

// D* by a forward scan over the pattern's times with a signed-weight frontier.
// Throws HorizonExceeded / FrontierOverflow.
ExactProbability d_star_dp(const ModelParams& params, const OccupancyPattern& pattern,
                           FrontierLimits limits = {});

// Builds the frontier for a pattern (times ascending), rescaling as it goes.
DpFrontier build_frontier(const ModelParams& params, const OccupancyPattern& pattern,
                          FrontierLimits limits = {});

// P(X_i = k for all (i, k) in the pattern). Product form when A_0 is empty,
// otherwise D* by the selected strategy (Auto picks the DP).
ExactProbability joint_probability(const ModelParams& params, const OccupancyPattern& pattern,
                                   const EngineOptions& options = {});

struct ConditionalOptions {
  // Use p_l + c_l d^(2H_l-2) for states whose last occurrence follows the last
  // base-state time. Disable to force every component through the frontier.
  bool closed_form_fast_path = true;
  FrontierLimits limits{};
};

struct ConditionalDistribution {
  std::vector<double> probs;     // indexed by state 0..m
  std::vector<bool> closed_form; // which components used the closed form
};

// P(X_query = s | history) for s = 0..m. The history need not be total; the
// query must follow every history index. Throws ZeroDenominator when the
// history weight is not positive after rescaling.
ConditionalDistribution conditional_next(const ModelParams& params, const OccupancyPattern& history,
                                         TimeIndex query, const ConditionalOptions& options = {});

// Same, continuing from an already built frontier.
ConditionalDistribution conditional_from_frontier(const DpFrontier& frontier, TimeIndex query);

struct CovarianceTable {
  TimeIndex lag = 0;
  // indicator[a][b] = cov(I{X_i = a}, I{X_{i+lag} = b}), a, b in 0..m.
  std::vector<std::vector<double>> indicator;
  // cov(X_i, X_{i+lag}).
  double process = 0.0;
};

// Closed-form covariances at a positive lag.
CovarianceTable theoretical_covariances(const ModelParams& params, TimeIndex lag);

// Leading term of cov(I{X_i=0}, I{X_j=0}) as lag grows: the sum of
// p_k c_k lag^(2H_k-2) over the states sharing the maximal H.
double base_state_leading_covariance(const ModelParams& params, TimeIndex lag);

struct InterruptionReport {
  State state = 0;
  TimeIndex last_state = 0;  // max A_l
  TimeIndex last_base = 0;   // max A_0
  // Upper bound: closed form vs exact conditional at first_query.
  TimeIndex first_query = 0;
  double closed_form = 0.0;
  double exact = 0.0;
  double bound_margin = 0.0;  // closed_form - exact
  // Decay comparison between a later and an earlier query.
  TimeIndex later_query = 0, earlier_query = 0;
  double exact_ratio = 0.0;
  double closed_form_ratio = 0.0;
  double ratio_margin = 0.0;  // exact_ratio - closed_form_ratio
  bool holds() const { return bound_margin > 0.0 && ratio_margin > 0.0; }
};

// After a base-state interruption (max A_l < max A_0), the exact conditional
// of state l at first_query lies strictly below p_l + c_l d^(2H_l-2), and the
// ratio of exact conditionals at later_query > earlier_query exceeds the
// ratio of closed forms. Evaluates both sides exactly. Throws
// PreconditionUnmet if the configuration violates the hypotheses.
InterruptionReport interruption_bounds(const ModelParams& params, const OccupancyPattern& history,
                                       State state, TimeIndex first_query, TimeIndex later_query,
                                       TimeIndex earlier_query, FrontierLimits limits = {});

}  // namespace lrd
