#include "lrd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lrd/analytics.hpp"
#include "lrd/error.hpp"
#include "lrd/oracle.hpp"
#include "lrd/sampler.hpp"

namespace lrd {

namespace scenarios {

namespace {

double uniform(std::mt19937_64& gen, double lo, double hi) { return lo + (hi - lo) * uniform01(gen); }

std::int64_t uniform_int(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform01(gen) * static_cast<double>(hi - lo + 1));
}

}  // namespace

RawParams random_params(std::mt19937_64& gen, int m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "m must be at least 1");
  for (;;) {
    RawParams raw;
    for (int k = 0; k < m; ++k) {
      raw.hurst.push_back(uniform(gen, 0.05, 0.95));
      raw.prob.push_back(uniform(gen, 0.01, 0.8 / m));
      raw.coupling.push_back(uniform(gen, 0.01, 0.5));
    }
    if (assumption_report(raw).passed) return raw;
  }
}

OccupancyPattern random_pattern(std::mt19937_64& gen, int m, TimeIndex span, std::size_t size) {
  std::vector<TimeIndex> times(static_cast<std::size_t>(span));
  std::iota(times.begin(), times.end(), TimeIndex{1});
  size = std::min(size, times.size());
  OccupancyPattern p;
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(gen, static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(times.size()) - 1));
    std::swap(times[i], times[j]);
    p.assign(times[i], static_cast<State>(uniform_int(gen, 0, m)));
  }
  return p;
}

OccupancyPattern random_pattern_with_zeros(std::mt19937_64& gen, int m, TimeIndex span,
                                           std::size_t zeros, std::size_t others) {
  std::vector<TimeIndex> times(static_cast<std::size_t>(span));
  std::iota(times.begin(), times.end(), TimeIndex{1});
  const std::size_t total = std::min(zeros + others, times.size());
  OccupancyPattern p;
  for (std::size_t i = 0; i < total; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(gen, static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(times.size()) - 1));
    std::swap(times[i], times[j]);
    p.assign(times[i], i < zeros ? 0 : static_cast<State>(uniform_int(gen, 1, m)));
  }
  return p;
}

MarkovCase random_markov_case(std::mt19937_64& gen, int m, TimeIndex span) {
  MarkovCase c;
  c.state = static_cast<State>(uniform_int(gen, 1, m));
  c.history = random_pattern(gen, m, span - 1, static_cast<std::size_t>(uniform_int(gen, 1, span - 1)));
  c.history.assign(span, c.state);
  TimeIndex t = span;
  // Other non-base states may follow without breaking the hypothesis.
  const auto tail = uniform_int(gen, 0, 2);
  for (std::int64_t i = 0; i < tail && m > 1; ++i) {
    State s = static_cast<State>(uniform_int(gen, 1, m - 1));
    if (s >= c.state) ++s;
    t += uniform_int(gen, 1, 2);
    c.history.assign(t, s);
  }
  c.query = t + uniform_int(gen, 1, 6);
  return c;
}

InterruptionCase random_interruption_case(std::mt19937_64& gen, int m, TimeIndex span) {
  InterruptionCase c;
  c.state = static_cast<State>(uniform_int(gen, 1, m));
  c.history = random_pattern(gen, m, span - 1, static_cast<std::size_t>(uniform_int(gen, 1, span - 1)));
  if (c.history.count_of(c.state) == 0) {
    TimeIndex t = uniform_int(gen, 1, span - 1);
    OccupancyPattern rebuilt;
    for (const auto& [i, s] : c.history.assignments())
      if (i != t) rebuilt.assign(i, s);
    rebuilt.assign(t, c.state);
    c.history = rebuilt;
  }
  c.history.assign(span, 0);
  c.first_query = span + uniform_int(gen, 1, 4);
  c.earlier_query = span + uniform_int(gen, 1, 4);
  c.later_query = c.earlier_query + uniform_int(gen, 1, 6);
  return c;
}

}  // namespace scenarios

bool SelfTestReport::passed() const { return first_failure() == nullptr; }

const SelfTestCheck* SelfTestReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int table_length(int m, std::size_t budget) {
  int n = 1;
  std::size_t size = static_cast<std::size_t>(m + 1);
  while (n < 6 && size * static_cast<std::size_t>(m + 1) <= budget) {
    size *= static_cast<std::size_t>(m + 1);
    ++n;
  }
  return n;
}

SelfTestCheck check_normalization(const oracle::EnumerationTable& table) {
  const double sum = table.sum();
  const double lowest = *std::min_element(table.probs.begin(), table.probs.end());
  return {"normalization", std::abs(sum - 1.0) <= 1e-10 && lowest > 0.0,
          fmt("n=%g sum-1=%.3g", table.n, sum - 1.0) + fmt(" min=%.3g", lowest)};
}

SelfTestCheck check_strategies(const ModelParams& params, const oracle::EnumerationTable& table) {
  double worst = 0.0;
  for (std::size_t i = 0; i < table.probs.size(); ++i) {
    const auto pattern = OccupancyPattern::from_states(table.sequence_of(i));
    const double dp = d_star_dp(params, pattern).value;
    const double rec = d_star_recursive(params, pattern).value;
    worst = std::max({worst, std::abs(dp - table.probs[i]), std::abs(rec - table.probs[i])});
  }
  return {"oracle_equivalence", worst <= 1e-10, fmt("max |engine - oracle| = %.3g", worst)};
}

SelfTestCheck check_consistency(const ModelParams& params, const oracle::EnumerationTable& table) {
  if (table.n < 2) return {"marginal_consistency", true, "n < 2, skipped"};
  const auto shorter = oracle::enumerate_all(params, table.n - 1);
  const auto last = oracle::marginalize(table, table.n);
  const auto first = oracle::marginalize(table, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < shorter.probs.size(); ++i) {
    worst = std::max(worst, std::abs(last.probs[i] - shorter.probs[i]));
    worst = std::max(worst, std::abs(first.probs[i] - shorter.probs[i]));
  }
  return {"marginal_consistency", worst <= 1e-10, fmt("max deviation %.3g", worst)};
}

SelfTestCheck check_covariances(const ModelParams& params) {
  const int m = params.m();
  double worst = 0.0;
  for (TimeIndex lag = 1; lag <= 10; ++lag) {
    const auto theory = theoretical_covariances(params, lag);
    double process = 0.0;
    for (State a = 0; a <= m; ++a) {
      for (State b = 0; b <= m; ++b) {
        OccupancyPattern p;
        p.assign(1, a).assign(1 + lag, b);
        const double cov = joint_probability(params, p).value - params.prob(a) * params.prob(b);
        process += a * b * cov;
        const double t = theory.indicator[a][b];
        worst = std::max(worst, std::abs(cov - t) / std::max(std::abs(t), 1e-3));
      }
    }
    worst = std::max(worst, std::abs(process - theory.process) / std::max(std::abs(theory.process), 1e-3));
  }
  return {"covariance_identities", worst <= 1e-12, fmt("max relative deviation %.3g", worst)};
}

SelfTestCheck check_markov(const ModelParams& params, std::mt19937_64& gen) {
  double worst = 0.0;
  ConditionalOptions opts;
  opts.closed_form_fast_path = false;
  for (int i = 0; i < 20; ++i) {
    const auto c = scenarios::random_markov_case(gen, params.m(), 10);
    const auto dist = conditional_next(params, c.history, c.query, opts);
    const double d = static_cast<double>(c.query - c.history.max_of(c.state));
    const double closed = params.gap_factor_uncached(c.state, static_cast<TimeIndex>(d));
    worst = std::max(worst, std::abs(dist.probs[c.state] - closed));
  }
  return {"generalized_markov", worst <= 1e-10, fmt("max deviation %.3g", worst)};
}

SelfTestCheck check_interruption(const ModelParams& params, std::mt19937_64& gen) {
  double lowest_bound = INFINITY, lowest_ratio = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const auto c = scenarios::random_interruption_case(gen, params.m(), 10);
    const auto r = interruption_bounds(params, c.history, c.state, c.first_query, c.later_query, c.earlier_query);
    lowest_bound = std::min(lowest_bound, r.bound_margin);
    lowest_ratio = std::min(lowest_ratio, r.ratio_margin);
  }
  return {"interruption_inequalities", lowest_bound > 0.0 && lowest_ratio > 0.0,
          fmt("min margins %.3g, %.3g", lowest_bound, lowest_ratio)};
}

SelfTestCheck check_determinism(const ModelParams& params, const SelfTestOptions& options) {
  const auto a = sample_batch(params, 40, 8, options.seed, 1);
  const auto b = sample_batch(params, 40, 8, options.seed, std::max(2u, options.parallelism));
  bool same = true;
  for (std::size_t r = 0; r < a.paths.size(); ++r) same = same && a.paths[r].states == b.paths[r].states;
  return {"sampler_determinism", same, same ? "identical across parallelism" : "paths differ"};
}

SelfTestCheck check_chi_square(const ModelParams& params, const SelfTestOptions& options) {
  const int n = table_length(params.m(), 200);
  const auto table = oracle::enumerate_all(params, n);
  const auto batch = sample_batch(params, static_cast<std::size_t>(n), 20'000, options.seed + 1, options.parallelism);
  const auto chi = chi_square_against(batch, table);
  return {"sampler_chi_square", chi.p_value >= 0.001,
          fmt("statistic %.4g, p = %.3g", chi.statistic, chi.p_value)};
}

SelfTestCheck check_partition(const ModelParams& params, const SelfTestOptions& options) {
  const auto fm = fractional_multinomial(params, 30, 50, options.seed + 2, options.parallelism);
  bool ok = true;
  for (const auto& c : fm.samples) ok = ok && std::accumulate(c.counts.begin(), c.counts.end(), std::size_t{0}) == c.n;
  return {"count_partition", ok, ok ? "sum of counts equals n" : "counts do not sum to n"};
}

}  // namespace

SelfTestReport run_selftest(const ModelParams& params, const SelfTestOptions& options) {
  SelfTestReport report;
  std::mt19937_64 gen(options.seed);
  auto record = [&](SelfTestCheck c) {
    if (options.on_check) options.on_check(c);
    report.checks.push_back(std::move(c));
  };
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      record(fn());
    } catch (const std::exception& e) {
      record({name, false, e.what()});
    }
  };
  record({"assumption", params.validation().passed && !params.tainted(),
          fmt("sum = %.6g", params.validation().sum)});
  const int n = table_length(params.m(), 1000);
  oracle::EnumerationTable table;
  guarded("normalization", [&] {
    table = oracle::enumerate_all(params, n);
    return check_normalization(table);
  });
  guarded("oracle_equivalence", [&] { return check_strategies(params, table); });
  guarded("marginal_consistency", [&] { return check_consistency(params, table); });
  guarded("covariance_identities", [&] { return check_covariances(params); });
  guarded("generalized_markov", [&] { return check_markov(params, gen); });
  guarded("interruption_inequalities", [&] { return check_interruption(params, gen); });
  guarded("sampler_determinism", [&] { return check_determinism(params, options); });
  guarded("sampler_chi_square", [&] { return check_chi_square(params, options); });
  guarded("count_partition", [&] { return check_partition(params, options); });
  return report;
}

}  // namespace lrd
