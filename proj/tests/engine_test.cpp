#include <doctest.h>

#include <cmath>
#include <vector>

#include "lrd/engine.hpp"
#include "lrd/error.hpp"
#include "lrd/sampler.hpp"
#include "lrd/selftest.hpp"
#include "support.hpp"

using namespace lrd;

namespace {

double both(const ModelParams& p, const OccupancyPattern& pat) {
  const double dp = d_star_dp(p, pat).value;
  const double rec = d_star_recursive(p, pat).value;
  CHECK(dp == doctest::Approx(rec).epsilon(1e-12));
  return dp;
}

// Two-state case written out directly: ones on A, zeros on B gives
// sum over C subset of B of (-1)^|C| L*(A u C).
double two_state(const ModelParams& p, const std::vector<int>& seq) {
  std::vector<TimeIndex> ones, zeros;
  for (std::size_t i = 0; i < seq.size(); ++i) (seq[i] ? ones : zeros).push_back(static_cast<TimeIndex>(i + 1));
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << zeros.size()); ++mask) {
    std::vector<TimeIndex> a = ones;
    int sign = 1;
    for (std::size_t j = 0; j < zeros.size(); ++j) {
      if (mask >> j & 1) {
        a.push_back(zeros[j]);
        sign = -sign;
      }
    }
    std::sort(a.begin(), a.end());
    total += sign * l_star(p, 1, a);
  }
  return total;
}

}  // namespace

TEST_CASE("frozen probabilities under canonical parameters") {
  const auto p = test::canonical();
  CHECK(both(p, OccupancyPattern::from_compact("0120")) == doctest::Approx(0.0066638672631799175348).epsilon(1e-13));
  CHECK(both(p, OccupancyPattern::from_compact("10")) == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(both(p, OccupancyPattern::from_compact("110202")) ==
        doctest::Approx(0.00057764151629445421914).epsilon(1e-13));
  CHECK(both(p, OccupancyPattern::from_compact("00000")) ==
        doctest::Approx(0.094865524511800835416).epsilon(1e-13));
  OccupancyPattern partial;
  partial.assign(1, 1).assign(3, 0).assign(4, 2).assign(7, 0).assign(9, 1);
  CHECK(both(p, partial) == doctest::Approx(0.0017658408826743977463).epsilon(1e-13));
}

TEST_CASE("patterns without base-state entries use the product form") {
  const auto p = test::canonical();
  OccupancyPattern pat;
  pat.assign(1, 1).assign(3, 1).assign(2, 2).assign(10, 2);
  const auto r = joint_probability(p, pat);
  CHECK(r.strategy == Strategy::ClosedForm);
  const std::vector<TimeIndex> a1{1, 3}, a2{2, 10};
  CHECK(r.value == doctest::Approx(l_star(p, 1, a1) * l_star(p, 2, a2)).epsilon(1e-15));
  CHECK(joint_probability(p, OccupancyPattern{}).value == 1.0);
}

TEST_CASE("strategy selection and diagnostics") {
  const auto p = test::canonical();
  const auto pat = OccupancyPattern::from_compact("10200");
  EngineOptions rec;
  rec.strategy = Strategy::Recursive;
  const auto a = joint_probability(p, pat, rec);
  const auto b = joint_probability(p, pat);
  CHECK(a.strategy == Strategy::Recursive);
  CHECK(b.strategy == Strategy::DynamicProgram);
  CHECK(a.condition_count == 3);
  CHECK(b.condition_estimate >= 1.0);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-13));
  CHECK(std::log(b.value) == doctest::Approx(b.log_value).epsilon(1e-12));
  CHECK(parse_strategy("dp") == Strategy::DynamicProgram);
  CHECK(parse_strategy("recursive") == Strategy::Recursive);
  CHECK(parse_strategy("auto") == Strategy::Auto);
  CHECK_THROWS_AS(parse_strategy("fast"), Error);
}

TEST_CASE("normalization over every total assignment of length 8") {
  const auto p = test::canonical();
  double sum = 0.0;
  std::vector<State> seq(8, 0);
  for (int code = 0; code < 6561; ++code) {
    int c = code;
    for (int i = 7; i >= 0; --i, c /= 3) seq[i] = c % 3;
    const double v = d_star_dp(p, OccupancyPattern::from_states(seq)).value;
    REQUIRE(v > 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("marginal consistency and stationarity on random patterns") {
  auto gen = test::rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const auto p = ModelParams::validated(scenarios::random_params(gen, m));
    const auto pat = scenarios::random_pattern(gen, m, 12, 1 + gen() % 8);
    const double base = joint_probability(p, pat).value;
    const TimeIndex next = pat.max_index() + 1 + static_cast<TimeIndex>(gen() % 3);
    double sum = 0.0;
    for (State s = 0; s <= m; ++s) {
      auto ext = pat;
      ext.assign(next, s);
      sum += joint_probability(p, ext).value;
    }
    CHECK(sum == doctest::Approx(base).epsilon(1e-12));
    const double shifted = joint_probability(p, pat.shifted(1 + static_cast<TimeIndex>(gen() % 500))).value;
    CHECK(shifted == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("recursion and frontier agree with up to twelve base-state entries") {
  auto gen = test::rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 2;
    const auto p = ModelParams::validated(scenarios::random_params(gen, m));
    const auto pat = scenarios::random_pattern_with_zeros(gen, m, 24, trial % 13, gen() % 6);
    const double rec = d_star_recursive(p, pat).value;
    const double dp = d_star_dp(p, pat).value;
    CHECK(std::abs(rec - dp) <= 1e-10);
  }
}

TEST_CASE("one non-base state reduces to the two-state formula") {
  auto gen = test::rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = ModelParams::validated(scenarios::random_params(gen, 1));
    double sum = 0.0;
    for (int code = 0; code < 128; ++code) {
      std::vector<int> bits(7);
      std::vector<State> seq(7);
      for (int i = 0; i < 7; ++i) seq[i] = bits[i] = code >> (6 - i) & 1;
      const double direct = two_state(p, bits);
      const double engine = joint_probability(p, OccupancyPattern::from_states(seq)).value;
      CHECK(engine == doctest::Approx(direct).epsilon(1e-12));
      sum += engine;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("positivity on random parameter sets and patterns") {
  auto gen = test::rng(24);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + trial % 3;
    const auto p = ModelParams::validated(scenarios::random_params(gen, m));
    const auto pat = scenarios::random_pattern(gen, m, 16, 1 + gen() % 10);
    REQUIRE(d_star_dp(p, pat).value > 0.0);
    if (std::pow(m + 1.0, static_cast<double>(pat.count_of(0))) <= 1e5) REQUIRE(d_star_recursive(p, pat).value > 0.0);
  }
}

TEST_CASE("conditional distributions") {
  const auto p = test::canonical();
  const auto h1 = OccupancyPattern::from_compact("1");
  const auto next = conditional_next(p, h1, 3);
  CHECK(next.probs[1] == doctest::Approx(0.2 + 0.1 * std::pow(2.0, -0.4)).epsilon(1e-14));
  CHECK(next.closed_form[1]);
  const auto two = conditional_next(p, h1, 2);
  CHECK(two.probs[0] + two.probs[1] + two.probs[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(conditional_next(p, OccupancyPattern{}, 1).probs[2] == doctest::Approx(0.3));

  const auto interrupted = conditional_next(p, OccupancyPattern::from_compact("10"), 3);
  CHECK(interrupted.probs[1] < 0.2 + 0.1 * std::pow(2.0, -0.4));
  CHECK_FALSE(interrupted.closed_form[1]);
  CHECK_THROWS_AS(conditional_next(p, h1, 1), Error);

  // Matches a ratio of joint probabilities.
  const auto hist = OccupancyPattern::from_compact("10210");
  const auto cond = conditional_next(p, hist, 8);
  for (State s = 0; s <= 2; ++s) {
    auto ext = hist;
    ext.assign(8, s);
    CHECK(cond.probs[s] ==
          doctest::Approx(joint_probability(p, ext).value / joint_probability(p, hist).value).epsilon(1e-12));
  }
}

TEST_CASE("closed form after the last base-state time matches the frontier") {
  const auto p = test::canonical();
  auto gen = test::rng(25);
  ConditionalOptions slow;
  slow.closed_form_fast_path = false;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = scenarios::random_markov_case(gen, 2, 10);
    const auto d = conditional_next(p, c.history, c.query, slow);
    const double closed = p.gap_factor(c.state, c.query - c.history.max_of(c.state));
    CHECK(std::abs(d.probs[c.state] - closed) <= 1e-10);
  }
}

TEST_CASE("covariance closed forms") {
  const auto p = test::canonical();
  const auto lag2 = theoretical_covariances(p, 2);
  CHECK(lag2.indicator[1][1] == doctest::Approx(0.015157165665103980823).epsilon(1e-14));
  CHECK(lag2.indicator[1][2] == 0.0);
  CHECK(lag2.indicator[2][1] == 0.0);
  CHECK(theoretical_covariances(p, 1).process == doctest::Approx(0.14).epsilon(1e-14));
  CHECK(theoretical_covariances(p, 1).indicator[0][0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(theoretical_covariances(p, 1).indicator[0][1] == doctest::Approx(-0.02).epsilon(1e-14));
  CHECK(base_state_leading_covariance(p, 9) == doctest::Approx(0.02 * std::pow(9.0, -0.4)).epsilon(1e-14));

  for (TimeIndex lag = 1; lag <= 10; ++lag) {
    const auto t = theoretical_covariances(p, lag);
    double process = 0.0;
    for (State a = 0; a <= 2; ++a) {
      for (State b = 0; b <= 2; ++b) {
        OccupancyPattern pat;
        pat.assign(4, a).assign(4 + lag, b);
        const double cov = joint_probability(p, pat).value - p.prob(a) * p.prob(b);
        CHECK(cov == doctest::Approx(t.indicator[a][b]).epsilon(1e-12).scale(1e-3));
        process += a * b * cov;
      }
    }
    CHECK(process == doctest::Approx(t.process).epsilon(1e-12));
  }
}

TEST_CASE("interruption inequalities") {
  const auto p = test::canonical();
  const auto h = OccupancyPattern::from_compact("10");
  const auto r = interruption_bounds(p, h, 1, 3, 5, 4);
  CHECK(r.bound_margin > 0.0);
  CHECK(r.ratio_margin > 0.0);
  CHECK(r.holds());
  CHECK(r.closed_form == doctest::Approx(0.2 + 0.1 * std::pow(2.0, -0.4)).epsilon(1e-14));

  CHECK_THROWS_AS(interruption_bounds(p, OccupancyPattern::from_compact("01"), 1, 3, 5, 4), Error);
  CHECK_THROWS_AS(interruption_bounds(p, OccupancyPattern::from_compact("20"), 1, 3, 5, 4), Error);
  CHECK_THROWS_AS(interruption_bounds(p, h, 1, 2, 5, 4), Error);
  CHECK_THROWS_AS(interruption_bounds(p, h, 1, 3, 4, 5), Error);
  try {
    interruption_bounds(p, OccupancyPattern::from_compact("01"), 1, 3, 5, 4);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionUnmet);
  }
}

TEST_CASE("caps are enforced") {
  const auto p = test::canonical();
  OccupancyPattern zeros;
  for (TimeIndex i = 1; i <= 25; ++i) zeros.assign(i, 0);
  try {
    d_star_recursive(p, zeros, 18);
    FAIL("cap not enforced");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CapExceeded);
  }
  CHECK(d_star_dp(p, zeros).value > 0.0);

  FrontierLimits small;
  small.horizon = 10;
  CHECK_THROWS_AS(d_star_dp(p, zeros, small), Error);
  FrontierLimits tiny;
  tiny.max_entries = 8;
  try {
    d_star_dp(p, zeros, tiny);
    FAIL("frontier cap not enforced");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FrontierOverflow);
  }
}

TEST_CASE("long histories stay finite in log scale") {
  const auto p = test::canonical();
  const auto path = sample_path(p, 3000, 77);
  std::vector<State> seq(path.states.begin(), path.states.end());
  const auto r = d_star_dp(p, OccupancyPattern::from_states(seq), FrontierLimits{1 << 20, 10'000'000});
  CHECK(std::isfinite(r.log_value));
  CHECK(r.log_value < -1000.0);
}
