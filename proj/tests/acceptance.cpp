// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrd/analytics.hpp"
#include "lrd/engine.hpp"
#include "lrd/oracle.hpp"
#include "lrd/sampler.hpp"
#include "lrd/selftest.hpp"

using namespace lrd;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2026;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RawParams canonical_raw() { return {{0.8, 0.6}, {0.2, 0.3}, {0.1, 0.1}}; }
// Long-memory sets with heavier coupling, used where the canonical c leaves
// the power law hidden behind its slowly varying prefactor.
RawParams set_d() { return {{0.8, 0.6}, {0.3, 0.2}, {0.2, 0.1}}; }
RawParams set_d_prime() { return {{0.6, 0.8}, {0.2, 0.3}, {0.1, 0.2}}; }
// Mixed memory: one short-memory and one long-memory state.
RawParams set_e() { return {{0.3, 0.7}, {0.2, 0.3}, {0.1, 0.1}}; }
RawParams iid_raw() { return {{0.8, 0.6}, {0.2, 0.3}, {0.0, 0.0}}; }

std::vector<ModelParams> random_sets(std::size_t count, std::mt19937_64& gen, int fixed_m = 0) {
  std::vector<ModelParams> out;
  for (std::size_t i = 0; i < count; ++i) {
    const int m = fixed_m > 0 ? fixed_m : static_cast<int>(1 + i % 3);
    out.push_back(ModelParams::validated(scenarios::random_params(gen, m)));
  }
  return out;
}

Outcome normalization() {
  std::mt19937_64 gen(kSeed);
  auto sets = random_sets(25, gen);
  sets.insert(sets.begin(), ModelParams::validated(canonical_raw()));
  double worst_sum = 0.0, lowest = 1.0;
  std::size_t tables = 0;
  for (const auto& p : sets) {
    for (int n = 1; n <= 6; ++n) {
      const auto t = oracle::enumerate_all(p, n);
      worst_sum = std::max(worst_sum, std::abs(t.sum() - 1.0));
      lowest = std::min(lowest, *std::min_element(t.probs.begin(), t.probs.end()));
      ++tables;
    }
  }
  return {worst_sum <= 1e-10 && lowest > 0.0,
          std::to_string(tables) + " tables, max |sum-1| " + fmt("%.3g", worst_sum) + ", min prob " + fmt("%.3g", lowest)};
}

Outcome oracle_equivalence() {
  const auto p = ModelParams::validated(canonical_raw());
  double worst_total = 0.0;
  std::size_t totals = 0;
  for (int n = 1; n <= 8; ++n) {
    const auto t = oracle::enumerate_all(p, n);
    for (std::size_t i = 0; i < t.probs.size(); ++i) {
      const auto seq = t.sequence_of(i);
      const auto pattern = OccupancyPattern::from_states(seq);
      const double literal = oracle::literal_probability(p, seq);
      worst_total = std::max({worst_total, std::abs(d_star_dp(p, pattern).value - literal),
                              std::abs(d_star_recursive(p, pattern).value - literal)});
      ++totals;
    }
  }
  std::mt19937_64 gen(kSeed);
  const auto sets = random_sets(10, gen, 2);
  double worst_partial = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto& q = sets[i % sets.size()];
    const auto zeros = static_cast<std::size_t>(gen() % 15);
    const auto others = static_cast<std::size_t>(gen() % 7);
    const auto pattern = scenarios::random_pattern_with_zeros(gen, 2, 30, zeros, others);
    worst_partial = std::max(worst_partial, std::abs(d_star_recursive(q, pattern).value - d_star_dp(q, pattern).value));
  }
  return {worst_total <= 1e-10 && worst_partial <= 1e-10,
          std::to_string(totals) + " total assignments, max |engine-oracle| " + fmt("%.3g", worst_total) +
              "; 500 partial patterns, max |rec-dp| " + fmt("%.3g", worst_partial)};
}

Outcome covariance_identities() {
  std::mt19937_64 gen(kSeed);
  auto sets = random_sets(6, gen);
  sets.insert(sets.begin(), ModelParams::validated(canonical_raw()));
  double worst = 0.0;
  for (const auto& params : sets) {
    const int m = params.m();
    for (TimeIndex lag = 1; lag <= 10; ++lag) {
      const auto theory = theoretical_covariances(params, lag);
      double process = 0.0, scale = 0.0;
      for (State a = 0; a <= m; ++a) {
        for (State b = 0; b <= m; ++b) {
          OccupancyPattern two;
          two.assign(1, a).assign(1 + lag, b);
          const double pa_pb = params.prob(a) * params.prob(b);
          const double cov = joint_probability(params, two).value - pa_pb;
          process += a * b * cov;
          scale += a * b * pa_pb;
          const double t = theory.indicator[a][b];
          // Zero targets are measured against the product they cancel.
          worst = std::max(worst, std::abs(cov - t) / std::max(std::abs(t), pa_pb));
        }
      }
      worst = std::max(worst, std::abs(process - theory.process) / std::max(std::abs(theory.process), scale));
    }
  }
  return {worst <= 1e-12, "7 parameter sets, lags 1..10, max relative deviation " + fmt("%.3g", worst)};
}

Outcome generalized_markov() {
  std::mt19937_64 gen(kSeed);
  const auto sets = random_sets(20, gen);
  ConditionalOptions opts;
  opts.closed_form_fast_path = false;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto& p = sets[i % sets.size()];
    const auto c = scenarios::random_markov_case(gen, p.m(), 12);
    const auto dist = conditional_next(p, c.history, c.query, opts);
    const double closed = p.gap_factor_uncached(c.state, c.query - c.history.max_of(c.state));
    worst = std::max(worst, std::abs(dist.probs[c.state] - closed));
  }
  return {worst <= 1e-10, "200 histories, max deviation " + fmt("%.3g", worst)};
}

Outcome interruption() {
  std::mt19937_64 gen(kSeed);
  const auto sets = random_sets(20, gen);
  double lowest_bound = INFINITY, lowest_ratio = INFINITY;
  std::size_t holding = 0;
  for (int i = 0; i < 200; ++i) {
    const auto& p = sets[i % sets.size()];
    const auto c = scenarios::random_interruption_case(gen, p.m(), 12);
    const auto r = interruption_bounds(p, c.history, c.state, c.first_query, c.later_query, c.earlier_query);
    lowest_bound = std::min(lowest_bound, r.bound_margin);
    lowest_ratio = std::min(lowest_ratio, r.ratio_margin);
    holding += r.holds();
  }
  return {holding == 200, std::to_string(holding) + "/200 hold, min upper-bound margin " + fmt("%.3g", lowest_bound) +
                              ", min ratio margin " + fmt("%.3g", lowest_ratio)};
}

Outcome sampler_fidelity() {
  const auto p = ModelParams::validated(canonical_raw());
  const auto table = oracle::enumerate_all(p, 6);
  const auto paths = sample_batch(p, 6, 100000, kSeed);
  const auto chi = chi_square_against(paths, table);
  const auto long_paths = sample_batch(p, 32, 100000, derive_seed(kSeed, 1));
  std::size_t checks = 0, inside = 0;
  double worst_z = 0.0;
  for (State a = 0; a <= 2; ++a) {
    for (State b = a; b <= 2; ++b) {
      for (TimeIndex lag = 1; lag <= 10; ++lag) {
        const auto e = empirical_indicator_cov(long_paths, p, a, b, lag);
        ++checks;
        inside += e.within(3.0);
        worst_z = std::max(worst_z, std::abs(e.z()));
      }
    }
  }
  return {chi.p_value >= 0.001 && inside == checks,
          "chi2=" + fmt("%.1f", chi.statistic) + " dof=" + std::to_string(chi.degrees_of_freedom) +
              " p=" + fmt("%.3g", chi.p_value) + "; covariances " + std::to_string(inside) + "/" +
              std::to_string(checks) + " within 3 se, max |z| " + fmt("%.2f", worst_z)};
}

Outcome inter_arrival() {
  const auto p = ModelParams::validated(set_d());
  const auto batch = sample_batch(p, std::size_t{1} << 16, 2, kSeed);
  bool ok = true;
  std::string detail;
  for (State k = 1; k <= 2; ++k) {
    const auto s = inter_arrival_summary(batch, p, k);
    const double z = (s.mean - s.theoretical_mean) / s.mean_std_error;
    const bool mean_ok = std::abs(z) <= 3.0;
    const bool slope_ok = std::abs(s.tail_fit.slope - s.theoretical_exponent) <= 0.3;
    ok = ok && mean_ok && slope_ok;
    detail += (k == 1 ? "" : "; ") + std::string("H=") + fmt("%.1f", p.hurst(k)) + " mean " + fmt("%.3f", s.mean) +
              " vs " + fmt("%.3f", s.theoretical_mean) + " (z " + fmt("%.2f", z) + "), slope " +
              fmt("%.3f", s.tail_fit.slope) + " vs " + fmt("%.1f", s.theoretical_exponent);
  }
  return {ok, detail};
}

Outcome hurst_recovery() {
  struct Case {
    RawParams raw;
    bool checked;
    double target;
  };
  const std::vector<Case> cases{{set_d(), true, 0.8}, {set_d_prime(), true, 0.6}, {iid_raw(), false, 0.5}};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto p = c.checked ? ModelParams::validated(c.raw) : ModelParams::unchecked(c.raw);
    const auto batch = sample_batch(p, 4096, 64, derive_seed(kSeed, i));
    const auto h = estimate_hurst(indicator_series(batch, 1), 1);
    ok = ok && std::abs(h.estimate - c.target) <= 0.1;
    detail += (i == 0 ? "" : "; ") + fmt("target %.1f", c.target) + fmt(" estimate %.3f", h.estimate);
  }
  return {ok, detail + " (64 x 4096 each)"};
}

Outcome fractional_multinomial_laws() {
  bool ok = true;
  std::string detail;

  const auto iid = ModelParams::unchecked(iid_raw());
  const auto classic = fractional_multinomial(iid, 50, 10000, kSeed).report;
  std::size_t checks = 0, inside = 0;
  for (const auto& s : classic.states) {
    checks += 2;
    inside += s.mean.within(3.0) + s.variance.within(3.0);
  }
  for (State a = 0; a <= 2; ++a) {
    for (State b = a + 1; b <= 2; ++b) {
      ++checks;
      inside += classic.covariances[a][b].within(3.0);
    }
  }
  ok = ok && inside == checks;
  detail += "c=0 moments " + std::to_string(inside) + "/" + std::to_string(checks) + " within 3 se";

  std::vector<std::size_t> grid;
  for (std::size_t n = 64; n <= 4096; n *= 2) grid.push_back(n);
  struct SlopeCase {
    RawParams raw;
    std::uint64_t stream;
  };
  for (const auto& sc : {SlopeCase{canonical_raw(), 1}, SlopeCase{set_e(), 2}}) {
    const auto p = ModelParams::validated(sc.raw);
    // The frontier holds up to (n+2)^m entries on long all-base stretches.
    SamplerOptions wide;
    wide.limits.max_entries = std::size_t{1} << 25;
    const auto batch = sample_batch(p, grid.back(), 10000, derive_seed(kSeed, sc.stream), 1, wide);
    const auto growth = variance_growth(p, batch, grid);
    for (State k = 1; k <= 2; ++k) {
      const auto& g = growth[k];
      const double target = p.hurst(k) > 0.5 ? 2.0 * p.hurst(k) : 1.0;
      ok = ok && std::abs(g.fit.slope - target) <= 0.15;
      detail += "; H=" + fmt("%.1f", p.hurst(k)) + " slope " + fmt("%.3f", g.fit.slope) + fmt(" vs %.1f", target);
    }
  }

  const auto p = ModelParams::validated(canonical_raw());
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const auto t = oracle::enumerate_all(p, n);
    double e1 = 0.0, e2 = 0.0, e12 = 0.0;
    for (std::size_t i = 0; i < t.probs.size(); ++i) {
      double y1 = 0.0, y2 = 0.0;
      for (State s : t.sequence_of(i)) {
        y1 += s == 1;
        y2 += s == 2;
      }
      e1 += t.probs[i] * y1;
      e2 += t.probs[i] * y2;
      e12 += t.probs[i] * y1 * y2;
    }
    worst = std::max(worst, std::abs(e12 - e1 * e2 + n * p.prob(1) * p.prob(2)));
  }
  ok = ok && worst <= 1e-12;
  detail += "; enumeration n<=8 max |cov+n p1 p2| " + fmt("%.3g", worst);

  const auto at50 = fractional_multinomial(p, 50, 10000, derive_seed(kSeed, 3)).report.covariances[1][2];
  ok = ok && at50.within(3.0);
  detail += "; n=50 cov " + fmt("%.3f", at50.value) + fmt(" vs %.3f", at50.theory) + fmt(" (z %.2f)", at50.z());
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / ("lrd_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto params = dir / "params.txt";
  std::ofstream(params) << "H = 0.8, 0.6\np = 0.2, 0.3\nc = 0.1, 0.1\n";
  const auto pattern = dir / "pattern.txt";
  std::ofstream(pattern) << "1 1\n3 0\n4 2\n7 0\n9 1\n";
  const std::string common = " --params " + params.string();
  struct Command {
    std::string name, args;
    bool threaded;
  };
  const std::vector<Command> commands{
      {"validate", "validate" + common, false},
      {"prob", "prob --pattern " + pattern.string() + common, false},
      {"sample", "sample --n 200 --replicates 20 --seed 7" + common, true},
      {"sample-csv", "sample --n 50 --replicates 5 --seed 7 --format csv" + common, true},
      {"analyze", "analyze --n 1024 --replicates 16 --seed 7 --lags 5" + common, true},
      {"fracmult", "fracmult --n 512 --n-min 64 --replicates 200 --seed 7" + common, true},
      {"oracle", "oracle --n 5" + common, false},
      {"selftest", "selftest --seed 7" + common, true},
  };
  std::size_t identical = 0;
  std::string differing;
  for (const auto& [name, args, threaded] : commands) {
    std::string outputs[2];
    const unsigned parallelism[2] = {1, 3};
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      const auto out = dir / (name + std::to_string(run) + ".txt");
      const std::string threads = threaded ? " --parallelism " + std::to_string(parallelism[run]) : "";
      const std::string cmd = std::string(LRD_CLI_PATH) + " " + args + threads + " > " + out.string() + " 2>&1";
      const int status = std::system(cmd.c_str());
      ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
      outputs[run] = slurp(out);
    }
    if (ran && !outputs[0].empty() && outputs[0] == outputs[1]) {
      ++identical;
    } else {
      differing += " " + name;
    }
  }
  fs::remove_all(dir);
  return {identical == commands.size(),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " commands byte-identical over two runs (threaded ones at --parallelism 1 and 3)" + (differing.empty() ? "" : "; differ:" + differing)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "normalization and positivity", 120, normalization},
      {2, "oracle equivalence", 300, oracle_equivalence},
      {3, "covariance identities", 0, covariance_identities},
      {4, "generalized Markov property", 0, generalized_markov},
      {5, "interruption inequalities", 0, interruption},
      {6, "sampler fidelity", 600, sampler_fidelity},
      {7, "inter-arrival law", 0, inter_arrival},
      {8, "Hurst recovery", 0, hurst_recovery},
      {9, "fractional multinomial", 0, fractional_multinomial_laws},
      {10, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.passed = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
