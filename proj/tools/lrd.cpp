// Command-line front end: validate, prob, sample, analyze, fracmult, oracle,
// selftest. Every output file starts with a '#' header that records the
// version, parameters, digest, seed and the resolved configuration.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrd/analytics.hpp"
#include "lrd/engine.hpp"
#include "lrd/error.hpp"
#include "lrd/model.hpp"
#include "lrd/oracle.hpp"
#include "lrd/pattern.hpp"
#include "lrd/sampler.hpp"
#include "lrd/selftest.hpp"

namespace {

using namespace lrd;

enum Exit { kOk = 0, kIo = 1, kRejected = 2, kCap = 3, kInvariant = 4 };

struct RunConfig {
  std::string command;
  std::string params_path;
  std::string pattern_path;
  std::string out_path;
  std::string curves_path;
  std::string format = "compact";
  std::string strategy = "auto";
  std::uint64_t seed = 1;
  std::size_t n = 0;
  std::size_t n_min = 64;
  std::size_t replicates = 0;
  int lags = 10;
  unsigned parallelism = 1;
  std::size_t cap_a0 = 18;
  std::size_t cap_frontier = 10'000'000;
  long scan_horizon = 0;
};

const RawParams kCanonical{{0.8, 0.6}, {0.2, 0.3}, {0.1, 0.1}};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RangeViolation:
    case ErrorKind::SimplexViolation:
    case ErrorKind::AssumptionViolation:
      return kRejected;
    case ErrorKind::CapExceeded:
    case ErrorKind::HorizonExceeded:
    case ErrorKind::FrontierOverflow:
    case ErrorKind::SizeExceeded:
      return kCap;
    default:
      return kIo;
  }
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Header echoing the resolved configuration. Parallelism and the output path
// are left out so that outputs compare equal across them.
std::string header(const RunConfig& cfg, const RawParams& raw, const ModelParams& params,
                   const std::vector<std::string>& extra) {
  std::ostringstream os;
  os << "# lrd " << LRD_VERSION << '\n';
  os << "# command: " << cfg.command << '\n';
  std::istringstream lines(format_params_text(raw));
  for (std::string line; std::getline(lines, line);) os << "# params: " << line << '\n';
  os << "# params_digest: " << params.digest_hex() << '\n';
  os << "# seed: " << cfg.seed << '\n';
  for (const auto& e : extra) os << "# " << e << '\n';
  return os.str();
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty() || cfg.out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, "cannot open output file " + cfg.out_path);
  out << text;
  if (!out) throw Error(ErrorKind::Parse, "write failed for " + cfg.out_path);
}

void emit_to(const std::string& path, const std::string& text) {
  RunConfig tmp;
  tmp.out_path = path;
  emit(tmp, text);
}

RawParams load_raw(const RunConfig& cfg) {
  if (cfg.params_path.empty()) return kCanonical;
  return read_params_file(cfg.params_path);
}

FrontierLimits limits(const RunConfig& cfg) {
  FrontierLimits l;
  l.max_entries = cfg.cap_frontier;
  return l;
}

SamplerOptions sampler_options(const RunConfig& cfg) {
  SamplerOptions o;
  o.limits.max_entries = cfg.cap_frontier;
  return o;
}

int cmd_validate(const RunConfig& cfg) {
  const RawParams raw = read_params_file(cfg.params_path);
  try {
    const auto params = ModelParams::validated(raw);
    const auto& rep = params.validation();
    for (std::size_t k = 0; k < rep.terms.size(); ++k)
      std::cout << "term_" << (k + 1) << "=" << num(rep.terms[k]) << '\n';
    if (cfg.scan_horizon > 0)
      std::cout << "scan_max=" << num(scan_triple_sum(raw, cfg.scan_horizon)) << '\n';
    std::printf("sum=%.3f PASS\n", rep.sum);
    return kOk;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::AssumptionViolation) {
      const auto rep = assumption_report(raw);
      for (std::size_t k = 0; k < rep.terms.size(); ++k)
        std::cout << "term_" << (k + 1) << "=" << num(rep.terms[k]) << '\n';
      std::printf("sum=%.3f FAIL\n", rep.sum);
    } else {
      std::cout << "FAIL " << e.what() << '\n';
    }
    if (exit_code(e.kind()) == kRejected) return kRejected;
    throw;
  }
}

int cmd_prob(const RunConfig& cfg) {
  const auto params = ModelParams::validated(read_params_file(cfg.params_path));
  std::ifstream in(cfg.pattern_path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open pattern file " + cfg.pattern_path);
  std::ostringstream text;
  text << in.rdbuf();
  const auto pattern = OccupancyPattern::parse_lines(text.str());
  pattern.check_states(params.m());
  EngineOptions opts;
  opts.strategy = parse_strategy(cfg.strategy);
  opts.recursion_cap = cfg.cap_a0;
  opts.limits = limits(cfg);
  const auto r = joint_probability(params, pattern, opts);
  std::cout << "probability=" << num(r.value) << '\n';
  std::cout << "log_probability=" << num(r.log_value) << '\n';
  std::cout << "strategy=" << to_string(r.strategy) << '\n';
  std::cout << "base_count=" << r.condition_count << '\n';
  std::cout << "condition=" << num(r.condition_estimate) << '\n';
  if (r.condition_estimate > kConditionWarning)
    std::cerr << "warning: cancellation condition estimate " << r.condition_estimate << '\n';
  return kOk;
}

int cmd_sample(const RunConfig& cfg) {
  const RawParams raw = load_raw(cfg);
  const auto params = ModelParams::validated(raw);
  if (cfg.format != "compact" && cfg.format != "csv")
    throw Error(ErrorKind::InvalidArgument, "format must be compact or csv");
  const auto batch = sample_batch(params, cfg.n, cfg.replicates, cfg.seed, cfg.parallelism, sampler_options(cfg));
  std::ostringstream os;
  os << header(cfg, raw, params,
               {"config: n=" + std::to_string(cfg.n) + " replicates=" + std::to_string(cfg.replicates) +
                " format=" + cfg.format});
  if (cfg.format == "csv") {
    write_long_csv(os, batch);
  } else {
    write_compact(os, batch);
  }
  emit(cfg, os.str());
  return kOk;
}

int cmd_analyze(const RunConfig& cfg) {
  const RawParams raw = load_raw(cfg);
  const auto params = ModelParams::validated(raw);
  const auto batch = sample_batch(params, cfg.n, cfg.replicates, cfg.seed, cfg.parallelism, sampler_options(cfg));
  const int m = params.m();
  std::vector<ReportRow> rows;
  std::vector<std::string> skipped;
  for (TimeIndex lag = 1; lag <= cfg.lags && lag < static_cast<TimeIndex>(cfg.n); ++lag) {
    for (State a = 0; a <= m; ++a) {
      for (State b = 0; b <= m; ++b) {
        const auto e = empirical_indicator_cov(batch, params, a, b, lag);
        rows.push_back({"indicator_cov", std::to_string(a) + "-" + std::to_string(b),
                        static_cast<double>(lag), e.value, e.std_error, e.theory});
      }
    }
  }
  for (State k = 0; k <= m; ++k) {
    try {
      const auto h = estimate_hurst(indicator_series(batch, k), k);
      double theory = k == 0 ? 0.0 : params.hurst(k);
      if (k == 0)
        for (State j = 1; j <= m; ++j) theory = std::max(theory, params.hurst(j));
      rows.push_back({"hurst", std::to_string(k), 0.0, h.estimate, h.fit.slope_std_error / 2.0, theory});
    } catch (const Error& e) {
      skipped.push_back("hurst state " + std::to_string(k) + ": " + e.what());
    }
  }
  std::ostringstream curves;
  curves << "state,t,survival\n";
  for (State k = 1; k <= m; ++k) {
    try {
      const auto s = inter_arrival_summary(batch, params, k);
      rows.push_back({"interarrival_mean", std::to_string(k), static_cast<double>(s.count), s.mean,
                      s.mean_std_error, s.theoretical_mean});
      rows.push_back({"tail_slope", std::to_string(k), s.window_high, s.tail_fit.slope,
                      s.tail_fit.slope_std_error, s.theoretical_exponent});
      for (const auto& [t, surv] : s.survival) curves << k << ',' << t << ',' << num(surv) << '\n';
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      skipped.push_back("interarrival state " + std::to_string(k) + ": " + e.what());
    }
  }
  std::vector<std::string> extra{"config: n=" + std::to_string(cfg.n) + " replicates=" +
                                 std::to_string(cfg.replicates) + " lags=" + std::to_string(cfg.lags)};
  for (const auto& s : skipped) extra.push_back("skipped " + s);
  std::ostringstream os;
  os << header(cfg, raw, params, extra);
  write_report_csv(os, rows);
  emit(cfg, os.str());
  if (!cfg.curves_path.empty()) emit_to(cfg.curves_path, header(cfg, raw, params, extra) + curves.str());
  return kOk;
}

int cmd_fracmult(const RunConfig& cfg) {
  const RawParams raw = load_raw(cfg);
  const auto params = ModelParams::validated(raw);
  if (cfg.n_min == 0 || cfg.n_min > cfg.n) throw Error(ErrorKind::InvalidArgument, "need 1 <= n-min <= n");
  std::vector<std::size_t> grid;
  for (std::size_t v = cfg.n_min; v <= cfg.n; v *= 2) grid.push_back(v);
  if (grid.back() != cfg.n) grid.push_back(cfg.n);
  const auto batch = sample_batch(params, cfg.n, cfg.replicates, cfg.seed, cfg.parallelism, sampler_options(cfg));
  const int m = params.m();
  std::vector<ReportRow> rows;
  for (std::size_t n : grid) {
    const auto rep = summarize_counts(params, counts_from_batch(batch, n, m));
    const double at = static_cast<double>(n);
    for (const auto& s : rep.states) {
      const std::string k = std::to_string(s.state);
      rows.push_back({"mean", k, at, s.mean.value, s.mean.std_error, s.mean.theory});
      rows.push_back({"variance", k, at, s.variance.value, s.variance.std_error, s.variance.theory});
      rows.push_back({"variance_asymptotic", k, at, s.variance.value, s.variance.std_error, s.asymptotic_variance});
      rows.push_back({"psi", k, at, s.psi.value, s.psi.std_error, s.psi.theory});
      rows.push_back({"psi_asymptotic", k, at, s.psi.value, s.psi.std_error, s.psi_asymptotic});
    }
    for (State a = 0; a <= m; ++a) {
      for (State b = a + 1; b <= m; ++b) {
        const auto& c = rep.covariances[a][b];
        rows.push_back({"covariance", std::to_string(a) + "-" + std::to_string(b), at, c.value, c.std_error, c.theory});
      }
    }
  }
  std::string regimes = "regime:";
  if (grid.size() >= 2) {
    for (const auto& g : variance_growth(params, batch, grid)) {
      rows.push_back({"variance_slope", std::to_string(g.state), 0.0, g.fit.slope, g.fit.slope_std_error,
                      g.expected_exponent});
      rows.push_back({"variance_slope_exact", std::to_string(g.state), 0.0, g.exact_fit.slope, 0.0,
                      g.expected_exponent});
      regimes += " " + std::to_string(g.state) + "=" + std::string(to_string(g.regime));
    }
  }
  std::ostringstream os;
  os << header(cfg, raw, params,
               {"config: n=" + std::to_string(cfg.n) + " n_min=" + std::to_string(cfg.n_min) +
                    " replicates=" + std::to_string(cfg.replicates),
                regimes});
  write_report_csv(os, rows);
  emit(cfg, os.str());
  return kOk;
}

int cmd_oracle(const RunConfig& cfg) {
  const RawParams raw = load_raw(cfg);
  const auto params = ModelParams::validated(raw);
  const auto table = oracle::enumerate_all(params, static_cast<int>(cfg.n));
  std::ostringstream os;
  os << header(cfg, raw, params, {"config: n=" + std::to_string(cfg.n)});
  oracle::write_csv(os, table);
  emit(cfg, os.str());
  return kOk;
}

int cmd_selftest(const RunConfig& cfg) {
  const auto params = ModelParams::validated(load_raw(cfg));
  SelfTestOptions opts;
  opts.seed = cfg.seed;
  opts.parallelism = cfg.parallelism;
  opts.on_check = [](const SelfTestCheck& c) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << std::endl;
  };
  const auto report = run_selftest(params, opts);
  if (const auto* f = report.first_failure()) {
    std::cerr << "first failed invariant: " << f->name << '\n';
    return kInvariant;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact computation, sampling and analysis for a long-range dependent categorical process"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(LRD_VERSION));
  RunConfig cfg;

  auto add_params = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--params", cfg.params_path, "Parameter file (key = value lines: H, p, c)")
                    ->envname("LRD_PARAMS");
    if (required) opt->required();
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "Base seed")->envname("LRD_SEED"); };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_path, "Output file (default stdout)")->envname("LRD_OUT");
  };
  auto add_parallel = [&](CLI::App* sub) {
    sub->add_option("--parallelism", cfg.parallelism, "Worker threads; results do not depend on it")
        ->envname("LRD_PARALLELISM")
        ->check(CLI::PositiveNumber);
  };
  auto add_frontier_cap = [&](CLI::App* sub) {
    sub->add_option("--cap-frontier", cfg.cap_frontier, "Largest dynamic-programming frontier")
        ->envname("LRD_CAP_FRONTIER");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "Path length")->envname("LRD_N");
    sub->add_option("--replicates", cfg.replicates, "Number of paths")->envname("LRD_REPLICATES");
    add_seed(sub);
    add_parallel(sub);
    add_frontier_cap(sub);
    add_out(sub);
  };

  auto* validate = app.add_subcommand("validate", "Check the positivity condition for a parameter file");
  add_params(validate, true);
  validate->add_option("--scan-horizon", cfg.scan_horizon, "Also scan index triples up to this horizon");

  auto* prob = app.add_subcommand("prob", "Exact probability of a pattern");
  add_params(prob, true);
  prob->add_option("--pattern", cfg.pattern_path, "Pattern file of 'index state' lines")->required()->envname("LRD_PATTERN");
  prob->add_option("--strategy", cfg.strategy, "recursive, dp or auto")
      ->envname("LRD_STRATEGY")
      ->check(CLI::IsMember({"recursive", "dp", "auto"}));
  prob->add_option("--cap-a0", cfg.cap_a0, "Largest base-state count for the recursion")->envname("LRD_CAP_A0");
  add_frontier_cap(prob);

  auto* sample = app.add_subcommand("sample", "Draw exact sample paths");
  add_params(sample, false);
  add_sampling(sample);
  sample->add_option("--format", cfg.format, "compact or csv")->envname("LRD_FORMAT");

  auto* analyze = app.add_subcommand("analyze", "Sample and report covariance, Hurst and inter-arrival statistics");
  add_params(analyze, false);
  add_sampling(analyze);
  analyze->add_option("--lags", cfg.lags, "Largest covariance lag")->envname("LRD_LAGS");
  analyze->add_option("--curves", cfg.curves_path, "Long-format survival curves CSV")->envname("LRD_CURVES");

  auto* fracmult = app.add_subcommand("fracmult", "State counts over a dyadic grid of n with over-dispersion");
  add_params(fracmult, false);
  add_sampling(fracmult);
  fracmult->add_option("--n-min", cfg.n_min, "Smallest n of the grid")->envname("LRD_N_MIN");

  auto* oracle_cmd = app.add_subcommand("oracle", "Dump every path probability by brute force");
  add_params(oracle_cmd, false);
  oracle_cmd->add_option("--n", cfg.n, "Path length")->required()->envname("LRD_N");
  add_out(oracle_cmd);

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite (canonical parameters by default)");
  add_params(selftest, false);
  add_seed(selftest);
  add_parallel(selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kIo;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  // Per-command defaults for n and replicates.
  struct Defaults {
    CLI::App* cmd;
    std::size_t n, replicates;
  };
  for (const auto& d : {Defaults{sample, 50, 1}, Defaults{analyze, 1024, 16}, Defaults{fracmult, 4096, 1000}}) {
    if (chosen != d.cmd) continue;
    if (cfg.n == 0) cfg.n = d.n;
    if (cfg.replicates == 0) cfg.replicates = d.replicates;
  }

  try {
    if (chosen == validate) return cmd_validate(cfg);
    if (chosen == prob) return cmd_prob(cfg);
    if (chosen == sample) return cmd_sample(cfg);
    if (chosen == analyze) return cmd_analyze(cfg);
    if (chosen == fracmult) return cmd_fracmult(cfg);
    if (chosen == oracle_cmd) return cmd_oracle(cfg);
    if (chosen == selftest) return cmd_selftest(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kIo;
}
