#include "lrd/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "lrd/engine.hpp"
#include "lrd/error.hpp"

namespace lrd {

bool Estimate::within(double sigmas) const {
  if (std_error <= 0.0) return value == theory;
  return std::abs(value - theory) <= sigmas * std_error;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "fit_line: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorKind::InsufficientData, "fit_line needs at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorKind::DegenerateSeries, "fit_line: x values are all equal");
  LineFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_std_error = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

Estimate empirical_indicator_cov(const SampleBatch& batch, const ModelParams& params, State a,
                                 State b, TimeIndex lag) {
  if (a < 0 || b < 0 || a > params.m() || b > params.m())
    throw Error(ErrorKind::InvalidArgument, "state out of range");
  if (lag < 1) throw Error(ErrorKind::InvalidArgument, "lag must be positive");
  if (batch.paths.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two replicates");
  const std::size_t R = batch.paths.size();
  std::vector<double> A(R), B(R), C(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto& s = batch.paths[r].states;
    if (static_cast<TimeIndex>(s.size()) <= lag)
      throw Error(ErrorKind::InsufficientData, "path shorter than lag + 1");
    const std::size_t pairs = s.size() - static_cast<std::size_t>(lag);
    std::size_t na = 0, nb = 0, nab = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const bool ia = s[i] == a;
      const bool ib = s[i + lag] == b;
      na += ia;
      nb += ib;
      nab += ia && ib;
    }
    A[r] = static_cast<double>(nab) / pairs;
    B[r] = static_cast<double>(na) / pairs;
    C[r] = static_cast<double>(nb) / pairs;
  }
  const double ma = mean_of(A), mb = mean_of(B), mc = mean_of(C);
  // Linearization of mean(A) - mean(B) * mean(C).
  std::vector<double> g(R);
  for (std::size_t r = 0; r < R; ++r) g[r] = A[r] - mc * B[r] - mb * C[r];
  Estimate e;
  e.value = ma - mb * mc;
  e.std_error = sample_sd(g) / std::sqrt(static_cast<double>(R));
  e.theory = theoretical_covariances(params, lag).indicator[a][b];
  e.samples = R;
  return e;
}

std::vector<std::vector<double>> indicator_series(const SampleBatch& batch, State k) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.paths.size());
  for (const auto& p : batch.paths) {
    std::vector<double> v(p.states.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = p.states[i] == k ? 1.0 : 0.0;
    out.push_back(std::move(v));
  }
  return out;
}

HurstEstimate estimate_hurst(const std::vector<std::vector<double>>& series, State state,
                             const HurstOptions& options) {
  if (series.empty()) throw Error(ErrorKind::InsufficientData, "no series");
  std::size_t total = 0, shortest = series.front().size();
  double sum = 0.0;
  for (const auto& s : series) {
    total += s.size();
    shortest = std::min(shortest, s.size());
    sum += std::accumulate(s.begin(), s.end(), 0.0);
  }
  if (total < options.min_total_length)
    throw Error(ErrorKind::InsufficientData,
                "total length " + std::to_string(total) + " below " + std::to_string(options.min_total_length));
  const double grand = sum / static_cast<double>(total);
  bool constant = true;
  for (const auto& s : series)
    for (double x : s)
      if (x != grand) constant = false;
  if (constant) throw Error(ErrorKind::DegenerateSeries, "series is constant");

  HurstEstimate h;
  h.state = state;
  const std::size_t top = shortest / std::max<std::size_t>(1, options.max_block_divisor);
  std::vector<double> lx, ly;
  for (std::size_t b = std::max<std::size_t>(1, options.min_block); b <= top; b *= 2) {
    double ss = 0.0;
    std::size_t blocks = 0;
    for (const auto& s : series) {
      const std::size_t nb = s.size() / b;
      for (std::size_t j = 0; j < nb; ++j) {
        double bm = 0.0;
        for (std::size_t i = j * b; i < (j + 1) * b; ++i) bm += s[i];
        bm /= static_cast<double>(b);
        ss += (bm - grand) * (bm - grand);
        ++blocks;
      }
    }
    if (blocks < 2) break;
    const double var = ss / static_cast<double>(blocks - 1);
    if (!(var > 0.0)) throw Error(ErrorKind::DegenerateSeries, "zero block variance at size " + std::to_string(b));
    h.block_sizes.push_back(b);
    h.block_variances.push_back(var);
    lx.push_back(std::log(static_cast<double>(b)));
    ly.push_back(std::log(var));
  }
  if (lx.size() < 2) throw Error(ErrorKind::InsufficientData, "fewer than two block sizes");
  h.fit = fit_line(lx, ly);
  h.estimate = (h.fit.slope + 2.0) / 2.0;
  h.in_range = h.estimate > 0.0 && h.estimate < 1.0;
  return h;
}

std::vector<std::size_t> inter_arrival_gaps(const SampleBatch& batch, State k) {
  std::vector<std::size_t> gaps;
  for (const auto& p : batch.paths) {
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t i = 0; i < p.states.size(); ++i) {
      if (p.states[i] != k) continue;
      if (seen) gaps.push_back(i - last);
      last = i;
      seen = true;
    }
  }
  return gaps;
}

std::vector<std::size_t> sample_inter_arrivals(const ModelParams& params, State k,
                                               std::size_t gaps_per_replicate, std::size_t replicates,
                                               std::uint64_t seed, unsigned parallelism,
                                               const SamplerOptions& options) {
  if (k < 1 || k > params.m()) throw Error(ErrorKind::InvalidArgument, "inter-arrival state must be in 1..m");
  if (replicates == 0 || gaps_per_replicate == 0)
    throw Error(ErrorKind::InvalidArgument, "replicates and gaps per replicate must be positive");
  std::vector<std::vector<std::size_t>> per(replicates);
  for_each_replicate(replicates, parallelism, [&](std::size_t r) {
    PathSampler sampler(params, derive_seed(seed, r), options);
    std::size_t last = 0;
    bool seen = false;
    auto& out = per[r];
    out.reserve(gaps_per_replicate);
    while (out.size() < gaps_per_replicate) {
      if (sampler.next() != k) continue;
      const std::size_t t = sampler.length();
      if (seen) out.push_back(t - last);
      last = t;
      seen = true;
    }
  });
  std::vector<std::size_t> gaps;
  gaps.reserve(replicates * gaps_per_replicate);
  for (const auto& v : per) gaps.insert(gaps.end(), v.begin(), v.end());
  return gaps;
}

InterArrivalSummary inter_arrival_summary(const SampleBatch& batch, const ModelParams& params,
                                          State k, const InterArrivalOptions& options) {
  if (k < 1 || k > params.m()) throw Error(ErrorKind::InvalidArgument, "inter-arrival state must be in 1..m");
  return inter_arrival_summary(inter_arrival_gaps(batch, k), params, k, options);
}

InterArrivalSummary inter_arrival_summary(std::vector<std::size_t> gaps, const ModelParams& params,
                                          State k, const InterArrivalOptions& options) {
  if (k < 1 || k > params.m()) throw Error(ErrorKind::InvalidArgument, "inter-arrival state must be in 1..m");
  const std::size_t N = gaps.size();
  if (N < options.min_count || N < 2)
    throw Error(ErrorKind::InsufficientData,
                std::to_string(N) + " gaps, need " + std::to_string(options.min_count));
  std::sort(gaps.begin(), gaps.end());

  InterArrivalSummary s;
  s.state = k;
  s.count = N;
  s.theoretical_mean = 1.0 / params.prob(k);
  s.theoretical_exponent = 2.0 * params.hurst(k) - 3.0;
  std::vector<double> g(gaps.begin(), gaps.end());
  s.mean = mean_of(g);
  s.mean_std_error = sample_sd(g) / std::sqrt(static_cast<double>(N));

  const std::size_t tmax = gaps.back();
  s.survival.reserve(tmax);
  std::size_t idx = 0;
  for (std::size_t t = 1; t <= tmax; ++t) {
    while (idx < N && gaps[idx] <= t) ++idx;
    s.survival.emplace_back(t, static_cast<double>(N - idx) / static_cast<double>(N));
  }

  const auto q_index = static_cast<std::size_t>(
      std::ceil((1.0 - options.top_fraction) * static_cast<double>(N))) - 1;
  const double hi = static_cast<double>(gaps[std::min(q_index, N - 1)]);
  const double lo = options.min_t;
  if (hi <= lo) throw Error(ErrorKind::InsufficientData, "tail quantile does not exceed the minimum gap");
  if (hi / lo > 10.0) {
    const double centre = std::sqrt(lo * hi);
    s.window_low = centre / std::sqrt(10.0);
    s.window_high = centre * std::sqrt(10.0);
  } else {
    s.window_low = lo;
    s.window_high = hi;
  }
  std::vector<double> lx, ly;
  for (const auto& [t, surv] : s.survival) {
    const double td = static_cast<double>(t);
    if (td < s.window_low || td > s.window_high || surv <= 0.0) continue;
    lx.push_back(std::log(td));
    ly.push_back(std::log(surv));
  }
  if (lx.size() < 3) throw Error(ErrorKind::InsufficientData, "fewer than three points in the tail window");
  s.tail_fit = fit_line(lx, ly);
  return s;
}

std::string_view to_string(MemoryRegime r) noexcept {
  switch (r) {
    case MemoryRegime::Short: return "short";
    case MemoryRegime::Boundary: return "boundary";
    case MemoryRegime::Long: return "long";
  }
  return "?";
}

namespace {

double max_hurst(const ModelParams& params) {
  double h = params.hurst(1);
  for (State k = 2; k <= params.m(); ++k) h = std::max(h, params.hurst(k));
  return h;
}

double regime_hurst(const ModelParams& params, State k) {
  return k == 0 ? max_hurst(params) : params.hurst(k);
}

void check_state(const ModelParams& params, State k) {
  if (k < 0 || k > params.m()) throw Error(ErrorKind::InvalidArgument, "state out of range");
}

// sum_{d=1}^{n-1} (n - d) d^(2H-2)
double lag_sum(double hurst, std::size_t n) {
  double s = 0.0;
  const double e = 2.0 * hurst - 2.0;
  for (std::size_t d = n - 1; d >= 1; --d) s += static_cast<double>(n - d) * std::pow(static_cast<double>(d), e);
  return s;
}

// 2 * sum over pairs i != j of cov(I{X_i=k}, I{X_j=k}) restricted to the
// dependence of state k, i.e. 2 p_k c_k lag_sum.
double pair_term(const ModelParams& params, State k, std::size_t n) {
  return 2.0 * params.prob(k) * params.coupling(k) * lag_sum(params.hurst(k), n);
}

// c' = p_k c_k, summed over the states of largest H for state 0.
double leading_coupling(const ModelParams& params, State k) {
  if (k != 0) return params.prob(k) * params.coupling(k);
  const double h = max_hurst(params);
  double c = 0.0;
  for (State j = 1; j <= params.m(); ++j)
    if (params.hurst(j) == h) c += params.prob(j) * params.coupling(j);
  return c;
}

}  // namespace

MemoryRegime regime_of(const ModelParams& params, State k) {
  check_state(params, k);
  const double h = regime_hurst(params, k);
  if (h < 0.5) return MemoryRegime::Short;
  if (h == 0.5) return MemoryRegime::Boundary;
  return MemoryRegime::Long;
}

double exact_count_variance(const ModelParams& params, State k, std::size_t n) {
  return exact_count_covariance(params, k, k, n);
}

double exact_count_covariance(const ModelParams& params, State a, State b, std::size_t n) {
  check_state(params, a);
  check_state(params, b);
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n);
  if (a > b) std::swap(a, b);
  if (a == b) {
    const double p = params.prob(a);
    double v = nn * p * (1.0 - p);
    if (a == 0) {
      for (State k = 1; k <= params.m(); ++k) v += pair_term(params, k, n);
    } else {
      v += pair_term(params, a, n);
    }
    return v;
  }
  if (a == 0) return -nn * params.p0() * params.prob(b) - pair_term(params, b, n);
  return -nn * params.prob(a) * params.prob(b);
}

double asymptotic_count_variance(const ModelParams& params, State k, std::size_t n) {
  check_state(params, k);
  const double nn = static_cast<double>(n);
  const double h = regime_hurst(params, k);
  const double cprime = leading_coupling(params, k);
  const double p = params.prob(k);
  switch (regime_of(params, k)) {
    case MemoryRegime::Short: return (p * (1.0 - p) + cprime / (2.0 * h - 1.0)) * nn;
    case MemoryRegime::Boundary: return cprime * nn * std::log(nn);
    case MemoryRegime::Long: return cprime / (2.0 * h - 1.0) * std::pow(nn, 2.0 * h);
  }
  return 0.0;
}

double exact_overdispersion(const ModelParams& params, State k, std::size_t n) {
  const double p = params.prob(k);
  return exact_count_variance(params, k, n) / (static_cast<double>(n) * p * (1.0 - p)) - 1.0;
}

double asymptotic_overdispersion(const ModelParams& params, State k, std::size_t n) {
  const double p = params.prob(k);
  return asymptotic_count_variance(params, k, n) / (static_cast<double>(n) * p * (1.0 - p)) - 1.0;
}

namespace {

// counts[r][g][k]: count of state k in the first ns[g] trials of path r.
std::vector<std::vector<CountsVector>> prefix_counts(const SampleBatch& batch, std::vector<std::size_t> ns,
                                                     int m) {
  std::sort(ns.begin(), ns.end());
  std::vector<std::vector<CountsVector>> out;
  out.reserve(batch.paths.size());
  for (const auto& p : batch.paths) {
    if (!ns.empty() && ns.back() > p.states.size())
      throw Error(ErrorKind::InvalidArgument, "count horizon exceeds path length");
    std::vector<CountsVector> row;
    std::vector<std::uint32_t> running(static_cast<std::size_t>(m) + 1, 0);
    std::size_t i = 0;
    for (std::size_t n : ns) {
      for (; i < n; ++i) ++running[p.states[i]];
      row.push_back(CountsVector{n, running});
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::vector<CountsVector> counts_from_batch(const SampleBatch& batch, std::size_t n, int m) {
  std::vector<CountsVector> out;
  for (auto& row : prefix_counts(batch, {n}, m)) out.push_back(std::move(row.front()));
  return out;
}

OverdispersionReport summarize_counts(const ModelParams& params, const std::vector<CountsVector>& counts) {
  if (counts.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two count vectors");
  const std::size_t n = counts.front().n;
  const std::size_t R = counts.size();
  const int m = params.m();
  const double rd = static_cast<double>(R);
  const double nn = static_cast<double>(n);

  std::vector<std::vector<double>> dev(static_cast<std::size_t>(m) + 1, std::vector<double>(R));
  std::vector<double> means(static_cast<std::size_t>(m) + 1);
  for (State k = 0; k <= m; ++k) {
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      if (counts[r].n != n || counts[r].counts.size() != static_cast<std::size_t>(m) + 1)
        throw Error(ErrorKind::InvalidArgument, "count vectors disagree in n or m");
      s += counts[r].counts[k];
    }
    means[k] = s / rd;
    for (std::size_t r = 0; r < R; ++r) dev[k][r] = counts[r].counts[k] - means[k];
  }

  OverdispersionReport rep;
  rep.n = n;
  rep.replicates = R;
  rep.covariances.assign(static_cast<std::size_t>(m) + 1, std::vector<Estimate>(static_cast<std::size_t>(m) + 1));
  for (State a = 0; a <= m; ++a) {
    for (State b = 0; b <= m; ++b) {
      std::vector<double> prod(R);
      for (std::size_t r = 0; r < R; ++r) prod[r] = dev[a][r] * dev[b][r];
      Estimate& e = rep.covariances[a][b];
      e.value = std::accumulate(prod.begin(), prod.end(), 0.0) / (rd - 1.0);
      e.std_error = sample_sd(prod) / std::sqrt(rd);
      e.theory = exact_count_covariance(params, a, b, n);
      e.samples = R;
    }
  }
  for (State k = 0; k <= m; ++k) {
    StateDispersion d;
    d.state = k;
    d.regime = regime_of(params, k);
    const double p = params.prob(k);
    std::vector<double> y(R);
    for (std::size_t r = 0; r < R; ++r) y[r] = counts[r].counts[k];
    d.mean = Estimate{means[k], sample_sd(y) / std::sqrt(rd), nn * p, R};
    d.variance = rep.covariances[k][k];
    d.asymptotic_variance = asymptotic_count_variance(params, k, n);
    const double binom = nn * p * (1.0 - p);
    d.psi = Estimate{d.variance.value / binom - 1.0, d.variance.std_error / binom,
                     exact_overdispersion(params, k, n), R};
    d.psi_asymptotic = asymptotic_overdispersion(params, k, n);
    rep.states.push_back(d);
  }
  return rep;
}

FractionalMultinomial fractional_multinomial(const ModelParams& params, std::size_t n,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned parallelism) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  const SampleBatch batch = sample_batch(params, n, replicates, seed, parallelism);
  FractionalMultinomial out;
  out.samples = counts_from_batch(batch, n, params.m());
  out.report = summarize_counts(params, out.samples);
  return out;
}

std::vector<VarianceGrowth> variance_growth(const ModelParams& params, const std::vector<std::size_t>& ns,
                                            std::size_t replicates, std::uint64_t seed,
                                            unsigned parallelism) {
  if (ns.empty()) throw Error(ErrorKind::InvalidArgument, "empty n grid");
  const std::size_t top = *std::max_element(ns.begin(), ns.end());
  const SampleBatch batch = sample_batch(params, top, replicates, seed, parallelism);
  return variance_growth(params, batch, ns);
}

std::vector<VarianceGrowth> variance_growth(const ModelParams& params, const SampleBatch& batch,
                                            const std::vector<std::size_t>& ns_in) {
  std::vector<std::size_t> ns = ns_in;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 2) throw Error(ErrorKind::InsufficientData, "variance growth needs two or more n");
  const auto table = prefix_counts(batch, ns, params.m());
  std::vector<VarianceGrowth> out;
  for (State k = 0; k <= params.m(); ++k) {
    VarianceGrowth g;
    g.state = k;
    g.regime = regime_of(params, k);
    g.expected_exponent = g.regime == MemoryRegime::Long && leading_coupling(params, k) > 0.0
                              ? 2.0 * regime_hurst(params, k)
                              : 1.0;
    out.push_back(g);
  }
  for (std::size_t gi = 0; gi < ns.size(); ++gi) {
    std::vector<CountsVector> at;
    at.reserve(table.size());
    for (const auto& row : table) at.push_back(row[gi]);
    const OverdispersionReport rep = summarize_counts(params, at);
    for (State k = 0; k <= params.m(); ++k) out[k].points.push_back(GrowthPoint{ns[gi], rep.states[k].variance});
  }
  for (auto& g : out) {
    std::vector<double> lx, ly, le;
    for (const auto& p : g.points) {
      lx.push_back(std::log(static_cast<double>(p.n)));
      if (!(p.variance.value > 0.0)) throw Error(ErrorKind::DegenerateSeries, "zero count variance");
      ly.push_back(std::log(p.variance.value));
      le.push_back(std::log(p.variance.theory));
    }
    g.fit = fit_line(lx, ly);
    g.exact_fit = fit_line(lx, le);
  }
  return out;
}

ChiSquareResult chi_square_against(const SampleBatch& batch, const oracle::EnumerationTable& table,
                                   double min_expected) {
  if (batch.paths.empty()) throw Error(ErrorKind::InsufficientData, "empty batch");
  std::vector<std::size_t> observed(table.probs.size(), 0);
  for (const auto& p : batch.paths) {
    if (p.states.size() != static_cast<std::size_t>(table.n))
      throw Error(ErrorKind::InvalidArgument, "path length differs from table n");
    std::size_t key = 0;
    for (auto s : p.states) {
      if (static_cast<int>(s) > table.m) throw Error(ErrorKind::InvalidArgument, "state exceeds table m");
      key = key * static_cast<std::size_t>(table.m + 1) + s;
    }
    ++observed[key];
  }
  const double total = static_cast<double>(batch.paths.size());
  ChiSquareResult r;
  double rest_obs = 0.0, rest_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * table.probs[i];
    const double o = static_cast<double>(observed[i]);
    if (e < min_expected) {
      rest_obs += o;
      rest_exp += e;
      ++r.pooled_cells;
      continue;
    }
    r.statistic += (o - e) * (o - e) / e;
    ++r.bins;
  }
  if (rest_exp > 0.0) {
    r.statistic += (rest_obs - rest_exp) * (rest_obs - rest_exp) / rest_exp;
    ++r.bins;
  }
  if (r.bins < 2) throw Error(ErrorKind::InsufficientData, "fewer than two chi-square bins");
  r.degrees_of_freedom = r.bins - 1;
  boost::math::chi_squared dist(static_cast<double>(r.degrees_of_freedom));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "metric,state,at,empirical,stderr,theoretical\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", r.at, r.empirical, r.std_error, r.theoretical);
    os << r.metric << ',' << r.state << ',' << buf << '\n';
  }
}

}  // namespace lrd
