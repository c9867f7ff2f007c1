#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lrd/model.hpp"
#include "lrd/oracle.hpp"
#include "lrd/sampler.hpp"

namespace lrd {

// An empirical quantity with its standard error and closed-form counterpart.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double theory = 0.0;
  std::size_t samples = 0;

  double z() const { return std_error > 0.0 ? (value - theory) / std_error : 0.0; }
  bool within(double sigmas) const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares of y on x. Requires at least two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Across-replicate estimate of cov(I{X_i = a}, I{X_{i+lag} = b}) pooled over
// i = 1..n-lag within each path; the standard error uses the delta method on
// per-replicate means. Throws InsufficientData when the batch has fewer than
// two replicates or lag >= n.
Estimate empirical_indicator_cov(const SampleBatch& batch, const ModelParams& params, State a,
                                 State b, TimeIndex lag);

struct HurstEstimate {
  State state = 0;
  double estimate = 0.0;
  std::vector<std::size_t> block_sizes;
  std::vector<double> block_variances;
  LineFit fit;
  bool in_range = false;  // estimate in (0,1)
};

struct HurstOptions {
  std::size_t min_block = 16;
  // Largest block is the shortest series length divided by this.
  std::size_t max_block_divisor = 16;
  std::size_t min_total_length = std::size_t{1} << 10;
};

// Aggregated-variance method: non-overlapping block means at dyadic block
// sizes, variance about the pooled mean, slope of log variance on log block
// size, H = (slope + 2) / 2. Throws InsufficientData / DegenerateSeries.
HurstEstimate estimate_hurst(const std::vector<std::vector<double>>& series, State state = 0,
                             const HurstOptions& options = {});

// I{X_i = k} for every path of a batch.
std::vector<std::vector<double>> indicator_series(const SampleBatch& batch, State k);

struct InterArrivalSummary {
  State state = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double mean_std_error = 0.0;
  // Empirical P(T > t) at t = 1..max observed gap.
  std::vector<std::pair<std::size_t, double>> survival;
  double window_low = 0.0, window_high = 0.0;
  LineFit tail_fit;
  double theoretical_mean = 0.0;      // 1 / p_k
  double theoretical_exponent = 0.0;  // 2 H_k - 3
};

struct InterArrivalOptions {
  std::size_t min_count = 10'000;
  double min_t = 3.0;
  // Fraction of the largest gaps excluded from the tail window.
  double top_fraction = 0.01;
};

// Gaps between consecutive visits to state k (k >= 1), skipping everything
// before each path's first visit. Only gaps that close inside a path count,
// so long gaps are under-represented when paths are short relative to the
// tail. The tail slope is fitted on log S(t) vs log t over the decade
// geometrically centred between min_t and the top-fraction quantile.
InterArrivalSummary inter_arrival_summary(const SampleBatch& batch, const ModelParams& params,
                                          State k, const InterArrivalOptions& options = {});

// Same summary from an explicit gap list.
InterArrivalSummary inter_arrival_summary(std::vector<std::size_t> gaps, const ModelParams& params,
                                          State k, const InterArrivalOptions& options = {});

// Gap list used by inter_arrival_summary.
std::vector<std::size_t> inter_arrival_gaps(const SampleBatch& batch, State k);

// Untruncated gaps: each replicate samples until its first visit to k, then
// keeps sampling until gaps_per_replicate further visits have occurred, so
// every gap is a complete draw of the inter-arrival law. Replicate r uses
// derive_seed(seed, r); the result does not depend on parallelism.
std::vector<std::size_t> sample_inter_arrivals(const ModelParams& params, State k,
                                               std::size_t gaps_per_replicate, std::size_t replicates,
                                               std::uint64_t seed, unsigned parallelism = 1,
                                               const SamplerOptions& options = {});

enum class MemoryRegime { Short, Boundary, Long };
std::string_view to_string(MemoryRegime r) noexcept;
// Regime of state k by exact comparison of H_k with 1/2; state 0 follows the
// largest H.
MemoryRegime regime_of(const ModelParams& params, State k);

// Exact finite-n moments of the counts Y_0..Y_m.
double exact_count_variance(const ModelParams& params, State k, std::size_t n);
double exact_count_covariance(const ModelParams& params, State a, State b, std::size_t n);
// Leading-order asymptotic variance of Y_k:
// (p(1-p) + c'/(2H-1)) n, c' n ln n, or c'/(2H-1) n^(2H), with c' = p c.
// State 0 uses the state(s) of largest H.
double asymptotic_count_variance(const ModelParams& params, State k, std::size_t n);
// Over-dispersion psi with var = n p (1-p) (1 + psi).
double exact_overdispersion(const ModelParams& params, State k, std::size_t n);
double asymptotic_overdispersion(const ModelParams& params, State k, std::size_t n);

struct CountsVector {
  std::size_t n = 0;
  std::vector<std::uint32_t> counts;  // Y_0..Y_m
};

struct StateDispersion {
  State state = 0;
  MemoryRegime regime = MemoryRegime::Short;
  Estimate mean;      // theory n p_k
  Estimate variance;  // theory: exact finite-n variance
  double asymptotic_variance = 0.0;
  Estimate psi;       // theory: exact finite-n psi
  double psi_asymptotic = 0.0;
};

struct OverdispersionReport {
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::vector<StateDispersion> states;
  // covariances[a][b] with exact theory.
  std::vector<std::vector<Estimate>> covariances;
};

struct FractionalMultinomial {
  std::vector<CountsVector> samples;
  OverdispersionReport report;
};

// Count vectors of the states over the first n trials of each path.
std::vector<CountsVector> counts_from_batch(const SampleBatch& batch, std::size_t n, int m);
OverdispersionReport summarize_counts(const ModelParams& params, const std::vector<CountsVector>& counts);

FractionalMultinomial fractional_multinomial(const ModelParams& params, std::size_t n,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned parallelism = 1);

struct GrowthPoint {
  std::size_t n = 0;
  Estimate variance;  // theory: exact finite-n variance
};

struct VarianceGrowth {
  State state = 0;
  MemoryRegime regime = MemoryRegime::Short;
  std::vector<GrowthPoint> points;
  LineFit fit;             // log var on log n, empirical
  LineFit exact_fit;       // same fit on the exact finite-n variances
  double expected_exponent = 0.0;  // 2H for long memory with c > 0, 1 otherwise
};

// Variance of Y_k over a grid of n. Each replicate path has length max(ns)
// and contributes its prefix counts to every grid point.
std::vector<VarianceGrowth> variance_growth(const ModelParams& params, const std::vector<std::size_t>& ns,
                                            std::size_t replicates, std::uint64_t seed,
                                            unsigned parallelism = 1);
std::vector<VarianceGrowth> variance_growth(const ModelParams& params, const SampleBatch& batch,
                                            const std::vector<std::size_t>& ns);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 0.0;
  std::size_t bins = 0;
  std::size_t pooled_cells = 0;  // cells merged into the remainder bin
};

// Pearson test of observed whole-path frequencies against an exact table of
// the same n and m. Cells with expected count below min_expected are pooled
// into one remainder bin.
ChiSquareResult chi_square_against(const SampleBatch& batch, const oracle::EnumerationTable& table,
                                   double min_expected = 5.0);

// Report rows: metric,state,at,empirical,stderr,theoretical.
struct ReportRow {
  std::string metric;
  std::string state;
  double at = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double theoretical = 0.0;
};
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace lrd
