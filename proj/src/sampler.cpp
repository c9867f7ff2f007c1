#include "lrd/sampler.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "lrd/error.hpp"

namespace lrd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replicate) noexcept {
  return splitmix64(base_seed + (replicate + 1) * 0x9E3779B97F4A7C15ULL);
}

PathSampler::PathSampler(const ModelParams& params, std::uint64_t seed, const SamplerOptions& options)
    : gen_(seed), frontier_(params, options.limits), seed_(seed) {}

State PathSampler::next() {
  const auto t = static_cast<TimeIndex>(states_.size() + 1);
  const auto weights = frontier_.extension_weights(t);
  // Exact weights are non-negative; tiny negative residue is rounding.
  double total = 0.0;
  for (double w : weights) total += w > 0.0 ? w : 0.0;
  const double u = uniform01(gen_) * total;
  const int m = frontier_.params().m();
  State chosen = m;
  double cum = 0.0;
  for (State s = 0; s <= m; ++s) {
    cum += weights[s] > 0.0 ? weights[s] : 0.0;
    if (u < cum) {
      chosen = s;
      break;
    }
  }
  states_.push_back(static_cast<std::uint8_t>(chosen));
  frontier_.observe(t, chosen);
  frontier_.rescale();
  return chosen;
}

PathSample PathSampler::finish() && {
  PathSample out;
  out.seed = seed_;
  out.params_hash = frontier_.params().digest();
  out.peak_frontier = frontier_.peak_size();
  out.work = frontier_.work();
  out.states = std::move(states_);
  return out;
}

PathSample sample_path(const ModelParams& params, std::size_t n, std::uint64_t seed,
                       const SamplerOptions& options) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "path length must be positive");
  PathSampler sampler(params, seed, options);
  for (std::size_t i = 0; i < n; ++i) sampler.next();
  return std::move(sampler).finish();
}

void for_each_replicate(std::size_t replicates, unsigned parallelism,
                        const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= replicates) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(replicates);
        return;
      }
    }
  };
  const unsigned threads =
      std::max(1u, static_cast<unsigned>(std::min<std::size_t>(parallelism, replicates)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

SampleBatch sample_batch(const ModelParams& params, std::size_t n, std::size_t replicates,
                         std::uint64_t base_seed, unsigned parallelism,
                         const SamplerOptions& options) {
  if (replicates == 0) throw Error(ErrorKind::InvalidArgument, "replicates must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  SampleBatch batch;
  batch.replicates = replicates;
  batch.length = n;
  batch.base_seed = base_seed;
  batch.params_hash = params.digest();
  batch.paths.resize(replicates);
  for_each_replicate(replicates, parallelism, [&](std::size_t r) {
    batch.paths[r] = sample_path(params, n, derive_seed(base_seed, r), options);
  });
  batch.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return batch;
}

void write_compact(std::ostream& os, const SampleBatch& batch) {
  std::string line;
  for (const auto& path : batch.paths) {
    line.clear();
    for (auto s : path.states) line += static_cast<char>('0' + s);
    os << line << '\n';
  }
}

void write_long_csv(std::ostream& os, const SampleBatch& batch) {
  os << "replicate,index,state\n";
  for (std::size_t r = 0; r < batch.paths.size(); ++r) {
    const auto& states = batch.paths[r].states;
    for (std::size_t i = 0; i < states.size(); ++i) {
      os << r << ',' << (i + 1) << ',' << static_cast<int>(states[i]) << '\n';
    }
  }
}

}  // namespace lrd
