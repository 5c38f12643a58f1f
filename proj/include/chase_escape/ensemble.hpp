// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "chase_escape/params.hpp"
#include "chase_escape/rng.hpp"
#include "chase_escape/sampler.hpp"

namespace chase {

/// Worker count resolution order: explicit request, CHASE_ESCAPE_THREADS,
/// hardware concurrency, 1.
inline unsigned resolve_worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHASE_ESCAPE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1)
      return static_cast<unsigned>(parsed);
    throw std::invalid_argument(
        "CHASE_ESCAPE_THREADS must be a positive integer");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

struct EnsembleConfig {
  ProcessParams params;
  SamplerMethod method = SamplerMethod::DirectClocks;
  std::uint64_t replicas = 0;
  std::uint64_t master_seed = 0;
  /// Largest number of per-replica records kept; 0 keeps none. When more
  /// replicas run than the cap, every stride-th record is retained, with the
  /// stride fixed by the config so retention never depends on scheduling.
  std::uint64_t sample_cap = 1'000'000;
  unsigned workers = 0;  // 0: resolve from environment
};

struct EnsembleSummary {
  EnsembleConfig config;
  std::uint64_t replicas = 0;
  std::uint64_t susceptible_extinct_count = 0;
  std::uint64_t infected_extinct_count = 0;
  std::uint64_t ties_total = 0;
  std::map<std::int64_t, std::uint64_t> final_s_histogram;
  std::map<std::int64_t, std::uint64_t> final_i_histogram;
  std::map<std::int64_t, std::uint64_t> final_r_histogram;
  double sum_s = 0.0, sum_s_sq = 0.0;
  double sum_i = 0.0, sum_i_sq = 0.0;
  double sum_r = 0.0, sum_r_sq = 0.0;
  double sum_jumps = 0.0;
  double sum_time = 0.0, sum_time_sq = 0.0;
  std::uint64_t time_count = 0;
  /// Every stride-th replica's record, in replica order.
  std::uint64_t sample_stride = 0;
  std::vector<AbsorptionRecord> samples;

  double mean_final_s() const { return sum_s / static_cast<double>(replicas); }
  double mean_final_i() const { return sum_i / static_cast<double>(replicas); }
  double mean_final_r() const { return sum_r / static_cast<double>(replicas); }
  double mean_jumps() const { return sum_jumps / static_cast<double>(replicas); }
  /// Fraction of replicas in which the infection swept the susceptible pool.
  double extinction_fraction() const {
    return static_cast<double>(susceptible_extinct_count) /
           static_cast<double>(replicas);
  }
};

namespace detail {

struct BlockPartial {
  std::uint64_t susceptible_extinct = 0;
  std::uint64_t infected_extinct = 0;
  std::uint64_t ties = 0;
  std::map<std::int64_t, std::uint64_t> hist_s, hist_i, hist_r;
  double sum_s = 0.0, sum_s_sq = 0.0;
  double sum_i = 0.0, sum_i_sq = 0.0;
  double sum_r = 0.0, sum_r_sq = 0.0;
  double sum_jumps = 0.0;
  double sum_time = 0.0, sum_time_sq = 0.0;
  std::uint64_t time_count = 0;
  std::vector<AbsorptionRecord> kept;
};

inline void accumulate_replica(BlockPartial& block,
                               const AbsorptionRecord& record) {
  if (record.cause == AbsorptionCause::SusceptibleExtinct)
    ++block.susceptible_extinct;
  else
    ++block.infected_extinct;
  block.ties += record.ties;
  ++block.hist_s[record.final.s];
  ++block.hist_i[record.final.i];
  ++block.hist_r[record.final.r];
  const double s = static_cast<double>(record.final.s);
  const double i = static_cast<double>(record.final.i);
  const double r = static_cast<double>(record.final.r);
  block.sum_s += s;
  block.sum_s_sq += s * s;
  block.sum_i += i;
  block.sum_i_sq += i * i;
  block.sum_r += r;
  block.sum_r_sq += r * r;
  block.sum_jumps += static_cast<double>(record.jumps);
  if (record.time) {
    block.sum_time += *record.time;
    block.sum_time_sq += *record.time * *record.time;
    ++block.time_count;
  }
}

}  // namespace detail

/// The replica count is split into fixed blocks of 1024; workers claim blocks
/// from a shared counter, and partials are reduced in block order afterwards.
/// Every replica draws from its own counter-derived stream, so the summary is
/// bit-identical for any worker count.
inline EnsembleSummary run_replicas(const EnsembleConfig& config) {
  validate(config.params);
  if (config.replicas == 0)
    throw std::invalid_argument("replica count must be positive");

  constexpr std::uint64_t kBlockSize = 1024;
  const std::uint64_t n_blocks =
      (config.replicas + kBlockSize - 1) / kBlockSize;
  const std::uint64_t stride =
      config.sample_cap == 0
          ? 0
          : (config.replicas + config.sample_cap - 1) / config.sample_cap;

  std::vector<detail::BlockPartial> partials(n_blocks);
  std::atomic<std::uint64_t> next_block{0};

  const auto worker_loop = [&]() {
    for (;;) {
      const std::uint64_t block = next_block.fetch_add(1);
      if (block >= n_blocks) return;
      detail::BlockPartial& partial = partials[block];
      const std::uint64_t begin = block * kBlockSize;
      const std::uint64_t end =
          std::min(begin + kBlockSize, config.replicas);
      for (std::uint64_t idx = begin; idx < end; ++idx) {
        SplitMix64 rng = SplitMix64::for_replica(config.master_seed, idx);
        const AbsorptionRecord record =
            run_sampler(config.params, rng, config.method);
        detail::accumulate_replica(partial, record);
        if (stride != 0 && idx % stride == 0) partial.kept.push_back(record);
      }
    }
  };

  const unsigned workers = resolve_worker_count(config.workers);
  if (workers <= 1 || n_blocks == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    const unsigned spawned = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, n_blocks));
    pool.reserve(spawned);
    for (unsigned w = 0; w < spawned; ++w) pool.emplace_back(worker_loop);
    for (auto& t : pool) t.join();
  }

  EnsembleSummary summary;
  summary.config = config;
  summary.replicas = config.replicas;
  summary.sample_stride = stride;
  for (const detail::BlockPartial& partial : partials) {
    summary.susceptible_extinct_count += partial.susceptible_extinct;
    summary.infected_extinct_count += partial.infected_extinct;
    summary.ties_total += partial.ties;
    for (const auto& [k, v] : partial.hist_s) summary.final_s_histogram[k] += v;
    for (const auto& [k, v] : partial.hist_i) summary.final_i_histogram[k] += v;
    for (const auto& [k, v] : partial.hist_r) summary.final_r_histogram[k] += v;
    summary.sum_s += partial.sum_s;
    summary.sum_s_sq += partial.sum_s_sq;
    summary.sum_i += partial.sum_i;
    summary.sum_i_sq += partial.sum_i_sq;
    summary.sum_r += partial.sum_r;
    summary.sum_r_sq += partial.sum_r_sq;
    summary.sum_jumps += partial.sum_jumps;
    summary.sum_time += partial.sum_time;
    summary.sum_time_sq += partial.sum_time_sq;
    summary.time_count += partial.time_count;
    summary.samples.insert(summary.samples.end(), partial.kept.begin(),
                           partial.kept.end());
  }
  return summary;
}

/// Least-squares slope of log(y) against log(x); used to measure growth
/// exponents across a sweep of graph sizes.
inline double log_log_slope(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("slope needs at least two points");
  const std::size_t n = xs.size();
  double mean_lx = 0.0;
  double mean_ly = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("slope needs positive coordinates");
    mean_lx += std::log(xs[i]);
    mean_ly += std::log(ys[i]);
  }
  mean_lx /= static_cast<double>(n);
  mean_ly /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mean_lx;
    const double dy = std::log(ys[i]) - mean_ly;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  return sxy / sxx;
}

}  // namespace chase
