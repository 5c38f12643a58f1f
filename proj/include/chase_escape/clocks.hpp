// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chase_escape/params.hpp"
#include "chase_escape/rng.hpp"

namespace chase {

/*
 * Exponential-clock coupling. Two independent renewal sequences drive one
 * trajectory:
 *
 *   infection_times[i-1], i = 1..n: the i-th jump of the pure death chain of
 *     susceptibles; increments are Exp(lambda * (n - i + 1)).
 *   recovery_times[i-1],  i = 1..n: the i-th jump of the rate-1 pure birth
 *     chain of recovered hosts; increments are Exp(i).
 *
 * The trajectory ends in infected extinction at the first index k whose
 * recovery time undercuts its infection counterpart (the k-th recovery beats
 * the k-th infection), and otherwise in susceptible extinction at the last
 * infection time, with the final recovered count 1 + #recoveries before that
 * time. Exact ties resolve as "infection first" and are counted.
 */
struct ClockPaths {
  std::vector<double> infection_times;  // cumulative, length n
  std::vector<double> recovery_times;   // cumulative, length <= n (see below)
};

/// Draws both clock sequences. All n infection increments are drawn first;
/// recovery increments follow only until the absorption decision is settled,
/// i.e. until one undercuts its infection counterpart or reaches the last
/// infection time. At most n recovery values are ever materialized.
inline ClockPaths sample_clock_paths(const ProcessParams& params,
                                     SplitMix64& rng) {
  validate(params);
  const std::int64_t n = params.n;
  ClockPaths paths;
  paths.infection_times.resize(static_cast<std::size_t>(n));
  double clock = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    clock += rng.exponential(params.lambda * static_cast<double>(n - i + 1));
    paths.infection_times[static_cast<std::size_t>(i - 1)] = clock;
  }
  const double last_infection = clock;
  paths.recovery_times.reserve(16);
  clock = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    clock += rng.exponential(static_cast<double>(i));
    paths.recovery_times.push_back(clock);
    if (clock < paths.infection_times[static_cast<std::size_t>(i - 1)]) break;
    if (clock >= last_infection) break;
  }
  return paths;
}

/// Reads the absorption record off materialized clock paths. The recovery
/// sequence must extend to a decision point (an undercut, or a value at or
/// past the last infection time); sample_clock_paths always satisfies this.
inline AbsorptionRecord absorb_from_clocks(const ClockPaths& paths,
                                           const ProcessParams& params) {
  validate(params);
  const std::int64_t n = params.n;
  if (paths.infection_times.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("clock paths need exactly n infection times");
  const double last_infection = paths.infection_times.back();

  AbsorptionRecord record;
  std::int64_t undercuts = 0;  // recoveries strictly before the last infection
  for (std::size_t idx = 0; idx < paths.recovery_times.size(); ++idx) {
    const double recovery = paths.recovery_times[idx];
    const double infection = paths.infection_times[idx];
    if (recovery == infection || recovery == last_infection) ++record.ties;
    if (recovery < infection) {
      // Infected extinction at index k = idx + 1: exactly k-1 infections
      // precede this recovery (all earlier indices survived the pairwise
      // comparison), then the k-th recovery removed the last infected host.
      const std::int64_t k = static_cast<std::int64_t>(idx) + 1;
      record.final = StateCounts{n - k + 1, 0, k + 1};
      record.cause = AbsorptionCause::InfectedExtinct;
      record.jumps = static_cast<std::uint64_t>(2 * k - 1);
      record.time = recovery;
      return record;
    }
    if (recovery >= last_infection) {
      record.final = StateCounts{0, n + 1 - undercuts, 1 + undercuts};
      record.cause = AbsorptionCause::SusceptibleExtinct;
      record.jumps = static_cast<std::uint64_t>(n + undercuts);
      record.time = last_infection;
      return record;
    }
    ++undercuts;
  }
  throw std::invalid_argument("recovery sequence too short to decide absorption");
}

/// Single-pass runner over the two clock sequences, drawing increments
/// pairwise per index and exiting at the undercut index k, so an
/// infected-extinct replica costs O(k) draws. Early infections are fast
/// (rate lambda*n), so k is typically close to n and the loop is O(n) except
/// when lambda*n is small. Recovery values seen so far are buffered in a
/// reused thread-local scratch vector because the susceptible-extinct branch
/// needs them compared against the last infection time, which is only known
/// once the infection clock finishes. Same law as sample_clock_paths +
/// absorb_from_clocks, different draw interleaving.
inline AbsorptionRecord run_coupled_direct(const ProcessParams& params,
                                           SplitMix64& rng) {
  validate(params);
  const std::int64_t n = params.n;
  thread_local std::vector<double> recoveries;
  recoveries.clear();

  AbsorptionRecord record;
  double infection = 0.0;
  double recovery = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    infection += rng.exponential(params.lambda * static_cast<double>(n - i + 1));
    recovery += rng.exponential(static_cast<double>(i));
    if (recovery == infection) ++record.ties;
    if (recovery < infection) {
      record.final = StateCounts{n - i + 1, 0, i + 1};
      record.cause = AbsorptionCause::InfectedExtinct;
      record.jumps = static_cast<std::uint64_t>(2 * i - 1);
      record.time = recovery;
      return record;
    }
    recoveries.push_back(recovery);
  }
  const double last_infection = infection;
  std::int64_t undercuts = 0;
  for (const double value : recoveries) {
    if (value == last_infection) ++record.ties;
    if (value < last_infection) ++undercuts;
  }
  record.final = StateCounts{0, n + 1 - undercuts, 1 + undercuts};
  record.cause = AbsorptionCause::SusceptibleExtinct;
  record.jumps = static_cast<std::uint64_t>(n + undercuts);
  record.time = last_infection;
  return record;
}

}  // namespace chase
