// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chase_escape/clocks.hpp"
#include "chase_escape/params.hpp"
#include "chase_escape/rng.hpp"

namespace chase {

/*
 * Poisson embedding of the two clock sequences. A rate-1 Yule process run to
 * time t has jump times log(1 + a_i / E) where a_1 < a_2 < ... are arrivals
 * of a unit Poisson process and E is an independent unit exponential (the
 * a.s. limit of the Yule martingale). Applying this on both sides:
 *
 *   recovery time  rho(i)    = log(1 + tau(i) / E)
 *   infection time sigma(i)  = (1/lambda) * [ log(1 + tau_bar(n)/E_bar)
 *                                           - log(1 + tau_bar(n-i)/E_bar) ]
 *
 * with independent unit-Poisson arrival sequences tau, tau_bar and unit
 * exponentials E, E_bar. The infection side reads the death chain of
 * susceptibles backwards in time, which is why its arrivals enter with
 * descending index.
 */
struct EmbeddingDraw {
  double recovery_terminal = 1.0;         // E
  double infection_terminal = 1.0;        // E_bar
  std::vector<double> recovery_arrivals;  // tau(1..n)
  std::vector<double> infection_arrivals; // tau_bar(1..n)
};

/// Draws a full embedding: both terminals, then the infection arrivals, then
/// the recovery arrivals, each sequence materialized through index n.
inline EmbeddingDraw sample_poisson_embedding(const ProcessParams& params,
                                              SplitMix64& rng) {
  validate(params);
  const std::size_t n = static_cast<std::size_t>(params.n);
  EmbeddingDraw draw;
  draw.recovery_terminal = rng.exponential(1.0);
  draw.infection_terminal = rng.exponential(1.0);
  draw.infection_arrivals.resize(n);
  double clock = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    clock += rng.exponential(1.0);
    draw.infection_arrivals[i] = clock;
  }
  draw.recovery_arrivals.resize(n);
  clock = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    clock += rng.exponential(1.0);
    draw.recovery_arrivals[i] = clock;
  }
  return draw;
}

/// Converts an embedding into clock paths. The log of a ratio of nearby
/// quantities is evaluated as log1p of the increment ratio, which stays
/// accurate when tau_bar(n) - tau_bar(n-i) is small relative to the base.
inline ClockPaths clocks_from_embedding(const EmbeddingDraw& draw,
                                        const ProcessParams& params) {
  validate(params);
  const std::size_t n = static_cast<std::size_t>(params.n);
  if (draw.infection_arrivals.size() != n || draw.recovery_arrivals.size() != n)
    throw std::invalid_argument("embedding draw must be materialized through n");
  ClockPaths paths;
  paths.infection_times.resize(n);
  paths.recovery_times.resize(n);
  const double top = draw.infection_arrivals[n - 1];
  for (std::size_t i = 1; i <= n; ++i) {
    const double below = i == n ? 0.0 : draw.infection_arrivals[n - i - 1];
    paths.infection_times[i - 1] =
        std::log1p((top - below) / (draw.infection_terminal + below)) /
        params.lambda;
    paths.recovery_times[i - 1] =
        std::log1p(draw.recovery_arrivals[i - 1] / draw.recovery_terminal);
  }
  return paths;
}

/// Whether the infection clock exhausts all n susceptibles strictly before
/// the n-th recovery, i.e. sigma(n) < rho(n). Equivalent to the closed-form
/// race (1 + tau_bar(n)/E_bar)^(1/lambda) < 1 + tau(n)/E, evaluated in logs.
inline bool infection_clock_wins(const EmbeddingDraw& draw,
                                 const ProcessParams& params) {
  validate(params);
  const std::size_t n = static_cast<std::size_t>(params.n);
  if (draw.infection_arrivals.size() != n || draw.recovery_arrivals.size() != n)
    throw std::invalid_argument("embedding draw must be materialized through n");
  const double infection_total =
      std::log1p(draw.infection_arrivals[n - 1] / draw.infection_terminal) /
      params.lambda;
  const double recovery_total =
      std::log1p(draw.recovery_arrivals[n - 1] / draw.recovery_terminal);
  return infection_total < recovery_total;
}

/// Same race decided from endpoint draws only: the n-th Poisson arrival is a
/// Gamma(n, 1) variable, so one gamma draw per side replaces n exponential
/// increments. O(1) per draw; agrees in law with the materialized route.
inline bool infection_clock_wins_endpoint(const ProcessParams& params,
                                          SplitMix64& rng) {
  validate(params);
  const double recovery_terminal = rng.exponential(1.0);
  const double infection_terminal = rng.exponential(1.0);
  const double recovery_top = rng.gamma(static_cast<double>(params.n));
  const double infection_top = rng.gamma(static_cast<double>(params.n));
  const double infection_total =
      std::log1p(infection_top / infection_terminal) / params.lambda;
  const double recovery_total = std::log1p(recovery_top / recovery_terminal);
  return infection_total < recovery_total;
}

/// Streamed embedding runner with O(1) auxiliary memory and an early exit.
///
/// The last infection time needs only tau_bar(n), drawn upfront as
/// Gamma(n, 1). Conditionally on it, the earlier arrivals are order
/// statistics of n-1 uniforms on [0, tau_bar(n)] and can be generated in
/// descending order by the multiplicative beta recursion
///   tau_bar(n-i) = tau_bar(n-i+1) * V^(1/(n-i)),   V uniform,
/// which is exactly the index order the infection times consume. Recovery
/// times stream forward. Knowing the last infection time from the start lets
/// the susceptible-extinct branch count undercuts on the fly and stop at the
/// first recovery past it, so supercritical replicas do O(n^(1/lambda))
/// expected work rather than O(n).
inline AbsorptionRecord run_coupled_embedding(const ProcessParams& params,
                                              SplitMix64& rng) {
  validate(params);
  const std::int64_t n = params.n;
  const double recovery_terminal = rng.exponential(1.0);
  const double infection_terminal = rng.exponential(1.0);
  const double top = rng.gamma(static_cast<double>(n));
  const double last_infection =
      std::log1p(top / infection_terminal) / params.lambda;

  AbsorptionRecord record;
  double below = top;       // tau_bar(n - i) while walking i = 1..n
  double recovery_arrival = 0.0;
  std::int64_t undercuts = 0;
  for (std::int64_t i = 1; i <= n; ++i) {
    below = i == n ? 0.0
                   : below * std::pow(rng.uniform(),
                                      1.0 / static_cast<double>(n - i));
    const double infection =
        std::log1p((top - below) / (infection_terminal + below)) /
        params.lambda;
    recovery_arrival += rng.exponential(1.0);
    const double recovery =
        std::log1p(recovery_arrival / recovery_terminal);
    if (recovery == infection || recovery == last_infection) ++record.ties;
    if (recovery < infection) {
      record.final = StateCounts{n - i + 1, 0, i + 1};
      record.cause = AbsorptionCause::InfectedExtinct;
      record.jumps = static_cast<std::uint64_t>(2 * i - 1);
      record.time = recovery;
      return record;
    }
    if (recovery >= last_infection) break;  // later recoveries land later still
    ++undercuts;
  }
  record.final = StateCounts{0, n + 1 - undercuts, 1 + undercuts};
  record.cause = AbsorptionCause::SusceptibleExtinct;
  record.jumps = static_cast<std::uint64_t>(n + undercuts);
  record.time = last_infection;
  return record;
}

}  // namespace chase
