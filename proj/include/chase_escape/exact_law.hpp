// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chase_escape/jump_chain.hpp"
#include "chase_escape/params.hpp"

namespace chase {

/// Exact absorption law of the embedded jump chain for one (n, lambda).
///
/// Support layout is deterministic: first the infected-extinct states
/// (n-k+1, 0, k+1) for k = 1..n in increasing k, then the susceptible-extinct
/// states (0, n+2-r, r) in increasing r. Masses are exact up to double
/// rounding and sum to 1.
struct ExactLaw {
  ProcessParams params;
  std::vector<std::pair<StateCounts, double>> outcomes;
  double extinction_probability = 0.0;  // total mass with s == 0

  /// Mass of a single final state, 0.0 if outside the support.
  double mass(const StateCounts& state) const {
    for (const auto& [outcome, probability] : outcomes)
      if (outcome == state) return probability;
    return 0.0;
  }
};

/// Largest n accepted by the dynamic program; the table walk below visits
/// about n^2/2 states, roughly 2e8 visits at the cap.
inline constexpr std::int64_t kExactLawMaxN = 20000;

/// Forward dynamic program over the embedded chain, ordered by jump count.
/// After j infections and m recoveries the state is (n-j, 1+j-m, 1+m), so one
/// column per j suffices: infection moves mass to the next column at the same
/// m, recovery moves it up within the column. Masses stay in [0,1]; no
/// over/underflow is possible.
inline ExactLaw exact_absorption_law(const ProcessParams& params) {
  validate(params);
  if (params.n > kExactLawMaxN)
    throw std::invalid_argument("exact law capped at n = 20000");
  const std::int64_t n = params.n;
  const double lambda = params.lambda;

  std::vector<double> column(static_cast<std::size_t>(n) + 3, 0.0);
  std::vector<double> next(static_cast<std::size_t>(n) + 3, 0.0);
  column[0] = 1.0;

  std::vector<double> infected_extinct(static_cast<std::size_t>(n) + 2, 0.0);
  std::vector<double> susceptible_extinct(static_cast<std::size_t>(n) + 3, 0.0);

  for (std::int64_t j = 0; j <= n; ++j) {
    const std::int64_t s = n - j;
    if (s == 0) {
      // Terminal column: every arrival is absorbed with s == 0.
      for (std::int64_t m = 0; m <= n + 1; ++m) {
        const double p = column[static_cast<std::size_t>(m)];
        if (p > 0.0) susceptible_extinct[static_cast<std::size_t>(1 + m)] += p;
      }
      break;
    }
    for (std::int64_t m = 0; m <= j + 1; ++m) {
      const double p = column[static_cast<std::size_t>(m)];
      if (p == 0.0) continue;
      const std::int64_t i = 1 + j - m;
      if (i == 0) {
        infected_extinct[static_cast<std::size_t>(j + 1)] += p;  // k = j + 1
        continue;
      }
      const JumpProbabilities q = jump_probabilities(s, 1 + m, lambda);
      next[static_cast<std::size_t>(m)] += p * q.infect;
      column[static_cast<std::size_t>(m + 1)] += p * q.recover;
    }
    std::swap(column, next);
    std::fill(next.begin(), next.end(), 0.0);
  }

  ExactLaw law;
  law.params = params;
  law.outcomes.reserve(static_cast<std::size_t>(2 * n));
  for (std::int64_t k = 1; k <= n; ++k) {
    const double p = infected_extinct[static_cast<std::size_t>(k)];
    if (p > 0.0)
      law.outcomes.push_back({StateCounts{n - k + 1, 0, k + 1}, p});
  }
  for (std::int64_t r = 1; r <= n + 2; ++r) {
    const double p = susceptible_extinct[static_cast<std::size_t>(r)];
    if (p > 0.0) {
      law.outcomes.push_back({StateCounts{0, n + 2 - r, r}, p});
      law.extinction_probability += p;
    }
  }
  return law;
}

/// Probability that the infection sweeps all n susceptibles.
inline double exact_extinction_probability(const ProcessParams& params) {
  return exact_absorption_law(params).extinction_probability;
}

/// Exact expectations of the final counts, without materializing the law.
struct ExactMeans {
  double mean_s = 0.0;
  double mean_i = 0.0;
  double mean_r = 0.0;
  double extinction_probability = 0.0;
  /// Probability mass dropped by windowing; bounds the absolute error of
  /// every mean by mass_defect * (n + 2).
  double mass_defect = 0.0;
};

inline constexpr std::int64_t kExactMeansMaxN = 200000;

/// Windowed variant of the forward walk for expectations only. Cells whose
/// mass falls below `prune` stop propagating, which confines each column to
/// the band that carries non-negligible mass and cuts the walk from n^2/2
/// visits to roughly the band width times n. The dropped mass is accumulated
/// and reported; at the default threshold the induced error is far below
/// double rounding, so the means are exact for practical purposes, at n well
/// beyond the full-law cap.
inline ExactMeans exact_final_means(const ProcessParams& params,
                                    double prune = 1e-60) {
  validate(params);
  if (params.n > kExactMeansMaxN)
    throw std::invalid_argument("exact means capped at n = 200000");
  if (!(prune >= 0.0))
    throw std::invalid_argument("prune threshold must be nonnegative");
  const std::int64_t n = params.n;
  const double lambda = params.lambda;

  std::vector<double> column(static_cast<std::size_t>(n) + 3, 0.0);
  std::vector<double> next(static_cast<std::size_t>(n) + 3, 0.0);
  column[0] = 1.0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  ExactMeans means;

  for (std::int64_t j = 0; j < n; ++j) {
    const std::int64_t s = n - j;
    std::int64_t next_lo = -1;
    std::int64_t next_hi = -1;
    for (std::int64_t m = lo; m <= hi; ++m) {
      const double p = column[static_cast<std::size_t>(m)];
      column[static_cast<std::size_t>(m)] = 0.0;
      if (p == 0.0) continue;
      if (m == j + 1) {
        // i == 0: infected extinction after k = m recoveries.
        means.mean_s += p * static_cast<double>(n - m + 1);
        means.mean_r += p * static_cast<double>(m + 1);
        continue;
      }
      if (p < prune) {
        means.mass_defect += p;
        continue;
      }
      const JumpProbabilities q = jump_probabilities(s, 1 + m, lambda);
      next[static_cast<std::size_t>(m)] += p * q.infect;
      if (next_lo < 0) next_lo = m;
      next_hi = m;
      column[static_cast<std::size_t>(m + 1)] += p * q.recover;
      if (m + 1 > hi) hi = m + 1;  // the spill is consumed later this column
    }
    if (next_lo < 0) break;  // everything absorbed or pruned
    std::swap(column, next);
    lo = next_lo;
    hi = next_hi;
  }

  // Terminal column j == n: any arriving mass is absorbed with s == 0 after
  // m recoveries, in state (0, 1 + n - m, 1 + m).
  for (std::int64_t m = lo; m <= hi; ++m) {
    const double p = column[static_cast<std::size_t>(m)];
    if (p == 0.0) continue;
    means.mean_i += p * static_cast<double>(1 + n - m);
    means.mean_r += p * static_cast<double>(1 + m);
    means.extinction_probability += p;
  }
  return means;
}

}  // namespace chase
