// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace chase {

/// Chase-escape dynamics on the complete graph with n+2 vertices, started from
/// n susceptible hosts, one infected and one recovered. Infection crosses each
/// S-I edge at rate lambda, recovery crosses each I-R edge at rate 1. The
/// process stops when either the susceptible or the infected population hits
/// zero.
struct ProcessParams {
  std::int64_t n = 1;
  double lambda = 1.0;
};

inline void validate(const ProcessParams& params) {
  if (params.n < 1) throw std::invalid_argument("n must be a positive integer");
  if (!std::isfinite(params.lambda) || params.lambda <= 0.0)
    throw std::invalid_argument("lambda must be positive and finite");
}

/// Population counts. Invariant: all nonnegative, s + i + r == n + 2.
struct StateCounts {
  std::int64_t s = 0;
  std::int64_t i = 0;
  std::int64_t r = 0;

  friend bool operator==(const StateCounts&, const StateCounts&) = default;
};

inline StateCounts initial_state(const ProcessParams& params) {
  return StateCounts{params.n, 1, 1};
}

inline bool is_absorbed(const StateCounts& state) {
  return state.s == 0 || state.i == 0;
}

enum class AbsorptionCause : std::uint8_t {
  SusceptibleExtinct,  // s hit zero; the infection swept the graph
  InfectedExtinct,     // i hit zero; the outbreak died with s survivors
};

/// Where a single trajectory stopped. `time` is the absorption time in the
/// continuous-time parameterization and is absent for samplers that only
/// realize the embedded jump chain. `ties` counts exact floating-point clock
/// ties that were resolved by the "infection first" convention.
struct AbsorptionRecord {
  StateCounts final;
  AbsorptionCause cause = AbsorptionCause::InfectedExtinct;
  std::uint64_t jumps = 0;
  std::optional<double> time;
  std::uint32_t ties = 0;
};

}  // namespace chase
