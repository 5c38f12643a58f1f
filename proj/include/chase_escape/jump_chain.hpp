// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

#include "chase_escape/params.hpp"
#include "chase_escape/rng.hpp"

namespace chase {

struct JumpProbabilities {
  double infect = 0.0;
  double recover = 0.0;
};

/// Branch probabilities of the embedded jump chain. With s susceptible and r
/// recovered hosts, the aggregate infection rate is lambda*s*i and the
/// aggregate recovery rate is r*i; the infected count cancels in the ratio:
///   P(next jump infects)  = lambda*s / (lambda*s + r)
///   P(next jump recovers) =        r / (lambda*s + r)
inline JumpProbabilities jump_probabilities(std::int64_t s, std::int64_t r,
                                            double lambda) {
  if (s <= 0 || r <= 0)
    throw std::invalid_argument("jump probabilities need s >= 1 and r >= 1");
  const double weight = lambda * static_cast<double>(s);
  const double total = weight + static_cast<double>(r);
  return JumpProbabilities{weight / total, static_cast<double>(r) / total};
}

/// One transition of the embedded chain driven by a uniform draw u in [0, 1).
/// The comparison is strict: u < P(infect) infects, otherwise one infected
/// host recovers. Rejects absorbed states.
inline StateCounts step(const StateCounts& state, double u,
                        const ProcessParams& params) {
  if (is_absorbed(state))
    throw std::invalid_argument("step called on an absorbed state");
  const JumpProbabilities p = jump_probabilities(state.s, state.r, params.lambda);
  if (u < p.infect) return StateCounts{state.s - 1, state.i + 1, state.r};
  return StateCounts{state.s, state.i - 1, state.r + 1};
}

/// Runs the embedded jump chain from (n, 1, 1) to absorption. Realizes only
/// the discrete skeleton, so the record carries no absorption time. The chain
/// stops after at most 2n+1 steps.
inline AbsorptionRecord run_jump_chain(const ProcessParams& params,
                                       SplitMix64& rng) {
  validate(params);
  StateCounts state = initial_state(params);
  AbsorptionRecord record;
  while (!is_absorbed(state)) {
    state = step(state, rng.uniform(), params);
    ++record.jumps;
  }
  record.final = state;
  record.cause = state.s == 0 ? AbsorptionCause::SusceptibleExtinct
                              : AbsorptionCause::InfectedExtinct;
  return record;
}

}  // namespace chase
