// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "chase_escape/clocks.hpp"
#include "chase_escape/jump_chain.hpp"
#include "chase_escape/params.hpp"
#include "chase_escape/poisson_embedding.hpp"
#include "chase_escape/rng.hpp"

namespace chase {

/// Three exact samplers of the absorption law. They realize the same
/// distribution through different constructions, which makes them mutual
/// cross-checks: a bug in one of them shows up as a distributional gap
/// against the other two.
enum class SamplerMethod {
  JumpChain,         // embedded discrete chain; no absorption time
  DirectClocks,      // paired exponential clock race
  PoissonEmbedding,  // gamma endpoint + descending order statistics
};

inline AbsorptionRecord run_sampler(const ProcessParams& params,
                                    SplitMix64& rng, SamplerMethod method) {
  switch (method) {
    case SamplerMethod::JumpChain:
      return run_jump_chain(params, rng);
    case SamplerMethod::DirectClocks:
      return run_coupled_direct(params, rng);
    case SamplerMethod::PoissonEmbedding:
      return run_coupled_embedding(params, rng);
  }
  throw std::logic_error("unknown sampler method");
}

/// Clock-construction entry point: composes the chosen clock sampler with
/// the absorption read-off. Restricted to the two continuous-time methods;
/// the embedded chain has its own runner.
inline AbsorptionRecord run_coupled(const ProcessParams& params,
                                    SplitMix64& rng, SamplerMethod method) {
  if (method == SamplerMethod::JumpChain)
    throw std::invalid_argument("run_coupled requires a clock-based method");
  return run_sampler(params, rng, method);
}

inline const char* sampler_name(SamplerMethod method) {
  switch (method) {
    case SamplerMethod::JumpChain: return "jump";
    case SamplerMethod::DirectClocks: return "clocks";
    case SamplerMethod::PoissonEmbedding: return "poisson";
  }
  return "?";
}

inline SamplerMethod parse_sampler(const std::string& name) {
  if (name == "jump") return SamplerMethod::JumpChain;
  if (name == "clocks") return SamplerMethod::DirectClocks;
  if (name == "poisson") return SamplerMethod::PoissonEmbedding;
  throw std::invalid_argument("unknown sampler: " + name);
}

}  // namespace chase
