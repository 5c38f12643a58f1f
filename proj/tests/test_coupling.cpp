// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chase_escape/clocks.hpp"
#include "chase_escape/exact_law.hpp"
#include "chase_escape/poisson_embedding.hpp"
#include "chase_escape/rng.hpp"
#include "chase_escape/sampler.hpp"
#include "chase_escape/stats.hpp"

using namespace chase;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("absorption from fixed clock paths", "[clocks]") {
  const ProcessParams params{3, 1.0};
  ClockPaths paths;

  SECTION("immediate undercut ends the outbreak at once") {
    paths.infection_times = {1.0, 2.0, 3.0};
    paths.recovery_times = {0.5};
    const AbsorptionRecord record = absorb_from_clocks(paths, params);
    CHECK(record.cause == AbsorptionCause::InfectedExtinct);
    CHECK(record.final == StateCounts{3, 0, 2});
    CHECK(record.jumps == 1);
    REQUIRE(record.time.has_value());
    CHECK_THAT(*record.time, WithinAbs(0.5, 1e-15));
    CHECK(record.ties == 0);
  }

  SECTION("undercut at the last index") {
    paths.infection_times = {0.1, 0.2, 0.3};
    paths.recovery_times = {0.15, 0.25, 0.26};
    const AbsorptionRecord record = absorb_from_clocks(paths, params);
    CHECK(record.cause == AbsorptionCause::InfectedExtinct);
    CHECK(record.final == StateCounts{1, 0, 4});
    CHECK(record.jumps == 5);
    REQUIRE(record.time.has_value());
    CHECK_THAT(*record.time, WithinAbs(0.26, 1e-15));
  }

  SECTION("infection clock finishing first sweeps the pool") {
    paths.infection_times = {0.1, 0.2, 0.3};
    paths.recovery_times = {0.15, 0.25, 0.35};
    const AbsorptionRecord record = absorb_from_clocks(paths, params);
    CHECK(record.cause == AbsorptionCause::SusceptibleExtinct);
    CHECK(record.final == StateCounts{0, 2, 3});
    CHECK(record.jumps == 5);
    REQUIRE(record.time.has_value());
    CHECK_THAT(*record.time, WithinAbs(0.3, 1e-15));
  }

  SECTION("ties resolve toward infection and are counted") {
    paths.infection_times = {0.1, 0.2, 0.3};
    paths.recovery_times = {0.1, 0.25, 0.26};
    const AbsorptionRecord record = absorb_from_clocks(paths, params);
    CHECK(record.cause == AbsorptionCause::InfectedExtinct);
    CHECK(record.final == StateCounts{1, 0, 4});
    CHECK(record.ties == 1);
  }

  SECTION("an undecidable prefix is rejected") {
    paths.infection_times = {0.1, 0.2, 0.3};
    paths.recovery_times = {0.15};
    CHECK_THROWS_AS(absorb_from_clocks(paths, params), std::invalid_argument);
  }

  SECTION("infection path length must match n") {
    paths.infection_times = {0.1, 0.2};
    paths.recovery_times = {0.15};
    CHECK_THROWS_AS(absorb_from_clocks(paths, params), std::invalid_argument);
  }
}

TEST_CASE("sampled clock paths are well formed", "[clocks]") {
  const ProcessParams params{40, 1.3};
  SplitMix64 rng(99);
  for (int rep = 0; rep < 300; ++rep) {
    const ClockPaths paths = sample_clock_paths(params, rng);
    REQUIRE(paths.infection_times.size() == 40);
    REQUIRE(!paths.recovery_times.empty());
    CHECK(std::is_sorted(paths.infection_times.begin(),
                         paths.infection_times.end()));
    CHECK(std::is_sorted(paths.recovery_times.begin(),
                         paths.recovery_times.end()));
    CHECK(paths.infection_times.front() > 0.0);
    CHECK(paths.recovery_times.front() > 0.0);
    // The sampled prefix always decides the outcome.
    CHECK_NOTHROW(absorb_from_clocks(paths, params));
  }
}

TEST_CASE("first arrivals carry the jump rates", "[clocks]") {
  const ProcessParams params{40, 1.3};
  SplitMix64 rng(100);
  const int draws = 20000;
  double infection_sum = 0.0;
  double recovery_sum = 0.0;
  for (int rep = 0; rep < draws; ++rep) {
    const ClockPaths paths = sample_clock_paths(params, rng);
    infection_sum += paths.infection_times.front();
    recovery_sum += paths.recovery_times.front();
  }
  // First infection ~ Exp(lambda n), first recovery ~ Exp(1);5 sigma bands.
  const double infection_mean = 1.0 / (1.3 * 40.0);
  CHECK_THAT(infection_sum / draws,
             WithinAbs(infection_mean, 5.0 * infection_mean / std::sqrt(draws)));
  CHECK_THAT(recovery_sum / draws, WithinAbs(1.0, 5.0 / std::sqrt(draws)));
}

TEST_CASE("infection counts by a fixed time are binomial", "[clocks][embedding]") {
  // The i-th arrival is the i-th order statistic of n independent Exp(lambda)
  // alarms, so the count of arrivals by t is Binomial(n, 1 - e^(-lambda t)).
  const std::int64_t n = 20;
  const ProcessParams params{n, 1.3};
  const double t = 0.1;
  const double p = -std::expm1(-params.lambda * t);
  const int draws = 20000;

  std::vector<double> probability(n + 1);
  for (std::int64_t k = 0; k <= n; ++k)
    probability[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                              std::lgamma(n - k + 1.0) +
                              k * std::log(p) + (n - k) * std::log1p(-p));

  const auto count_upto = [&](const std::vector<double>& times) {
    return std::upper_bound(times.begin(), times.end(), t) - times.begin();
  };

  SECTION("direct exponential increments") {
    SplitMix64 rng(7);
    std::vector<double> observed(n + 1, 0.0);
    for (int rep = 0; rep < draws; ++rep)
      ++observed[count_upto(sample_clock_paths(params, rng).infection_times)];
    const ChiSquareResult gof = chi_square_gof(observed, probability, draws);
    CHECK(gof.p_value > 1e-4);
  }

  SECTION("poisson embedding route") {
    SplitMix64 rng(8);
    std::vector<double> observed(n + 1, 0.0);
    for (int rep = 0; rep < draws; ++rep) {
      const EmbeddingDraw draw = sample_poisson_embedding(params, rng);
      ++observed[count_upto(clocks_from_embedding(draw, params).infection_times)];
    }
    const ChiSquareResult gof = chi_square_gof(observed, probability, draws);
    CHECK(gof.p_value > 1e-4);
  }
}

TEST_CASE("recovery counts by a fixed time are geometric", "[embedding]") {
  // The k-th recovery is the maximum of k unit exponentials, so the count of
  // recoveries by t satisfies P(count >= k) = (1 - e^-t)^k.
  const std::int64_t n = 30;
  const ProcessParams params{n, 0.9};
  const double t = 0.5;
  const double q = -std::expm1(-t);
  const int draws = 20000;

  const int cells = 12;
  std::vector<double> probability(cells + 1);
  for (int k = 0; k < cells; ++k) probability[k] = std::pow(q, k) * (1.0 - q);
  probability[cells] = std::pow(q, cells);  // everything beyond the last cell

  SplitMix64 rng(9);
  std::vector<double> observed(cells + 1, 0.0);
  for (int rep = 0; rep < draws; ++rep) {
    const ClockPaths paths =
        clocks_from_embedding(sample_poisson_embedding(params, rng), params);
    const auto count = std::upper_bound(paths.recovery_times.begin(),
                                        paths.recovery_times.end(), t) -
                       paths.recovery_times.begin();
    ++observed[std::min<std::ptrdiff_t>(count, cells)];
  }
  const ChiSquareResult gof = chi_square_gof(observed, probability, draws);
  CHECK(gof.p_value > 1e-4);
}

TEST_CASE("embedding maps poisson points through the logarithmic clock",
          "[embedding]") {
  EmbeddingDraw draw;
  draw.recovery_terminal = 1.0;
  draw.infection_terminal = 1.0;
  draw.recovery_arrivals = {std::exp(1.0) - 1.0};
  draw.infection_arrivals = {std::exp(2.0) - 1.0};

  const ProcessParams params{1, 2.0};
  const ClockPaths paths = clocks_from_embedding(draw, params);
  REQUIRE(paths.infection_times.size() == 1);
  REQUIRE(paths.recovery_times.size() == 1);
  CHECK_THAT(paths.recovery_times[0], WithinRel(1.0, 1e-12));
  CHECK_THAT(paths.infection_times[0], WithinRel(1.0, 1e-12));

  draw.infection_arrivals.clear();
  CHECK_THROWS_AS(clocks_from_embedding(draw, params), std::invalid_argument);
}

TEST_CASE("first infection time agrees between routes", "[embedding]") {
  const ProcessParams params{50, 1.3};
  const int draws = 10000;
  std::vector<double> direct;
  std::vector<double> embedded;
  direct.reserve(draws);
  embedded.reserve(draws);
  SplitMix64 rng_direct(21);
  SplitMix64 rng_embedded(22);
  for (int rep = 0; rep < draws; ++rep) {
    direct.push_back(sample_clock_paths(params, rng_direct).infection_times.front());
    const EmbeddingDraw draw = sample_poisson_embedding(params, rng_embedded);
    embedded.push_back(
        clocks_from_embedding(draw, params).infection_times.front());
  }
  const double ks = ks_two_sample(summarize_sample(std::move(direct)),
                                  summarize_sample(std::move(embedded)));
  CHECK(ks < ks_critical_value_01(draws, draws));
}

TEST_CASE("materialized race agrees with the clock comparison", "[embedding]") {
  const ProcessParams params{30, 0.8};
  SplitMix64 rng(41);
  for (int rep = 0; rep < 200; ++rep) {
    const EmbeddingDraw draw = sample_poisson_embedding(params, rng);
    const ClockPaths paths = clocks_from_embedding(draw, params);
    const bool wins = paths.infection_times.back() < paths.recovery_times.back();
    CHECK(infection_clock_wins(draw, params) == wins);
  }
}

TEST_CASE("endpoint race frequencies", "[embedding]") {
  SECTION("symmetric at the critical rate") {
    const ProcessParams params{100, 1.0};
    SplitMix64 rng(31);
    const int draws = 20000;
    int wins = 0;
    for (int rep = 0; rep < draws; ++rep)
      wins += infection_clock_wins_endpoint(params, rng) ? 1 : 0;
    CHECK_THAT(wins / static_cast<double>(draws), WithinAbs(0.5, 0.015));
  }

  SECTION("supercritical infection clock dominates") {
    const ProcessParams params{10000, 2.0};
    SplitMix64 rng(32);
    const int draws = 2000;
    int wins = 0;
    for (int rep = 0; rep < draws; ++rep)
      wins += infection_clock_wins_endpoint(params, rng) ? 1 : 0;
    CHECK(wins / static_cast<double>(draws) > 0.98);
  }

  SECTION("subcritical decay matches the asymptote") {
    // P(win) ~ Gamma(1 + 1/lambda) n^(1 - 1/lambda) = Gamma(7/3) / 10 here.
    const ProcessParams params{1000, 0.75};
    SplitMix64 rng(33);
    const int draws = 20000;
    int wins = 0;
    for (int rep = 0; rep < draws; ++rep)
      wins += infection_clock_wins_endpoint(params, rng) ? 1 : 0;
    CHECK_THAT(wins / static_cast<double>(draws),
               WithinAbs(0.11906393487589992, 0.02));
  }
}

TEST_CASE("shared embedding gives monotone sweep times", "[embedding]") {
  // Feeding prefixes of one point configuration through the clock map must
  // give sweep times that grow with the susceptible count.
  SplitMix64 rng(51);
  const EmbeddingDraw full = sample_poisson_embedding({100, 1.1}, rng);
  EmbeddingDraw prefix;
  prefix.recovery_terminal = full.recovery_terminal;
  prefix.infection_terminal = full.infection_terminal;
  double previous = 0.0;
  for (std::int64_t n = 1; n <= 100; ++n) {
    prefix.infection_arrivals.push_back(full.infection_arrivals[n - 1]);
    prefix.recovery_arrivals.push_back(full.recovery_arrivals[n - 1]);
    const ClockPaths paths = clocks_from_embedding(prefix, {n, 1.1});
    const double sweep = paths.infection_times.back();
    CHECK(sweep > previous);
    previous = sweep;
  }
}

TEST_CASE("final recovered count matches the recovery clock prefix",
          "[clocks]") {
  const ProcessParams params{25, 1.0};
  SplitMix64 rng(71);
  for (int rep = 0; rep < 500; ++rep) {
    const ClockPaths paths = sample_clock_paths(params, rng);
    const AbsorptionRecord record = absorb_from_clocks(paths, params);
    const double sweep = paths.infection_times.back();
    const std::int64_t before =
        std::count_if(paths.recovery_times.begin(), paths.recovery_times.end(),
                      [sweep](double value) { return value < sweep; });
    if (record.cause == AbsorptionCause::SusceptibleExtinct)
      CHECK(record.final.r == before + 1);
    else
      CHECK(record.final.r <= before + 1);
  }
}

TEST_CASE("coupled runner records are structurally sound", "[coupling]") {
  const std::vector<ProcessParams> grid = {{5, 0.6}, {12, 1.0}, {9, 2.5}};
  for (const SamplerMethod method :
       {SamplerMethod::DirectClocks, SamplerMethod::PoissonEmbedding}) {
    SplitMix64 rng(81 + static_cast<std::uint64_t>(method));
    for (const ProcessParams& params : grid) {
      for (int rep = 0; rep < 200; ++rep) {
        const AbsorptionRecord record = run_coupled(params, rng, method);
        CHECK(record.final.s + record.final.i + record.final.r ==
              params.n + 2);
        REQUIRE(record.time.has_value());
        CHECK(*record.time > 0.0);
        if (record.cause == AbsorptionCause::SusceptibleExtinct) {
          CHECK(record.final.s == 0);
          CHECK(record.jumps ==
                static_cast<std::uint64_t>(params.n + record.final.r - 1));
        } else {
          CHECK(record.final.i == 0);
          CHECK(record.final.s >= 1);
          CHECK(record.jumps == static_cast<std::uint64_t>(
                                    2 * (params.n - record.final.s) + 1));
        }
      }
    }
  }
}

TEST_CASE("coupled runners reproduce the exact law", "[coupling]") {
  const ProcessParams params{20, 2.0};
  const ExactLaw law = exact_absorption_law(params);
  std::map<std::pair<std::int64_t, std::int64_t>, double> exact;
  for (const auto& [state, probability] : law.outcomes)
    exact[{state.s, state.i}] = probability;

  const int draws = 50000;
  for (const SamplerMethod method :
       {SamplerMethod::DirectClocks, SamplerMethod::PoissonEmbedding}) {
    SplitMix64 rng(91 + static_cast<std::uint64_t>(method));
    std::map<std::pair<std::int64_t, std::int64_t>, double> empirical;
    for (int rep = 0; rep < draws; ++rep) {
      const AbsorptionRecord record = run_coupled(params, rng, method);
      empirical[{record.final.s, record.final.i}] += 1.0 / draws;
    }
    CHECK(tv_distance_discrete(empirical, exact) < 0.03);
  }
}

TEST_CASE("coupled sampling requires a clock method", "[coupling]") {
  SplitMix64 rng(61);
  CHECK_THROWS_AS(run_coupled({5, 1.0}, rng, SamplerMethod::JumpChain),
                  std::invalid_argument);
  CHECK_NOTHROW(run_coupled({5, 1.0}, rng, SamplerMethod::DirectClocks));
}

TEST_CASE("sampler names round-trip", "[sampler]") {
  for (const SamplerMethod method :
       {SamplerMethod::JumpChain, SamplerMethod::DirectClocks,
        SamplerMethod::PoissonEmbedding})
    CHECK(parse_sampler(sampler_name(method)) == method);
  CHECK_THROWS_AS(parse_sampler("bogus"), std::invalid_argument);
}
