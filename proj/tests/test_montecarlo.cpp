// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chase_escape/ensemble.hpp"
#include "chase_escape/exact_law.hpp"
#include "chase_escape/rng.hpp"
#include "chase_escape/sampler.hpp"
#include "chase_escape/stats.hpp"

using namespace chase;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool records_equal(const AbsorptionRecord& a, const AbsorptionRecord& b) {
  return a.final == b.final && a.cause == b.cause && a.jumps == b.jumps &&
         a.time == b.time && a.ties == b.ties;
}

bool summaries_equal(const EnsembleSummary& a, const EnsembleSummary& b) {
  if (a.replicas != b.replicas ||
      a.susceptible_extinct_count != b.susceptible_extinct_count ||
      a.infected_extinct_count != b.infected_extinct_count ||
      a.ties_total != b.ties_total || a.sum_s != b.sum_s ||
      a.sum_s_sq != b.sum_s_sq || a.sum_i != b.sum_i ||
      a.sum_i_sq != b.sum_i_sq || a.sum_r != b.sum_r ||
      a.sum_r_sq != b.sum_r_sq || a.sum_jumps != b.sum_jumps ||
      a.sum_time != b.sum_time || a.sum_time_sq != b.sum_time_sq ||
      a.time_count != b.time_count || a.sample_stride != b.sample_stride)
    return false;
  if (a.final_s_histogram != b.final_s_histogram ||
      a.final_i_histogram != b.final_i_histogram ||
      a.final_r_histogram != b.final_r_histogram)
    return false;
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    if (!records_equal(a.samples[k], b.samples[k])) return false;
  return true;
}

}  // namespace

TEST_CASE("ensembles are bit-identical across worker counts", "[ensemble]") {
  EnsembleConfig config;
  config.params = ProcessParams{30, 1.2};
  config.replicas = 5000;
  config.master_seed = 42;

  config.workers = 1;
  const EnsembleSummary serial = run_replicas(config);
  config.workers = 4;
  const EnsembleSummary threaded = run_replicas(config);
  CHECK(summaries_equal(serial, threaded));

  const EnsembleSummary repeat = run_replicas(config);
  CHECK(summaries_equal(threaded, repeat));

  config.master_seed = 43;
  const EnsembleSummary reseeded = run_replicas(config);
  CHECK(serial.sum_time != reseeded.sum_time);
}

TEST_CASE("sample retention follows the configured stride", "[ensemble]") {
  EnsembleConfig config;
  config.params = ProcessParams{8, 1.0};
  config.replicas = 10000;
  config.master_seed = 7;
  config.workers = 1;

  config.sample_cap = 10000;  // stride one: every record kept
  const EnsembleSummary full = run_replicas(config);
  REQUIRE(full.sample_stride == 1);
  REQUIRE(full.samples.size() == 10000);

  config.sample_cap = 100;
  const EnsembleSummary capped = run_replicas(config);
  CHECK(capped.sample_stride == 100);
  REQUIRE(capped.samples.size() == 100);
  for (const std::size_t k : {std::size_t{0}, std::size_t{13}, std::size_t{57},
                              std::size_t{99}})
    CHECK(records_equal(capped.samples[k], full.samples[100 * k]));

  config.replicas = 101;
  const EnsembleSummary uneven = run_replicas(config);
  CHECK(uneven.sample_stride == 2);  // ceil(101/100): replicas 0, 2, ..., 100
  CHECK(uneven.samples.size() == 51);

  config.sample_cap = 0;
  const EnsembleSummary none = run_replicas(config);
  CHECK(none.sample_stride == 0);
  CHECK(none.samples.empty());
}

TEST_CASE("single-host ensembles absorb in one jump", "[ensemble]") {
  EnsembleConfig config;
  config.params = ProcessParams{1, 1.0};
  config.replicas = 100000;
  config.master_seed = 3;
  config.sample_cap = 0;
  config.workers = 1;

  const EnsembleSummary summary = run_replicas(config);
  CHECK(summary.susceptible_extinct_count + summary.infected_extinct_count ==
        summary.replicas);
  // Both absorbing moves happen on the first jump, so the mean is exact.
  CHECK(summary.mean_jumps() == 1.0);
  CHECK(summary.time_count == summary.replicas);
  // P(infection first) = lambda / (lambda + 1) = 1/2; four-sigma band.
  CHECK_THAT(summary.extinction_fraction(), WithinAbs(0.5, 0.0064));
  for (const auto& [value, count] : summary.final_s_histogram)
    CHECK((value == 0 || value == 1));
  for (const auto& [value, count] : summary.final_i_histogram)
    CHECK((value == 0 || value == 2));
}

TEST_CASE("ensemble statistics bracket the exact law", "[ensemble]") {
  const ProcessParams params{20, 1.5};
  const ExactLaw law = exact_absorption_law(params);

  double mean_r = 0.0;
  double mean_r_sq = 0.0;
  for (const auto& [state, probability] : law.outcomes) {
    const double r = static_cast<double>(state.r);
    mean_r += probability * r;
    mean_r_sq += probability * r * r;
  }
  const double sd_r = std::sqrt(mean_r_sq - mean_r * mean_r);

  EnsembleConfig config;
  config.params = params;
  config.replicas = 20000;
  config.master_seed = 17;
  config.sample_cap = 0;
  config.workers = 1;
  const EnsembleSummary summary = run_replicas(config);

  const double m = static_cast<double>(config.replicas);
  const double p = law.extinction_probability;
  CHECK_THAT(summary.extinction_fraction(),
             WithinAbs(p, 4.0 * std::sqrt(p * (1.0 - p) / m)));
  CHECK_THAT(summary.mean_final_r(), WithinAbs(mean_r, 4.0 * sd_r / std::sqrt(m)));
}

TEST_CASE("jump-chain ensembles carry no clock times", "[ensemble]") {
  EnsembleConfig config;
  config.params = ProcessParams{12, 0.9};
  config.method = SamplerMethod::JumpChain;
  config.replicas = 2000;
  config.master_seed = 5;
  config.sample_cap = 10;
  config.workers = 1;

  const EnsembleSummary summary = run_replicas(config);
  CHECK(summary.time_count == 0);
  CHECK(summary.sum_time == 0.0);
  for (const AbsorptionRecord& record : summary.samples)
    CHECK(!record.time.has_value());
}

TEST_CASE("all samplers agree with the exact law in distribution",
          "[ensemble]") {
  const ProcessParams params{15, 0.8};
  const ExactLaw law = exact_absorption_law(params);
  const std::uint64_t replicas = 30000;

  for (const SamplerMethod method :
       {SamplerMethod::JumpChain, SamplerMethod::DirectClocks,
        SamplerMethod::PoissonEmbedding}) {
    EnsembleConfig config;
    config.params = params;
    config.method = method;
    config.replicas = replicas;
    config.master_seed = 23 + static_cast<std::uint64_t>(method);
    config.sample_cap = replicas;
    config.workers = 1;
    const EnsembleSummary summary = run_replicas(config);
    REQUIRE(summary.samples.size() == replicas);

    std::map<std::int64_t, std::uint64_t> joint;
    for (const AbsorptionRecord& record : summary.samples)
      ++joint[record.final.s * 100 + record.final.i];

    std::map<std::int64_t, double> expected;
    for (const auto& [state, probability] : law.outcomes)
      expected[state.s * 100 + state.i] = probability;
    std::map<std::int64_t, double> observed;
    for (const auto& [key, count] : joint)
      observed[key] =
          static_cast<double>(count) / static_cast<double>(replicas);
    CHECK(tv_distance_discrete(observed, expected) < 0.03);
  }
}

TEST_CASE("log-log slope recovers power-law exponents", "[ensemble]") {
  const std::vector<double> xs{10.0, 100.0, 1000.0};
  std::vector<double> ys;
  for (const double x : xs) ys.push_back(3.7 * std::pow(x, -1.0 / 3.0));
  CHECK_THAT(log_log_slope(xs, ys), WithinAbs(-1.0 / 3.0, 1e-12));
  CHECK_THAT(log_log_slope({2.0, 4.0}, {8.0, 32.0}), WithinRel(2.0, 1e-12));
  CHECK_THROWS_AS(log_log_slope({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(log_log_slope({1.0, -2.0}, {1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(log_log_slope({1.0, 2.0}, {1.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("worker count resolution", "[ensemble]") {
  const char* prior = std::getenv("CHASE_ESCAPE_THREADS");
  const std::optional<std::string> saved =
      prior ? std::optional<std::string>(prior) : std::nullopt;

  setenv("CHASE_ESCAPE_THREADS", "7", 1);
  CHECK(resolve_worker_count(3) == 3);  // explicit request wins
  CHECK(resolve_worker_count(0) == 7);

  setenv("CHASE_ESCAPE_THREADS", "5", 1);
  CHECK(resolve_worker_count() == 5);

  setenv("CHASE_ESCAPE_THREADS", "abc", 1);
  CHECK_THROWS_AS(resolve_worker_count(), std::invalid_argument);
  setenv("CHASE_ESCAPE_THREADS", "0", 1);
  CHECK_THROWS_AS(resolve_worker_count(), std::invalid_argument);
  setenv("CHASE_ESCAPE_THREADS", "5x", 1);
  CHECK_THROWS_AS(resolve_worker_count(), std::invalid_argument);

  unsetenv("CHASE_ESCAPE_THREADS");
  CHECK(resolve_worker_count() >= 1);

  if (saved)
    setenv("CHASE_ESCAPE_THREADS", saved->c_str(), 1);
  else
    unsetenv("CHASE_ESCAPE_THREADS");
}

TEST_CASE("ensembles reject bad configurations", "[ensemble]") {
  EnsembleConfig config;
  config.params = ProcessParams{10, 1.0};
  config.replicas = 0;
  config.master_seed = 1;
  CHECK_THROWS_AS(run_replicas(config), std::invalid_argument);

  config.replicas = 10;
  config.params.n = 0;
  CHECK_THROWS_AS(run_replicas(config), std::invalid_argument);
}

TEST_CASE("splittable stream behaves like its distributions", "[rng]") {
  SECTION("repeatability and stream independence") {
    SplitMix64 a(99);
    SplitMix64 b(99);
    for (int k = 0; k < 100; ++k) CHECK(a() == b());

    SplitMix64 r0 = SplitMix64::for_replica(5, 0);
    SplitMix64 r0_again = SplitMix64::for_replica(5, 0);
    SplitMix64 r1 = SplitMix64::for_replica(5, 1);
    SplitMix64 other_master = SplitMix64::for_replica(6, 0);
    bool differs_by_index = false;
    bool differs_by_master = false;
    for (int k = 0; k < 8; ++k) {
      const std::uint64_t base = r0();
      CHECK(base == r0_again());
      differs_by_index |= base != r1();
      differs_by_master |= base != other_master();
    }
    CHECK(differs_by_index);
    CHECK(differs_by_master);
  }

  SECTION("uniform moments and range") {
    SplitMix64 rng(31);
    const int draws = 100000;
    double sum = 0.0;
    bool in_range = true;
    for (int k = 0; k < draws; ++k) {
      const double u = rng.uniform();
      in_range = in_range && u >= 0.0 && u < 1.0;
      sum += u;
    }
    CHECK(in_range);
    CHECK_THAT(sum / draws, WithinAbs(0.5, 0.004));
  }

  SECTION("exponential and gamma moments") {
    SplitMix64 rng(32);
    const int draws = 100000;
    double sum_exp = 0.0;
    double sum_gamma = 0.0;
    for (int k = 0; k < draws; ++k) {
      sum_exp += rng.exponential(2.0);
      sum_gamma += rng.gamma(4.5);
    }
    CHECK_THAT(sum_exp / draws, WithinAbs(0.5, 0.0063));
    CHECK_THAT(sum_gamma / draws, WithinAbs(4.5, 0.027));
    CHECK_THROWS_AS(rng.gamma(0.5), std::invalid_argument);
  }
}
