// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chase_escape/ensemble.hpp"
#include "chase_escape/exact_law.hpp"
#include "chase_escape/limit_laws.hpp"
#include "chase_escape/params.hpp"
#include "chase_escape/poisson_embedding.hpp"
#include "chase_escape/quadrature.hpp"
#include "chase_escape/sampler.hpp"
#include "chase_escape/stats.hpp"

namespace chase {

/*
 * Verification harness. `Quick` runs the exact-oracle and sampler-agreement
 * checks at small n; `Full` adds every asymptotic acceptance check at its
 * contractual scale. Tolerances are fixed constants recorded in each row:
 * where only a limit statement exists, the band is 3-4 standard errors plus
 * an explicit finite-size allowance, noted in the row's detail text.
 *
 * Reports are pure functions of (level, master_seed): no timing, worker
 * count, or scheduling information enters a row, so any two invocations with
 * equal seeds render identical reports regardless of parallelism.
 */

enum class VerifyLevel { Quick, Full };

struct CheckResult {
  int criterion = 0;  // acceptance criterion number; 0 = module invariant
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  std::string detail;
};

struct VerifyReport {
  VerifyLevel level = VerifyLevel::Quick;
  std::uint64_t master_seed = 0;
  std::vector<CheckResult> checks;

  int failures() const {
    int count = 0;
    for (const auto& check : checks)
      if (!check.passed) ++count;
    return count;
  }
};

namespace verify_detail {

inline std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

inline CheckResult in_range(int criterion, std::string name, double measured,
                            double lo, double hi, std::string detail = "") {
  CheckResult check;
  check.criterion = criterion;
  check.name = std::move(name);
  check.measured = measured;
  check.bound_lo = lo;
  check.bound_hi = hi;
  check.passed = std::isfinite(measured) && measured >= lo && measured <= hi;
  check.detail = std::move(detail);
  return check;
}

/// Seed for one sub-experiment, decorrelated from every other salt.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  return SplitMix64::for_replica(master, salt)();
}

using StateKey = std::array<std::int64_t, 3>;

inline std::map<StateKey, double> exact_law_map(const ExactLaw& law) {
  std::map<StateKey, double> map;
  for (const auto& [state, probability] : law.outcomes)
    map[{state.s, state.i, state.r}] += probability;
  return map;
}

inline std::map<StateKey, double> empirical_state_map(
    const EnsembleSummary& summary) {
  if (summary.sample_stride != 1)
    throw std::logic_error("empirical law needs every replica retained");
  std::map<StateKey, double> map;
  const double weight = 1.0 / static_cast<double>(summary.replicas);
  for (const AbsorptionRecord& record : summary.samples)
    map[{record.final.s, record.final.i, record.final.r}] += weight;
  return map;
}

inline std::map<std::int64_t, double> normalized_histogram(
    const std::map<std::int64_t, std::uint64_t>& histogram,
    std::uint64_t total) {
  std::map<std::int64_t, double> map;
  for (const auto& [key, count] : histogram)
    map[key] = static_cast<double>(count) / static_cast<double>(total);
  return map;
}

/// Fraction of replicas with histogram key <= threshold.
inline double histogram_cdf(const std::map<std::int64_t, std::uint64_t>& hist,
                            std::int64_t threshold, std::uint64_t total) {
  std::uint64_t below = 0;
  for (const auto& [key, count] : hist) {
    if (key > threshold) break;
    below += count;
  }
  return static_cast<double>(below) / static_cast<double>(total);
}

template <class Projector>
EmpiricalSummary project_samples(const std::vector<AbsorptionRecord>& samples,
                                 Projector&& projector) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const AbsorptionRecord& record : samples)
    values.push_back(projector(record));
  return summarize_sample(std::move(values));
}

template <class Fn>
void guarded(VerifyReport& report, int criterion, const std::string& label,
             Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& error) {
    CheckResult check;
    check.criterion = criterion;
    check.name = label + "-error";
    check.passed = false;
    check.measured = std::nan("");
    check.detail = error.what();
    report.checks.push_back(std::move(check));
  }
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// Criterion blocks. Each appends named checks to the report; a thrown error
// inside a block becomes a failed row instead of aborting the suite.
// ---------------------------------------------------------------------------

namespace verify_detail {

inline void check_first_jump_law(VerifyReport& report) {
  for (const auto& [n, lambda] : std::vector<std::pair<std::int64_t, double>>{
           {50, 1.7}, {7, 0.3}}) {
    const ExactLaw law = exact_absorption_law({n, lambda});
    const double exact = 1.0 / (lambda * static_cast<double>(n) + 1.0);
    const double mass = law.mass(StateCounts{n, 0, 2});
    report.checks.push_back(in_range(
        1, "first-jump-mass-n" + std::to_string(n), std::abs(mass - exact),
        0.0, 1e-12,
        "closed form " + fmt(exact) + " vs table " + fmt(mass)));
  }
}

/// Oracle equivalence for all three samplers, plus cheap piggybacked checks:
/// DP normalization, and the empirical first-jump frequency band.
inline void check_oracle_equivalence(VerifyReport& report,
                                     std::uint64_t master, unsigned workers) {
  const std::int64_t n = 20;
  const std::uint64_t replicas = 100000;
  std::uint64_t salt = 100;
  for (const double lambda : {0.5, 1.0, 1.5}) {
    const ExactLaw law = exact_absorption_law({n, lambda});
    double total = 0.0;
    for (const auto& [state, probability] : law.outcomes) total += probability;
    report.checks.push_back(in_range(
        0, "exact-law-normalization-lambda" + fmt(lambda),
        std::abs(total - 1.0), 0.0, 1e-12, ""));
    const auto exact_map = exact_law_map(law);
    for (const SamplerMethod method :
         {SamplerMethod::JumpChain, SamplerMethod::DirectClocks,
          SamplerMethod::PoissonEmbedding}) {
      EnsembleConfig config;
      config.params = {n, lambda};
      config.method = method;
      config.replicas = replicas;
      config.master_seed = derive_seed(master, salt++);
      config.workers = workers;
      const EnsembleSummary summary = run_replicas(config);
      const double tv =
          tv_distance_discrete(empirical_state_map(summary), exact_map);
      report.checks.push_back(in_range(
          2,
          std::string("oracle-tv-") + sampler_name(method) + "-lambda" +
              fmt(lambda),
          tv, 0.0, 0.03,
          "final-state law vs table, 1e5 replicas"));
      if (method == SamplerMethod::JumpChain) {
        // First-jump band: exact 1/(lambda*n+1) next to the frequency.
        const double exact = 1.0 / (lambda * static_cast<double>(n) + 1.0);
        std::uint64_t hits = 0;
        for (const AbsorptionRecord& record : summary.samples)
          if (record.final == StateCounts{n, 0, 2}) ++hits;
        const double frequency =
            static_cast<double>(hits) / static_cast<double>(replicas);
        const double band =
            4.0 * std::sqrt(exact * (1.0 - exact) /
                            static_cast<double>(replicas));
        report.checks.push_back(in_range(
            0, "first-jump-frequency-lambda" + fmt(lambda), frequency,
            exact - band, exact + band,
            "exact " + fmt(exact) + ", 4-sigma band " + fmt(band)));
      }
    }
  }
}

inline void check_cross_sampler_ks(VerifyReport& report, std::uint64_t master,
                                   unsigned workers) {
  const std::int64_t n = 100;
  const double lambda = 1.2;
  const std::uint64_t replicas = 10000;
  std::vector<EmpiricalSummary> final_r;
  std::vector<const char*> names;
  std::uint64_t salt = 200;
  for (const SamplerMethod method :
       {SamplerMethod::JumpChain, SamplerMethod::DirectClocks,
        SamplerMethod::PoissonEmbedding}) {
    EnsembleConfig config;
    config.params = {n, lambda};
    config.method = method;
    config.replicas = replicas;
    config.master_seed = derive_seed(master, salt++);
    config.workers = workers;
    const EnsembleSummary summary = run_replicas(config);
    final_r.push_back(project_samples(summary.samples, [](const auto& record) {
      return static_cast<double>(record.final.r);
    }));
    names.push_back(sampler_name(method));
  }
  const double critical = ks_critical_value_01(replicas, replicas);
  for (std::size_t a = 0; a < final_r.size(); ++a)
    for (std::size_t b = a + 1; b < final_r.size(); ++b)
      report.checks.push_back(in_range(
          3,
          std::string("cross-sampler-ks-") + names[a] + "-" + names[b],
          ks_two_sample(final_r[a], final_r[b]), 0.0, critical,
          "two-sample final-r, alpha=0.01"));
}

inline void check_extinction_monotone(VerifyReport& report) {
  const std::int64_t n = 10;
  double previous = -1.0;
  bool monotone = true;
  for (const double lambda : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double probability = exact_extinction_probability({n, lambda});
    if (probability < previous) monotone = false;
    previous = probability;
  }
  report.checks.push_back(in_range(0, "extinction-monotone-in-lambda",
                                   monotone ? 1.0 : 0.0, 1.0, 1.0,
                                   "table sweep at n=10"));
}

inline void check_worker_independence_small(VerifyReport& report,
                                            std::uint64_t master) {
  EnsembleConfig config;
  config.params = {200, 1.1};
  config.method = SamplerMethod::DirectClocks;
  config.replicas = 4096;
  config.master_seed = derive_seed(master, 300);
  config.workers = 1;
  const EnsembleSummary one = run_replicas(config);
  config.workers = 4;
  const EnsembleSummary four = run_replicas(config);
  bool identical =
      one.susceptible_extinct_count == four.susceptible_extinct_count &&
      one.ties_total == four.ties_total &&
      one.final_s_histogram == four.final_s_histogram &&
      one.final_i_histogram == four.final_i_histogram &&
      one.final_r_histogram == four.final_r_histogram &&
      one.sum_s == four.sum_s && one.sum_i == four.sum_i &&
      one.sum_r == four.sum_r && one.sum_s_sq == four.sum_s_sq &&
      one.sum_time == four.sum_time && one.sum_jumps == four.sum_jumps &&
      one.samples.size() == four.samples.size();
  for (std::size_t i = 0; identical && i < one.samples.size(); ++i)
    identical = one.samples[i].final == four.samples[i].final &&
                one.samples[i].cause == four.samples[i].cause &&
                one.samples[i].jumps == four.samples[i].jumps &&
                one.samples[i].time == four.samples[i].time;
  report.checks.push_back(in_range(0, "ensemble-worker-independence",
                                   identical ? 1.0 : 0.0, 1.0, 1.0,
                                   "bitwise summary compare, workers 1 vs 4"));
}

inline void check_extinction_frequencies(VerifyReport& report,
                                         std::uint64_t master,
                                         unsigned workers) {
  struct Case {
    double lambda;
    double lo;
    double hi;
    const char* tag;
  };
  const std::vector<Case> cases = {{1.0, 0.47, 0.53, "critical"},
                                   {0.5, 0.0, 0.05, "subcritical"},
                                   {2.0, 0.95, 1.0, "supercritical"}};
  std::uint64_t salt = 400;
  for (const Case& c : cases) {
    EnsembleConfig config;
    config.params = {10000, c.lambda};
    config.method = SamplerMethod::PoissonEmbedding;
    config.replicas = 10000;
    config.master_seed = derive_seed(master, salt++);
    config.sample_cap = 0;
    config.workers = workers;
    const EnsembleSummary summary = run_replicas(config);
    report.checks.push_back(in_range(
        4, std::string("extinction-frequency-") + c.tag,
        summary.extinction_fraction(), c.lo, c.hi,
        "lambda=" + fmt(c.lambda) + ", n=1e4, 1e4 replicas"));
  }
}

/// Shared critical ensemble: lambda=1, n=1e4, 1e5 replicas. Feeds the
/// geometric-survivor TV check, both scaled-CDF point checks, the atom-mass
/// band, and the critical mean of the recovered count.
inline void check_critical_ensemble(VerifyReport& report, std::uint64_t master,
                                    unsigned workers) {
  const std::int64_t n = 10000;
  EnsembleConfig config;
  config.params = {n, 1.0};
  config.method = SamplerMethod::DirectClocks;
  config.replicas = 100000;
  config.master_seed = derive_seed(master, 500);
  config.workers = workers;
  const EnsembleSummary summary = run_replicas(config);
  const double replicas = static_cast<double>(summary.replicas);

  // Survivor count against the dyadic law, TV over the union support.
  std::map<std::int64_t, double> geometric;
  for (std::int64_t i = 0; i <= 200; ++i) geometric[i] = shifted_geometric_pmf(i);
  const double tv = tv_distance_discrete(
      normalized_histogram(summary.final_s_histogram, summary.replicas),
      geometric);
  report.checks.push_back(in_range(5, "critical-survivor-geometric-tv", tv,
                                   0.0, 0.02, "1e5 replicas at n=1e4"));

  // Recovered-fraction law: F(1/2) = 1/3, atom mass 1/2 at 1.
  const double f_half =
      histogram_cdf(summary.final_r_histogram, n / 2, summary.replicas);
  report.checks.push_back(in_range(
      7, "critical-recovered-cdf-at-half", std::abs(f_half - 1.0 / 3.0), 0.0,
      0.02, "empirical F(0.5)=" + fmt(f_half) + " vs 1/3"));
  std::uint64_t far_right = 0;
  for (const auto& [key, count] : summary.final_r_histogram)
    if (static_cast<double>(key) > 0.99 * static_cast<double>(n))
      far_right += count;
  report.checks.push_back(in_range(
      7, "critical-recovered-atom-mass",
      static_cast<double>(far_right) / replicas, 0.45, 0.55,
      "mass of r/n > 0.99; limit atom carries 1/2"));

  // Infected-fraction mirror: F(1/2) = 2/3.
  const double f_i_half =
      histogram_cdf(summary.final_i_histogram, n / 2, summary.replicas);
  report.checks.push_back(in_range(
      7, "critical-infected-cdf-at-half", std::abs(f_i_half - 2.0 / 3.0), 0.0,
      0.02, "empirical F(0.5)=" + fmt(f_i_half) + " vs 2/3"));

  // Critical mean of the recovered count: E[R]/n in ln 2 +- 5%.
  const double mean_ratio = summary.mean_final_r() / static_cast<double>(n);
  const double target = std::log(2.0);
  report.checks.push_back(in_range(
      9, "mean-recovered-critical", mean_ratio, target * 0.95, target * 1.05,
      "E[r]/n vs ln 2 = " + fmt(target)));
}

inline void check_subcritical_survivor_scaling(VerifyReport& report,
                                               std::uint64_t master,
                                               unsigned workers) {
  const std::int64_t n = 100000;
  const double lambda = 0.5;
  EnsembleConfig config;
  config.params = {n, lambda};
  config.method = SamplerMethod::DirectClocks;
  config.replicas = 2000;
  config.master_seed = derive_seed(master, 600);
  config.workers = workers;
  const EnsembleSummary summary = run_replicas(config);
  const double scale = std::pow(static_cast<double>(n), 1.0 - lambda);
  const EmpiricalSummary sample =
      project_samples(summary.samples, [scale](const auto& record) {
        return static_cast<double>(record.final.s) / scale;
      });
  const double ks = ks_one_sample(sample, [lambda](double x) {
    return powered_exponential_cdf(x, lambda);
  });
  report.checks.push_back(in_range(
      6, "subcritical-survivor-scaling-ks", ks, 0.0, 0.08,
      "s/sqrt(n) vs limit CDF; band covers finite-size bias"));
}

inline void check_supercritical_recovered_scaling(VerifyReport& report,
                                                  std::uint64_t master,
                                                  unsigned workers) {
  const std::int64_t n = 100000;
  const double lambda = 2.0;
  EnsembleConfig config;
  config.params = {n, lambda};
  config.method = SamplerMethod::PoissonEmbedding;
  config.replicas = 2000;
  config.master_seed = derive_seed(master, 700);
  config.workers = workers;
  const EnsembleSummary summary = run_replicas(config);
  const double scale = std::pow(static_cast<double>(n), 1.0 / lambda);
  const EmpiricalSummary sample =
      project_samples(summary.samples, [scale](const auto& record) {
        return static_cast<double>(record.final.r) / scale;
      });
  const double ks = ks_one_sample(sample, [lambda](double u) {
    return compound_exponential_cdf(u, lambda, 1e-8);
  });
  report.checks.push_back(in_range(
      8, "supercritical-recovered-scaling-ks", ks, 0.0, 0.08,
      "r/sqrt(n) vs quadrature CDF"));
  // Mean of the limit law is Gamma(1 - 1/lambda) = sqrt(pi) at lambda = 2.
  const double limit_mean = std::tgamma(1.0 - 1.0 / lambda);
  report.checks.push_back(in_range(
      8, "supercritical-recovered-mean", sample.mean, limit_mean * 0.9,
      limit_mean * 1.1,
      "mean(r)/sqrt(n) vs " + fmt(limit_mean) + " +- 10%"));
}

inline void check_moment_asymptotics(VerifyReport& report,
                                     std::uint64_t master, unsigned workers) {
  // Subcritical survivor mean: E[s]/n^(1-lambda) near Gamma(1+lambda).
  const std::int64_t n = 100000;
  const double lambda = 0.5;
  EnsembleConfig config;
  config.params = {n, lambda};
  config.method = SamplerMethod::DirectClocks;
  config.replicas = 10000;
  config.master_seed = derive_seed(master, 800);
  config.sample_cap = 0;
  config.workers = workers;
  const EnsembleSummary summary = run_replicas(config);
  const double scaled =
      summary.mean_final_s() / std::pow(static_cast<double>(n), 1.0 - lambda);
  const double target = std::tgamma(1.0 + lambda);
  report.checks.push_back(in_range(
      9, "mean-survivors-subcritical", scaled, target * 0.9, target * 1.1,
      "E[s]/sqrt(n) vs Gamma(1.5) = " + fmt(target) + " +- 10%"));

  // Balance-point outbreak mean: exact table expectation, no sampling noise.
  const ExactMeans means = exact_final_means({n, lambda});
  report.checks.push_back(in_range(
      9, "mean-outbreak-balance-point", means.mean_i, 0.6, 1.4,
      "exact E[i] at lambda=1/2, n=1e5 (windowed table)"));
}

inline void check_outbreak_growth_slope(VerifyReport& report,
                                        std::uint64_t master,
                                        unsigned workers) {
  const double lambda = 0.7;
  std::vector<double> sizes = {1e3, 1e4, 1e5};
  std::vector<double> means;
  std::uint64_t salt = 900;
  std::ostringstream trace;
  for (const double size : sizes) {
    EnsembleConfig config;
    config.params = {static_cast<std::int64_t>(size), lambda};
    config.method = SamplerMethod::DirectClocks;
    config.replicas = 10000;
    config.master_seed = derive_seed(master, salt++);
    config.sample_cap = 0;
    config.workers = workers;
    const EnsembleSummary summary = run_replicas(config);
    means.push_back(summary.mean_final_i());
    trace << " n=" << fmt(size) << ":" << fmt(means.back());
  }
  const double slope = log_log_slope(sizes, means);
  const double target = 2.0 - 1.0 / lambda;
  report.checks.push_back(in_range(
      10, "outbreak-growth-slope", slope, target - 0.1, target + 0.1,
      "log-log slope of E[i] vs n;" + trace.str()));
}

inline void check_race_probability_slope(VerifyReport& report,
                                         std::uint64_t master) {
  const double lambda = 0.75;
  const std::uint64_t draws = 100000;
  std::vector<double> sizes = {1e3, 1e4, 1e5};
  std::vector<double> frequencies;
  std::uint64_t salt = 1000;
  std::ostringstream trace;
  for (const double size : sizes) {
    const ProcessParams params{static_cast<std::int64_t>(size), lambda};
    const std::uint64_t seed = derive_seed(master, salt++);
    std::uint64_t wins = 0;
    for (std::uint64_t i = 0; i < draws; ++i) {
      SplitMix64 rng = SplitMix64::for_replica(seed, i);
      if (infection_clock_wins_endpoint(params, rng)) ++wins;
    }
    frequencies.push_back(static_cast<double>(wins) /
                          static_cast<double>(draws));
    trace << " n=" << fmt(size) << ":" << fmt(frequencies.back());
  }
  const double slope = log_log_slope(sizes, frequencies);
  const double target = 1.0 - 1.0 / lambda;
  report.checks.push_back(in_range(
      11, "race-probability-slope", slope, target - 0.1, target + 0.1,
      "gamma-endpoint race draws;" + trace.str()));
}

inline void check_law_self_tests(VerifyReport& report, std::uint64_t master) {
  const std::size_t draws = 100000;
  const double ks_critical = ks_critical_value_01(draws);
  std::uint64_t salt = 1100;

  // Powered exponential, two regimes of the exponent.
  for (const double lambda : {0.5, 2.0}) {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    std::vector<double> values(draws);
    for (double& v : values) v = powered_exponential_sample(lambda, rng);
    const double ks =
        ks_one_sample(summarize_sample(std::move(values)), [lambda](double x) {
          return powered_exponential_cdf(x, lambda);
        });
    report.checks.push_back(in_range(
        12, "self-test-powered-exp-ks-lambda" + fmt(lambda), ks, 0.0,
        ks_critical, "1e5 draws vs own CDF"));
  }

  // Compound exponential: sampler vs quadrature CDF.
  for (const double lambda : {1.5, 2.0, 3.0}) {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    std::vector<double> values(draws);
    for (double& v : values) v = compound_exponential_sample(lambda, rng);
    const double ks =
        ks_one_sample(summarize_sample(std::move(values)), [lambda](double u) {
          return compound_exponential_cdf(u, lambda, 1e-8);
        });
    report.checks.push_back(in_range(
        12, "self-test-compound-ks-lambda" + fmt(lambda), ks, 0.0, ks_critical,
        "1e5 draws vs quadrature CDF"));
  }

  // Discrete survivor laws: chi-square over the first 20 support points.
  {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    std::vector<double> observed(21, 0.0);
    std::vector<double> probability(21, 0.0);
    for (std::size_t i = 0; i < draws; ++i) {
      const std::int64_t value = shifted_geometric_sample(rng);
      ++observed[static_cast<std::size_t>(std::min<std::int64_t>(value, 20))];
    }
    for (std::int64_t i = 0; i < 20; ++i)
      probability[static_cast<std::size_t>(i)] = shifted_geometric_pmf(i);
    probability[20] = 1.0 - shifted_geometric_cdf(19);
    const ChiSquareResult chi =
        chi_square_gof(observed, probability, static_cast<double>(draws));
    report.checks.push_back(in_range(12, "self-test-geometric-chisq",
                                     chi.p_value, 0.01, 1.0,
                                     "chi-square p-value, 20 cells + tail"));
  }
  {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    std::vector<double> observed(21, 0.0);
    std::vector<double> probability(21, 0.0);
    for (std::size_t i = 0; i < draws; ++i) {
      const std::int64_t value = positive_geometric_sample(rng);
      ++observed[static_cast<std::size_t>(std::min<std::int64_t>(value - 1, 20))];
    }
    for (std::int64_t i = 1; i <= 20; ++i)
      probability[static_cast<std::size_t>(i - 1)] = positive_geometric_pmf(i);
    probability[20] = 1.0 - positive_geometric_cdf(20);
    const ChiSquareResult chi =
        chi_square_gof(observed, probability, static_cast<double>(draws));
    report.checks.push_back(in_range(12, "self-test-positive-geometric-chisq",
                                     chi.p_value, 0.01, 1.0,
                                     "chi-square p-value, 20 cells + tail"));
  }

  // Mixture laws: the atom is its own cell, the density is split into
  // equal-probability quantile bins (a KS statistic degenerates at atoms).
  {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    constexpr int kBins = 8;
    std::vector<double> observed(kBins + 1, 0.0);
    std::vector<double> probability(kBins + 1, 1.0 / (2.0 * kBins));
    probability[kBins] = 0.5;  // atom at 1
    std::vector<double> edges(kBins + 1);
    for (int j = 0; j <= kBins; ++j)
      edges[static_cast<std::size_t>(j)] =
          critical_r_mixture_quantile(0.5 * j / kBins);
    for (std::size_t i = 0; i < draws; ++i) {
      const double x = critical_r_mixture_sample(rng);
      if (x == 1.0) {
        ++observed[kBins];
        continue;
      }
      const int bin = static_cast<int>(
          std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1);
      ++observed[static_cast<std::size_t>(std::clamp(bin, 0, kBins - 1))];
    }
    const ChiSquareResult chi =
        chi_square_gof(observed, probability, static_cast<double>(draws));
    report.checks.push_back(in_range(12, "self-test-critical-r-chisq",
                                     chi.p_value, 0.01, 1.0,
                                     "atom cell + 8 quantile bins"));
  }
  {
    SplitMix64 rng = SplitMix64::for_replica(master, salt++);
    constexpr int kBins = 8;
    std::vector<double> observed(kBins + 1, 0.0);
    std::vector<double> probability(kBins + 1, 1.0 / (2.0 * kBins));
    probability[0] = 0.5;  // atom at 0
    std::vector<double> edges(kBins + 1);
    for (int j = 0; j <= kBins; ++j)
      edges[static_cast<std::size_t>(j)] =
          critical_i_law_quantile(0.5 + 0.5 * j / kBins);
    for (std::size_t i = 0; i < draws; ++i) {
      const double x = critical_i_law_sample(rng);
      if (x == 0.0) {
        ++observed[0];
        continue;
      }
      const int bin = static_cast<int>(
          std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1);
      ++observed[static_cast<std::size_t>(std::clamp(bin, 0, kBins - 1)) + 1];
    }
    const ChiSquareResult chi =
        chi_square_gof(observed, probability, static_cast<double>(draws));
    report.checks.push_back(in_range(12, "self-test-critical-i-chisq",
                                     chi.p_value, 0.01, 1.0,
                                     "atom cell + 8 quantile bins"));
  }

  // First moment against the numeric tail integral of the quadrature CDF:
  // integrate the survival function to u = 200, then add the three-term
  // power-law tail. Fully independent of the gamma-product formula.
  for (const double lambda : {1.5, 2.0, 3.0}) {
    const double cut = 200.0;
    const double body = integrate_or_throw(
        [lambda](double u) {
          return compound_exponential_survival(u, lambda, 1e-12);
        },
        0.0, cut, 5e-7);
    const double tail =
        std::tgamma(lambda + 1.0) * std::pow(cut, 1.0 - lambda) /
            (lambda - 1.0) -
        lambda * std::tgamma(2.0 * lambda) * std::pow(cut, 1.0 - 2.0 * lambda) /
            (2.0 * lambda - 1.0) +
        lambda * std::tgamma(3.0 * lambda) * std::pow(cut, 1.0 - 3.0 * lambda) /
            (2.0 * (3.0 * lambda - 1.0));
    const double numeric = body + tail;
    const double formula = compound_exponential_moment(1.0, lambda);
    const double relative = std::abs(numeric - formula) / formula;
    report.checks.push_back(in_range(
        12, "compound-mean-vs-tail-integral-lambda" + fmt(lambda), relative,
        0.0, 1e-6,
        "formula " + fmt(formula) + " vs integral " + fmt(numeric)));
  }
}

}  // namespace verify_detail

inline std::string render_verify_report(const VerifyReport& report);

inline VerifyReport run_verify_suite(VerifyLevel level,
                                     std::uint64_t master_seed,
                                     unsigned workers = 0) {
  using namespace verify_detail;
  VerifyReport report;
  report.level = level;
  report.master_seed = master_seed;

  guarded(report, 1, "first-jump-law",
          [&] { check_first_jump_law(report); });
  guarded(report, 2, "oracle-equivalence",
          [&] { check_oracle_equivalence(report, master_seed, workers); });
  guarded(report, 3, "cross-sampler",
          [&] { check_cross_sampler_ks(report, master_seed, workers); });
  guarded(report, 0, "extinction-monotone",
          [&] { check_extinction_monotone(report); });
  guarded(report, 0, "worker-independence",
          [&] { check_worker_independence_small(report, master_seed); });

  if (level == VerifyLevel::Full) {
    guarded(report, 4, "extinction-frequency", [&] {
      check_extinction_frequencies(report, master_seed, workers);
    });
    guarded(report, 5, "critical-ensemble",
            [&] { check_critical_ensemble(report, master_seed, workers); });
    guarded(report, 6, "subcritical-survivor", [&] {
      check_subcritical_survivor_scaling(report, master_seed, workers);
    });
    guarded(report, 8, "supercritical-recovered", [&] {
      check_supercritical_recovered_scaling(report, master_seed, workers);
    });
    guarded(report, 9, "moment-asymptotics",
            [&] { check_moment_asymptotics(report, master_seed, workers); });
    guarded(report, 10, "outbreak-growth",
            [&] { check_outbreak_growth_slope(report, master_seed, workers); });
    guarded(report, 11, "race-probability",
            [&] { check_race_probability_slope(report, master_seed); });
    guarded(report, 12, "law-self-tests",
            [&] { check_law_self_tests(report, master_seed); });
    guarded(report, 13, "report-determinism", [&] {
      const VerifyReport one = run_verify_suite(VerifyLevel::Quick, master_seed, 1);
      const VerifyReport four = run_verify_suite(VerifyLevel::Quick, master_seed, 4);
      const bool identical =
          render_verify_report(one) == render_verify_report(four);
      report.checks.push_back(verify_detail::in_range(
          13, "report-worker-independence", identical ? 1.0 : 0.0, 1.0, 1.0,
          "quick suite rendered identically with workers 1 and 4"));
    });
  }
  return report;
}

inline std::string render_verify_report(const VerifyReport& report) {
  std::ostringstream out;
  out << "verification report (level="
      << (report.level == VerifyLevel::Quick ? "quick" : "full")
      << ", seed=" << report.master_seed << ")\n";
  for (const CheckResult& check : report.checks) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-42s c%-2d %s  measured=%.9g  bounds=[%.9g, %.9g]",
                  check.name.c_str(), check.criterion,
                  check.passed ? "PASS" : "FAIL", check.measured,
                  check.bound_lo, check.bound_hi);
    out << line;
    if (!check.detail.empty()) out << "  | " << check.detail;
    out << '\n';
  }
  out << (report.failures() == 0 ? "all checks passed"
                                 : std::to_string(report.failures()) +
                                       " check(s) failed")
      << '\n';
  return out.str();
}

}  // namespace chase
