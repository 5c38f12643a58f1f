// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "chase_escape/special_functions.hpp"

namespace chase {

/// Sorted copy of a sample with its first two moments.
struct EmpiricalSummary {
  std::vector<double> sorted_sample;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single point
  std::size_t count = 0;
};

inline EmpiricalSummary summarize_sample(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::sort(values.begin(), values.end());
  EmpiricalSummary summary;
  summary.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  summary.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) {
    const double d = v - summary.mean;
    ss += d * d;
  }
  summary.variance = values.size() > 1
                         ? ss / static_cast<double>(values.size() - 1)
                         : 0.0;
  summary.sorted_sample = std::move(values);
  return summary;
}

/// sup_x |F_n(x) - F(x)| against a right-continuous model CDF: at each sorted
/// point both the post-jump gap i/n - F(x_i) and the pre-jump gap
/// F(x_i) - (i-1)/n are checked, which handles atoms in F correctly.
inline double ks_one_sample(const EmpiricalSummary& sample,
                            const std::function<double(double)>& model_cdf) {
  const double n = static_cast<double>(sample.count);
  double stat = 0.0;
  for (std::size_t i = 0; i < sample.count; ++i) {
    const double f = model_cdf(sample.sorted_sample[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    stat = std::max({stat, hi, lo});
  }
  return stat;
}

/// sup_x |F_m(x) - G_n(x)| over the merged support.
inline double ks_two_sample(const EmpiricalSummary& a,
                            const EmpiricalSummary& b) {
  const double inv_a = 1.0 / static_cast<double>(a.count);
  const double inv_b = 1.0 / static_cast<double>(b.count);
  std::size_t ia = 0;
  std::size_t ib = 0;
  double fa = 0.0;
  double fb = 0.0;
  double stat = 0.0;
  while (ia < a.count || ib < b.count) {
    const double next_a = ia < a.count ? a.sorted_sample[ia]
                                       : std::numeric_limits<double>::infinity();
    const double next_b = ib < b.count ? b.sorted_sample[ib]
                                       : std::numeric_limits<double>::infinity();
    const double x = std::min(next_a, next_b);
    while (ia < a.count && a.sorted_sample[ia] == x) {
      ++ia;
      fa += inv_a;
    }
    while (ib < b.count && b.sorted_sample[ib] == x) {
      ++ib;
      fb += inv_b;
    }
    stat = std::max(stat, std::abs(fa - fb));
  }
  return stat;
}

/// Asymptotic KS rejection threshold at significance 0.01 for two samples;
/// the one-argument overload covers the one-sample test. Conservative for
/// discrete data.
inline double ks_critical_value_01(std::size_t m, std::size_t n) {
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return 1.628 * std::sqrt((dm + dn) / (dm * dn));
}

inline double ks_critical_value_01(std::size_t n) {
  return 1.628 / std::sqrt(static_cast<double>(n));
}

/// Total variation distance (1/2) sum |p_i - q_i| between two distributions
/// given as sparse maps over a shared ordered support. Both must sum to 1.
template <typename Key>
inline double tv_distance_discrete(const std::map<Key, double>& p,
                                   const std::map<Key, double>& q) {
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (const auto& [k, v] : p) sum_p += v;
  for (const auto& [k, v] : q) sum_q += v;
  if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9)
    throw std::invalid_argument("tv_distance: inputs must be distributions");
  double total = 0.0;
  auto it_p = p.begin();
  auto it_q = q.begin();
  while (it_p != p.end() && it_q != q.end()) {
    if (it_p->first < it_q->first) {
      total += std::abs(it_p->second);
      ++it_p;
    } else if (it_q->first < it_p->first) {
      total += std::abs(it_q->second);
      ++it_q;
    } else {
      total += std::abs(it_p->second - it_q->second);
      ++it_p;
      ++it_q;
    }
  }
  for (; it_p != p.end(); ++it_p) total += std::abs(it_p->second);
  for (; it_q != q.end(); ++it_q) total += std::abs(it_q->second);
  return 0.5 * total;
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t pooled_cells = 0;  // cells actually tested after pooling
};

/// Goodness of fit of observed counts against cell probabilities scaled by
/// the sample total. Cells whose expected count falls below 5 are pooled
/// into a single shared tail cell first; if that tail cell itself stays
/// below 5 it is merged into the last regular cell.
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected_probability,
                                      double total) {
  if (observed.size() != expected_probability.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: mismatched cells");
  if (!(total > 0.0)) throw std::invalid_argument("chi_square_gof: empty sample");
  std::vector<double> obs;
  std::vector<double> exp;
  double pool_obs = 0.0;
  double pool_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected_probability[i] < 0.0)
      throw std::invalid_argument("chi_square_gof: negative probability");
    const double expected = expected_probability[i] * total;
    if (expected < 5.0) {
      pool_obs += observed[i];
      pool_exp += expected;
    } else {
      obs.push_back(observed[i]);
      exp.push_back(expected);
    }
  }
  if (pool_exp > 0.0) {
    if (pool_exp >= 5.0 || obs.empty()) {
      obs.push_back(pool_obs);
      exp.push_back(pool_exp);
    } else {
      obs.back() += pool_obs;
      exp.back() += pool_exp;
    }
  }
  if (obs.size() < 2)
    throw std::invalid_argument(
        "chi_square_gof: fewer than two cells after pooling");
  ChiSquareResult result;
  result.pooled_cells = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    result.statistic += d * d / exp[i];
  }
  result.dof = obs.size() - 1;
  result.p_value = chi_square_sf(result.statistic, static_cast<int>(result.dof));
  return result;
}

struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Normal-approximation confidence interval mean +- z * sqrt(variance/count).
inline MeanInterval mean_ci(const EmpiricalSummary& sample, double z) {
  if (sample.count < 2)
    throw std::invalid_argument("mean_ci needs at least two observations");
  MeanInterval ci;
  ci.mean = sample.mean;
  ci.half_width =
      z * std::sqrt(sample.variance / static_cast<double>(sample.count));
  ci.lower = ci.mean - ci.half_width;
  ci.upper = ci.mean + ci.half_width;
  return ci;
}

}  // namespace chase
