// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "chase_escape/quadrature.hpp"
#include "chase_escape/rng.hpp"

namespace chase {

/// Regime boundaries are decided with a relative tolerance so that values
/// computed as e.g. 1.0 - 1e-17 land on the boundary they mean.
inline bool near_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// (sqrt(5)-1)/2: the boundary between the two subcritical regimes of the
/// recovered-count deficit, where survivor and infected contributions to
/// n - E[R] have equal polynomial order.
inline const double kGoldenRegimeBoundary = 0.5 * (std::sqrt(5.0) - 1.0);

/// Limit of the probability that the infection sweeps the graph: 0, 1/2, 1
/// for lambda below, at, above 1.
inline double limiting_extinction_probability(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (near_equal(lambda, 1.0)) return 0.5;
  return lambda < 1.0 ? 0.0 : 1.0;
}

// ---------------------------------------------------------------------------
// Powered exponential: the law of Exp(1)^lambda. Limit of the rescaled
// survivor count s / n^(1-lambda) in the subcritical regime, and of the
// recovered deficit (n - r) / n^(1-lambda).
// ---------------------------------------------------------------------------

inline double powered_exponential_cdf(double x, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x, 1.0 / lambda));
}

inline double powered_exponential_pdf(double x, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (x <= 0.0) return 0.0;
  const double root = std::pow(x, 1.0 / lambda);
  return root / (lambda * x) * std::exp(-root);
}

inline double powered_exponential_quantile(double q, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(q >= 0.0 && q < 1.0))
    throw std::invalid_argument("quantile needs q in [0, 1)");
  return std::pow(-std::log1p(-q), lambda);
}

inline double powered_exponential_sample(double lambda, SplitMix64& rng) {
  return std::pow(rng.exponential(1.0), lambda);
}

// ---------------------------------------------------------------------------
// Critical survivor laws. At lambda = 1 the survivor count converges without
// rescaling to G with P(G = i) = 2^-(i+1) on {0, 1, ...}; conditioned on the
// infection not sweeping, to G' with P(G' = i) = 2^-i on {1, 2, ...}.
// Masses are exact dyadics.
// ---------------------------------------------------------------------------

inline double shifted_geometric_pmf(std::int64_t i) {
  if (i < 0) return 0.0;
  return i >= 1074 ? 0.0 : std::ldexp(1.0, -static_cast<int>(i) - 1);
}

inline double shifted_geometric_cdf(std::int64_t i) {
  if (i < 0) return 0.0;
  return i >= 1074 ? 1.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(i) - 1);
}

/// Count of trailing zeros of a uniform word: P(count = i) = 2^-(i+1).
inline std::int64_t shifted_geometric_sample(SplitMix64& rng) {
  std::int64_t total = 0;
  for (;;) {
    const std::uint64_t word = rng();
    if (word != 0) {
      int low = 0;
      while (((word >> low) & 1ull) == 0ull) ++low;
      return total + low;
    }
    total += 64;
  }
}

inline double positive_geometric_pmf(std::int64_t i) {
  return i < 1 ? 0.0 : shifted_geometric_pmf(i - 1);
}

inline double positive_geometric_cdf(std::int64_t i) {
  return i < 1 ? 0.0 : shifted_geometric_cdf(i - 1);
}

inline std::int64_t positive_geometric_sample(SplitMix64& rng) {
  return 1 + shifted_geometric_sample(rng);
}

// ---------------------------------------------------------------------------
// Critical recovered mixture: limit of r/n at lambda = 1. Density
// (1+x)^-2 on [0,1) plus an atom of mass 1/2 at 1, so F(x) = x/(1+x) on
// [0,1) and 1 from x = 1 on.
// ---------------------------------------------------------------------------

inline double critical_r_mixture_cdf(double x) {
  if (x < 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x / (1.0 + x);
}

/// Left limit P(X < x); differs from the CDF only across the atom.
inline double critical_r_mixture_cdf_left(double x) {
  if (x <= 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x / (1.0 + x);
}

inline double critical_r_mixture_density(double x) {
  if (x < 0.0 || x >= 1.0) return 0.0;
  return 1.0 / ((1.0 + x) * (1.0 + x));
}

inline constexpr double critical_r_mixture_atom = 1.0;       // location
inline constexpr double critical_r_mixture_atom_mass = 0.5;

inline double critical_r_mixture_quantile(double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile needs q in [0, 1]");
  if (q >= 0.5) return 1.0;
  return q / (1.0 - q);
}

inline double critical_r_mixture_sample(SplitMix64& rng) {
  if (rng.uniform() < 0.5) return 1.0;
  const double q = rng.uniform();  // inverse of the normalized density CDF
  return q / (2.0 - q);
}

// ---------------------------------------------------------------------------
// Critical infected law: limit of i/n at lambda = 1, the mirror of the
// recovered mixture. Atom of mass 1/2 at 0 (outbreaks that die) plus density
// (2-x)^-2 on (0,1], so F(x) = 1/(2-x) on [0,1].
// ---------------------------------------------------------------------------

inline double critical_i_law_cdf(double x) {
  if (x < 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 / (2.0 - x);
}

inline double critical_i_law_cdf_left(double x) {
  if (x <= 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return 1.0 / (2.0 - x);
}

inline double critical_i_law_density(double x) {
  if (x <= 0.0 || x > 1.0) return 0.0;
  return 1.0 / ((2.0 - x) * (2.0 - x));
}

inline constexpr double critical_i_law_atom = 0.0;
inline constexpr double critical_i_law_atom_mass = 0.5;

inline double critical_i_law_quantile(double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile needs q in [0, 1]");
  if (q <= 0.5) return 0.0;
  return 2.0 - 1.0 / q;
}

inline double critical_i_law_sample(SplitMix64& rng) {
  if (rng.uniform() < 0.5) return 0.0;
  const double q = rng.uniform();
  return 2.0 - 2.0 / (1.0 + q);
}

// ---------------------------------------------------------------------------
// Compound exponential: an exponential with independent random rate
// Exp(1)^(1/lambda). Limit of r / n^(1/lambda) in the supercritical regime
// and of the infected deficit (n - i) / n^(1/lambda).
//
//   1 - F(u) = E[exp(-u * E^(1/lambda))] = int_0^inf e^-y e^(-u y^(1/lambda)) dy
//
// The integral is evaluated adaptively. For lambda >= 1 the substitution
// y = t^lambda removes the unbounded derivative of y^(1/lambda) at zero:
//   1 - F(u) = int_0^inf lambda t^(lambda-1) e^(-t^lambda - u t) dt.
// Both forms decay at unit rate or faster, giving exact tail bounds.
// ---------------------------------------------------------------------------

// Both survival and density integrands develop a boundary layer of width
// ~1/u (resp. ~u^-lambda) at the origin as u grows, which blind panel
// subdivision from a fixed interval can step over entirely. Integrating in
// the substituted variable t = v^4 / (1+u) pins that layer at v ~ 1, where
// the first Simpson nodes always land, and lifts the t^(lambda-1) endpoint
// power to v^(4*lambda-1) >= v^3, removing the slow-convergence singularity
// for non-integer lambda.

inline double compound_exponential_survival(double u, double lambda,
                                            double abs_tol = 1e-10) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (u <= 0.0) return 1.0;
  if (lambda < 1.0) {
    const double inv_lambda = 1.0 / lambda;
    const double scale = std::pow(1.0 + u, -lambda);
    const auto integrand = [u, inv_lambda, scale](double v) {
      const double y = scale * v * v * v * v;
      return std::exp(-y - u * std::pow(y, inv_lambda)) *
             4.0 * scale * v * v * v;
    };
    // Tail past Y is at most e^-Y since the u-factor only shrinks it.
    const double y_end = std::max(2.0, std::log(8.0 / abs_tol));
    const double v_end = std::pow(y_end / scale, 0.25);
    double value = integrate_or_throw(integrand, 0.0, 1.0, 0.375 * abs_tol);
    value += integrate_or_throw(integrand, 1.0, v_end, 0.375 * abs_tol);
    return value;
  }
  const double scale = 1.0 / (1.0 + u);
  const auto integrand = [u, lambda, scale](double v) {
    const double t = scale * v * v * v * v;
    return lambda * std::pow(t, lambda - 1.0) *
           std::exp(-std::pow(t, lambda) - u * t) * 4.0 * scale * v * v * v;
  };
  // Exact tail: int_T^inf lambda t^(lambda-1) e^(-t^lambda) dt = e^(-T^lambda).
  const double t_end =
      std::max(2.0, std::pow(std::log(8.0 / abs_tol), 1.0 / lambda));
  const double v_end = std::pow(t_end / scale, 0.25);
  double value = integrate_or_throw(integrand, 0.0, 1.0, 0.375 * abs_tol);
  value += integrate_or_throw(integrand, 1.0, v_end, 0.375 * abs_tol);
  return value;
}

inline double compound_exponential_cdf(double u, double lambda,
                                       double abs_tol = 1e-10) {
  if (u <= 0.0) return 0.0;
  const double survival = compound_exponential_survival(u, lambda, abs_tol);
  return std::min(1.0, std::max(0.0, 1.0 - survival));
}

inline double compound_exponential_pdf(double u, double lambda,
                                       double abs_tol = 1e-10) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (u < 0.0) return 0.0;
  if (lambda < 1.0) {
    const double inv_lambda = 1.0 / lambda;
    const auto density = [u, inv_lambda](double y) {
      return std::pow(y, inv_lambda) *
             std::exp(-y - u * std::pow(y, inv_lambda));
    };
    // Decay rate is >= 1/2 past 2/lambda, so the tail is <= 2 g(Y). The cut
    // is chosen in y-space, where that bound lives, then mapped to v.
    double y_end = std::max({4.0, 2.0 * inv_lambda, std::log(16.0 / abs_tol)});
    while (2.0 * density(y_end) > 0.125 * abs_tol) y_end *= 1.5;
    const double scale = std::pow(1.0 + u, -lambda);
    const auto integrand = [&density, scale](double v) {
      return density(scale * v * v * v * v) * 4.0 * scale * v * v * v;
    };
    const double v_end = std::pow(y_end / scale, 0.25);
    double value = integrate_or_throw(integrand, 0.0, 1.0, 0.375 * abs_tol);
    value += integrate_or_throw(integrand, 1.0, v_end, 0.375 * abs_tol);
    return value;
  }
  const auto density = [u, lambda](double t) {
    return lambda * std::pow(t, lambda) *
           std::exp(-std::pow(t, lambda) - u * t);
  };
  double t_end =
      std::max(4.0, std::pow(std::log(16.0 / abs_tol), 1.0 / lambda));
  while (2.0 * density(t_end) > 0.125 * abs_tol) t_end *= 1.5;
  const double scale = 1.0 / (1.0 + u);
  const auto integrand = [&density, scale](double v) {
    return density(scale * v * v * v * v) * 4.0 * scale * v * v * v;
  };
  const double v_end = std::pow(t_end / scale, 0.25);
  double value = integrate_or_throw(integrand, 0.0, 1.0, 0.375 * abs_tol);
  value += integrate_or_throw(integrand, 1.0, v_end, 0.375 * abs_tol);
  return value;
}

inline double compound_exponential_quantile(double q, double lambda,
                                            double abs_tol = 1e-10) {
  if (!(q >= 0.0 && q < 1.0))
    throw std::invalid_argument("quantile needs q in [0, 1)");
  if (q == 0.0) return 0.0;
  double hi = 1.0;
  while (compound_exponential_cdf(hi, lambda, abs_tol) < q) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("quantile bracket overflow");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (compound_exponential_cdf(mid, lambda, abs_tol) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double compound_exponential_sample(double lambda, SplitMix64& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  double shape_draw = rng.exponential(1.0);
  while (shape_draw == 0.0) shape_draw = rng.exponential(1.0);
  const double rate = std::pow(shape_draw, 1.0 / lambda);
  return rng.exponential(rate);
}

/// E[X^s] = Gamma(1+s) * Gamma(1-s/lambda), finite exactly for -1 < s < lambda.
inline double compound_exponential_moment(double s, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(s > -1.0 && s < lambda))
    throw std::domain_error("moment order must satisfy -1 < s < lambda");
  return std::tgamma(1.0 + s) * std::tgamma(1.0 - s / lambda);
}

/// Leading tail order: P(X > u) ~ Gamma(lambda+1) * u^-lambda as u -> inf.
inline double compound_exponential_tail_asymptote(double u, double lambda) {
  if (!(lambda > 0.0) || !(u > 0.0))
    throw std::invalid_argument("tail asymptote needs lambda > 0 and u > 0");
  return std::tgamma(lambda + 1.0) * std::pow(u, -lambda);
}

// ---------------------------------------------------------------------------
// Leading-order expectation asymptotes for the final counts, per regime.
// ---------------------------------------------------------------------------

enum class FinalQuantity {
  Susceptible,       // E[S]
  RecoveredDeficit,  // n - E[R], subcritical regimes
  Infected,          // E[I]
  Recovered,         // E[R]
  InfectedDeficit,   // n - E[I], supercritical regime
};

struct AsymptoteValue {
  double value = 0.0;
  std::string regime;
};

inline AsymptoteValue expected_final_count_asymptote(FinalQuantity quantity,
                                                     double lambda, double n) {
  if (!(lambda > 0.0) || !(n >= 1.0))
    throw std::invalid_argument("asymptote needs lambda > 0 and n >= 1");
  const bool critical = near_equal(lambda, 1.0);
  switch (quantity) {
    case FinalQuantity::Susceptible:
      if (critical) return {2.0, "critical"};
      if (lambda < 1.0)
        return {std::tgamma(1.0 + lambda) * std::pow(n, 1.0 - lambda),
                "subcritical"};
      return {1.0 / lambda, "supercritical"};
    case FinalQuantity::RecoveredDeficit: {
      if (critical || lambda > 1.0)
        throw std::domain_error(
            "recovered deficit asymptote is a subcritical statement; "
            "use Recovered for lambda >= 1");
      const double survivor = std::tgamma(1.0 + lambda) * std::pow(n, 1.0 - lambda);
      const double infected =
          0.5 * std::tgamma(1.0 + 1.0 / lambda) * std::pow(n, 2.0 - 1.0 / lambda);
      if (near_equal(lambda, kGoldenRegimeBoundary))
        return {survivor + infected, "golden boundary"};
      if (lambda < kGoldenRegimeBoundary) return {survivor, "survivor-dominated"};
      return {infected, "infected-dominated"};
    }
    case FinalQuantity::Infected:
      if (critical) return {(1.0 - std::log(2.0)) * n, "critical"};
      if (lambda > 1.0)
        throw std::domain_error(
            "E[I] grows like n for lambda > 1; use InfectedDeficit");
      if (near_equal(lambda, 0.5)) return {1.0, "balance point"};
      if (lambda < 0.5) return {0.0, "dies out"};
      return {0.5 * std::tgamma(1.0 + 1.0 / lambda) *
                  std::pow(n, 2.0 - 1.0 / lambda),
              "rare-sweep regime"};
    case FinalQuantity::Recovered:
      if (critical) return {std::log(2.0) * n, "critical"};
      if (lambda > 1.0)
        return {std::tgamma(1.0 - 1.0 / lambda) * std::pow(n, 1.0 / lambda),
                "supercritical"};
      throw std::domain_error(
          "E[R] is n minus the deficit for lambda < 1; use RecoveredDeficit");
    case FinalQuantity::InfectedDeficit:
      if (lambda > 1.0 && !critical)
        return {std::tgamma(1.0 - 1.0 / lambda) * std::pow(n, 1.0 / lambda),
                "supercritical"};
      throw std::domain_error(
          "infected deficit asymptote is a supercritical statement");
  }
  throw std::logic_error("unknown quantity");
}

/// P(the infection clock finishes before the n-th recovery) ~
/// Gamma(1+1/lambda) * n^(1-1/lambda) for subcritical lambda: the polynomial
/// decay rate of the clock race. Clipped at 1, where the leading-order value
/// stops being a probability (small n).
inline double race_probability_asymptote(double lambda, double n) {
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  if (!(lambda > 0.0) || lambda >= 1.0 || near_equal(lambda, 1.0))
    throw std::domain_error(
        "race asymptote holds for subcritical lambda in (0, 1) only");
  return std::min(
      1.0, std::tgamma(1.0 + 1.0 / lambda) * std::pow(n, 1.0 - 1.0 / lambda));
}

// ---------------------------------------------------------------------------
// Law registry for dispatch (CLI and the self-test sweep).
// ---------------------------------------------------------------------------

enum class LimitLawKind {
  PoweredExponential,  // parameterized by lambda
  ShiftedGeometric,
  PositiveGeometric,
  CriticalRMixture,
  CriticalILaw,
  CompoundExponential,  // parameterized by lambda
};

inline const char* limit_law_name(LimitLawKind kind) {
  switch (kind) {
    case LimitLawKind::PoweredExponential: return "powered-exp";
    case LimitLawKind::ShiftedGeometric: return "geometric";
    case LimitLawKind::PositiveGeometric: return "positive-geometric";
    case LimitLawKind::CriticalRMixture: return "critical-r";
    case LimitLawKind::CriticalILaw: return "critical-i";
    case LimitLawKind::CompoundExponential: return "compound";
  }
  return "?";
}

inline LimitLawKind parse_limit_law(const std::string& name) {
  if (name == "powered-exp") return LimitLawKind::PoweredExponential;
  if (name == "geometric") return LimitLawKind::ShiftedGeometric;
  if (name == "positive-geometric") return LimitLawKind::PositiveGeometric;
  if (name == "critical-r") return LimitLawKind::CriticalRMixture;
  if (name == "critical-i") return LimitLawKind::CriticalILaw;
  if (name == "compound") return LimitLawKind::CompoundExponential;
  throw std::invalid_argument("unknown limit law: " + name);
}

}  // namespace chase
