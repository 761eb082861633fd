#pragma once

// Exact distributions derived from the fixation line: record probabilities,
// expected depth, hitting times, the law of the number of blocks in the last
// coalescence (finite n and its n -> infinity limit), hitting probabilities
// of the block counting process, and their asymptotics.
//
// Integrals with a weak algebraic singularity at x = 1 are rewritten with
// x = 1 - e^{-v} and integrated over (0, infinity); in that parameterization
// (1-x)^(alpha-2) becomes plain exponential decay and stays accurate in
// double precision even for alpha close to 1.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coalesce/quadrature.hpp"
#include "coalesce/rates.hpp"
#include "coalesce/renewal.hpp"

namespace coalesce {

// Requested quantity has no finite limit (the coalescent stays infinite).
class stays_infinite_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct DiscreteDistribution {
  std::int64_t support_start = 2;
  std::vector<double> probabilities;
  double truncation_mass = 0.0;  // mass beyond the computed support

  double at(std::int64_t j) const {
    return probabilities[std::size_t(j - support_start)];
  }
  std::int64_t support_end() const {
    return support_start + std::int64_t(probabilities.size()) - 1;
  }
};

struct HittingProfile {
  std::optional<std::int64_t> n;  // empty = n -> infinity limit
  std::int64_t j_min = 2;
  std::vector<double> values;

  double at(std::int64_t j) const { return values[std::size_t(j - j_min)]; }
};

namespace detail {

// log(1-x) from whichever of (x, 1-x) is the accurate one at this end.
inline double log_one_minus(double x, double xc) {
  return x < 0.5 ? std::log1p(-x) : std::log(xc);
}

// Natural log of a small positive integer in __float128, via
// ln m = k ln2 + 2 atanh((r-1)/(r+1)) with m = r 2^k, r in [1,2).
// Needed because the alternating binomial-log sums below cancel past
// double precision already around j = 25.
inline __float128 ln_f128(std::uint64_t m) {
  static const __float128 kLn2 = [] {
    // 2 atanh(1/3)
    const __float128 z = __float128(1) / __float128(3);
    const __float128 z2 = z * z;
    __float128 term = z, acc = 0;
    for (int i = 1; i < 120; i += 2) {
      acc += term / __float128(i);
      term *= z2;
    }
    return 2 * acc;
  }();
  int k = 0;
  std::uint64_t p = 1;
  while ((m >> 1) >= p) {
    p <<= 1;
    ++k;
  }
  const __float128 r = __float128(m) / __float128(p);
  const __float128 z = (r - 1) / (r + 1);
  const __float128 z2 = z * z;
  __float128 term = z, acc = 0;
  for (int i = 1; i < 140; i += 2) {
    acc += term / __float128(i);
    term *= z2;
  }
  return __float128(k) * kLn2 + 2 * acc;
}

// Signed product prod_{m=1..j-1} (m - alpha)/m, which equals
// (-1)^(j-1) * C(alpha-1, j-1).  Negative for alpha in (1,2), positive below.
inline double signed_binomial_product(double alpha, std::int64_t j) {
  double p = 1.0;
  for (std::int64_t m = 1; m <= j - 1; ++m) {
    p *= (double(m) - alpha) / double(m);
  }
  return p;
}

// int_0^inf (1-e^{-v})^{j-1} e^{-v} g(v) dv with the power evaluated through
// log1p for stability at large j.
template <typename G>
double power_weighted_integral(std::int64_t j, const G& g, double tol) {
  return integrate_0inf(
             [&](double v) {
               const double lx = std::log1p(-std::exp(-v));  // log(1-e^-v)
               return std::exp(double(j - 1) * lx - v) * g(v);
             },
             tol)
      .value;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

// P(i is a record) = u_{i-2} * alpha Gamma(alpha) Gamma(i-1) / Gamma(i-1+alpha)
// for i >= 3; the integer 2 is a record almost surely.
inline std::vector<double> record_prob_table(double alpha, std::int64_t i_max) {
  if (i_max < 2) throw std::domain_error("record_prob_table: i_max >= 2");
  const auto u = beta_renewal_sequence(alpha, std::size_t(i_max - 2));
  std::vector<double> out(std::size_t(i_max + 1), 0.0);
  double factor = 1.0;  // alpha Gamma(alpha) Gamma(i-1) / Gamma(i-1+alpha), i=2
  for (std::int64_t i = 2; i <= i_max; ++i) {
    out[std::size_t(i)] = (i == 2) ? 1.0 : u[std::size_t(i - 2)] * factor;
    factor *= double(i - 1) / (double(i - 1) + alpha);
  }
  return out;
}

inline double record_prob(double alpha, std::int64_t i) {
  if (i < 2) throw std::domain_error("record_prob: i must be >= 2");
  if (i == 2) return 1.0;
  return record_prob_table(alpha, i)[std::size_t(i)];
}

// Expected depth of the coalescent started from infinitely many blocks,
// finite exactly when alpha is in (1,2).
inline double expected_depth(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::domain_error("expected_depth: alpha must be in (0,2)");
  }
  if (alpha <= 1.0) {
    throw stays_infinite_error(
        "expected_depth: the expected depth diverges for alpha <= 1");
  }
  const double b = alpha - 1.0;
  const auto res = integrate_0inf(
      [&](double v) {
        const double num = -std::expm1(-v);       // 1 - e^-v
        const double den = -std::expm1(-b * v);   // 1 - e^{-(alpha-1)v}
        return num * std::exp(-b * v) / den;
      },
      1e-12);
  return alpha * b * res.value;
}

// Generating function sum_{i>=2} P(i in record set) s^i.
// Evaluated directly from the closed integral forms; s = 1 is allowed for
// alpha in (1,2) where it equals the expected depth, and reports +infinity
// for alpha <= 1.
inline double record_gf(double alpha, double s) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::domain_error("record_gf: alpha must be in (0,2)");
  }
  if (!(s >= 0.0) || s > 1.0) {
    throw std::domain_error("record_gf: s must be in [0,1]");
  }
  if (s == 0.0) return 0.0;
  if (s == 1.0) {
    if (alpha <= 1.0) return std::numeric_limits<double>::infinity();
    return expected_depth(alpha);
  }
  if (alpha == 1.0) {
    const auto res = integrate_01(
        [&](double x) {
          const double u = s * x;
          return -x / ((1.0 - u) * std::log1p(-u));
        },
        1e-11);
    return s * s * s * res.value;
  }
  const double a = alpha;
  const auto res = integrate_01(
      [&](double x, double xc) {
        const double u = s * x;
        // (1-u)^alpha - (1-u) = (1-u) * ((1-u)^(alpha-1) - 1)
        const double den = (1.0 - u) * std::expm1((a - 1.0) * std::log1p(-u));
        return x * std::pow(xc, a - 1.0) / den;
      },
      1e-11);
  return a * (1.0 - a) * s * s * s * res.value;
}

// ---------------------------------------------------------------------------
// Hitting times of the fixation line / partial depths
// ---------------------------------------------------------------------------

namespace detail {

// E(alpha_j^n) for all j = 1..n at once (index j; entry n is 0).
// Beta route: occupancy of level i is u_{i-j}, holding rate Lambda_{i+1}.
inline std::vector<double> hitting_time_profile_beta(double alpha,
                                                     std::int64_t n) {
  const auto u = beta_renewal_sequence(
      alpha, n >= 2 ? std::size_t(n - 2) : std::size_t(0));
  std::vector<double> inv_total(std::size_t(n + 1), 0.0);
  double lam = 1.0;  // Lambda_2
  for (std::int64_t i = 2; i <= n; ++i) {
    inv_total[std::size_t(i)] = 1.0 / lam;
    lam *= (double(i) - 1.0 + alpha) / (double(i) - 1.0);
  }
  std::vector<double> e(std::size_t(n + 1), 0.0);
  for (std::int64_t j = 1; j <= n - 1; ++j) {
    double acc = 0.0;
    for (std::int64_t i = n - 1; i >= j; --i) {
      acc += u[std::size_t(i - j)] * inv_total[std::size_t(i + 1)];
    }
    e[std::size_t(j)] = acc;
  }
  return e;
}

// Generic route: forward DP over the fixation-line jump chain, jumps past
// the target level are absorbed.
inline std::vector<double> hitting_time_profile_generic(
    const LambdaMeasure& m, std::int64_t n) {
  std::vector<double> inv_total(std::size_t(n + 1), 0.0);
  for (std::int64_t i = 2; i <= n; ++i) {
    inv_total[std::size_t(i)] = 1.0 / total_rate(m, i);
  }
  // jump probability i -> i+d of the embedded fixation chain
  std::vector<std::vector<double>> jump(static_cast<std::size_t>(n));
  for (std::int64_t i = 1; i <= n - 1; ++i) {
    auto& row = jump[std::size_t(i)];
    row.resize(std::size_t(n - i), 0.0);
    const double total = 1.0 / inv_total[std::size_t(i + 1)];
    for (std::int64_t d = 1; i + d <= n - 1; ++d) {
      row[std::size_t(d)] = fixation_rate(m, i, i + d) / total;
    }
  }
  std::vector<double> e(std::size_t(n + 1), 0.0);
  std::vector<double> occ(std::size_t(n), 0.0);
  for (std::int64_t j = 1; j <= n - 1; ++j) {
    std::fill(occ.begin(), occ.end(), 0.0);
    occ[std::size_t(j)] = 1.0;
    double acc = 0.0;
    for (std::int64_t i = j; i <= n - 1; ++i) {
      const double o = occ[std::size_t(i)];
      if (o == 0.0) continue;
      acc += o * inv_total[std::size_t(i + 1)];
      const auto& row = jump[std::size_t(i)];
      for (std::int64_t d = 1; i + d <= n - 1; ++d) {
        occ[std::size_t(i + d)] += o * row[std::size_t(d)];
      }
    }
    e[std::size_t(j)] = acc;
  }
  return e;
}

inline std::vector<double> hitting_time_profile(const LambdaMeasure& m,
                                                std::int64_t n) {
  if (n < 1) throw std::domain_error("hitting_time_profile: n must be >= 1");
  if (m.is_beta()) return hitting_time_profile_beta(m.alpha(), n);
  return hitting_time_profile_generic(m, n);
}

}  // namespace detail

// Expected time for the fixation line started at j to reach level >= n;
// equal in law to the time for the block counting process from n to reach
// <= j blocks.
inline double expected_hitting_time(const LambdaMeasure& m, std::int64_t j,
                                    std::int64_t n) {
  if (j < 1 || n < j) {
    throw std::domain_error("expected_hitting_time: need 1 <= j <= n");
  }
  if (j == n) return 0.0;
  return detail::hitting_time_profile(m, n)[std::size_t(j)];
}

// ---------------------------------------------------------------------------
// Last coalescence, finite n
// ---------------------------------------------------------------------------

// Law of the number of blocks involved in the last coalescence of the
// n-coalescent: P^n_{1j} = Lambda_{j,1} (E(alpha_{j-1}^n) - E(alpha_j^n)).
inline DiscreteDistribution last_coalescence_finite(const LambdaMeasure& m,
                                                    std::int64_t n) {
  if (n < 2) throw std::domain_error("last_coalescence_finite: n must be >= 2");
  DiscreteDistribution dist;
  dist.support_start = 2;
  dist.probabilities.resize(std::size_t(n - 1), 0.0);
  if (n == 2) {
    dist.probabilities[0] = 1.0;
    return dist;
  }
  const auto e = detail::hitting_time_profile(m, n);
  if (m.is_beta()) {
    const double a = m.alpha();
    double lam_j1 = 1.0;  // Lambda_{2,1}; ratio (j-alpha)/j upward
    for (std::int64_t j = 2; j <= n; ++j) {
      dist.probabilities[std::size_t(j - 2)] =
          lam_j1 * (e[std::size_t(j - 1)] - e[std::size_t(j)]);
      lam_j1 *= (double(j) - a) / double(j);
    }
  } else {
    for (std::int64_t j = 2; j <= n; ++j) {
      dist.probabilities[std::size_t(j - 2)] =
          block_rate(m, j, 1) * (e[std::size_t(j - 1)] - e[std::size_t(j)]);
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Last coalescence, n -> infinity limit (Beta family)
// ---------------------------------------------------------------------------

// Alternating binomial-log form of the limit law at alpha = 1:
//   P_{1j} = (1/(j-1)) sum_{k=1..j-1} C(j-1,k) (-1)^(k+1) log(k+1).
// The sum cancels catastrophically in double precision (the terms reach
// ~2e11 at j = 40 while the value is ~2e-4), so it is accumulated in
// __float128.  Usable as stated up to j = 64 where C(j-1,k) still fits in
// a 64-bit integer.
inline double last_coalescence_limit_alt_sum(std::int64_t j) {
  if (j < 2 || j > 64) {
    throw std::domain_error(
        "last_coalescence_limit_alt_sum: j must be in [2,64]");
  }
  std::vector<std::uint64_t> binom(std::size_t(j), 0);
  binom[0] = 1;
  for (std::int64_t row = 1; row <= j - 1; ++row) {
    for (std::int64_t k = row; k >= 1; --k) {
      binom[std::size_t(k)] += binom[std::size_t(k - 1)];
    }
  }
  __float128 acc = 0;
  for (std::int64_t k = 1; k <= j - 1; ++k) {
    const __float128 term =
        __float128(binom[std::size_t(k)]) * detail::ln_f128(std::uint64_t(k + 1));
    acc += (k % 2 == 1) ? term : -term;
  }
  return double(acc / __float128(j - 1));
}

// Limit law of the number of blocks in the last coalescence.
// alpha = 1 uses the alternating sum up to the cancellation threshold and
// the integral form beyond it; alpha != 1 uses
//   P_{1j} = alpha * prod_{m<j} ((m-alpha)/m) * int x^{j-1}/(1-(1-x)^(1-alpha)) dx.
inline double last_coalescence_limit(double alpha, std::int64_t j,
                                     std::int64_t alt_sum_threshold = 40) {
  if (j < 2) throw std::domain_error("last_coalescence_limit: j must be >= 2");
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::domain_error("last_coalescence_limit: alpha must be in (0,2)");
  }
  if (alpha == 1.0) {
    if (j <= alt_sum_threshold) return last_coalescence_limit_alt_sum(j);
    const double integral = detail::power_weighted_integral(
        j, [](double v) { return 1.0 / v; }, 1e-12);
    return integral / double(j - 1);
  }
  const double b = alpha - 1.0;
  const double integral = detail::power_weighted_integral(
      j,
      [&](double v) {
        // 1 / (1 - (1-x)^(1-alpha)) = 1 / (1 - e^{(alpha-1)v})
        return 1.0 / (-std::expm1(b * v));
      },
      1e-12);
  return alpha * detail::signed_binomial_product(alpha, j) * integral;
}

namespace detail {

// Tail mass sum_{j > j_max} P_{1j} of the limit law, computed as a single
// integral of the series remainder rather than by subtracting partial sums.
inline double last_coalescence_tail_mass(double alpha, std::int64_t j_max) {
  if (alpha == 1.0) {
    // remainder of -log(1-x) = sum x^m / m after m = j_max - 1 terms
    auto remainder = [&](double x, double xc) {
      const double L = -detail::log_one_minus(x, xc);
      if (x < 0.5) {
        double term = std::pow(x, double(j_max)) / double(j_max);
        double acc = 0.0;
        for (std::int64_t mm = j_max;; ++mm) {
          acc += term;
          term *= x * double(mm) / double(mm + 1);
          if (term < 1e-18 * (acc + 1e-300)) break;
        }
        return acc / L;
      }
      double s = 0.0;
      for (std::int64_t mm = j_max - 1; mm >= 1; --mm) {
        s = s * x + 1.0 / double(mm);
      }
      s *= x;
      return 1.0 - s / L;
    };
    return integrate_01(remainder, 1e-10).value;
  }
  const double b = alpha - 1.0;
  // remainder of (1-x)^(alpha-1) - 1 = sum_{m>=1} c_m x^m with
  // c_m = prod_{r<=m} ((r-alpha)/r); all terms share the sign of (1-alpha)
  // and the ratio c_{m+1}/c_m = (m+1-alpha)/(m+1).
  auto remainder = [&](double x, double xc) {
    const double lx = log_one_minus(x, xc);
    const double den = -std::expm1(-b * lx);  // 1-(1-x)^(1-alpha)
    if (x < 0.5) {
      double term = signed_binomial_product(alpha, j_max + 1) *
                    std::pow(x, double(j_max));
      double acc = 0.0;
      for (std::int64_t mm = j_max;; ++mm) {
        acc += term;
        term *= x * (double(mm) + 1.0 - alpha) / (double(mm) + 1.0);
        if (std::abs(term) < 1e-18 * (std::abs(acc) + 1e-300)) break;
      }
      return alpha * acc / den;
    }
    double partial = 0.0;
    double term = 1.0;
    for (std::int64_t mm = 1; mm <= j_max - 1; ++mm) {
      term *= x * (double(mm) - alpha) / double(mm);
      partial += term;
    }
    const double full = std::expm1(b * lx);  // (1-x)^(alpha-1) - 1
    return alpha * (full - partial) / den;
  };
  return integrate_01(remainder, 1e-10).value;
}

}  // namespace detail

inline DiscreteDistribution last_coalescence_limit_table(double alpha,
                                                         std::int64_t j_max) {
  if (j_max < 2) {
    throw std::domain_error("last_coalescence_limit_table: j_max must be >= 2");
  }
  DiscreteDistribution dist;
  dist.support_start = 2;
  dist.probabilities.resize(std::size_t(j_max - 1));
  for (std::int64_t j = 2; j <= j_max; ++j) {
    dist.probabilities[std::size_t(j - 2)] = last_coalescence_limit(alpha, j);
  }
  dist.truncation_mass = detail::last_coalescence_tail_mass(alpha, j_max);
  return dist;
}

// Generating function of the limit law, sum_{j>=2} P_{1j} s^j.
inline double last_coalescence_gf(double alpha, double s) {
  if (!(s >= 0.0) || s > 1.0) {
    throw std::domain_error("last_coalescence_gf: s must be in [0,1]");
  }
  if (s == 0.0) return 0.0;
  // 1 - s x evaluated through the complement so the s = 1 endpoint stays
  // accurate where x rounds to 1
  auto log_one_minus_sx = [s](double x, double xc) {
    const double u = s * x;
    return u < 0.5 ? std::log1p(-u) : std::log(xc + (1.0 - s) * x);
  };
  if (alpha == 1.0) {
    // s * int log(1-sx)/log(1-x) dx
    const auto res = integrate_01(
        [&](double x, double xc) {
          return log_one_minus_sx(x, xc) / detail::log_one_minus(x, xc);
        },
        1e-11);
    return s * res.value;
  }
  const double b = 1.0 - alpha;
  const auto res = integrate_01(
      [&](double x, double xc) {
        const double den = -std::expm1(b * detail::log_one_minus(x, xc));
        const double num = std::expm1(-b * log_one_minus_sx(x, xc));
        return num / den;
      },
      1e-11);
  return alpha * s * res.value;
}

// ---------------------------------------------------------------------------
// Hitting probabilities of the block counting process
// ---------------------------------------------------------------------------

// lim_n P(j in range of the block counting process from n), Beta family.
inline double hitting_prob_limit(double alpha, std::int64_t j) {
  if (j < 2) throw std::domain_error("hitting_prob_limit: j must be >= 2");
  if (alpha == 1.0) {
    const double integral = detail::power_weighted_integral(
        j, [](double v) { return 1.0 / v; }, 1e-12);
    return double(j - 1) * integral;
  }
  const double b = alpha - 1.0;
  const double integral = detail::power_weighted_integral(
      j,
      [&](double v) { return (-b) / (-std::expm1(b * v)); },
      1e-12);
  return std::exp(std::lgamma(double(j) - 1.0 + alpha) -
                  std::lgamma(double(j) - 1.0) - std::lgamma(alpha)) *
         integral;
}

// P(j in range) for the finite n-coalescent via the reversal identity
// P(j in range) = P^n_{1j} / P_{j1}.
inline HittingProfile hitting_profile_finite(const LambdaMeasure& m,
                                             std::int64_t n) {
  if (n < 2) throw std::domain_error("hitting_profile_finite: n must be >= 2");
  const auto last = last_coalescence_finite(m, n);
  HittingProfile prof;
  prof.n = n;
  prof.j_min = 2;
  prof.values.resize(std::size_t(n - 1));
  for (std::int64_t j = 2; j <= n; ++j) {
    if (j == n) {
      prof.values[std::size_t(j - 2)] = 1.0;  // the chain starts there
      continue;
    }
    const double p_j1 = block_rate(m, j, 1) / total_rate(m, j);
    prof.values[std::size_t(j - 2)] = last.at(j) / p_j1;
  }
  return prof;
}

inline double hitting_prob_finite(const LambdaMeasure& m, std::int64_t n,
                                  std::int64_t j) {
  if (j < 2 || j > n) {
    throw std::domain_error("hitting_prob_finite: need 2 <= j <= n");
  }
  if (j == n) return 1.0;
  return hitting_profile_finite(m, n).at(j);
}

// Transition probability of the time-reversed block counting chain,
// P~^n_{ij} = P(j in range) P_{ji} / P(i in range), normalized so each row
// over j > i is a probability vector.  i = 1 recovers the last-coalescence
// law.
inline double reversed_transition(const LambdaMeasure& m, std::int64_t n,
                                  std::int64_t i, std::int64_t j) {
  if (i < 1 || j <= i || j > n) {
    throw std::domain_error("reversed_transition: need 1 <= i < j <= n");
  }
  const auto prof = hitting_profile_finite(m, n);
  const double p_i = (i == 1) ? 1.0 : prof.at(i);
  const double p_ji = block_rate(m, j, i) / total_rate(m, j);
  return prof.at(j) * p_ji / p_i;
}

// Large-j behaviour of the limiting hitting probability.
inline double hitting_asymptote(double alpha, std::int64_t j) {
  if (j < 2) throw std::domain_error("hitting_asymptote: j must be >= 2");
  if (alpha > 1.0) return alpha - 1.0;
  if (alpha == 1.0) return 1.0 / std::log(double(j));
  return (1.0 - alpha) / std::tgamma(alpha) *
         std::pow(double(j), alpha - 1.0);
}

}  // namespace coalesce
