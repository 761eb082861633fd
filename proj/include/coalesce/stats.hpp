#pragma once

// Statistical machinery for the exact-vs-empirical comparisons: summary
// statistics, binomial z-scores, the chi-square goodness-of-fit test and
// one/two-sample Kolmogorov-Smirnov tests with asymptotic p-values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace coalesce {

struct SummaryStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1 denominator)

  double std_error() const {
    return n > 1 ? std::sqrt(variance / double(n)) : 0.0;
  }
};

inline SummaryStats summarize(std::span<const double> xs) {
  SummaryStats s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double acc = 0.0;
  for (double x : xs) acc += x;
  s.mean = acc / double(s.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.n > 1 ? ss / double(s.n - 1) : 0.0;
  return s;
}

// z-score of an observed frequency against an exact probability, with the
// standard error taken under the null.
inline double binomial_z(double p_exact, double freq, std::uint64_t n) {
  const double se = std::sqrt(p_exact * (1.0 - p_exact) / double(n));
  return (freq - p_exact) / se;
}

namespace detail {

// Regularized incomplete gamma functions (series + continued fraction).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Q(a, x) = upper regularized incomplete gamma.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi_square_pvalue(double statistic, double df) {
  return gamma_q(df / 2.0, statistic / 2.0);
}

struct ChiSquareTest {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square of observed counts against exact cell probabilities.
// Cells with expected count below min_expected are pooled into the last one.
inline ChiSquareTest chi_square_test(std::span<const std::uint64_t> counts,
                                     std::span<const double> probs,
                                     std::uint64_t total,
                                     double min_expected = 5.0) {
  if (counts.size() != probs.size() || counts.empty()) {
    throw std::domain_error("chi_square_test: size mismatch");
  }
  double stat = 0.0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expect = probs[i] * double(total);
    if (expect < min_expected) {
      pooled_obs += double(counts[i]);
      pooled_exp += expect;
      continue;
    }
    const double diff = double(counts[i]) - expect;
    stat += diff * diff / expect;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++cells;
  }
  ChiSquareTest out;
  out.statistic = stat;
  out.df = double(cells > 1 ? cells - 1 : 1);
  out.p_value = chi_square_pvalue(stat, out.df);
  return out;
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsTest {
  double statistic = 0.0;  // sup-norm distance D
  double p_value = 1.0;
};

// One-sample KS against a continuous CDF.
template <typename Cdf>
KsTest ks_test_one_sample(std::vector<double> xs, const Cdf& cdf) {
  if (xs.empty()) throw std::domain_error("ks_test_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(double(i + 1) / n - f, f - double(i) / n));
  }
  KsTest out;
  out.statistic = d;
  const double sn = std::sqrt(n);
  out.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
  return out;
}

// Two-sample KS.
inline KsTest ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::domain_error("ks_test_two_sample: empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(double(ia) / na - double(ib) / nb));
  }
  KsTest out;
  out.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  out.p_value = kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
  return out;
}

}  // namespace coalesce
