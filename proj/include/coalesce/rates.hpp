#pragma once

// Transition rates of the block counting process and of the fixation line,
// plus the interarrival law of the fixation-line range for the Beta family.
//
// Conventions, for a driving probability measure Lambda on (0,1):
//   block_rate(j,i)     rate j -> i of the block counting process,
//                       C(j, j-i+1) * int x^{j-i-1} (1-x)^{i-1} Lambda(dx)
//   fixation_rate(i,j)  rate i -> j of the fixation line,
//                       C(j, j-i+1) * int x^{j-i-1} (1-x)^{i}   Lambda(dx)
//   total_rate(j)       Lambda_j = sum_{i<j} block_rate(j,i), which equals
//                       the total rate at which the fixation line leaves j-1.
//
// For Beta(2-alpha, alpha) the fixation rates factorize as
//   fixation_rate(i, i+d) = [Gamma(i+alpha)/(alpha Gamma(alpha) Gamma(i))]
//                           * eta{d}
// with eta the interarrival probability law below; every closed form here
// goes through log-Gamma and is exponentiated once.

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coalesce/measure.hpp"
#include "coalesce/renewal.hpp"
#include "coalesce/special.hpp"

namespace coalesce {

namespace detail {

inline void check_pair(std::int64_t i, std::int64_t j, const char* where) {
  if (i < 1 || j <= i) {
    throw std::domain_error(std::string(where) + ": need 1 <= i < j");
  }
}

inline double log_binomial(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
         std::lgamma(double(n - k + 1));
}

}  // namespace detail

// eta{d} = (alpha / Gamma(2-alpha)) * Gamma(d+1-alpha) / Gamma(d+2), d >= 1.
inline double interarrival(double alpha, std::int64_t d) {
  if (d < 1) throw std::domain_error("interarrival: d must be >= 1");
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::domain_error("interarrival: alpha must be in (0,2)");
  }
  return std::exp(std::log(alpha) - std::lgamma(2.0 - alpha) +
                  std::lgamma(double(d) + 1.0 - alpha) -
                  std::lgamma(double(d) + 2.0));
}

// Tail sum_{d >= m} eta{d} = Gamma(m+1-alpha) / (Gamma(m+1) Gamma(2-alpha)).
// The identity telescopes exactly, which is what makes tail rates finite
// computations.
inline double interarrival_tail(double alpha, std::int64_t m) {
  if (m < 1) throw std::domain_error("interarrival_tail: m must be >= 1");
  return std::exp(std::lgamma(double(m) + 1.0 - alpha) -
                  std::lgamma(double(m) + 1.0) - std::lgamma(2.0 - alpha));
}

// eta{1..m_max} filled by the exact ratio recurrence
// eta{d+1}/eta{d} = (d+1-alpha)/(d+2), starting from eta{1} = alpha/2.
inline std::vector<double> interarrival_table(double alpha,
                                              std::size_t m_max) {
  std::vector<double> eta(m_max + 1, 0.0);
  if (m_max >= 1) eta[1] = alpha / 2.0;
  for (std::size_t d = 1; d + 1 <= m_max; ++d) {
    eta[d + 1] = eta[d] * (double(d) + 1.0 - alpha) / (double(d) + 2.0);
  }
  return eta;
}

inline RenewalSequence beta_renewal_sequence(double alpha,
                                             std::size_t m_max) {
  const auto eta = interarrival_table(alpha, m_max);
  auto seq = renewal_sequence([&](std::size_t j) { return eta[j]; }, m_max);
  seq.alpha = alpha;
  return seq;
}

inline double block_rate(const LambdaMeasure& m, std::int64_t j,
                         std::int64_t i) {
  detail::check_pair(i, j, "block_rate");
  if (m.is_beta()) {
    const double a = m.alpha();
    const double d = double(j - i);
    return std::exp(std::log(double(j)) + std::lgamma(d + 1.0 - a) -
                    std::lgamma(d + 2.0) + std::lgamma(double(i) + a - 1.0) -
                    std::lgamma(double(i)) - std::lgamma(2.0 - a) -
                    std::lgamma(a));
  }
  return std::exp(detail::log_binomial(j, j - i + 1)) *
         m.kernel_integral(double(j - i - 1), double(i - 1));
}

inline double fixation_rate(const LambdaMeasure& m, std::int64_t i,
                            std::int64_t j) {
  detail::check_pair(i, j, "fixation_rate");
  if (m.is_beta()) {
    const double a = m.alpha();
    return std::exp(std::lgamma(double(i) + a) - std::lgamma(double(i)) -
                    std::log(a) - std::lgamma(a)) *
           interarrival(a, j - i);
  }
  return std::exp(detail::log_binomial(j, j - i + 1)) *
         m.kernel_integral(double(j - i - 1), double(i));
}

// Lambda_j = Gamma(j-1+alpha) / (alpha Gamma(alpha) Gamma(j-1)) for Beta;
// the finite sum of block rates otherwise.
inline double total_rate(const LambdaMeasure& m, std::int64_t j) {
  if (j < 2) throw std::domain_error("total_rate: j must be >= 2");
  if (m.is_beta()) {
    const double a = m.alpha();
    return std::exp(std::lgamma(double(j) - 1.0 + a) -
                    std::lgamma(double(j) - 1.0) - std::log(a) -
                    std::lgamma(a));
  }
  double acc = 0.0;
  for (std::int64_t i = j - 1; i >= 1; --i) acc += block_rate(m, j, i);
  return acc;
}

// Lambda_{j, <= i}: rate at which the block counting process jumps from j
// to at most i blocks.  Finite sum, exact termination.
inline double block_tail_rate(const LambdaMeasure& m, std::int64_t j,
                              std::int64_t i) {
  detail::check_pair(i, j, "block_tail_rate");
  double acc = 0.0;
  for (std::int64_t k = 1; k <= i; ++k) acc += block_rate(m, j, k);
  return acc;
}

namespace detail {

// (1-x)^i * sum_{k > j-i} C(k+i-1, k) x^k, the complement of the negative
// binomial partial sum.  Two branches: a direct tail series for small x and
// the complementary finite sum for large x, so neither cancels.
inline double negbinom_tail(double x, double xc, std::int64_t i,
                            std::int64_t j) {
  const std::int64_t cut = j - i;  // terms 0..cut are excluded from the tail
  if (x < 0.5) {
    // term_k = C(k+i-1,k) x^k starting at k = cut+1
    double logt = log_binomial(cut + i, cut + 1) + double(cut + 1) * std::log(x);
    double term = std::exp(logt);
    double acc = 0.0;
    for (std::int64_t k = cut + 1;; ++k) {
      acc += term;
      term *= x * double(k + i) / double(k + 1);
      if (term < 1e-18 * (acc + 1e-300)) break;
      if (k > cut + 100000) break;
    }
    return std::pow(xc, double(i)) * acc;
  }
  double term = 1.0;  // C(i-1,0) x^0
  double acc = term;
  for (std::int64_t k = 1; k <= cut; ++k) {
    term *= x * double(k + i - 1) / double(k);
    acc += term;
  }
  return 1.0 - std::pow(xc, double(i)) * acc;
}

}  // namespace detail

// Gamma~_{i, >= j}: rate at which the fixation line jumps from i to a level
// >= j.  Equal to block_tail_rate(m, j, i) -- the two are dual routes to the
// same number and the library computes them independently.
inline double fixation_tail_rate(const LambdaMeasure& m, std::int64_t i,
                                 std::int64_t j) {
  detail::check_pair(i, j, "fixation_tail_rate");
  if (m.is_beta()) {
    const double a = m.alpha();
    return std::exp(std::lgamma(double(i) + a) - std::lgamma(double(i)) -
                    std::log(a) - std::lgamma(a)) *
           interarrival_tail(a, j - i);
  }
  return integrate_01(
             [&](double x, double xc) {
               // bracket underflows near 0 faster than 1/x^2 blows up;
               // multiply first so the limit comes out as 0, not inf * 0
               const double v =
                   m.density(x, xc) * detail::negbinom_tail(x, xc, i, j);
               return v == 0.0 ? 0.0 : v / (x * x);
             },
             1e-12)
      .value;
}

inline double embedded_transition(const LambdaMeasure& m, std::int64_t j,
                                  std::int64_t i) {
  detail::check_pair(i, j, "embedded_transition");
  return block_rate(m, j, i) / total_rate(m, j);
}

// Cached total rates and embedded-chain rows, shared by the samplers and
// the exact tables.  Build (ensure_*) is single threaded; reads after that
// are safe from any number of threads.
class RateTable {
 public:
  explicit RateTable(LambdaMeasure measure, std::int64_t cap = 10000)
      : measure_(std::move(measure)), cap_(cap) {}

  const LambdaMeasure& measure() const { return measure_; }

  void ensure_totals(std::int64_t j_max) {
    j_max = std::max<std::int64_t>(j_max, 2);
    if (std::int64_t(totals_.size()) > j_max) return;
    const std::size_t old = totals_.size();
    totals_.resize(std::size_t(j_max) + 1, 0.0);
    if (measure_.is_beta()) {
      const double a = measure_.alpha();
      // Lambda_2 = 1 for every probability measure; exact ratio recurrence
      // Lambda_{j+1} / Lambda_j = (j-1+alpha)/(j-1) upward.
      if (totals_.size() > 2 && old <= 2) totals_[2] = 1.0;
      std::size_t start = std::max<std::size_t>(old, 3);
      for (std::size_t j = start; j <= std::size_t(j_max); ++j) {
        totals_[j] = totals_[j - 1] * (double(j) - 2.0 + a) / (double(j) - 2.0);
      }
    } else {
      for (std::size_t j = std::max<std::size_t>(old, 2);
           j <= std::size_t(j_max); ++j) {
        totals_[j] = fixation_tail_rate(measure_, std::int64_t(j) - 1,
                                        std::int64_t(j));
      }
    }
  }

  double total(std::int64_t j) const { return totals_[std::size_t(j)]; }

  // Embedded jump-size probabilities from state j: row[d-1] = P(j -> j-d).
  void ensure_row(std::int64_t j) {
    if (j < 2) return;
    if (std::int64_t(rows_.size()) <= j) rows_.resize(std::size_t(j) + 1);
    if (rows_[std::size_t(j)]) return;
    rows_[std::size_t(j)] =
        std::make_unique<std::vector<double>>(embedded_row_probs(j));
  }

  const std::vector<double>& row(std::int64_t j) const {
    return *rows_[std::size_t(j)];
  }

  bool has_row(std::int64_t j) const {
    return j >= 0 && std::size_t(j) < rows_.size() &&
           rows_[std::size_t(j)] != nullptr;
  }

  std::int64_t cap() const { return cap_; }

  std::vector<double> embedded_row_probs(std::int64_t j) const {
    std::vector<double> p(std::size_t(j - 1));
    if (measure_.is_beta()) {
      const double a = measure_.alpha();
      // p(1) = j*alpha / (2 (j + alpha - 2)), then
      // p(d+1)/p(d) = (d+1-alpha)(j-d-1) / ((d+2)(j-d+alpha-2)).
      double t = double(j) * a / (2.0 * (double(j) + a - 2.0));
      double sum = 0.0;
      for (std::int64_t d = 1; d <= j - 1; ++d) {
        p[std::size_t(d - 1)] = t;
        sum += t;
        t *= (double(d) + 1.0 - a) * double(j - d - 1) /
             ((double(d) + 2.0) * (double(j - d) + a - 2.0));
      }
      for (auto& v : p) v /= sum;
    } else {
      double sum = 0.0;
      for (std::int64_t d = 1; d <= j - 1; ++d) {
        p[std::size_t(d - 1)] = block_rate(measure_, j, j - d);
        sum += p[std::size_t(d - 1)];
      }
      for (auto& v : p) v /= sum;
    }
    return p;
  }

 private:
  LambdaMeasure measure_;
  std::int64_t cap_;
  std::vector<double> totals_;
  std::vector<std::unique_ptr<std::vector<double>>> rows_;
};

}  // namespace coalesce
