#pragma once

// Discrete renewal sequences on the non-negative integers.
//
// For a renewal point process containing 0 with interarrival law eta on
// {1,2,...}, u[k] = P(k is in the range) satisfies the forward recursion
//   u[0] = 1,   u[k] = sum_{j=1..k} eta{j} * u[k-j].
// This is the occupancy law of the translated fixation-line range.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace coalesce {

struct RenewalSequence {
  // Set for the Beta(2-alpha,alpha) family, empty for a generic
  // interarrival law.
  std::optional<double> alpha;
  std::vector<double> u;  // u[0..m_max]

  std::size_t size() const { return u.size(); }
  double operator[](std::size_t k) const { return u[k]; }
};

// Forward renewal recursion for an arbitrary sub-probability interarrival
// law given as a callable j -> eta{j}, j >= 1.
template <typename Eta>
RenewalSequence renewal_sequence(const Eta& eta, std::size_t m_max) {
  RenewalSequence seq;
  seq.u.resize(m_max + 1);
  seq.u[0] = 1.0;
  std::vector<double> weights(m_max + 1, 0.0);
  double partial = 0.0;
  for (std::size_t j = 1; j <= m_max; ++j) {
    const double w = eta(j);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::domain_error("renewal_sequence: interarrival weights must be "
                              "finite and non-negative");
    }
    partial += w;
    if (partial > 1.0 + 1e-9) {
      throw std::domain_error(
          "renewal_sequence: interarrival law exceeds total mass 1");
    }
    weights[j] = w;
  }
  for (std::size_t k = 1; k <= m_max; ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) acc += weights[j] * seq.u[k - j];
    seq.u[k] = acc;
  }
  return seq;
}

// The two parameters with explicit renewal measures.
//
// alpha = 1/2:  u[k] = (Gamma(k+1/2) / (Gamma(1/2) Gamma(k+1)) + 1_{k=0}) / 2
inline double explicit_renewal_half(std::size_t k) {
  double c = 1.0;  // Gamma(k+1/2)/(Gamma(1/2) Gamma(k+1)) by recurrence
  for (std::size_t m = 1; m <= k; ++m) c *= (m - 0.5) / m;
  return 0.5 * (c + (k == 0 ? 1.0 : 0.0));
}

// alpha = 3/2:  u[k] = (Gamma(k+1/2) / (Gamma(1/2) Gamma(k+1)) + 1) / 2
inline double explicit_renewal_three_halves(std::size_t k) {
  double c = 1.0;
  for (std::size_t m = 1; m <= k; ++m) c *= (m - 0.5) / m;
  return 0.5 * (c + 1.0);
}

}  // namespace coalesce
