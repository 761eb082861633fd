#pragma once

// Log-domain special functions shared by the rate and distribution formulas.
// Every Gamma ratio in the library goes through these so that quantities like
// Gamma(j+alpha)/Gamma(j) stay finite for j in the millions.

#include <cmath>
#include <stdexcept>
#include <string>

namespace coalesce {

inline double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive, got " +
                            std::to_string(x));
  }
  return std::lgamma(x);
}

inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("log_beta: arguments must be positive");
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Gamma(x + delta) / Gamma(x) evaluated in log space.
inline double gamma_ratio(double x, double delta) {
  return std::exp(std::lgamma(x + delta) - std::lgamma(x));
}

}  // namespace coalesce
