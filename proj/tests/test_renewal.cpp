#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "coalesce/rates.hpp"
#include "coalesce/renewal.hpp"

using Catch::Matchers::WithinAbs;
using coalesce::beta_renewal_sequence;
using coalesce::explicit_renewal_half;
using coalesce::explicit_renewal_three_halves;
using coalesce::interarrival;
using coalesce::interarrival_table;
using coalesce::interarrival_tail;
using coalesce::renewal_sequence;

TEST_CASE("renewal recursion basics") {
  const auto seq = beta_renewal_sequence(1.0, 10);
  REQUIRE(seq.u[0] == 1.0);
  // hand recursion with eta{j} = 1/(j(j+1)):
  //   u1 = 1/2, u2 = (1/2)(1/2) + 1/6 = 5/12
  REQUIRE_THAT(seq.u[1], WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(seq.u[2], WithinAbs(5.0 / 12.0, 1e-15));

  const auto trivial = renewal_sequence([](std::size_t) { return 0.5; }, 0);
  REQUIRE(trivial.u.size() == 1);
  REQUIRE(trivial.u[0] == 1.0);
}

TEST_CASE("interarrival law values and mass") {
  REQUIRE_THAT(interarrival(1.0, 1), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(interarrival(0.5, 1), WithinAbs(0.25, 1e-15));
  for (double alpha : {0.3, 0.5, 1.0, 1.5, 1.9}) {
    // partial sums + closed-form tail telescope to exactly 1
    const std::size_t big = 10000;
    const auto eta = interarrival_table(alpha, big);
    double partial = 0.0;
    double prev = 0.0;
    for (std::size_t j = 1; j <= big; ++j) {
      partial += eta[j];
      REQUIRE(partial >= prev);
      REQUIRE(partial <= 1.0 + 1e-12);
      prev = partial;
    }
    REQUIRE_THAT(partial + interarrival_tail(alpha, big + 1),
                 WithinAbs(1.0, 1e-12));
    // eta is a probability measure: direct partial sums approach 1
    if (alpha >= 1.0) {
      double acc = 0.0;
      double term = alpha / 2.0;
      for (std::size_t j = 1; j <= 2000000; ++j) {
        acc += term;
        term *= (double(j) + 1.0 - alpha) / (double(j) + 2.0);
      }
      REQUIRE(acc >= 1.0 - 1e-6);
    } else {
      // the tail decays like j^-alpha; at the astronomically large index
      // where it must cross 1e-6 the lgamma difference cancels in double,
      // so evaluate the tail through its Stirling form
      const double j_star =
          std::pow(1e6 / std::tgamma(2.0 - alpha), 1.0 / alpha) * 4.0;
      const double tail = std::exp(-alpha * std::log(j_star) -
                                   std::lgamma(2.0 - alpha));
      REQUIRE(tail < 1e-6);
      // and the Stirling form agrees with the exact one where both work
      REQUIRE_THAT(std::exp(-alpha * std::log(1e8)) / std::tgamma(2.0 - alpha),
                   Catch::Matchers::WithinRel(
                       interarrival_tail(alpha, std::int64_t(1e8)), 1e-6));
    }
  }
}

TEST_CASE("explicit renewal measures at alpha = 1/2 and 3/2") {
  REQUIRE(explicit_renewal_half(0) == 1.0);
  REQUIRE_THAT(explicit_renewal_half(1), WithinAbs(0.25, 1e-15));
  REQUIRE(explicit_renewal_three_halves(0) == 1.0);
  REQUIRE_THAT(explicit_renewal_three_halves(1), WithinAbs(0.75, 1e-15));

  const auto half = beta_renewal_sequence(0.5, 500);
  const auto three = beta_renewal_sequence(1.5, 500);
  for (std::size_t k = 0; k <= 500; ++k) {
    REQUIRE_THAT(half.u[k], WithinAbs(explicit_renewal_half(k), 1e-12));
    REQUIRE_THAT(three.u[k],
                 WithinAbs(explicit_renewal_three_halves(k), 1e-12));
  }
}

TEST_CASE("renewal sequence is self-consistent and bounded") {
  for (double alpha : {0.3, 0.8, 1.0, 1.4, 1.9}) {
    const auto eta = interarrival_table(alpha, 300);
    const auto seq = beta_renewal_sequence(alpha, 300);
    for (std::size_t k = 1; k <= 300; ++k) {
      REQUIRE(seq.u[k] >= 0.0);
      REQUIRE(seq.u[k] <= 1.0);
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) acc += eta[j] * seq.u[k - j];
      REQUIRE_THAT(seq.u[k], WithinAbs(acc, 1e-12));
    }
  }
}

namespace {

// Power-series coefficients of the closed-form generating function of the
// renewal measure, extracted by a Cauchy contour integral on |z| = r.  An
// oracle fully independent of the forward recursion.
double renewal_gf_coefficient(double alpha, int k) {
  using cplx = std::complex<double>;
  auto phi = [&](cplx z) -> cplx {
    if (alpha == 1.0) {
      return -z / ((1.0 - z) * std::log(1.0 - z));
    }
    return -(alpha - 1.0) * z /
           (std::pow(1.0 - z, alpha) - (1.0 - z));
  };
  const double r = 0.8;
  const int m = 2048;
  const double pi = 3.14159265358979323846;
  cplx acc = 0.0;
  for (int t = 0; t < m; ++t) {
    const double theta = 2.0 * pi * double(t) / double(m);
    const cplx z = std::polar(r, theta);
    acc += phi(z) * std::polar(1.0, -double(k) * theta);
  }
  return (acc / double(m)).real() / std::pow(r, double(k));
}

}  // namespace

TEST_CASE("renewal sequence matches generating-function coefficients") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto seq = beta_renewal_sequence(alpha, 30);
    for (int k = 0; k <= 30; ++k) {
      REQUIRE_THAT(seq.u[std::size_t(k)],
                   WithinAbs(renewal_gf_coefficient(alpha, k), 1e-8));
    }
  }
}

TEST_CASE("invalid interarrival laws are rejected") {
  REQUIRE_THROWS_AS(renewal_sequence([](std::size_t) { return 0.7; }, 10),
                    std::domain_error);
  REQUIRE_THROWS_AS(renewal_sequence([](std::size_t) { return -0.1; }, 3),
                    std::domain_error);
}
