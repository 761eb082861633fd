#include <catch_amalgamated.hpp>

#include <cmath>

#include "coalesce/rates.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace coalesce;

namespace {

LambdaMeasure beta_as_generic(double alpha) {
  return LambdaMeasure::generic(
      [alpha](double x, double xc) {
        return std::exp((1.0 - alpha) * std::log(x) +
                        (alpha - 1.0) * std::log(xc) -
                        log_beta(2.0 - alpha, alpha));
      },
      "beta-as-generic");
}

}  // namespace

TEST_CASE("block rates, uniform driving measure") {
  const auto m = LambdaMeasure::beta(1.0);
  // j / ((k-1) k) with k = j-i+1
  REQUIRE_THAT(block_rate(m, 3, 2), WithinRel(1.5, 1e-13));
  REQUIRE_THAT(block_rate(m, 3, 1), WithinRel(0.5, 1e-13));
  REQUIRE_THAT(block_rate(m, 2, 1), WithinRel(1.0, 1e-13));
  REQUIRE_THROWS_AS(block_rate(m, 3, 3), std::domain_error);
  REQUIRE_THROWS_AS(block_rate(m, 3, 0), std::domain_error);
}

TEST_CASE("rate into a single block") {
  // Lambda_{i,1} = Gamma(i-alpha) / (Gamma(i) Gamma(2-alpha))
  const auto m1 = LambdaMeasure::beta(1.0);
  REQUIRE_THAT(block_rate(m1, 5, 1), WithinRel(0.25, 1e-13));
  for (double alpha : {0.3, 0.7, 1.2, 1.8}) {
    const auto m = LambdaMeasure::beta(alpha);
    for (std::int64_t i : {2, 5, 17}) {
      const double expected =
          std::exp(std::lgamma(double(i) - alpha) - std::lgamma(double(i)) -
                   std::lgamma(2.0 - alpha));
      REQUIRE_THAT(block_rate(m, i, 1), WithinRel(expected, 1e-12));
    }
  }
}

TEST_CASE("fixation rates, uniform driving measure") {
  const auto m = LambdaMeasure::beta(1.0);
  // i / (d (d+1)) for a jump of size d
  REQUIRE_THAT(fixation_rate(m, 1, 2), WithinRel(0.5, 1e-13));
  REQUIRE_THAT(fixation_rate(m, 2, 4), WithinRel(1.0 / 3.0, 1e-13));
  REQUIRE_THAT(fixation_rate(m, 3, 4), WithinRel(1.5, 1e-13));
}

TEST_CASE("factorized fixation rates match direct quadrature") {
  for (double alpha : {0.4, 1.0, 1.6}) {
    const auto closed = LambdaMeasure::beta(alpha);
    const auto generic = beta_as_generic(alpha);
    for (std::int64_t i = 1; i <= 50; i += 7) {
      for (std::int64_t j = i + 1; j <= 50; j += 5) {
        REQUIRE_THAT(fixation_rate(generic, i, j),
                     WithinRel(fixation_rate(closed, i, j), 1e-8));
        REQUIRE_THAT(block_rate(generic, j, i),
                     WithinRel(block_rate(closed, j, i), 1e-8));
      }
    }
  }
}

TEST_CASE("total rate") {
  const auto m = LambdaMeasure::beta(1.0);
  REQUIRE_THAT(total_rate(m, 3), WithinRel(2.0, 1e-13));
  REQUIRE_THAT(total_rate(m, 11), WithinRel(10.0, 1e-12));
  // pair-merge rate of a 2-coalescent is 1 for every probability measure
  for (double alpha : {0.1, 0.5, 1.0, 1.5, 1.9}) {
    REQUIRE_THAT(total_rate(LambdaMeasure::beta(alpha), 2),
                 WithinAbs(1.0, 1e-14));
  }
  REQUIRE_THROWS_AS(total_rate(m, 1), std::domain_error);
}

TEST_CASE("total rate equals the row sum of block rates") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto m = LambdaMeasure::beta(alpha);
    for (std::int64_t j = 2; j <= 200; ++j) {
      double acc = 0.0;
      for (std::int64_t i = 1; i < j; ++i) acc += block_rate(m, j, i);
      REQUIRE_THAT(acc, WithinRel(total_rate(m, j), 1e-10));
    }
  }
}

TEST_CASE("total rates are non-decreasing with power-law growth") {
  for (double alpha : {0.5, 1.2, 1.9}) {
    const auto m = LambdaMeasure::beta(alpha);
    double prev = 0.0;
    for (std::int64_t j : {2, 3, 5, 10, 100, 1000, 10000}) {
      const double cur = total_rate(m, j);
      REQUIRE(cur >= prev);
      prev = cur;
    }
    // Lambda_j ~ j^alpha / (alpha Gamma(alpha))
    const double j = 1e4;
    const double asym = std::pow(j, alpha) / (alpha * std::tgamma(alpha));
    REQUIRE_THAT(total_rate(m, 10000) / asym, WithinAbs(1.0, 0.01));
  }
}

TEST_CASE("tail-rate duality") {
  const auto m = LambdaMeasure::beta(1.0);
  REQUIRE_THAT(fixation_tail_rate(m, 2, 3), WithinRel(2.0, 1e-12));
  REQUIRE_THAT(block_tail_rate(m, 3, 2), WithinRel(2.0, 1e-12));
  for (double alpha : {0.3, 1.5}) {
    const auto mb = LambdaMeasure::beta(alpha);
    // the fixation line leaving 1 = jumping to >= 2; equals Lambda_2 = 1
    REQUIRE_THAT(fixation_tail_rate(mb, 1, 2), WithinAbs(1.0, 1e-13));
    for (std::int64_t i = 1; i < 60; i += 3) {
      for (std::int64_t j = i + 1; j <= 60; j += 4) {
        const double fix = fixation_tail_rate(mb, i, j);
        const double blk = block_tail_rate(mb, j, i);
        REQUIRE_THAT(fix, WithinRel(blk, 1e-10));
      }
    }
  }
  // alpha = 1/2, i = 3, j = 5: the two independent routes agree
  const auto h = LambdaMeasure::beta(0.5);
  REQUIRE_THAT(fixation_tail_rate(h, 3, 5),
               WithinRel(block_tail_rate(h, 5, 3), 1e-10));
}

TEST_CASE("generic-measure tail rate integral agrees with the Beta route") {
  const auto generic = beta_as_generic(0.7);
  const auto closed = LambdaMeasure::beta(0.7);
  for (std::int64_t i : {1, 2, 5}) {
    for (std::int64_t j : {3, 7, 12}) {
      if (j <= i) continue;
      REQUIRE_THAT(fixation_tail_rate(generic, i, j),
                   WithinRel(fixation_tail_rate(closed, i, j), 1e-8));
    }
  }
}

TEST_CASE("embedded transition probabilities") {
  const auto m = LambdaMeasure::beta(1.0);
  REQUIRE_THAT(embedded_transition(m, 3, 2), WithinRel(0.75, 1e-13));
  REQUIRE_THAT(embedded_transition(m, 3, 1), WithinRel(0.25, 1e-13));
  REQUIRE_THAT(embedded_transition(m, 2, 1), WithinAbs(1.0, 1e-14));
  REQUIRE_THAT(embedded_transition(m, 4, 1), WithinRel(1.0 / 9.0, 1e-13));

  for (double alpha : {0.4, 1.0, 1.7}) {
    const auto mb = LambdaMeasure::beta(alpha);
    for (std::int64_t j : {2, 3, 10, 50, 200}) {
      double acc = 0.0;
      for (std::int64_t i = 1; i < j; ++i) acc += embedded_transition(mb, j, i);
      REQUIRE_THAT(acc, WithinAbs(1.0, 1e-10));
    }
  }
}

TEST_CASE("rate table rows match the direct formulas") {
  for (double alpha : {0.5, 1.3}) {
    RateTable table(LambdaMeasure::beta(alpha));
    table.ensure_totals(64);
    for (std::int64_t j : {2, 3, 17, 64}) {
      REQUIRE_THAT(table.total(j),
                   WithinRel(total_rate(LambdaMeasure::beta(alpha), j), 1e-12));
      const auto row = table.embedded_row_probs(j);
      REQUIRE(std::int64_t(row.size()) == j - 1);
      double sum = 0.0;
      for (std::int64_t d = 1; d <= j - 1; ++d) {
        sum += row[std::size_t(d - 1)];
        REQUIRE_THAT(
            row[std::size_t(d - 1)],
            WithinRel(embedded_transition(LambdaMeasure::beta(alpha), j, j - d),
                      1e-10));
      }
      REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("combinatorial identity behind the duality, exact in integers") {
  // C(n+i-1, n) = sum_{k+k'=n} C(l+i, k) C(l-k, k') (-1)^k' for l >= n
  auto binom = [](std::int64_t n, std::int64_t k) -> __int128 {
    if (k < 0 || k > n) return 0;
    __int128 r = 1;
    for (std::int64_t t = 1; t <= k; ++t) {
      r = r * (n - k + t) / t;
    }
    return r;
  };
  for (std::int64_t i = 1; i <= 10; ++i) {
    for (std::int64_t l = 1; l <= 30; ++l) {
      for (std::int64_t n = 0; n <= l; ++n) {
        __int128 rhs = 0;
        for (std::int64_t k = 0; k <= n; ++k) {
          const std::int64_t kp = n - k;
          const __int128 term = binom(l + i, k) * binom(l - k, kp);
          rhs += (kp % 2 == 0) ? term : -term;
        }
        REQUIRE(rhs == binom(n + i - 1, n));
      }
    }
  }
}

TEST_CASE("generic flat density reproduces the uniform measure") {
  const auto uniform =
      LambdaMeasure::generic([](double, double) { return 1.0; }, "flat");
  REQUIRE_THAT(block_rate(uniform, 3, 2), WithinRel(1.5, 1e-9));
  REQUIRE_THAT(total_rate(uniform, 5), WithinRel(4.0, 1e-9));
  REQUIRE_THROWS_AS(
      LambdaMeasure::generic([](double, double) { return 2.0; }, "overweight"),
      std::domain_error);
}

TEST_CASE("interarrival errors") {
  REQUIRE_THROWS_AS(interarrival(1.0, 0), std::domain_error);
  REQUIRE_THROWS_AS(interarrival(2.0, 1), std::domain_error);
  REQUIRE_THROWS_AS(interarrival(0.0, 1), std::domain_error);
}
