#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "coalesce/rng.hpp"
#include "coalesce/stats.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace coalesce;

TEST_CASE("summary statistics") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(xs);
  REQUIRE(s.n == 4);
  REQUIRE_THAT(s.mean, WithinAbs(2.5, 1e-15));
  REQUIRE_THAT(s.variance, WithinRel(5.0 / 3.0, 1e-14));
  REQUIRE_THAT(s.std_error(), WithinRel(std::sqrt(5.0 / 12.0), 1e-14));
}

TEST_CASE("regularized incomplete gamma") {
  // Q(1/2, x) = erfc(sqrt(x))
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    REQUIRE_THAT(gamma_q(0.5, x), WithinRel(std::erfc(std::sqrt(x)), 1e-12));
  }
  // Q(1, x) = exp(-x)
  for (double x : {0.2, 2.0, 8.0}) {
    REQUIRE_THAT(gamma_q(1.0, x), WithinRel(std::exp(-x), 1e-12));
  }
  REQUIRE(gamma_q(2.0, 0.0) == 1.0);
}

TEST_CASE("chi-square p-values") {
  REQUIRE(chi_square_pvalue(0.0, 5.0) == 1.0);
  // median of chi2(1) is about 0.4549
  REQUIRE_THAT(chi_square_pvalue(0.454936, 1.0), WithinAbs(0.5, 1e-4));
  REQUIRE(chi_square_pvalue(100.0, 3.0) < 1e-10);
}

TEST_CASE("chi-square test pools sparse cells and accepts the truth") {
  ReplicaRng rng(7, 0);
  const std::vector<double> probs = {0.5, 0.3, 0.15, 0.04, 0.01};
  const std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    std::size_t cell = 0;
    while (cell + 1 < probs.size() && u >= probs[cell]) {
      u -= probs[cell];
      ++cell;
    }
    ++counts[cell];
  }
  const auto fit = chi_square_test(counts, probs, n);
  REQUIRE(fit.p_value > 1e-3);
  // and rejects a wrong law
  const std::vector<double> wrong = {0.4, 0.4, 0.15, 0.04, 0.01};
  REQUIRE(chi_square_test(counts, wrong, n).p_value < 1e-6);
}

TEST_CASE("kolmogorov tail values") {
  REQUIRE(kolmogorov_tail(1e-4) == 1.0);
  // classic 5% critical point of the Kolmogorov distribution
  REQUIRE_THAT(kolmogorov_tail(1.358), WithinAbs(0.05, 2e-3));
  REQUIRE(kolmogorov_tail(3.0) < 1e-6);
}

TEST_CASE("one-sample KS against the generating uniforms") {
  ReplicaRng rng(123, 5);
  std::vector<double> xs(50000);
  for (auto& x : xs) x = rng.uniform();
  const auto ks = ks_test_one_sample(xs, [](double x) {
    return std::min(1.0, std::max(0.0, x));
  });
  REQUIRE(ks.p_value > 1e-3);
  // shifted null is rejected
  const auto bad = ks_test_one_sample(xs, [](double x) {
    return std::min(1.0, std::max(0.0, x * x));
  });
  REQUIRE(bad.p_value < 1e-10);
}

TEST_CASE("two-sample KS") {
  ReplicaRng rng(9, 1);
  std::vector<double> a(20000), b(20000), c(20000);
  for (auto& x : a) x = rng.exponential(1.0);
  for (auto& x : b) x = rng.exponential(1.0);
  for (auto& x : c) x = rng.exponential(1.4);
  REQUIRE(ks_test_two_sample(a, b).p_value > 1e-3);
  REQUIRE(ks_test_two_sample(a, c).p_value < 1e-8);
}

TEST_CASE("binomial z-scores") {
  REQUIRE_THAT(binomial_z(0.5, 0.51, 10000), WithinRel(2.0, 1e-10));
  REQUIRE(binomial_z(0.5, 0.5, 100) == 0.0);
}

TEST_CASE("replica rng streams are decorrelated and reproducible") {
  ReplicaRng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    REQUIRE(x == b.next());
    REQUIRE(x != c.next());
  }
  // uniforms live in [0,1) and (0,1]
  ReplicaRng r(1, 2);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = r.uniform_pos();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
}
