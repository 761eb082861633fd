#pragma once

// Exact samplers for the jump laws of the block counting process and the
// fixation line.
//
// Block jumps from state j land on j - d with
//   P(d) proportional to eta{d} * Gamma(j-d+alpha-1)/Gamma(j-d),
// a heavy-tailed row.  Three regimes:
//   * alpha = 1: closed-form inversion, O(1);
//   * j <= alias_cap: cached Walker alias tables, O(1);
//   * j  > alias_cap: sequential inversion through the exact term
//     recurrence; the expected work per trajectory telescopes to the total
//     displacement, so a full descent from n costs O(n) regardless of alpha.
//
// Fixation-line jumps in the Beta family are i.i.d. draws from eta itself
// (the factorization of the rates), sampled by a CDF table plus closed-form
// tail inversion through the survival function
//   P(d >= m) = Gamma(m+1-alpha) / (Gamma(m+1) Gamma(2-alpha)).

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coalesce/rates.hpp"
#include "coalesce/rng.hpp"

namespace coalesce {

class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    prob_.resize(n);
    alias_.resize(n, 0);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      prob_[i] = weights[i] * double(n) / total;
      (prob_[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      const auto l = large.back();
      small.pop_back();
      large.pop_back();
      alias_[s] = l;
      prob_[l] -= 1.0 - prob_[s];
      (prob_[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto i : small) prob_[i] = 1.0;
    for (auto i : large) prob_[i] = 1.0;
  }

  std::size_t sample(ReplicaRng& rng) const {
    const std::size_t i = std::size_t(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

class BlockJumpSampler {
 public:
  explicit BlockJumpSampler(const LambdaMeasure& measure,
                            std::int64_t alias_cap = 1024)
      : table_(measure), alias_cap_(alias_cap) {
    if (measure.is_beta()) {
      alpha_ = measure.alpha();
      bs_ = (alpha_ == 1.0);
    }
  }

  // Build alias tables for every state the simulation can touch below the
  // cap.  Must be called before sharing the sampler across threads; for a
  // generic measure all states up to n are built (quadrature-backed rows).
  void warm(std::int64_t n) {
    const std::int64_t top =
        table_.measure().is_beta() ? std::min(n, alias_cap_) : n;
    if (!table_.measure().is_beta() && n > 4096) {
      throw std::domain_error(
          "BlockJumpSampler: generic-measure simulations are limited to "
          "start states <= 4096 (per-state rows are quadrature-backed)");
    }
    if (bs_) return;  // closed-form inversion needs no tables
    if (std::int64_t(rows_.size()) <= top) rows_.resize(std::size_t(top) + 1);
    for (std::int64_t j = 2; j <= top; ++j) {
      if (!rows_[std::size_t(j)]) {
        rows_[std::size_t(j)] =
            std::make_unique<AliasTable>(table_.embedded_row_probs(j));
      }
    }
  }

  // Destination state of one embedded-chain jump from j >= 2.
  std::int64_t jump_from(std::int64_t j, ReplicaRng& rng) const {
    if (j == 2) return 1;
    if (bs_) return j - bs_inverse(j, rng.uniform());
    if (std::size_t(j) < rows_.size() && rows_[std::size_t(j)]) {
      return j - 1 - std::int64_t(rows_[std::size_t(j)]->sample(rng));
    }
    return j - scan_inverse(j, rng.uniform());
  }

 private:
  // alpha = 1: P(d <= m) = (j/(j-1)) (1 - 1/(m+1)) inverts in closed form.
  static std::int64_t bs_inverse(std::int64_t j, double u) {
    const double x = double(j) / (1.0 + u * double(j - 1));
    const auto d = std::int64_t(std::ceil(x)) - 1;
    return std::max<std::int64_t>(1, std::min<std::int64_t>(d, j - 1));
  }

  // Sequential inversion with the exact recurrences
  //   p(1) = j alpha / (2 (j + alpha - 2)),
  //   p(d+1)/p(d) = (d+1-alpha)(j-d-1) / ((d+2)(j-d+alpha-2)).
  std::int64_t scan_inverse(std::int64_t j, double u) const {
    const double a = alpha_;
    double p = double(j) * a / (2.0 * (double(j) + a - 2.0));
    double acc = p;
    std::int64_t d = 1;
    while (acc < u && d < j - 1) {
      p *= (double(d) + 1.0 - a) * double(j - d - 1) /
           ((double(d) + 2.0) * (double(j - d) + a - 2.0));
      ++d;
      acc += p;
    }
    return d;
  }

  RateTable table_;
  double alpha_ = 1.0;
  bool bs_ = false;
  std::int64_t alias_cap_;
  std::vector<std::unique_ptr<AliasTable>> rows_;
};

// Interarrival sampler for the fixation line of a Beta coalescent.
class EtaSampler {
 public:
  explicit EtaSampler(double alpha, std::size_t table_size = 4096)
      : alpha_(alpha) {
    if (alpha == 1.0) return;
    cdf_.resize(table_size);
    const auto eta = interarrival_table(alpha, table_size);
    double acc = 0.0;
    for (std::size_t d = 1; d <= table_size; ++d) {
      acc += eta[d];
      cdf_[d - 1] = acc;
    }
  }

  std::int64_t sample(ReplicaRng& rng) const {
    if (alpha_ == 1.0) {
      // survival P(d >= m) = 1/m
      const double u = rng.uniform_pos();
      return std::max<std::int64_t>(1, std::int64_t(1.0 / u));
    }
    const double u = rng.uniform();
    if (u < cdf_.back()) {
      const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
      return std::int64_t(it - cdf_.begin()) + 1;
    }
    return tail_inverse(1.0 - u);
  }

 private:
  // Smallest d with survival(d+1) <= v, survival(m) ~ m^-alpha/Gamma(2-alpha).
  std::int64_t tail_inverse(double v) const {
    const double g = std::lgamma(2.0 - alpha_);
    auto survival = [&](double m) {
      return std::exp(std::lgamma(m + 1.0 - alpha_) - std::lgamma(m + 1.0) -
                      g);
    };
    auto d = std::int64_t(
        std::pow(v * std::tgamma(2.0 - alpha_), -1.0 / alpha_));
    d = std::max<std::int64_t>(d, std::int64_t(cdf_.size()));
    // past ~1e12 the lgamma difference cancels in double; the asymptotic
    // index is already exact to far better than one part in 1e6 there
    if (d > std::int64_t(1e12)) return d;
    // walk to the exact crossing: survival is decreasing in m
    while (survival(double(d + 1)) > v) ++d;
    while (d > 1 && survival(double(d)) <= v) --d;
    return d;
  }

  double alpha_;
  std::vector<double> cdf_;
};

}  // namespace coalesce
