#pragma once

// Monte Carlo engines: the block counting chain, the partition-valued
// coalescent under the natural coupling, the fixation line, the restricted
// lookdown construction, and the branching representation of the fixation
// line in the Bolthausen-Sznitman case.
//
// Every replica owns an independent random stream derived from
// (seed, replica index); aggregation over replicas is done by the harness in
// replica order, so results are bit-identical for a fixed SimConfig no
// matter how many worker threads run.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "coalesce/analytics.hpp"
#include "coalesce/measure.hpp"
#include "coalesce/rates.hpp"
#include "coalesce/rng.hpp"
#include "coalesce/samplers.hpp"

namespace coalesce {

struct SimConfig {
  LambdaMeasure measure = LambdaMeasure::beta(1.0);
  std::uint64_t seed = 42;
  std::uint64_t replicas = 100000;
  std::int64_t n = 2;        // start state / number of levels
  double horizon = 0.0;      // time horizon (lookdown, branching)
  std::int64_t level_cap = 0;  // fixation line stop level; 0 means n
  std::uint64_t population_cap = 1000000000;  // branching truncation
  unsigned threads = 0;      // 0 = hardware concurrency
};

struct Trajectory {
  std::vector<std::int64_t> states;
  std::vector<double> holding_times;  // empty in embedded-chain mode
  double total_time = 0.0;

  std::int64_t last_from() const {
    return states[states.size() - 2];
  }
  std::int64_t last_to() const { return states.back(); }
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Static replica partition across a thread pool; fn(replica) must only touch
// replica-indexed state.  The first exception thrown by any worker is
// rethrown after join.
template <typename Fn>
void for_each_replica(std::uint64_t replicas, unsigned threads, Fn&& fn) {
  const unsigned t =
      unsigned(std::min<std::uint64_t>(resolve_threads(threads), replicas));
  if (t <= 1) {
    for (std::uint64_t r = 0; r < replicas; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      const std::uint64_t lo = replicas * w / t;
      const std::uint64_t hi = replicas * (w + 1) / t;
      try {
        for (std::uint64_t r = lo; r < hi; ++r) fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Shared immutable tables for repeated block-chain replicas.  Construct and
// warm() single threaded, then share freely.
class BlockChainModel {
 public:
  explicit BlockChainModel(const LambdaMeasure& measure)
      : sampler_(measure), totals_(measure) {}

  void warm(std::int64_t n) {
    sampler_.warm(n);
    totals_.ensure_totals(n);
  }

  const BlockJumpSampler& sampler() const { return sampler_; }
  double total_rate_at(std::int64_t j) const { return totals_.total(j); }

  // One descent from n to target (default absorption at 1).  on_jump is
  // called as on_jump(from, to, holding_time) for every step.
  template <typename OnJump>
  double run(std::int64_t n, std::int64_t target, ReplicaRng& rng,
             OnJump&& on_jump) const {
    double time = 0.0;
    std::int64_t j = n;
    while (j > target) {
      const double hold = rng.exponential(totals_.total(j));
      const std::int64_t dest = sampler_.jump_from(j, rng);
      time += hold;
      on_jump(j, dest, hold);
      j = dest;
    }
    return time;
  }

 private:
  BlockJumpSampler sampler_;
  RateTable totals_;
};

inline Trajectory sim_block_counting(const SimConfig& cfg,
                                     std::uint64_t replica = 0) {
  if (cfg.n < 2) throw std::domain_error("sim_block_counting: n must be >= 2");
  BlockChainModel model(cfg.measure);
  model.warm(cfg.n);
  ReplicaRng rng(cfg.seed, replica);
  Trajectory tr;
  tr.states.push_back(cfg.n);
  tr.total_time = model.run(cfg.n, 1, rng,
                            [&](std::int64_t, std::int64_t to, double hold) {
                              tr.states.push_back(to);
                              tr.holding_times.push_back(hold);
                            });
  return tr;
}

// ---------------------------------------------------------------------------
// Partition-valued coalescent under the natural coupling
// ---------------------------------------------------------------------------

struct PartitionResult {
  // depth[k] = first time 1..(k+2) share one block, k = 0..N-2
  std::vector<double> depth;
  // the records among {2..N}: integers whose arrival deepened the tree
  std::vector<std::int64_t> records;
};

class PartitionSimulator {
 public:
  explicit PartitionSimulator(const LambdaMeasure& measure, std::int64_t n)
      : model_(measure), n_(n) {
    if (n < 2) throw std::domain_error("PartitionSimulator: N must be >= 2");
    model_.warm(n);
  }

  PartitionResult run(ReplicaRng& rng) const {
    const auto n = std::size_t(n_);
    std::vector<std::int64_t> parent(n + 1);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::int64_t(std::int64_t)> find =
        [&](std::int64_t x) -> std::int64_t {
      while (parent[std::size_t(x)] != x) {
        parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
        x = parent[std::size_t(x)];
      }
      return x;
    };

    std::vector<std::int64_t> reps(n);
    std::iota(reps.begin(), reps.end(), 1);

    PartitionResult out;
    out.depth.assign(n - 1, 0.0);
    std::vector<std::int64_t> resting;  // watermark values
    std::int64_t watermark = 1;
    resting.push_back(watermark);

    double time = 0.0;
    std::int64_t blocks = n_;
    while (blocks > 1) {
      time += rng.exponential(model_.total_rate_at(blocks));
      // merge size: k blocks merge <=> embedded jump blocks -> blocks-(k-1)
      const std::int64_t dest = model_.sampler().jump_from(blocks, rng);
      const std::int64_t k = blocks - dest + 1;
      blocks = merge_step(reps, parent, find, blocks, k, rng);
      advance_watermark(find, watermark, time, out, resting);
    }

    for (auto w : resting) {
      if (w + 1 <= n_) out.records.push_back(w + 1);
    }
    return out;
  }

 private:
  template <typename Find>
  std::int64_t merge_step(std::vector<std::int64_t>& reps,
                          std::vector<std::int64_t>& parent, Find& find,
                          std::int64_t blocks, std::int64_t k,
                          ReplicaRng& rng) const {
    // choose k distinct positions; chosen reps gather at the tail
    for (std::int64_t c = 0; c < k; ++c) {
      const auto pick =
          std::size_t(rng.below(std::uint64_t(blocks - c)));
      std::swap(reps[pick], reps[std::size_t(blocks - 1 - c)]);
    }
    const std::int64_t root = find(reps[std::size_t(blocks - k)]);
    for (std::int64_t c = 1; c < k; ++c) {
      parent[std::size_t(find(reps[std::size_t(blocks - k + c)]))] = root;
    }
    // keep one representative for the merged block
    reps[std::size_t(blocks - k)] = root;
    return blocks - (k - 1);
  }

  template <typename Find>
  void advance_watermark(Find& find, std::int64_t& watermark, double time,
                         PartitionResult& out,
                         std::vector<std::int64_t>& resting) const {
    const std::int64_t before = watermark;
    const std::int64_t root1 = find(1);
    while (watermark < n_ && find(watermark + 1) == root1) ++watermark;
    if (watermark != before) {
      for (std::int64_t v = before + 1; v <= watermark; ++v) {
        out.depth[std::size_t(v - 2)] = time;
      }
      resting.push_back(watermark);
    }
  }

  BlockChainModel model_;
  std::int64_t n_;
};

inline PartitionResult sim_partition_coalescent(const SimConfig& cfg,
                                                std::uint64_t replica = 0) {
  PartitionSimulator sim(cfg.measure, cfg.n);
  ReplicaRng rng(cfg.seed, replica);
  return sim.run(rng);
}

// ---------------------------------------------------------------------------
// Fixation line
// ---------------------------------------------------------------------------

// Shared tables for fixation-line replicas (Beta: eta sampler + totals;
// generic: per-level jump rows truncated at the cap).
class FixationLineModel {
 public:
  FixationLineModel(const LambdaMeasure& measure, std::int64_t cap)
      : measure_(measure), totals_(measure), cap_(cap) {
    if (cap < 1) throw std::domain_error("FixationLineModel: cap must be >= 1");
    totals_.ensure_totals(cap_ + 1);
    if (measure.is_beta()) {
      eta_ = std::make_unique<EtaSampler>(measure.alpha());
    } else {
      if (cap_ > 2048) {
        throw std::domain_error(
            "FixationLineModel: generic-measure fixation lines are limited "
            "to caps <= 2048");
      }
      rows_.resize(std::size_t(cap_) + 1);
      for (std::int64_t i = 1; i <= cap_; ++i) {
        auto& row = rows_[std::size_t(i)];
        const double total = totals_.total(i + 1);
        row.reserve(std::size_t(cap_ - i + 1));
        double acc = 0.0;
        for (std::int64_t d = 1; d <= cap_ - i + 1; ++d) {
          acc += fixation_rate(measure_, i, i + d) / total;
          row.push_back(acc);
        }
      }
    }
  }

  double total_rate_leaving(std::int64_t i) const {
    return totals_.total(i + 1);
  }

  // Jump size from level i.  Generic jumps overshooting the cap are clamped
  // to land just past it (the run is over at that point either way).
  std::int64_t jump_size(std::int64_t i, ReplicaRng& rng) const {
    if (eta_) return eta_->sample(rng);
    const auto& row = rows_[std::size_t(i)];
    const double u = rng.uniform();
    const auto it = std::lower_bound(row.begin(), row.end(), u);
    return std::int64_t(it - row.begin()) + 1;
  }

  std::int64_t cap() const { return cap_; }

 private:
  LambdaMeasure measure_;
  RateTable totals_;
  std::int64_t cap_;
  std::unique_ptr<EtaSampler> eta_;
  std::vector<std::vector<double>> rows_;  // generic: cumulative jump law
};

inline Trajectory sim_fixation_line(const SimConfig& cfg, std::int64_t start,
                                    std::uint64_t replica = 0) {
  const std::int64_t cap = cfg.level_cap > 0 ? cfg.level_cap : cfg.n;
  if (start < 1 || cap < start) {
    throw std::domain_error("sim_fixation_line: need 1 <= start <= cap");
  }
  FixationLineModel model(cfg.measure, cap);
  ReplicaRng rng(cfg.seed, replica);
  Trajectory tr;
  tr.states.push_back(start);
  std::int64_t level = start;
  while (level < cap) {
    const double hold = rng.exponential(model.total_rate_leaving(level));
    level += model.jump_size(level, rng);
    tr.total_time += hold;
    tr.holding_times.push_back(hold);
    tr.states.push_back(level);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Lookdown construction restricted to the lowest N levels
// ---------------------------------------------------------------------------

struct LookdownEvent {
  double time;
  std::int32_t participants;  // k = number of levels hit
  std::int32_t min_level;
};

struct LookdownResult {
  std::vector<LookdownEvent> events;
  std::vector<std::int32_t> ancestors;  // final A[1..N]
  // After every event, the ancestor set of each prefix of levels is an
  // integer interval {1..m}.  Children are inserted at the scattered
  // participant levels, so A itself is not monotone; this prefix-interval
  // property is what survives, and it is exactly what makes the depth and
  // the fixation-line hitting time two readings of one event.
  bool prefix_closed = true;
  // per-event equality of the two readings for the requested start levels:
  // "more than j ancestral blocks among 1..n" vs "fixation line from j
  // still below n", computed by independent scans
  bool coupling_consistent = true;
  // fixation-line paths for requested start levels: L_j after each event
  std::vector<std::vector<std::int32_t>> fixation_paths;
};

// The restriction of the lookdown graph to its lowest N levels is an
// autonomous Markov process: events hit k >= 2 of the N levels at the rate
// of a k-merge of the block counting process at state N.  Levels in the
// chosen set adopt the ancestor of its minimum; the rest shift up in order;
// anything pushed past N is discarded.
class LookdownSimulator {
 public:
  LookdownSimulator(const LambdaMeasure& measure, std::int64_t levels)
      : model_(measure), n_(levels) {
    if (levels < 2) {
      throw std::domain_error("LookdownSimulator: need at least 2 levels");
    }
    model_.warm(levels);
  }

  LookdownResult run(double horizon, ReplicaRng& rng,
                     const std::vector<std::int64_t>& fixation_starts = {})
      const {
    LookdownResult out;
    std::vector<std::int32_t> a(static_cast<std::size_t>(n_));
    for (std::int64_t i = 0; i < n_; ++i) a[std::size_t(i)] = std::int32_t(i + 1);
    std::vector<std::int32_t> next(a.size());
    std::vector<std::int64_t> chosen;
    out.fixation_paths.resize(fixation_starts.size());

    const double event_rate = model_.total_rate_at(n_);
    double time = 0.0;
    while (true) {
      time += rng.exponential(event_rate);
      if (time > horizon) break;
      // k levels participate, k drawn as a block-counting merge size at N
      const std::int64_t dest = model_.sampler().jump_from(n_, rng);
      const std::int64_t k = n_ - dest + 1;
      sample_levels(k, rng, chosen);

      const std::int32_t parent_anc = a[std::size_t(chosen.front() - 1)];
      std::size_t ci = 0;
      std::int64_t seen = 0;
      for (std::int64_t lvl = 1; lvl <= n_; ++lvl) {
        if (ci < chosen.size() && chosen[ci] == lvl) {
          next[std::size_t(lvl - 1)] = parent_anc;
          ++ci;
          ++seen;
        } else {
          const std::int64_t shift = std::max<std::int64_t>(seen - 1, 0);
          next[std::size_t(lvl - 1)] = a[std::size_t(lvl - shift - 1)];
        }
      }
      a.swap(next);

      out.events.push_back(
          {time, std::int32_t(k), std::int32_t(chosen.front())});
      if (a[0] != 1 || !prefix_closed(a)) out.prefix_closed = false;
      for (std::size_t s = 0; s < fixation_starts.size(); ++s) {
        const std::int64_t j = fixation_starts[s];
        out.fixation_paths[s].push_back(fixation_level(a, j));
        // depth reading: more than j distinct ancestors among 1..n
        // fixation reading: level j+1 reached within the first n levels
        for (std::int64_t n = j + 1; n <= n_; ++n) {
          const bool deep = distinct_ancestors(a, n) > j;
          const bool below = fixation_level(a, j) < n;
          if (deep != below) out.coupling_consistent = false;
        }
      }
    }
    out.ancestors = std::move(a);
    return out;
  }

  // L_j = (min{ i : A[i] >= j+1 }) - 1, or N if no such level.  A is not
  // sorted (children sit at the scattered participant levels), so scan.
  static std::int32_t fixation_level(const std::vector<std::int32_t>& a,
                                     std::int64_t j) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= std::int32_t(j) + 1) return std::int32_t(i);
    }
    return std::int32_t(a.size());
  }

  static std::int64_t distinct_ancestors(const std::vector<std::int32_t>& a,
                                         std::int64_t n) {
    std::int32_t mx = 0;
    for (std::int64_t i = 0; i < n; ++i) mx = std::max(mx, a[std::size_t(i)]);
    // by the prefix-interval property the distinct count equals the max;
    // count explicitly so the check stays independent of that property
    std::vector<bool> seen(std::size_t(mx) + 1, false);
    std::int64_t distinct = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!seen[std::size_t(a[std::size_t(i)])]) {
        seen[std::size_t(a[std::size_t(i)])] = true;
        ++distinct;
      }
    }
    return distinct;
  }

 private:
  // Ancestor set of every prefix of levels is exactly {1..max}.
  static bool prefix_closed(const std::vector<std::int32_t>& a) {
    std::vector<bool> seen(a.size() + 2, false);
    std::int64_t distinct = 0;
    std::int32_t mx = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::int32_t v = a[i];
      if (v < 1 || v > std::int32_t(a.size())) return false;
      if (!seen[std::size_t(v)]) {
        seen[std::size_t(v)] = true;
        ++distinct;
      }
      mx = std::max(mx, v);
      if (distinct != mx) return false;
    }
    return true;
  }

  void sample_levels(std::int64_t k, ReplicaRng& rng,
                     std::vector<std::int64_t>& chosen) const {
    scratch_.resize(std::size_t(n_));
    std::iota(scratch_.begin(), scratch_.end(), 1);
    chosen.clear();
    for (std::int64_t c = 0; c < k; ++c) {
      const auto pick = std::size_t(rng.below(std::uint64_t(n_ - c)));
      std::swap(scratch_[pick], scratch_[std::size_t(n_ - 1 - c)]);
      chosen.push_back(scratch_[std::size_t(n_ - 1 - c)]);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  BlockChainModel model_;
  std::int64_t n_;
  mutable std::vector<std::int64_t> scratch_;
};

inline LookdownResult sim_lookdown(const SimConfig& cfg,
                                   const std::vector<std::int64_t>& starts = {},
                                   std::uint64_t replica = 0) {
  if (cfg.horizon <= 0.0) {
    throw std::domain_error("sim_lookdown: horizon must be positive");
  }
  LookdownSimulator sim(cfg.measure, cfg.n);
  ReplicaRng rng(cfg.seed, replica);
  return sim.run(cfg.horizon, rng, starts);
}

// ---------------------------------------------------------------------------
// Branching representation (Bolthausen-Sznitman case)
// ---------------------------------------------------------------------------

struct BranchingResult {
  double population = 1.0;
  double growth_statistic = 0.0;  // e^{-t} log population
  bool truncated = false;
};

// Fixation line at alpha = 1 run as the equivalent branching chain: from
// size L the next event comes at rate L and adds floor(1/U) individuals.
inline BranchingResult sim_bs_branching(const SimConfig& cfg, double t,
                                        std::uint64_t replica = 0) {
  if (!cfg.measure.is_beta() || cfg.measure.alpha() != 1.0) {
    throw std::domain_error("sim_bs_branching: requires the alpha = 1 case");
  }
  if (t < 0.0) throw std::domain_error("sim_bs_branching: t must be >= 0");
  ReplicaRng rng(cfg.seed, replica);
  BranchingResult out;
  std::int64_t pop = 1;
  double time = 0.0;
  while (true) {
    const double dt = rng.exponential(double(pop));
    if (time + dt > t) break;
    time += dt;
    const double u = rng.uniform_pos();
    pop += std::max<std::int64_t>(1, std::int64_t(1.0 / u));
    if (std::uint64_t(pop) > cfg.population_cap) {
      out.truncated = true;
      break;
    }
  }
  out.population = double(pop);
  out.growth_statistic = std::exp(-t) * std::log(double(pop));
  return out;
}

// Exact draw from the law of the branching population at time t, using the
// explicit generating function 1 - (1-s)^(e^-t) of the chain started at 1:
// survival P(L > k) = Gamma(k+1-p) / (Gamma(1-p) Gamma(k+1)) with p = e^-t.
// Used where jump-by-jump simulation is infeasible (the number of jumps to
// time t has infinite expectation); agrees in law with sim_bs_branching.
inline double bs_population_at(double t, ReplicaRng& rng) {
  const double p = std::exp(-t);
  const double lg1p = std::lgamma(1.0 - p);
  auto log_survival = [&](double k) {
    // beyond ~1e8 the direct lgamma difference cancels; the survival is
    // k^-p / Gamma(1-p) to relative O(1/k) there
    if (k > 1e8) return -p * std::log(k) - lg1p;
    return std::lgamma(k + 1.0 - p) - lg1p - std::lgamma(k + 1.0);
  };
  const double v = rng.uniform_pos();  // target survival level
  const double lv = std::log(v);
  if (log_survival(1.0) <= lv) return 1.0;
  // bracket the crossing of survival(k) = v on a doubling grid, then bisect
  double lo = 1.0, hi = 2.0;
  while (log_survival(hi) > lv) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  while (hi - lo > 1.0 && (hi - lo) > 1e-12 * hi) {
    const double mid = lo + (hi - lo) / 2.0;
    (log_survival(mid) > lv ? lo : hi) = mid;
  }
  return std::ceil(hi);
}

// Centered depth sample tau_1^n - log log n for the alpha = 1 coalescent.
inline double sim_bs_depth_sample(const BlockChainModel& model, std::int64_t n,
                                  ReplicaRng& rng) {
  const double tau =
      model.run(n, 1, rng, [](std::int64_t, std::int64_t, double) {});
  return tau - std::log(std::log(double(n)));
}

}  // namespace coalesce
