#ifndef RUINKIT_MONTECARLO_HPP
#define RUINKIT_MONTECARLO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ruinkit/absorbing.hpp"
#include "ruinkit/domain.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"
#include "ruinkit/models.hpp"
#include "ruinkit/threads.hpp"

namespace ruinkit {

// Counter-based randomness: every sample owns the stream derived from
// (seed, sample index), so parallel execution cannot reorder draws and the
// tallies are bit-identical for any thread count.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}
  static SplitMix64 for_sample(std::uint64_t seed, std::uint64_t index) {
    // hash the label through the finalizer so per-sample streams start on
    // unrelated orbits; consecutive labels would otherwise share their draw
    // sequences shifted by one
    SplitMix64 g(seed + 0x9E3779B97F4A7C15ull * (index + 1));
    return SplitMix64(g.next());
  }

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  // unbiased-enough index draw via multiply-shift
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }
};

// Walker alias table for one kernel row; O(1) per step.
struct AliasTable {
  std::vector<int> outcome;    // ambient vertex per slot
  std::vector<int> alias;
  std::vector<double> accept;

  static AliasTable build(const std::vector<std::pair<int, double>>& row) {
    const int n = static_cast<int>(row.size());
    AliasTable t;
    t.outcome.resize(n);
    t.alias.resize(n);
    t.accept.assign(n, 1.0);
    std::vector<double> scaled(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += row[i].second;
    for (int i = 0; i < n; ++i) {
      t.outcome[i] = row[i].first;
      scaled[i] = row[i].second * n / total;
    }
    std::vector<int> small, large;
    for (int i = n - 1; i >= 0; --i) (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      int s = small.back();
      small.pop_back();
      int l = large.back();
      t.accept[s] = scaled[s];
      t.alias[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (int i : small) t.accept[i] = 1.0;
    for (int i : large) t.accept[i] = 1.0;
    return t;
  }

  int sample(SplitMix64& rng) const {
    std::uint32_t slot = rng.below(static_cast<std::uint32_t>(outcome.size()));
    if (rng.uniform() < accept[slot]) return outcome[slot];
    return outcome[alias[slot]];
  }
};

enum class RecordKind { ExitPoint, ExitHalfEdge, FirstElimination, ExitTime };

struct SimConfig {
  long long samples = 1;
  std::uint64_t seed = 0;
  long long max_steps = -1;  // -1: 100 * T_U estimate supplied by the caller
  RecordKind record = RecordKind::ExitPoint;

  void validate() const {
    require(samples >= 1, errc::bad_input, "need at least one sample");
  }
};

struct EmpiricalCell {
  int y = -1;
  int z = -1;             // half-edge records only
  std::string label;      // first-elimination records only
  long long count = 0;
  double frequency = 0.0;
};

struct EmpiricalExit {
  long long samples = 0;
  long long completed = 0;
  long long censored = 0;  // hit the step cap; never folded into exit counts
  std::vector<EmpiricalCell> cells;
  std::vector<long long> tau_histogram;  // by exit time, when recorded

  double frequency(int y, int z = -1) const {
    for (const auto& c : cells)
      if (c.y == y && (z < 0 || c.z == z)) return c.frequency;
    return 0.0;
  }

  // Total variation against an exact distribution, conditioning on completed
  // runs: (1/2) sum |hat p - p|.
  double tv_distance(const ExitDistribution& exact) const {
    double tv = 0.0;
    for (const auto& e : exact.entries) {
      double emp = 0.0;
      for (const auto& c : cells)
        if (c.y == e.y && (exact.over == BoundaryKind::Outer || c.z == e.z)) emp += c.frequency;
      tv += std::abs(emp - e.p);
    }
    return 0.5 * tv;
  }

  // Wilson score interval for one cell at z standard normal quantiles.
  std::pair<double, double> wilson(const EmpiricalCell& cell, double z = 1.96) const {
    double n = static_cast<double>(completed);
    if (n == 0) return {0.0, 1.0};
    double p = static_cast<double>(cell.count) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
  }
};

namespace detail {

struct WalkTables {
  std::vector<AliasTable> rows;       // per local index of U
  std::vector<int> local_of;          // ambient -> local or -1
};

inline WalkTables build_walk_tables(const MarkovKernel& kernel, const Domain& dom) {
  WalkTables t;
  t.local_of = dom.local_of;
  t.rows.resize(dom.size());
  for (int i = 0; i < dom.size(); ++i) {
    std::vector<std::pair<int, double>> row;
    kernel.for_each_entry(dom.u[i], [&](int y, double p) { row.emplace_back(y, p); });
    t.rows[i] = AliasTable::build(row);
  }
  return t;
}

}  // namespace detail

// Runs the chain from x until it leaves U (or hits the step cap) and tallies
// the exit location; with ExitHalfEdge the previous state is recorded too,
// with ExitTime the histogram of tau is kept. Censored runs are counted
// separately and excluded from frequencies.
inline EmpiricalExit simulate_exits(const MarkovKernel& kernel, const Domain& dom, int x,
                                    const SimConfig& config, double t_u_hint = -1.0) {
  config.validate();
  require(dom.contains(x), errc::bad_input, "start vertex must lie in U");
  long long cap = config.max_steps;
  if (cap < 0) {
    require(t_u_hint > 0.0, errc::bad_input,
            "max_steps unset and no T_U estimate supplied for the default cap");
    cap = static_cast<long long>(100.0 * t_u_hint) + 1;
  }

  auto tables = detail::build_walk_tables(kernel, dom);
  const int start_local = dom.local(x);
  const bool record_half_edge = config.record == RecordKind::ExitHalfEdge;
  const bool record_time = config.record == RecordKind::ExitTime;

  struct Tally {
    std::map<std::pair<int, int>, long long> exits;  // (y, z or -1) -> count
    std::vector<long long> hist;
    long long censored = 0;
  };
  long long n_chunks_hint = std::max<long long>(1, std::min<long long>(thread_count(), config.samples));
  std::vector<Tally> tallies(static_cast<size_t>(n_chunks_hint));
  if (record_time)
    for (auto& t : tallies) t.hist.assign(static_cast<size_t>(cap) + 1, 0);

  parallel_chunks(config.samples, [&](int chunk, long long begin, long long end) {
    Tally& tally = tallies[chunk];
    for (long long s = begin; s < end; ++s) {
      SplitMix64 rng = SplitMix64::for_sample(config.seed, static_cast<std::uint64_t>(s));
      int state = dom.u[start_local];
      int prev = state;
      long long steps = 0;
      while (steps < cap) {
        prev = state;
        state = tables.rows[tables.local_of[state]].sample(rng);
        ++steps;
        if (tables.local_of[state] < 0) break;
      }
      if (tables.local_of[state] >= 0) {
        ++tally.censored;
        continue;
      }
      ++tally.exits[{state, record_half_edge ? prev : -1}];
      if (record_time) ++tally.hist[steps];
    }
  });

  EmpiricalExit out;
  out.samples = config.samples;
  std::map<std::pair<int, int>, long long> merged;
  for (const auto& t : tallies) {
    out.censored += t.censored;
    for (const auto& [key, c] : t.exits) merged[key] += c;
    if (record_time) {
      if (out.tau_histogram.empty()) out.tau_histogram.assign(t.hist.size(), 0);
      for (size_t i = 0; i < t.hist.size(); ++i) out.tau_histogram[i] += t.hist[i];
    }
  }
  out.completed = config.samples - out.censored;
  require(out.completed > 0, errc::all_censored, "every run hit the step cap");
  for (const auto& [key, c] : merged) {
    EmpiricalCell cell;
    cell.y = key.first;
    cell.z = key.second;
    cell.count = c;
    cell.frequency = static_cast<double>(c) / out.completed;
    out.cells.push_back(cell);
  }
  return out;
}

// Empirical CDF of tau_U: P(tau <= t) = (runs exiting by t) / completed.
inline double empirical_exit_cdf(const EmpiricalExit& e, long long t) {
  require(!e.tau_histogram.empty(), errc::bad_input, "simulation did not record exit times");
  long long acc = 0;
  long long hi = std::min<long long>(t, static_cast<long long>(e.tau_histogram.size()) - 1);
  for (long long s = 0; s <= hi; ++s) acc += e.tau_histogram[s];
  return static_cast<double>(acc) / e.completed;
}

inline EmpiricalExit exit_time_profile(const MarkovKernel& kernel, const Domain& dom, int x,
                                       SimConfig config, double t_u_hint = -1.0) {
  config.record = RecordKind::ExitTime;
  return simulate_exits(kernel, dom, x, config, t_u_hint);
}

// ---------------------------------------------------------------------------
// Three-player gambler's ruin
// ---------------------------------------------------------------------------

// Exit sides of the triangle map to the first-eliminated player:
// x1 = 0 -> A broke, x2 = 0 -> B broke, x1 + x2 = N -> C broke.
inline std::string eliminated_player(int N, std::span<const int> y) {
  if (y[0] == 0) return "A";
  if (y[1] == 0) return "B";
  if (y[0] + y[1] == N) return "C";
  fail(errc::bad_input, "not a boundary point of the triangle");
}

struct FirstEliminationResult {
  EmpiricalExit raw;
  double p_first[3] = {0.0, 0.0, 0.0};  // A, B, C
};

inline FirstEliminationResult first_elimination(int N, std::array<int, 3> start,
                                                const SimConfig& config) {
  require(start[0] + start[1] + start[2] == N, errc::bad_input,
          "player amounts must sum to N");
  require(start[0] > 0 && start[1] > 0 && start[2] > 0, errc::bad_input,
          "players must start solvent");
  ModelSpec spec;
  spec.kind = ModelKind::TriangleGame;
  spec.N = N;
  spec.margin = 1;
  Model model = generate(spec);
  MarkovKernel kernel = build_kernel(model.graph);

  SimConfig cfg = config;
  if (cfg.max_steps < 0) cfg.max_steps = 100ll * N * N;
  int x0 = model.vertex_at({start[0], start[1]});

  FirstEliminationResult out;
  out.raw = simulate_exits(kernel, model.domain, x0, cfg);
  for (auto& cell : out.raw.cells) {
    auto c = model.graph.coords_of(cell.y);
    cell.label = eliminated_player(N, c);
    int idx = cell.label == "A" ? 0 : cell.label == "B" ? 1 : 2;
    out.p_first[idx] += cell.frequency;
  }
  return out;
}

// Exact first-elimination probabilities from the absorbing solve: sum the
// harmonic measure over each of the three sides.
inline std::array<double, 3> first_elimination_exact(int N, std::array<int, 3> start) {
  require(start[0] + start[1] + start[2] == N, errc::bad_input,
          "player amounts must sum to N");
  ModelSpec spec;
  spec.kind = ModelKind::TriangleGame;
  spec.N = N;
  spec.margin = 1;
  Model model = generate(spec);
  MarkovKernel kernel = build_kernel(model.graph);
  SubKernel sub = restrict_kernel(kernel, model.domain);
  GreensFunction greens(sub);
  int x0 = model.vertex_at({start[0], start[1]});
  ExitDistribution exact = poisson_kernel(sub, greens, x0);
  std::array<double, 3> p{0.0, 0.0, 0.0};
  for (const auto& e : exact.entries) {
    auto c = model.graph.coords_of(e.y);
    std::string who = eliminated_player(N, c);
    p[who == "A" ? 0 : who == "B" ? 1 : 2] += e.p;
  }
  return p;
}

}  // namespace ruinkit

#endif
