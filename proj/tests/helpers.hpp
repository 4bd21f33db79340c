#ifndef RUINKIT_TESTS_HELPERS_HPP
#define RUINKIT_TESTS_HELPERS_HPP

#include <algorithm>
#include <set>
#include <vector>

#include "ruinkit/absorbing.hpp"
#include "ruinkit/graph.hpp"
#include "ruinkit/models.hpp"
#include "ruinkit/montecarlo.hpp"

namespace ruinkit::testing {

// Random connected subset of a graph grown by uniformly picking frontier
// vertices; fixed seed makes the subdomain reproducible.
inline std::vector<int> random_connected_subset(const WeightedGraph& g, int target_size,
                                                std::uint64_t seed) {
  SplitMix64 rng(seed);
  int start = static_cast<int>(rng.below(static_cast<std::uint32_t>(g.size())));
  std::set<int> chosen{start};
  std::vector<int> frontier;
  for (int w : g.neighbors(start)) frontier.push_back(w);
  while (static_cast<int>(chosen.size()) < target_size && !frontier.empty()) {
    std::uint32_t pick = rng.below(static_cast<std::uint32_t>(frontier.size()));
    int v = frontier[pick];
    frontier.erase(frontier.begin() + pick);
    if (chosen.count(v)) continue;
    chosen.insert(v);
    for (int w : g.neighbors(v))
      if (!chosen.count(w)) frontier.push_back(w);
  }
  return std::vector<int>(chosen.begin(), chosen.end());
}

// Truncated Neumann series sum_{t<=T} K_U^t(x, .), an oracle for the Green's
// function that never touches a linear solver.
inline Eigen::VectorXd neumann_series_row(const SubKernel& sub, int x, long long steps) {
  Eigen::VectorXd walk = Eigen::VectorXd::Zero(sub.size());
  walk(sub.dom->local(x)) = 1.0;
  Eigen::VectorXd acc = walk;
  for (long long t = 1; t <= steps; ++t) {
    walk = sub.apply_transpose(walk);
    acc += walk;
  }
  return acc;
}

// Interior vertices of a lattice patch at given coordinates.
inline int at(const WeightedGraph& g, std::initializer_list<int> coords) {
  for (int v = 0; v < g.size(); ++v) {
    auto c = g.coords_of(v);
    bool eq = static_cast<int>(coords.size()) == g.coord_dim;
    int i = 0;
    for (int want : coords) eq = eq && c[i++] == want;
    if (eq) return v;
  }
  throw std::runtime_error("no vertex at coordinates");
}

}  // namespace ruinkit::testing

#endif
