#ifndef RUINKIT_GRAPH_HPP
#define RUINKIT_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruinkit/errors.hpp"

namespace ruinkit {

using VertexId = std::int64_t;

constexpr double kRowSumTol = 1e-12;

// Finite weighted graph (X, E, pi, mu). Vertices carry opaque external ids and
// optional integer lattice coordinates attached by the model generators.
// mu is stored once per unordered edge, mirrored into a CSR adjacency for
// O(deg) row walks. Immutable after construction; all queries are const.
struct WeightedGraph {
  std::vector<VertexId> ids;            // external id per internal index
  std::vector<double> pi;               // vertex weights, > 0
  int coord_dim = 0;                    // 0 when no coordinates are attached
  std::vector<int> coords;              // size() * coord_dim, row-major

  std::vector<std::int64_t> adj_offset;  // size()+1
  std::vector<int> adj;                  // neighbor internal index
  std::vector<double> adj_mu;            // mu for the half-edge, symmetric

  // Vertices on the geometric rim of a stored lattice patch. Balls that reach
  // the rim are incomplete relative to the infinite lattice the patch samples.
  std::vector<char> patch_border;

  std::unordered_map<VertexId, int> id_to_index;

  int size() const { return static_cast<int>(pi.size()); }

  int index_of(VertexId id) const {
    auto it = id_to_index.find(id);
    require(it != id_to_index.end(), errc::bad_input,
            "unknown vertex id " + std::to_string(id));
    return it->second;
  }

  int degree(int v) const { return static_cast<int>(adj_offset[v + 1] - adj_offset[v]); }

  std::span<const int> neighbors(int v) const {
    return {adj.data() + adj_offset[v], static_cast<size_t>(degree(v))};
  }
  std::span<const double> neighbor_mu(int v) const {
    return {adj_mu.data() + adj_offset[v], static_cast<size_t>(degree(v))};
  }

  double mu(int u, int v) const {
    auto nb = neighbors(u);
    auto mw = neighbor_mu(u);
    for (size_t i = 0; i < nb.size(); ++i)
      if (nb[i] == v) return mw[i];
    return 0.0;
  }

  std::span<const int> coords_of(int v) const {
    if (coord_dim == 0) return {};
    return {coords.data() + static_cast<size_t>(v) * coord_dim, static_cast<size_t>(coord_dim)};
  }

  bool is_border(int v) const {
    if (!patch_border.empty()) return patch_border[v] != 0;
    return degree(v) < max_degree_;
  }

  // Deterministic vertex order: lexicographic on coordinates when attached,
  // otherwise by external id. Used for all tie-breaking rules.
  bool lex_less(int a, int b) const {
    if (coord_dim > 0) {
      auto ca = coords_of(a), cb = coords_of(b);
      for (int i = 0; i < coord_dim; ++i) {
        if (ca[i] != cb[i]) return ca[i] < cb[i];
      }
      return false;
    }
    return ids[a] < ids[b];
  }

  int max_degree_ = 0;
};

class GraphBuilder {
 public:
  // Returns the internal index of the new vertex.
  int add_vertex(VertexId id, double pi_value, std::vector<int> coordinates = {}) {
    require(pi_value > 0.0, errc::bad_input, "pi must be strictly positive");
    auto [it, inserted] = g_.id_to_index.emplace(id, g_.size());
    require(inserted, errc::bad_input, "duplicate vertex id " + std::to_string(id));
    g_.ids.push_back(id);
    g_.pi.push_back(pi_value);
    if (!coordinates.empty()) {
      if (g_.coord_dim == 0 && g_.size() == 1) g_.coord_dim = static_cast<int>(coordinates.size());
      require(static_cast<int>(coordinates.size()) == g_.coord_dim, errc::bad_input,
              "inconsistent coordinate dimension");
      g_.coords.insert(g_.coords.end(), coordinates.begin(), coordinates.end());
    } else {
      require(g_.coord_dim == 0, errc::bad_input, "missing coordinates");
    }
    return g_.size() - 1;
  }

  void add_edge(int u, int v, double mu_value) {
    require(u != v, errc::bad_input, "self loops are not allowed");
    require(u >= 0 && v >= 0 && u < g_.size() && v < g_.size(), errc::bad_input,
            "edge endpoint out of range");
    require(mu_value > 0.0, errc::bad_input, "mu must be strictly positive");
    auto key = canonical(u, v);
    auto it = edge_mu_.find(key);
    if (it != edge_mu_.end()) {
      // The same unordered pair may be listed twice in an input file; the
      // weights have to agree or mu would not be a well-defined symmetric map.
      require(it->second == mu_value, errc::non_symmetric_mu,
              "edge listed twice with different mu");
      return;
    }
    edge_mu_.emplace(key, mu_value);
  }

  void add_edge_by_id(VertexId u, VertexId v, double mu_value) {
    add_edge(g_.index_of(u), g_.index_of(v), mu_value);
  }

  void set_border(int v) { border_.push_back(v); }

  WeightedGraph build() {
    const int n = g_.size();
    require(n > 0, errc::bad_input, "graph has no vertices");

    std::vector<int> deg(n, 0);
    for (const auto& [key, mu] : edge_mu_) {
      ++deg[static_cast<int>(key >> 32)];
      ++deg[static_cast<int>(key & 0xffffffffu)];
    }
    g_.adj_offset.assign(n + 1, 0);
    for (int v = 0; v < n; ++v) g_.adj_offset[v + 1] = g_.adj_offset[v] + deg[v];
    g_.adj.assign(g_.adj_offset[n], -1);
    g_.adj_mu.assign(g_.adj_offset[n], 0.0);

    // Deterministic adjacency: rows sorted by neighbor index.
    std::vector<std::pair<std::uint64_t, double>> edges(edge_mu_.begin(), edge_mu_.end());
    std::sort(edges.begin(), edges.end());
    rebuild_rows(edges, deg);

    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (double m : g_.neighbor_mu(v)) s += m;
      // float-level slack: derived graphs (e.g. Doob-transformed weights) hit
      // the equality case of cond-pimu up to round-off
      require(s <= g_.pi[v] * (1.0 + 1e-11), errc::negative_holding,
              "sum of mu exceeds pi at vertex " + std::to_string(g_.ids[v]));
      g_.max_degree_ = std::max(g_.max_degree_, deg[v]);
    }
    require_connected();

    if (!border_.empty()) {
      g_.patch_border.assign(n, 0);
      for (int v : border_) g_.patch_border[v] = 1;
    }
    return std::move(g_);
  }

 private:
  static std::uint64_t canonical(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
  }

  void rebuild_rows(const std::vector<std::pair<std::uint64_t, double>>& edges,
                    const std::vector<int>& deg) {
    const int n = g_.size();
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (int v = 0; v < n; ++v) rows[v].reserve(deg[v]);
    for (const auto& [key, mu] : edges) {
      int u = static_cast<int>(key >> 32);
      int v = static_cast<int>(key & 0xffffffffu);
      rows[u].emplace_back(v, mu);
      rows[v].emplace_back(u, mu);
    }
    for (int v = 0; v < n; ++v) {
      std::sort(rows[v].begin(), rows[v].end());
      auto base = g_.adj_offset[v];
      for (size_t i = 0; i < rows[v].size(); ++i) {
        g_.adj[base + i] = rows[v][i].first;
        g_.adj_mu[base + i] = rows[v][i].second;
      }
    }
  }

  void require_connected() const {
    const int n = g_.size();
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : g_.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          queue.push_back(w);
        }
      }
    }
    require(reached == n, errc::disconnected, "graph is not connected");
  }

  WeightedGraph g_;
  std::unordered_map<std::uint64_t, double> edge_mu_;
  std::vector<int> border_;
};

// Markov kernel induced by (pi, mu): off-diagonal mu_xy/pi(x), diagonal
// holding 1 - sum_y mu_xy/pi(x). Rows are stochastic and (K, pi) is in
// detailed balance because pi(x)K(x,y) = mu_xy on both sides.
struct MarkovKernel {
  const WeightedGraph* graph = nullptr;
  std::vector<double> holding;

  double prob(int x, int y) const {
    if (x == y) return holding[x];
    return graph->mu(x, y) / graph->pi[x];
  }

  // Visits every nonzero row entry including the diagonal when positive.
  template <typename Fn>
  void for_each_entry(int x, Fn&& fn) const {
    if (holding[x] > 0.0) fn(x, holding[x]);
    auto nb = graph->neighbors(x);
    auto mw = graph->neighbor_mu(x);
    for (size_t i = 0; i < nb.size(); ++i) fn(nb[i], mw[i] / graph->pi[x]);
  }

  double row_sum(int x) const {
    double s = holding[x];
    for (double m : graph->neighbor_mu(x)) s += m / graph->pi[x];
    return s;
  }
};

inline MarkovKernel build_kernel(const WeightedGraph& graph) {
  MarkovKernel k;
  k.graph = &graph;
  k.holding.resize(graph.size());
  for (int x = 0; x < graph.size(); ++x) {
    double s = 0.0;
    for (double m : graph.neighbor_mu(x)) s += m;
    double h = 1.0 - s / graph.pi[x];
    require(h >= -1e-11, errc::negative_holding,
            "negative holding probability at vertex " + std::to_string(graph.ids[x]));
    k.holding[x] = std::max(h, 0.0);
    require(std::abs(k.row_sum(x) - 1.0) <= 1e-11, errc::negative_holding,
            "kernel row does not sum to one");
  }
  return k;
}

// BFS distances from `from`, capped at `radius` when radius >= 0 (-1 beyond).
inline std::vector<std::int32_t> bfs_distances(const WeightedGraph& g, int from,
                                               int radius = -1) {
  std::vector<std::int32_t> dist(g.size(), -1);
  std::deque<int> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (radius >= 0 && dist[v] >= radius) continue;
    for (int w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

inline int graph_distance(const WeightedGraph& g, int x, int y) {
  if (x == y) return 0;
  std::vector<std::int32_t> dist(g.size(), -1);
  std::deque<int> queue{x};
  dist[x] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(v)) {
      if (dist[w] < 0) {
        if (w == y) return dist[v] + 1;
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  fail(errc::disconnected, "no path between vertices");
}

// B(x,r) = {y : d(x,y) <= r}, sorted by internal index.
inline std::vector<int> ball(const WeightedGraph& g, int x, int r) {
  require(r >= 0, errc::bad_input, "ball radius must be nonnegative");
  auto dist = bfs_distances(g, x, r);
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (dist[v] >= 0) out.push_back(v);
  return out;
}

inline double ball_volume(const WeightedGraph& g, const std::vector<int>& b) {
  double s = 0.0;
  for (int v : b) s += g.pi[v];
  return s;
}

namespace detail {
inline bool ball_touches_border(const WeightedGraph& g, int x, int r) {
  auto dist = bfs_distances(g, x, r);
  for (int v = 0; v < g.size(); ++v)
    if (dist[v] >= 0 && g.is_border(v)) return true;
  return false;
}
}  // namespace detail

// Verified doubling constant max pi(B(x,2r))/pi(B(x,r)) over the supplied
// centers and radii. The definition quantifies over all scales and locations;
// callers choose the sample and the report says only what was checked.
inline double doubling_constant(const WeightedGraph& g, const std::vector<int>& centers,
                                const std::vector<int>& radii) {
  double worst = 1.0;
  for (int x : centers) {
    for (int r : radii) {
      require(r >= 1, errc::bad_input, "doubling radii must be >= 1");
      require(!detail::ball_touches_border(g, x, 2 * r), errc::ball_truncated,
              "B(x,2r) reaches the stored patch edge");
      auto dist = bfs_distances(g, x, 2 * r);
      double small = 0.0, big = 0.0;
      for (int v = 0; v < g.size(); ++v) {
        if (dist[v] < 0) continue;
        big += g.pi[v];
        if (dist[v] <= r) small += g.pi[v];
      }
      worst = std::max(worst, big / small);
    }
  }
  return worst;
}

// Smallest C with sum_B |f-f_B|^2 pi <= C r^theta sum_{edges in B} |df|^2 mu,
// i.e. the reciprocal of the smallest nonzero eigenvalue of the Neumann-type
// pencil (edge Laplacian restricted to B, vertex weights pi) times r^{-theta}.
// Dense solve; refuses balls larger than `dense_cap`.
inline double poincare_constant(const WeightedGraph& g, int center, int r, double theta = 2.0,
                                int dense_cap = 2000) {
  auto b = ball(g, center, r);
  const int m = static_cast<int>(b.size());
  if (m == 1) return 0.0;  // DegenerateBall: no constraint
  require(m <= dense_cap, errc::ball_too_large,
          "ball has " + std::to_string(m) + " vertices, dense cap is " + std::to_string(dense_cap));

  std::vector<int> local(g.size(), -1);
  for (int i = 0; i < m; ++i) local[b[i]] = i;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    int v = b[i];
    auto nb = g.neighbors(v);
    auto mw = g.neighbor_mu(v);
    for (size_t e = 0; e < nb.size(); ++e) {
      int j = local[nb[e]];
      if (j < 0) continue;  // edge leaves the ball
      lap(i, i) += mw[e];
      lap(i, j) -= mw[e];
    }
  }
  Eigen::VectorXd weight(m);
  for (int i = 0; i < m; ++i) weight(i) = g.pi[b[i]];

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      lap, weight.asDiagonal().toDenseMatrix());
  require(solver.info() == Eigen::Success, errc::solver_failure, "generalized eigensolve failed");
  // eigenvalues ascending; lambda_0 = 0 for the constants (ball connected)
  double lambda1 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (solver.eigenvalues()(i) > 1e-12) {
      lambda1 = solver.eigenvalues()(i);
      break;
    }
  }
  require(lambda1 > 0.0, errc::solver_failure, "ball subgraph is disconnected");
  return 1.0 / (lambda1 * std::pow(static_cast<double>(r), theta));
}

// Ellipticity constant P_e: smallest P with pi(x) <= P mu_xy over all incident
// vertex/edge pairs, i.e. max of pi(x)/mu_xy.
struct EllipticityReport {
  double p_e = 1.0;
  bool satisfied_at(double threshold) const { return p_e <= threshold; }
};

inline EllipticityReport ellipticity(const WeightedGraph& g) {
  EllipticityReport rep;
  for (int x = 0; x < g.size(); ++x) {
    for (double m : g.neighbor_mu(x)) rep.p_e = std::max(rep.p_e, g.pi[x] / m);
  }
  return rep;
}

}  // namespace ruinkit

#endif
