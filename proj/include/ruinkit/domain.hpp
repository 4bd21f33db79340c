#ifndef RUINKIT_DOMAIN_HPP
#define RUINKIT_DOMAIN_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"

namespace ruinkit {

// A finite connected domain U and its three boundaries:
//   outer      dU  — vertices of X\U with a neighbor in U
//   extended   d*U — one point per dangling half-edge (z, y), z in U, y in dU
//   intrinsic  d.U — vertices of U whose kernel row leaks mass outside U
// Every extended boundary point is attached to exactly one interior vertex z
// and contracts onto exactly one outer point y.
struct Domain {
  const WeightedGraph* graph = nullptr;

  std::vector<int> u;               // sorted internal indices
  std::vector<int> outer_boundary;  // sorted
  struct HalfEdge {
    int z;  // interior endpoint
    int y;  // boundary endpoint
  };
  std::vector<HalfEdge> extended_boundary;  // sorted by (z, y)
  std::vector<int> intrinsic_boundary;      // sorted

  std::vector<char> in_u;          // mask over the ambient graph
  std::vector<int> local_of;       // ambient index -> local index in u, or -1
  std::vector<std::int32_t> clearance_u;  // d(x, X\U) per local index

  int size() const { return static_cast<int>(u.size()); }
  bool contains(int v) const { return in_u[v] != 0; }
  int local(int v) const {
    require(local_of[v] >= 0, errc::bad_input, "vertex is not in U");
    return local_of[v];
  }

  // nu(y): interior neighbors of a boundary point, sorted.
  std::span<const int> nu(int y) const {
    auto it = nu_index_.find(y);
    require(it != nu_index_.end(), errc::bad_input, "vertex is not on the outer boundary");
    return {nu_flat_.data() + it->second.first, static_cast<size_t>(it->second.second)};
  }

  int clearance(int v) const { return clearance_u[local(v)]; }

  double pi_of_u() const {
    double s = 0.0;
    for (int v : u) s += graph->pi[v];
    return s;
  }

  std::unordered_map<int, std::pair<int, int>> nu_index_;  // y -> (offset, count)
  std::vector<int> nu_flat_;
};

inline Domain build_domain(const WeightedGraph& graph, std::vector<int> u_set) {
  require(!u_set.empty(), errc::bad_input, "U must be nonempty");
  std::sort(u_set.begin(), u_set.end());
  u_set.erase(std::unique(u_set.begin(), u_set.end()), u_set.end());

  Domain d;
  d.graph = &graph;
  d.u = std::move(u_set);
  d.in_u.assign(graph.size(), 0);
  d.local_of.assign(graph.size(), -1);
  for (size_t i = 0; i < d.u.size(); ++i) {
    int v = d.u[i];
    require(v >= 0 && v < graph.size(), errc::bad_input, "U vertex out of range");
    d.in_u[v] = 1;
    d.local_of[v] = static_cast<int>(i);
  }

  // connectivity of (U, E_U)
  {
    std::vector<char> seen(graph.size(), 0);
    std::deque<int> queue{d.u[0]};
    seen[d.u[0]] = 1;
    size_t reached = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : graph.neighbors(v)) {
        if (d.in_u[w] && !seen[w]) {
          seen[w] = 1;
          ++reached;
          queue.push_back(w);
        }
      }
    }
    require(reached == d.u.size(), errc::disconnected_u, "(U, E_U) is not connected");
  }

  std::vector<char> on_boundary(graph.size(), 0);
  for (int z : d.u) {
    bool leaks = false;
    for (int w : graph.neighbors(z)) {
      if (!d.in_u[w]) {
        leaks = true;
        on_boundary[w] = 1;
        d.extended_boundary.push_back({z, w});
      }
    }
    if (leaks) d.intrinsic_boundary.push_back(z);
  }
  for (int v = 0; v < graph.size(); ++v)
    if (on_boundary[v]) d.outer_boundary.push_back(v);
  require(!d.outer_boundary.empty(), errc::empty_boundary, "U has empty exterior boundary");
  std::sort(d.extended_boundary.begin(), d.extended_boundary.end(),
            [](const Domain::HalfEdge& a, const Domain::HalfEdge& b) {
              return a.z != b.z ? a.z < b.z : a.y < b.y;
            });

  // nu(y) lists
  std::unordered_map<int, std::vector<int>> nu;
  for (const auto& he : d.extended_boundary) nu[he.y].push_back(he.z);
  for (int y : d.outer_boundary) {
    auto& zs = nu[y];
    std::sort(zs.begin(), zs.end());
    d.nu_index_[y] = {static_cast<int>(d.nu_flat_.size()), static_cast<int>(zs.size())};
    d.nu_flat_.insert(d.nu_flat_.end(), zs.begin(), zs.end());
  }

  // clearance d(x, X\U) by multi-source BFS from the complement
  {
    std::vector<std::int32_t> dist(graph.size(), -1);
    std::deque<int> queue;
    for (int v = 0; v < graph.size(); ++v) {
      if (!d.in_u[v]) {
        dist[v] = 0;
        queue.push_back(v);
      }
    }
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : graph.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    d.clearance_u.resize(d.u.size());
    for (size_t i = 0; i < d.u.size(); ++i) d.clearance_u[i] = dist[d.u[i]];
  }
  return d;
}

// Inner metric d_U: path distance inside (U, E_U), extended to y in dU by
// d_U(x,y) = min{1 + d_U(x,z) : z in nu(y)}. Rows are BFS-exact and cached.
class InnerMetric {
 public:
  explicit InnerMetric(const Domain& dom) : dom_(&dom) {}

  const Domain& domain() const { return *dom_; }

  // Distances from x (in U) to every local index of U; -1 never occurs since
  // (U, E_U) is connected.
  std::shared_ptr<const std::vector<std::int32_t>> row(int x) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = rows_.find(x);
      if (it != rows_.end()) return it->second;
    }
    auto fresh = std::make_shared<std::vector<std::int32_t>>(compute_row(x));
    std::lock_guard<std::mutex> lock(mutex_);
    return rows_.emplace(x, std::move(fresh)).first->second;
  }

  int distance(int x, int y) const {
    auto r = row(x);
    if (dom_->contains(y)) return (*r)[dom_->local(y)];
    int best = std::numeric_limits<int>::max();
    for (int z : dom_->nu(y)) best = std::min(best, 1 + (*r)[dom_->local(z)]);
    return best;
  }

  // B_U(x, r) as local indices, via truncated BFS (not cached).
  std::vector<int> inner_ball_local(int x, int r) const {
    const auto& g = *dom_->graph;
    std::vector<std::int32_t> dist(dom_->size(), -1);
    std::deque<int> queue{dom_->local(x)};
    dist[dom_->local(x)] = 0;
    std::vector<int> out{dom_->local(x)};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      if (dist[v] >= r) continue;
      for (int w : g.neighbors(dom_->u[v])) {
        if (!dom_->in_u[w]) continue;
        int lw = dom_->local_of[w];
        if (dist[lw] < 0) {
          dist[lw] = dist[v] + 1;
          queue.push_back(lw);
          out.push_back(lw);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::int32_t> compute_row(int x) const {
    const auto& g = *dom_->graph;
    std::vector<std::int32_t> dist(dom_->size(), -1);
    std::deque<int> queue{dom_->local(x)};
    dist[dom_->local(x)] = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : g.neighbors(dom_->u[v])) {
        if (!dom_->in_u[w]) continue;
        int lw = dom_->local_of[w];
        if (dist[lw] < 0) {
          dist[lw] = dist[v] + 1;
          queue.push_back(lw);
        }
      }
    }
    return dist;
  }

  const Domain* dom_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<int, std::shared_ptr<const std::vector<std::int32_t>>> rows_;
};

inline InnerMetric inner_distance(const Domain& dom) { return InnerMetric(dom); }

struct InnerUniformReport {
  double alpha = 0.0;
  double a_cap = 1.0;
  bool holds = false;
  std::optional<std::pair<int, int>> witness_failure;  // ambient indices
  std::uint64_t states_visited = 0;
};

namespace detail {

// Fixed-width bitset over the local indices of U.
class Bitset {
 public:
  explicit Bitset(int n = 0) : n_(n), words_((n + 63) / 64, 0) {}
  void set(int i) { words_[i >> 6] |= (1ull << (i & 63)); }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1ull; }
  bool intersects(const Bitset& other) const {
    for (size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & other.words_[w]) return true;
    return false;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  int count() const {
    int c = 0;
    for (auto w : words_) c += __builtin_popcountll(w);
    return c;
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        int b = __builtin_ctzll(bits);
        fn(static_cast<int>(w * 64 + b));
        bits &= bits - 1;
      }
    }
  }
  int size() const { return n_; }

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

// Layered admissible-prefix reachability from a source: layer j holds the
// vertices v with an admissible walk of length j from the source, where step i
// requires clearance >= alpha * (1 + i).
struct AdmissibleLayers {
  std::vector<Bitset> layers;
};

inline AdmissibleLayers admissible_layers(const Domain& dom, int source_local, double alpha,
                                          int max_len, std::uint64_t* budget) {
  AdmissibleLayers out;
  const int n = dom.size();
  Bitset cur(n);
  cur.set(source_local);
  out.layers.push_back(cur);
  for (int j = 1; j <= max_len; ++j) {
    Bitset next(n);
    bool nonempty = false;
    double threshold = alpha * (1.0 + j);
    cur.for_each([&](int v) {
      *budget += 1;
      for (int w : dom.graph->neighbors(dom.u[v])) {
        if (!dom.in_u[w]) continue;
        int lw = dom.local_of[w];
        if (dom.clearance_u[lw] >= threshold) {
          next.set(lw);
          nonempty = true;
        }
      }
    });
    out.layers.push_back(next);
    if (!nonempty) break;  // later layers stay empty
    cur = out.layers.back();
  }
  return out;
}

inline const Bitset* layer_or_null(const AdmissibleLayers& l, int j) {
  if (j < static_cast<int>(l.layers.size())) return &l.layers[j];
  return nullptr;
}

}  // namespace detail

// Exact decision of the inner (alpha, A)-uniformity condition: for every pair
// x, y in U there must be a walk of length k <= A d_U(x,y) whose step j keeps
// clearance >= alpha (1 + min{j, k-j}). Decided by meeting a forward
// admissible-prefix table from x with one from y: for even k the tables must
// share a vertex at depth k/2, for odd k they must span an edge of E_U at
// depths (k-1)/2 and (k+1)/2. Thresholds in both half-tables equal the exact
// profile, so the decision is exact, not sampled.
inline InnerUniformReport verify_inner_uniform(const Domain& dom, double alpha, double a_cap,
                                               std::uint64_t budget = 100'000'000ull) {
  require(alpha > 0.0 && alpha <= 1.0, errc::bad_input, "alpha must lie in (0,1]");
  require(a_cap >= 1.0, errc::bad_input, "A must be >= 1");
  InnerUniformReport rep;
  rep.alpha = alpha;
  rep.a_cap = a_cap;
  rep.holds = true;

  InnerMetric metric(dom);
  const int n = dom.size();
  std::uint64_t visited = 0;

  // Longest candidate walk over all pairs bounds the table depth.
  std::vector<std::shared_ptr<const std::vector<std::int32_t>>> rows(n);
  int diam = 0;
  for (int i = 0; i < n; ++i) {
    rows[i] = metric.row(dom.u[i]);
    for (int j = 0; j < n; ++j) diam = std::max(diam, static_cast<int>((*rows[i])[j]));
    visited += n;
  }
  const int max_half = static_cast<int>(a_cap * diam) / 2 + 1;

  std::vector<detail::AdmissibleLayers> tables(n);
  for (int i = 0; i < n; ++i) {
    tables[i] = detail::admissible_layers(dom, i, alpha, max_half, &visited);
    require(visited <= budget, errc::too_large, "inner-uniformity state budget exceeded");
  }

  auto edge_meet = [&](const detail::Bitset& a, const detail::Bitset& b) {
    bool found = false;
    a.for_each([&](int v) {
      if (found) return;
      for (int w : dom.graph->neighbors(dom.u[v])) {
        if (!dom.in_u[w]) continue;
        if (b.test(dom.local_of[w])) {
          found = true;
          return;
        }
      }
    });
    return found;
  };

  for (int i = 0; i < n && rep.holds; ++i) {
    for (int j = i; j < n; ++j) {
      int d = (*rows[i])[j];
      int kmax = static_cast<int>(a_cap * d);
      bool ok = false;
      for (int k = d; k <= kmax && !ok; ++k) {
        int m = k / 2;
        auto* fa = detail::layer_or_null(tables[i], m);
        auto* fb = detail::layer_or_null(tables[j], k - m - (k % 2));
        if (k % 2 == 0) {
          if (fa && fb) ok = fa->intersects(*fb);
        } else {
          auto* fb_odd = detail::layer_or_null(tables[j], m);
          if (fa && fb_odd) ok = edge_meet(*fa, *fb_odd);
        }
        visited += n / 64 + 1;
      }
      if (!ok) {
        rep.holds = false;
        rep.witness_failure = {dom.u[i], dom.u[j]};
        break;
      }
      require(visited <= budget, errc::too_large, "inner-uniformity state budget exceeded");
    }
  }
  rep.states_visited = visited;
  return rep;
}

namespace detail {

// Deterministic x_r choice among ball candidates, given (local index, d_U)
// pairs for B_U(x, A1 m). Admissible candidates have clearance >= a1 m; among
// them the one whose clearance is closest to the target depth
//   t* = min(max(m, clearance(x)), R)
// wins, with ties broken by smaller d_U(x, .) and then lexicographically.
// Targeting depth m (rather than maximizing clearance) keeps phi0(x_r) on the
// scale of the r-ball, which the Carleson volume comparison needs; deep
// starting points keep x_r = x.
inline int select_inner_point(const Domain& dom, std::span<const int> ball_local,
                              std::span<const std::int32_t> ball_dist, int clearance_x, double m,
                              double a1, int r_cap) {
  const auto& g = *dom.graph;
  double target = std::min(std::max(m, static_cast<double>(clearance_x)),
                           static_cast<double>(r_cap));
  int best = -1;
  double best_gap = 0.0;
  std::int32_t best_dist = 0;
  for (size_t i = 0; i < ball_local.size(); ++i) {
    int lv = ball_local[i];
    int c = dom.clearance_u[lv];
    if (c < a1 * m) continue;
    double gap = std::abs(static_cast<double>(c) - target);
    int v = dom.u[lv];
    bool better = best < 0 || gap < best_gap ||
                  (gap == best_gap && (ball_dist[i] < best_dist ||
                                       (ball_dist[i] == best_dist && g.lex_less(v, best))));
    if (better) {
      best = v;
      best_gap = gap;
      best_dist = ball_dist[i];
    }
  }
  require(best >= 0, errc::no_admissible_point,
          "no point of clearance a1*min(r,R) within inner distance A1*min(r,R)");
  return best;
}

}  // namespace detail

// Inner-point machinery: R = max_x d(x, X\U), a central point o at depth R,
// and a selector x_r giving a point within inner distance A1 min{r,R} of x at
// clearance >= a1 min{r,R}. The selection rule is fixed and deterministic
// (see detail::select_inner_point); for r >= R the selector returns o.
class InnerPointIndex {
 public:
  InnerPointIndex(const Domain& dom, double a1, double a_cap_1)
      : dom_(&dom), a1_(a1), A1_(a_cap_1) {
    require(a1 > 0.0 && a1 <= 1.0, errc::bad_input, "a1 must lie in (0,1]");
    require(a_cap_1 >= 1.0, errc::bad_input, "A1 must be >= 1");
    const auto& g = *dom.graph;
    r_max_ = 0;
    for (int i = 0; i < dom.size(); ++i) r_max_ = std::max(r_max_, static_cast<int>(dom.clearance_u[i]));
    center_ = -1;
    for (int i = 0; i < dom.size(); ++i) {
      if (dom.clearance_u[i] != r_max_) continue;
      int v = dom.u[i];
      if (center_ < 0 || g.lex_less(v, center_)) center_ = v;
    }
  }

  int r_max() const { return r_max_; }
  int center() const { return center_; }
  double a1() const { return a1_; }
  double a_cap_1() const { return A1_; }

  // x_r for real r > 0; x is an ambient index inside U.
  int select(int x, double r) const {
    if (r >= r_max_) return center_;
    double m = std::min(r, static_cast<double>(r_max_));
    int radius = static_cast<int>(A1_ * m);
    const auto& g = *dom_->graph;
    // truncated BFS with distances
    std::vector<int> ball_local;
    std::vector<std::int32_t> ball_dist;
    {
      std::vector<std::int32_t> dist(dom_->size(), -1);
      std::deque<int> queue{dom_->local(x)};
      dist[dom_->local(x)] = 0;
      ball_local.push_back(dom_->local(x));
      ball_dist.push_back(0);
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        if (dist[v] >= radius) continue;
        for (int w : g.neighbors(dom_->u[v])) {
          if (!dom_->in_u[w]) continue;
          int lw = dom_->local_of[w];
          if (dist[lw] < 0) {
            dist[lw] = dist[v] + 1;
            queue.push_back(lw);
            ball_local.push_back(lw);
            ball_dist.push_back(dist[lw]);
          }
        }
      }
    }
    return detail::select_inner_point(*dom_, ball_local, ball_dist,
                                      dom_->clearance_u[dom_->local(x)], m, a1_, r_max_);
  }

 private:
  const Domain* dom_;
  double a1_, A1_;
  int r_max_;
  int center_;
};

inline InnerPointIndex inner_points(const Domain& dom, double a1, double a_cap_1) {
  return InnerPointIndex(dom, a1, a_cap_1);
}

}  // namespace ruinkit

#endif
