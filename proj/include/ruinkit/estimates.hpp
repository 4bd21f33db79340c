#ifndef RUINKIT_ESTIMATES_HPP
#define RUINKIT_ESTIMATES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ruinkit/absorbing.hpp"
#include "ruinkit/doob.hpp"
#include "ruinkit/domain.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"
#include "ruinkit/spectral.hpp"
#include "ruinkit/threads.hpp"

namespace ruinkit {

// ---------------------------------------------------------------------------
// Estimate context: Perron pair + inner points + inner metric + volumes
// ---------------------------------------------------------------------------

// Bundles everything the two-sided estimate expressions consume: (beta0,
// phi0, T_U), the inner-point machinery (o, R, x_r), inner distances, and
// ambient ball volumes V(x,r) = pi(B(x,r)). Per-source tables are built on
// first use and reused; evaluators are pure functions of the context.
class EstimateContext {
 public:
  EstimateContext(const SubKernel& sub, const PerronPair& pair, double a1 = 0.25,
                  double a_cap_1 = 4.0)
      : sub_(&sub),
        pair_(pair),
        points_(*sub.dom, a1, a_cap_1),
        metric_(*sub.dom) {
    const Domain& dom = *sub.dom;
    pi_u_total_ = dom.pi_of_u();
    phi0_o_ = phi0(points_.center());
  }

  const Domain& domain() const { return *sub_->dom; }
  const SubKernel& sub() const { return *sub_; }
  const PerronPair& pair() const { return pair_; }
  const InnerPointIndex& points() const { return points_; }
  InnerMetric& metric() const { return metric_; }

  double beta0() const { return pair_.beta0; }
  double t_u() const { return pair_.t_u; }
  int r_max() const { return points_.r_max(); }
  int center() const { return points_.center(); }
  double pi_of_u() const { return pi_u_total_; }
  double phi0_at_center() const { return phi0_o_; }

  double phi0(int v) const { return pair_.phi0(domain().local(v)); }

  // V(x, r) = pi(B(x, r)) in the ambient graph; AmbientTruncated once the
  // ball can reach the stored patch rim.
  double volume(int x, int r) const {
    const XCache& c = cache(x);
    require(r < c.border_distance, errc::ambient_truncated,
            "ambient ball of radius " + std::to_string(r) + " reaches the patch rim");
    return c.volume[std::min<size_t>(r, c.volume.size() - 1)];
  }

  // x_r selector with the context's (a1, A1); identical rule (and results) to
  // InnerPointIndex::select, served from the per-source ring cache.
  int x_r(int x, double r) const { return select_from(cache(x), x, r); }

  int inner_dist(int x, int z) const {
    const XCache& c = cache(x);
    return (*c.du_row)[domain().local(z)];
  }

  // Cumulative middle-branch sums: partial(x, l) = sum_{m=0}^{l}
  // 1/(phi0(x_sqrt(m))^2 V(x, floor(sqrt(m)))) for l <= R^2.
  double branch_sum(int x, long long lo, long long hi) const {
    const XCache& c = cache(x);
    require(hi <= c.cum_limit, errc::ambient_truncated,
            "branch sum needs ambient balls beyond the stored patch");
    if (hi < lo) return 0.0;
    double upper = c.cumulative[hi];
    double lower = lo > 0 ? c.cumulative[lo - 1] : 0.0;
    return upper - lower;
  }

  // Least-squares slope of log(phi0(x_r)^2 V(x,r)) against log r over
  // r = 1..R; the quasi-monotone volume hypothesis asks for slope >= 2 + eps.
  double volume_growth_exponent(int x) const { return cache(x).growth_exponent; }

 private:
  struct XCache {
    std::shared_ptr<const std::vector<std::int32_t>> du_row;
    std::vector<double> volume;      // by ambient radius
    int border_distance = 0;         // first radius that can be truncated
    std::vector<int> ball_local;     // B_U(x, A1 R) by increasing d_U
    std::vector<std::int32_t> ball_dist;
    std::vector<double> cumulative;  // middle-branch prefix sums over l
    long long cum_limit = -1;        // largest usable l
    double growth_exponent = 0.0;
    int clearance_x = 0;
  };

  const XCache& cache(int x) const {
    auto it = caches_.find(x);
    if (it != caches_.end()) return it->second;
    return caches_.emplace(x, build_cache(x)).first->second;
  }

  XCache build_cache(int x) const {
    const Domain& dom = domain();
    const WeightedGraph& g = *dom.graph;
    XCache c;
    c.du_row = metric_.row(x);

    // ambient volumes out to the patch rim (V(x,d) is needed for inner
    // distances d up to the domain diameter, not just R)
    const int R = points_.r_max();
    auto dist = bfs_distances(g, x, -1);
    int max_dist = 0;
    c.border_distance = g.size() + 1;
    for (int v = 0; v < g.size(); ++v) {
      if (dist[v] < 0) continue;
      max_dist = std::max<int>(max_dist, dist[v]);
      if (g.is_border(v)) c.border_distance = std::min<int>(c.border_distance, dist[v]);
    }
    std::vector<double> ring(max_dist + 1, 0.0);
    for (int v = 0; v < g.size(); ++v)
      if (dist[v] >= 0) ring[dist[v]] += g.pi[v];
    c.volume.assign(max_dist + 1, 0.0);
    double acc = 0.0;
    for (int r = 0; r <= max_dist; ++r) {
      acc += ring[r];
      c.volume[r] = acc;
    }

    // inner ball to the selector's largest radius, ordered by d_U
    {
      const int radius_cap = static_cast<int>(points_.a_cap_1() * R) + 1;
      const auto& row = *c.du_row;
      std::vector<std::pair<std::int32_t, int>> by_dist;
      for (int i = 0; i < dom.size(); ++i)
        if (row[i] >= 0 && row[i] <= radius_cap) by_dist.emplace_back(row[i], i);
      std::sort(by_dist.begin(), by_dist.end());
      c.ball_local.reserve(by_dist.size());
      c.ball_dist.reserve(by_dist.size());
      for (auto& [d, i] : by_dist) {
        c.ball_local.push_back(i);
        c.ball_dist.push_back(d);
      }
      c.clearance_x = dom.clearance_u[dom.local(x)];
    }

    // middle-branch prefix sums up to R^2, stopping at the patch rim
    {
      long long r2 = static_cast<long long>(R) * R;
      c.cumulative.assign(r2 + 1, 0.0);
      c.cum_limit = -1;
      double acc_sum = 0.0;
      for (long long l = 0; l <= r2; ++l) {
        double r = std::sqrt(static_cast<double>(l));
        int vol_radius = static_cast<int>(std::floor(r));
        if (vol_radius >= c.border_distance) break;
        int xr = select_from(c, x, r);
        double vol = c.volume[std::min<size_t>(vol_radius, c.volume.size() - 1)];
        double phi = pair_.phi0(dom.local(xr));
        acc_sum += 1.0 / (phi * phi * vol);
        c.cumulative[l] = acc_sum;
        c.cum_limit = l;
      }
    }

    // growth exponent of W(r) = phi0(x_r)^2 V(x,r)
    {
      int R_fit = std::min(R, c.border_distance - 1);
      std::vector<double> lx, ly;
      for (int r = 1; r <= R_fit; ++r) {
        int xr = select_from(c, x, static_cast<double>(r));
        double w = pair_.phi0(dom.local(xr)) * pair_.phi0(dom.local(xr)) * c.volume[r];
        lx.push_back(std::log(static_cast<double>(r)));
        ly.push_back(std::log(w));
      }
      c.growth_exponent = least_squares_slope(lx, ly);
    }
    return c;
  }

  int select_from(const XCache& c, int x, double r) const {
    (void)x;
    if (r >= points_.r_max()) return points_.center();
    double m = std::min(r, static_cast<double>(points_.r_max()));
    int radius = static_cast<int>(points_.a_cap_1() * m);
    // ball_dist ascending: binary search for the prefix within `radius`
    auto end = std::upper_bound(c.ball_dist.begin(), c.ball_dist.end(),
                                static_cast<std::int32_t>(radius));
    size_t count = static_cast<size_t>(end - c.ball_dist.begin());
    return detail::select_inner_point(
        domain(), std::span<const int>(c.ball_local.data(), count),
        std::span<const std::int32_t>(c.ball_dist.data(), count), c.clearance_x, m,
        points_.a1(), points_.r_max());
  }

  static double least_squares_slope(const std::vector<double>& xs,
                                    const std::vector<double>& ys) {
    if (xs.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    return den > 0 ? num / den : 0.0;
  }

  const SubKernel* sub_;
  PerronPair pair_;
  InnerPointIndex points_;
  mutable InnerMetric metric_;
  double pi_u_total_ = 0.0;
  double phi0_o_ = 0.0;
  mutable std::map<int, XCache> caches_;
};

// ---------------------------------------------------------------------------
// Ratio reports: the implied constants of two-sided estimates, measured
// ---------------------------------------------------------------------------

struct RatioPoint {
  int x = -1, y = -1, z = -1;
  long long t = -1;
  double exact = 0.0, estimate = 0.0, ratio = 0.0;
};

struct RatioReport {
  std::vector<RatioPoint> points;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;

  void add(RatioPoint p) {
    require(p.estimate > 0.0 && std::isfinite(p.exact), errc::bad_input,
            "ratio point needs a positive estimate and finite exact value");
    p.ratio = p.exact / p.estimate;
    min_ratio = std::min(min_ratio, p.ratio);
    max_ratio = std::max(max_ratio, p.ratio);
    points.push_back(p);
  }
  double spread() const { return max_ratio / min_ratio; }
};

// ---------------------------------------------------------------------------
// Central-point estimate (constant-free shapes)
// ---------------------------------------------------------------------------

struct CentralEstimate {
  double main = 0.0;          // T_U phi0(o) sum phi0(z) mu_zy
  double sqrt_variant = 0.0;  // (T_U / sqrt(pi(U))) sum phi0(z) mu_zy
};

inline CentralEstimate central_exit_estimate(const EstimateContext& ctx, int y) {
  const Domain& dom = ctx.domain();
  const WeightedGraph& g = *dom.graph;
  double s = 0.0;
  for (int z : dom.nu(y)) s += ctx.phi0(z) * g.mu(z, y);
  CentralEstimate out;
  out.main = ctx.t_u() * ctx.phi0_at_center() * s;
  out.sqrt_variant = ctx.t_u() / std::sqrt(ctx.pi_of_u()) * s;
  return out;
}

inline CentralEstimate central_exit_estimate(const EstimateContext& ctx,
                                             const Domain::HalfEdge& he) {
  const WeightedGraph& g = *ctx.domain().graph;
  double s = ctx.phi0(he.z) * g.mu(he.z, he.y);
  CentralEstimate out;
  out.main = ctx.t_u() * ctx.phi0_at_center() * s;
  out.sqrt_variant = ctx.t_u() / std::sqrt(ctx.pi_of_u()) * s;
  return out;
}

// Time-dependent central-point shape min{t,T_U} mu_zy phi0(z) / sqrt(pi(U))
// times exp(-c R^2/t).
inline double central_time_estimate(const EstimateContext& ctx, long long t,
                                    const Domain::HalfEdge& he, double c = 1.0) {
  const WeightedGraph& g = *ctx.domain().graph;
  double r2 = static_cast<double>(ctx.r_max()) * ctx.r_max();
  return std::min<double>(static_cast<double>(t), ctx.t_u()) * g.mu(he.z, he.y) *
         ctx.phi0(he.z) / std::sqrt(ctx.pi_of_u()) * std::exp(-c * r2 / t);
}

// ---------------------------------------------------------------------------
// H-function and the global hitting estimate
// ---------------------------------------------------------------------------

// Time profile H(t,x,z) with the three branches: flat 1 before the diffusive
// time d^2, the exact middle sum up to R^2, then linear growth capped at T_U.
// The saturated branch adds onto H(R^2, x, z) exactly as displayed.
inline double h_function(const EstimateContext& ctx, long long t, int x, int z) {
  const int d = ctx.inner_dist(x, z);
  require(t >= 1 + d, errc::bad_input, "need t >= 1 + d_U(x,z)");
  const long long d2 = static_cast<long long>(d) * d;
  const long long r2 = static_cast<long long>(ctx.r_max()) * ctx.r_max();

  if (t < d2) return 1.0;

  int xd = ctx.x_r(x, static_cast<double>(d));
  double pref = ctx.phi0(xd) * ctx.phi0(xd) * ctx.volume(x, d) / (1.0 + static_cast<double>(d2));

  double middle = pref * ctx.branch_sum(x, d2, std::min(t, r2));
  if (t <= r2) return 1.0 + middle;

  double h_at_r2 = 1.0 + pref * ctx.branch_sum(x, d2, r2);
  double saturated = std::max(0.0, std::min(static_cast<double>(t), ctx.t_u()) - r2);
  double phi_o = ctx.phi0_at_center();
  return 1.0 + h_at_r2 + pref * saturated / (phi_o * phi_o * ctx.pi_of_u());
}

// Which of the four time regimes contain (t, d); the regime constants are
// configuration, defaults eps = 0.5 and A2 = 4.
struct RegimeFlags {
  bool z1 = false, z2 = false, z3 = false, z4 = false;
};

inline RegimeFlags classify_regime(const EstimateContext& ctx, long long t, int d,
                                   double eps = 0.5, double a2 = 4.0) {
  RegimeFlags f;
  double dp1 = 1.0 + d;
  long long r2 = static_cast<long long>(ctx.r_max()) * ctx.r_max();
  f.z1 = t >= dp1 && t <= std::pow(dp1, 2.0 - eps);
  f.z2 = t >= dp1 && t <= a2 * dp1 * dp1;
  f.z3 = t >= dp1 * dp1 && t <= a2 * static_cast<double>(r2);
  f.z4 = t >= static_cast<double>(d) * d;
  return f;
}

// Constant-free shape of the global estimate
//   c1 (1+d^2) phi0(x) phi0(z) mu_zy / (phi0(x_d)^2 V(x,d)) H(t,x,z) e^{-c2 d^2/t}
// evaluated for the lower and upper constant pairs (defaults both (1,1)).
struct GlobalEstimate {
  double lower = 0.0, upper = 0.0;
  double shape = 0.0;  // constants (1,1)
  int d = 0;
  RegimeFlags regimes;
};

inline GlobalEstimate global_estimate(const EstimateContext& ctx, long long t, int x,
                                      const Domain::HalfEdge& he,
                                      std::pair<double, double> lower_c = {1.0, 1.0},
                                      std::pair<double, double> upper_c = {1.0, 1.0}) {
  const WeightedGraph& g = *ctx.domain().graph;
  const int d = ctx.inner_dist(x, he.z);
  require(t >= 1 + d, errc::bad_input, "need t >= 1 + d_U(x,z)");
  double d2 = static_cast<double>(d) * d;
  int xd = ctx.x_r(x, static_cast<double>(d));
  double core = (1.0 + d2) * ctx.phi0(x) * ctx.phi0(he.z) * g.mu(he.z, he.y) /
                (ctx.phi0(xd) * ctx.phi0(xd) * ctx.volume(x, d));
  double h = h_function(ctx, t, x, he.z);

  GlobalEstimate out;
  out.d = d;
  out.regimes = classify_regime(ctx, t, d);
  out.lower = lower_c.first * core * h * std::exp(-lower_c.second * d2 / t);
  out.upper = upper_c.first * core * h * std::exp(-upper_c.second * d2 / t);
  out.shape = core * h * std::exp(-d2 / t);
  return out;
}

// ---------------------------------------------------------------------------
// Harmonic measure from an arbitrary starting point
// ---------------------------------------------------------------------------

// Shape of P_U(x, y*_z):
//   phi0(x) phi0(z) mu_zy { T_U + sum_{l=d^2}^{R^2} 1/(phi0(x_sqrt(l))^2 V(x, sqrt(l))) }.
// The simplified bracket T_U + (1+d^2)/(phi0(x_d)^2 V(x,d)) is exposed when
// the quasi-monotone volume-growth hypothesis verifies numerically (fitted
// exponent of phi0(x_r)^2 V(x,r) at least 2 + eps, eps = 0.1).
struct HarmonicMeasureEstimate {
  double value = 0.0;
  double easy_value = 0.0;
  bool easy_applicable = false;
  int d = 0;
};

inline HarmonicMeasureEstimate harmonic_measure_estimate(const EstimateContext& ctx, int x,
                                                         const Domain::HalfEdge& he,
                                                         double eps = 0.1) {
  const WeightedGraph& g = *ctx.domain().graph;
  const int d = ctx.inner_dist(x, he.z);
  const long long d2 = static_cast<long long>(d) * d;
  const long long r2 = static_cast<long long>(ctx.r_max()) * ctx.r_max();

  double bracket = ctx.t_u() + ctx.branch_sum(x, d2, r2);
  double front = ctx.phi0(x) * ctx.phi0(he.z) * g.mu(he.z, he.y);

  HarmonicMeasureEstimate out;
  out.d = d;
  out.value = front * bracket;
  out.easy_applicable = ctx.volume_growth_exponent(x) >= 2.0 + eps;
  int xd = ctx.x_r(x, static_cast<double>(d));
  double easy_bracket =
      ctx.t_u() + (1.0 + static_cast<double>(d2)) /
                      (ctx.phi0(xd) * ctx.phi0(xd) * ctx.volume(x, d));
  out.easy_value = front * easy_bracket;
  return out;
}

// ---------------------------------------------------------------------------
// Triangle closed-form shape (three-player gambler's ruin)
// ---------------------------------------------------------------------------

// Distance in the 6-neighbor lattice with steps (+-1,0), (0,+-1), (1,-1),
// (-1,1): max(|a|, |b|, |a+b|). The triangle is convex for this metric so it
// agrees with d_U between interior points.
inline int hex_distance(int ax, int ay, int bx, int by) {
  int dx = ax - bx, dy = ay - by;
  return std::max({std::abs(dx), std::abs(dy), std::abs(dx + dy)});
}

// Literal shape for P_U(x, y) in the fundamental sector 0 < x1, 0 < x2,
// 2 x1 + x2 <= N with y = (y1, 0) on the bottom side:
//   x1 x2 (x1+x2) (N-(x1+x2)) (N-x2) y1^2 (N-y1)^2
//   / (N^4 (x1+d)^2 (x2+d)^2 (x1+x2+2d)^2),  d = d_U(x, z_y),
// z_y = (y1, 1) with the corner conventions z_(1,0) = (1,1) and
// z_(N-1,0) = (N-2,1). Other sides are reached by the symmetry maps first.
inline double grp_formula(int N, std::pair<int, int> x, std::pair<int, int> y) {
  auto [x1, x2] = x;
  auto [y1, y2] = y;
  require(y2 == 0 && y1 > 0 && y1 < N, errc::out_of_sector,
          "y must be (y1, 0) with 0 < y1 < N");
  require(x1 > 0 && x2 > 0 && 2 * x1 + x2 <= N, errc::out_of_sector,
          "x must lie in the sector 0 < x1, 0 < x2, 2 x1 + x2 <= N");
  int z1 = y1 == 1 ? 1 : (y1 == N - 1 ? N - 2 : y1);
  int d = hex_distance(x1, x2, z1, 1);
  double Nd = static_cast<double>(N);
  double num = static_cast<double>(x1) * x2 * (x1 + x2) * (Nd - (x1 + x2)) * (Nd - x2) *
               (static_cast<double>(y1) * y1) * ((Nd - y1) * (Nd - y1));
  double den = std::pow(Nd, 4.0) * std::pow(x1 + d, 2.0) * std::pow(x2 + d, 2.0) *
               std::pow(static_cast<double>(x1 + x2 + 2 * d), 2.0);
  return num / den;
}

// ---------------------------------------------------------------------------
// Punctured cube closed-form shapes
// ---------------------------------------------------------------------------

namespace detail {
inline double l1_norm(std::span<const int> v) {
  double s = 0.0;
  for (int c : v) s += std::abs(c);
  return s;
}
}  // namespace detail

// Shapes for exit from U = {-N..N}^n \ {0}: at the removed center and on the
// top face x_n = N+1. The n = 2 formulas carry the logarithmic corrections.
// Other faces are handled by coordinate symmetry before the call.
inline double punctured_cube_estimate(int n, int N, std::span<const int> x,
                                      std::span<const int> y) {
  require(static_cast<int>(x.size()) == n && static_cast<int>(y.size()) == n, errc::bad_input,
          "coordinate dimension mismatch");
  double l1x = detail::l1_norm(x);
  bool at_center = true;
  for (int c : y) at_center = at_center && c == 0;

  auto wedge = [&](double v) { return 1.0 - std::abs(v) / (N + 1.0); };

  if (at_center) {
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= wedge(x[i]);
    if (n >= 3) return prod * std::pow(l1x, 2.0 - n);
    return prod * (1.0 + std::log(1.0 + 2.0 * N / l1x)) /
           ((1.0 + std::log(static_cast<double>(N))) * (1.0 + std::log(1.0 + l1x)));
  }

  if (n >= 3) {
    require(y[n - 1] == N + 1, errc::unsupported_face,
            "face exits are evaluated on the top face; map by symmetry first");
    for (int i = 0; i + 1 < n; ++i)
      require(std::abs(y[i]) <= N, errc::unsupported_face, "not a top-face point");
    double dxy = 0.0;
    for (int i = 0; i < n; ++i) dxy += std::abs(x[i] - y[i]);
    double num = 1.0, den = N + 1.0;
    for (int i = 0; i < n; ++i) num *= wedge(x[i]);
    for (int i = 0; i + 1 < n; ++i) num *= wedge(y[i]);
    for (int i = 0; i < n; ++i) {
      double f = 1.0 - (std::abs(x[i]) - dxy) / (N + 1.0);
      den *= f * f;
    }
    return num / den * std::pow(dxy, 2.0 - n);
  }

  // n = 2, y on one of the four faces
  bool on_face = std::abs(y[0]) == N + 1 || std::abs(y[1]) == N + 1;
  require(on_face, errc::unsupported_face, "y must be the center or a face point");
  double dxy = std::abs(x[0] - y[0]) + std::abs(x[1] - y[1]);
  double num = wedge(x[0]) * wedge(x[1]) * (1.0 - (std::abs(y[0]) - 1.0) / (N + 1.0)) *
               (1.0 - (std::abs(y[1]) - 1.0) / (N + 1.0)) * std::log(1.0 + l1x);
  double f1 = 1.0 - (std::abs(x[0]) - dxy) / (N + 1.0);
  double f2 = 1.0 - (std::abs(x[1]) - dxy) / (N + 1.0);
  return num / (f1 * f1 * f2 * f2 * std::log(1.0 + N));
}

// S(x,d) = sum_{l=d^2}^{8N^2} 1/(phi0(x_sqrt(l))^2 (1+l)), summed exactly
// with the context's eigenfunction and selector.
inline double punctured_cube_s_sum(const EstimateContext& ctx, int x, int d, int N) {
  double s = 0.0;
  for (long long l = static_cast<long long>(d) * d; l <= 8ll * N * N; ++l) {
    int xr = ctx.x_r(x, std::sqrt(static_cast<double>(l)));
    double phi = ctx.phi0(xr);
    s += 1.0 / (phi * phi * (1.0 + l));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Parabolic Harnack constant harness
// ---------------------------------------------------------------------------

// Measured Harnack constant on theta = 2 cylinders
//   Q  = [t0, t0 + 4 ceil(R^2) + 1] x B(x0, 2R+1)
//   Q' = [t0, t0 + 4 ceil(R^2)]     x B(x0, 2R)
//   Q- = [t0 + ceil(R^2), t0 + 2 ceil(R^2)] x B(x0, R)
//   Q+ = [t0 + 3 ceil(R^2), t0 + 4 ceil(R^2)] x B(x0, R)
// over nonnegative solutions of u(t+1,x) = sum_y u(t,y) K(x,y) in Q'. The
// admissible solutions form a cone generated by delta data on the initial
// slice and on the lateral annulus B(2R+1)\B(2R); by the mediant inequality
// the worst ratio sup_{Q-} u / min_{Q+} (u(k,y)+u(k+1,y)) over the cone is
// attained on those generators, so the per-cylinder constant is exact.
// Lateral deltas injected after the Q- window leave sup_{Q-} u = 0 and are
// skipped. The reported constant is still a lower-bound certificate for the
// all-scales C_H, because only the listed cylinders were examined.
struct HarnackCylinderResult {
  int x0 = -1;
  int radius = 0;
  long long t0 = 0;
  double constant = 0.0;
  double const_function_ratio = 0.0;  // u == 1 sanity input
  int generators = 0;
  bool unbounded = false;
};

struct HarnackReport {
  double theta = 2.0;
  std::vector<HarnackCylinderResult> cylinders;

  double max_constant() const {
    double m = 0.0;
    for (const auto& c : cylinders) m = std::max(m, c.constant);
    return m;
  }
};

namespace detail {

struct HarnackWorkspace {
  std::vector<int> verts;          // ambient indices of B(x0, 2R+1)
  std::vector<int> local;          // ambient -> local or -1
  std::vector<std::int32_t> dist;  // from x0, over verts
  int n = 0;

  // kernel rows restricted to the ball, local indices, fixed order
  std::vector<std::vector<std::pair<int, double>>> rows;  // for d <= 2R only
  std::vector<char> evolves;                              // d <= 2R mask
};

inline HarnackWorkspace harnack_workspace(const WeightedGraph& g, const MarkovKernel& k, int x0,
                                          int R, bool check_truncation) {
  HarnackWorkspace w;
  auto dist_all = bfs_distances(g, x0, 2 * R + 1);
  w.local.assign(g.size(), -1);
  for (int v = 0; v < g.size(); ++v) {
    if (dist_all[v] < 0) continue;
    if (check_truncation)
      require(!g.is_border(v), errc::cylinder_truncated,
              "B(x0, 2R+1) reaches the stored patch rim");
    w.local[v] = static_cast<int>(w.verts.size());
    w.verts.push_back(v);
    w.dist.push_back(dist_all[v]);
  }
  w.n = static_cast<int>(w.verts.size());
  w.rows.resize(w.n);
  w.evolves.assign(w.n, 0);
  for (int i = 0; i < w.n; ++i) {
    if (w.dist[i] > 2 * R) continue;
    w.evolves[i] = 1;
    k.for_each_entry(w.verts[i], [&](int y, double p) {
      int ly = w.local[y];
      if (ly >= 0) w.rows[i].emplace_back(ly, p);
      // neighbors outside B(2R+1) never carry mass: u is only defined on Q
    });
  }
  return w;
}

struct HarnackEvalResult {
  double ratio = 0.0;
  bool unbounded = false;
};

// Evolves one admissible datum and returns sup_{Q-} / min_{Q+}(pair).
inline HarnackEvalResult harnack_evaluate(const HarnackWorkspace& w, int R, long long ceil_r2,
                                          long long inject_time, int inject_local,
                                          bool const_function) {
  const long long T = 4 * ceil_r2;
  std::vector<double> u(w.n, 0.0), next(w.n, 0.0);
  if (const_function) {
    std::fill(u.begin(), u.end(), 1.0);
  } else if (inject_time == 0) {
    u[inject_local] = 1.0;
  }

  double sup_minus = 0.0;
  double min_plus = std::numeric_limits<double>::infinity();
  std::vector<double> prev_slice;  // copy of u at time k when k is in Q+ range

  auto scan_minus = [&](long long t, const std::vector<double>& slice) {
    if (t < ceil_r2 || t > 2 * ceil_r2) return;
    for (int i = 0; i < w.n; ++i)
      if (w.dist[i] <= R) sup_minus = std::max(sup_minus, slice[i]);
  };
  auto scan_plus_pair = [&](long long t_next, const std::vector<double>& prev,
                            const std::vector<double>& cur) {
    long long k = t_next - 1;
    if (k < 3 * ceil_r2 || k > T) return;
    for (int i = 0; i < w.n; ++i)
      if (w.dist[i] <= R) min_plus = std::min(min_plus, prev[i] + cur[i]);
  };

  scan_minus(0, u);
  for (long long t = 0; t < T + 1; ++t) {
    // one heat step on the interior; annulus entries are free data (zero for
    // generators except at their injection time, one for the constant input)
    for (int i = 0; i < w.n; ++i) {
      if (!w.evolves[i]) {
        next[i] = const_function ? 1.0 : 0.0;
        continue;
      }
      double s = 0.0;
      for (const auto& [j, p] : w.rows[i]) s += p * u[j];
      next[i] = s;
    }
    if (!const_function && t + 1 == inject_time) next[inject_local] += 1.0;
    scan_minus(t + 1, next);
    scan_plus_pair(t + 1, u, next);
    std::swap(u, next);
  }

  HarnackEvalResult out;
  if (sup_minus == 0.0) return out;
  if (min_plus <= 0.0) {
    out.unbounded = true;
    out.ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  out.ratio = sup_minus / min_plus;
  return out;
}

}  // namespace detail

inline HarnackCylinderResult harnack_cylinder(const WeightedGraph& g, const MarkovKernel& k,
                                              int x0, int R, long long t0 = 0,
                                              bool check_truncation = true, double theta = 2.0) {
  auto w = detail::harnack_workspace(g, k, x0, R, check_truncation);
  const long long ceil_rt = static_cast<long long>(std::ceil(std::pow(R, theta)));

  // generators: initial-slice deltas everywhere, lateral annulus deltas at
  // times 1..2*ceil(R^theta) (later ones vanish on Q-)
  struct Gen {
    long long time;
    int local;
  };
  std::vector<Gen> gens;
  for (int i = 0; i < w.n; ++i) gens.push_back({0, i});
  for (long long s = 1; s <= 2 * ceil_rt; ++s)
    for (int i = 0; i < w.n; ++i)
      if (!w.evolves[i]) gens.push_back({s, i});

  HarnackCylinderResult res;
  res.x0 = x0;
  res.radius = R;
  res.t0 = t0;
  res.generators = static_cast<int>(gens.size());

  std::vector<double> chunk_max(thread_count(), 0.0);
  std::vector<char> chunk_unbounded(thread_count(), 0);
  parallel_chunks(static_cast<long long>(gens.size()), [&](int chunk, long long b, long long e) {
    for (long long i = b; i < e; ++i) {
      auto r = detail::harnack_evaluate(w, R, ceil_rt, gens[i].time, gens[i].local, false);
      if (r.unbounded) chunk_unbounded[chunk] = 1;
      chunk_max[chunk] = std::max(chunk_max[chunk], r.unbounded ? 0.0 : r.ratio);
    }
  });
  for (double m : chunk_max) res.constant = std::max(res.constant, m);
  for (char ub : chunk_unbounded) res.unbounded = res.unbounded || ub;

  res.const_function_ratio = detail::harnack_evaluate(w, R, ceil_rt, 0, 0, true).ratio;
  return res;
}

inline HarnackReport harnack_constant(const WeightedGraph& g, const MarkovKernel& k,
                                      const std::vector<int>& radii, long long t0,
                                      const std::vector<int>& centers,
                                      bool check_truncation = true) {
  HarnackReport rep;
  for (int x0 : centers)
    for (int R : radii) rep.cylinders.push_back(harnack_cylinder(g, k, x0, R, t0, check_truncation));
  return rep;
}

// ---------------------------------------------------------------------------
// Gaussian two-sided heat kernel bound fit
// ---------------------------------------------------------------------------

struct HeatKernelSample {
  int x = -1, y = -1;
  long long t = 0;
  int d = 0;
  double k_t = 0.0;
  double k_pair = 0.0;  // k^t + k^{t+1}
  double vol = 0.0;     // pi(B(x, floor(sqrt(t))))
};

struct GaussianFitReport {
  std::vector<HeatKernelSample> samples;
  // log(k V) ~ intercept - slope * d^2/t fits; residual is the max abs error
  double upper_slope = 0.0, upper_intercept = 0.0, upper_max_residual = 0.0;
  double lower_slope = 0.0, lower_intercept = 0.0, lower_max_residual = 0.0;
  double diag_min = std::numeric_limits<double>::infinity();  // k^t(x,x) V band
  double diag_max = 0.0;
};

namespace detail {
inline void fit_line(const std::vector<std::pair<double, double>>& pts, double* slope,
                     double* intercept, double* max_residual) {
  double mx = 0, my = 0;
  for (auto& [u, v] : pts) {
    mx += u;
    my += v;
  }
  mx /= pts.size();
  my /= pts.size();
  double num = 0, den = 0;
  for (auto& [u, v] : pts) {
    num += (u - mx) * (v - my);
    den += (u - mx) * (u - mx);
  }
  double b = den > 0 ? num / den : 0.0;
  double a = my - b * mx;
  *slope = -b;  // stored as decay rate
  *intercept = a;
  *max_residual = 0.0;
  for (auto& [u, v] : pts) *max_residual = std::max(*max_residual, std::abs(v - (a + b * u)));
}
}  // namespace detail

// For each source x and requested time, evolves k^t(x, .) exactly and samples
// one representative vertex per distance ring (the lexicographically smallest,
// so reruns agree). Bipartite parity is handled by also recording
// k^t + k^{t+1}, which the lower bound is stated for. On stored patches the
// evolution is exact only while the wave cannot reach the rim; longer times
// raise AmbientTruncated.
inline GaussianFitReport gaussian_bound_fit(const WeightedGraph& g, const MarkovKernel& k,
                                            const std::vector<int>& sources,
                                            const std::vector<long long>& times, int d_max,
                                            bool check_truncation = true) {
  GaussianFitReport rep;
  long long t_max = *std::max_element(times.begin(), times.end());

  for (int x : sources) {
    auto dist = bfs_distances(g, x, -1);
    if (check_truncation) {
      int rim = std::numeric_limits<int>::max();
      for (int v = 0; v < g.size(); ++v)
        if (g.is_border(v)) rim = std::min<int>(rim, dist[v]);
      require(t_max + 1 < rim, errc::ambient_truncated,
              "heat wave reaches the patch rim before the largest sample time");
    }
    // representative vertex per ring
    std::vector<int> rep_at(d_max + 1, -1);
    for (int v = 0; v < g.size(); ++v) {
      if (dist[v] < 0 || dist[v] > d_max) continue;
      int& r = rep_at[dist[v]];
      if (r < 0 || g.lex_less(v, r)) r = v;
    }
    // ring volumes
    std::vector<double> vol(static_cast<size_t>(std::floor(std::sqrt(t_max))) + 2, 0.0);
    for (int v = 0; v < g.size(); ++v)
      if (dist[v] >= 0 && dist[v] < static_cast<int>(vol.size())) vol[dist[v]] += g.pi[v];
    for (size_t i = 1; i < vol.size(); ++i) vol[i] += vol[i - 1];

    Eigen::VectorXd u = Eigen::VectorXd::Zero(g.size());
    u(x) = 1.0;
    Eigen::VectorXd u_next(g.size());
    long long t = 0;
    auto record = [&](long long at, const Eigen::VectorXd& cur, const Eigen::VectorXd& nxt) {
      for (int d = 0; d <= d_max; ++d) {
        int y = rep_at[d];
        if (y < 0) continue;
        HeatKernelSample s;
        s.x = x;
        s.y = y;
        s.t = at;
        s.d = d;
        s.k_t = cur(y) / g.pi[y];
        s.k_pair = s.k_t + nxt(y) / g.pi[y];
        s.vol = vol[static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(at))))];
        rep.samples.push_back(s);
        if (d == 0) {
          rep.diag_min = std::min(rep.diag_min, s.k_t * s.vol);
          rep.diag_max = std::max(rep.diag_max, s.k_t * s.vol);
        }
      }
    };
    auto step = [&](const Eigen::VectorXd& cur, Eigen::VectorXd& out) {
      for (int v = 0; v < g.size(); ++v) {
        double s = k.holding[v] * cur(v);
        auto nb = g.neighbors(v);
        auto mw = g.neighbor_mu(v);
        for (size_t e = 0; e < nb.size(); ++e) s += mw[e] / g.pi[v] * cur(nb[e]);
        out(v) = s;
      }
    };
    // k^t(x,y) = K^t(x,y)/pi(y); by reversibility K^t(x,y) = pi(x) k^t = ...
    // evolving u_{t+1}(v) = sum_w K(v,w) u_t(w) gives u_t(y) = K^t(y,x)...
    // which equals K^t(x,y) pi(x)/pi(y); with the delta start at x this is
    // pi(x) k^t(x,y). Normalize by pi(x) at the end.
    for (long long target : times) {
      while (t < target) {
        step(u, u_next);
        std::swap(u, u_next);
        ++t;
      }
      step(u, u_next);
      Eigen::VectorXd cur = u / g.pi[x];
      Eigen::VectorXd nxt = u_next / g.pi[x];
      record(t, cur, nxt);
    }
  }

  std::vector<std::pair<double, double>> up, low;
  for (const auto& s : rep.samples) {
    double uu = static_cast<double>(s.d) * s.d / s.t;
    if (s.k_t > 0) up.emplace_back(uu, std::log(s.k_t * s.vol));
    if (s.k_pair > 0) low.emplace_back(uu, std::log(s.k_pair * s.vol));
  }
  require(up.size() >= 2 && low.size() >= 2, errc::bad_input, "too few positive samples to fit");
  detail::fit_line(up, &rep.upper_slope, &rep.upper_intercept, &rep.upper_max_residual);
  detail::fit_line(low, &rep.lower_slope, &rep.lower_intercept, &rep.lower_max_residual);
  return rep;
}

// ---------------------------------------------------------------------------
// theta = 2 cut-off function
// ---------------------------------------------------------------------------

// phi(z) = min{1, 2 (1 - d(x,z)/r)_+}: equal to 1 on B(x, r/2), zero off
// B(x,r), and 2/r-Lipschitz. Items (a)-(c) are exact consequences of the
// formula; item (d) is checked numerically over a fixed test set of f's and
// s in {r/4, r/2, r}, reporting the smallest workable C2.
struct CutoffReport {
  std::vector<double> phi;      // per ambient vertex
  double lipschitz_bound = 0.0;  // 2/r
  double c2_required = 0.0;      // minimal C2 over the checked (f, s) pairs
};

inline CutoffReport cutoff_theta2(const WeightedGraph& g, int x, int r, double theta = 2.0) {
  require(r >= 1, errc::bad_input, "cutoff radius must be >= 1");
  auto dist = bfs_distances(g, x, -1);
  CutoffReport rep;
  rep.phi.resize(g.size());
  for (int v = 0; v < g.size(); ++v) {
    double t = 1.0 - static_cast<double>(dist[v]) / r;
    rep.phi[v] = std::min(1.0, 2.0 * std::max(0.0, t));
  }
  rep.lipschitz_bound = 2.0 / r;

  const double eps = 1.0;  // the theta = 2 cutoff is genuinely Lipschitz
  std::vector<std::function<double(int)>> test_fns = {
      [](int) { return 1.0; },
      [&](int v) { return static_cast<double>(dist[v]) / r; },
      [&](int v) { return dist[v] % 2 == 0 ? 1.0 : -1.0; },
      [&](int v) { return dist[v] <= r / 2 ? 1.0 : 0.0; },
  };
  for (int s : {std::max(1, r / 4), std::max(1, r / 2), r}) {
    for (const auto& f : test_fns) {
      double lhs = 0.0;
      for (int z = 0; z < g.size(); ++z) {
        if (dist[z] > s) continue;
        double grad2 = 0.0;
        auto nb = g.neighbors(z);
        auto mw = g.neighbor_mu(z);
        for (size_t e = 0; e < nb.size(); ++e) {
          double dphi = rep.phi[z] - rep.phi[nb[e]];
          grad2 += dphi * dphi * mw[e];
        }
        lhs += f(z) * f(z) * grad2;
      }
      double dirichlet = 0.0, mass = 0.0;
      for (int z = 0; z < g.size(); ++z) {
        if (dist[z] > 2 * s) continue;
        mass += f(z) * f(z) * g.pi[z];
        auto nb = g.neighbors(z);
        auto mw = g.neighbor_mu(z);
        for (size_t e = 0; e < nb.size(); ++e) {
          if (nb[e] < z || dist[nb[e]] > 2 * s) continue;
          double df = f(z) - f(nb[e]);
          dirichlet += df * df * mw[e];
        }
      }
      double bracket = dirichlet + mass / std::pow(static_cast<double>(s), theta);
      double scale = std::pow(static_cast<double>(s) / r, 2.0 * eps);
      if (lhs > 0.0) rep.c2_required = std::max(rep.c2_required, lhs / (scale * bracket));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Carleson estimate and pi_phi volume comparison
// ---------------------------------------------------------------------------

struct CarlesonScale {
  int radius = 0;
  double max_phi_ratio = 0.0;  // max over x of max_{B_U(x,r)} phi0 / phi0(x_r)
  double vol_ratio_min = std::numeric_limits<double>::infinity();
  double vol_ratio_max = 0.0;  // pi_phi(B_U(x,r)) / (pi(B(x,r)) phi0(x_r)^2)
};

struct CarlesonReport {
  std::vector<CarlesonScale> scales;
};

// Self-contained sweep (no per-source caching): one truncated BFS inside U
// and one in the ambient graph per (x, r).
inline CarlesonReport carleson_report(const SubKernel& sub, const PerronPair& pair,
                                      const InnerPointIndex& points,
                                      const std::vector<int>& radii, const std::vector<int>& xs) {
  const Domain& dom = *sub.dom;
  const WeightedGraph& g = *dom.graph;
  InnerMetric metric(dom);
  CarlesonReport rep;
  for (int r : radii) {
    CarlesonScale sc;
    sc.radius = r;
    for (int x : xs) {
      int xr = points.select(x, static_cast<double>(r));
      double phi_xr = pair.phi0(dom.local(xr));
      double max_phi = 0.0, pi_phi_ball = 0.0;
      for (int lv : metric.inner_ball_local(x, r)) {
        double p = pair.phi0(lv);
        max_phi = std::max(max_phi, p);
        pi_phi_ball += p * p * g.pi[dom.u[lv]];
      }
      sc.max_phi_ratio = std::max(sc.max_phi_ratio, max_phi / phi_xr);
      double ambient_vol = ball_volume(g, ball(g, x, r));
      double vr = pi_phi_ball / (ambient_vol * phi_xr * phi_xr);
      sc.vol_ratio_min = std::min(sc.vol_ratio_min, vr);
      sc.vol_ratio_max = std::max(sc.vol_ratio_max, vr);
    }
    rep.scales.push_back(sc);
  }
  return rep;
}

// Largest exponent ln(phi0(x)/phi0(z)) / ln(1 + d_U(x,z)) over pairs at
// distance >= 1; the eigenfunction-ratio bound says this stays bounded.
inline double phi_ratio_exponent(const EstimateContext& ctx, const std::vector<int>& xs) {
  double worst = 0.0;
  for (int x : xs) {
    auto row = ctx.metric().row(x);
    for (int i = 0; i < ctx.domain().size(); ++i) {
      int d = (*row)[i];
      if (d < 1) continue;
      double ratio = ctx.phi0(x) / ctx.pair().phi0(i);
      if (ratio <= 1.0) continue;
      worst = std::max(worst, std::log(ratio) / std::log(1.0 + d));
    }
  }
  return worst;
}

}  // namespace ruinkit

#endif
