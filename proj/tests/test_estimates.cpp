#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "ruinkit/doob.hpp"
#include "ruinkit/estimates.hpp"
#include "ruinkit/models.hpp"

using namespace ruinkit;
using ruinkit::testing::at;

namespace {

struct Ctx {
  Model model;
  MarkovKernel kernel;
  SubKernel sub;
  PerronPair pair;

  static Ctx make(ModelSpec s) {
    Ctx c;
    c.model = generate(s);
    c.kernel = build_kernel(c.model.graph);
    c.sub = restrict_kernel(c.kernel, c.model.domain);
    c.pair = perron_pair(c.sub);
    return c;
  }
};

}  // namespace

TEST_CASE("central exit estimate", "[estimates]") {
  SECTION("normalization identity via the flux") {
    ModelSpec s;
    s.kind = ModelKind::TriangleGame;
    s.N = 12;
    s.margin = 2;
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    double total = 0.0;
    for (int y : c.model.domain.outer_boundary) total += central_exit_estimate(ctx, y).main;
    double expect = ctx.phi0_at_center() * pi_of_phi0(c.sub, c.pair);
    CHECK(total == Approx(expect).epsilon(1e-10));
    // the numerically-approximately-one claim, recorded as a band
    CHECK(expect > 0.05);
    CHECK(expect < 20.0);
  }
  SECTION("box right-face ratio band at N=8") {
    ModelSpec s;
    s.kind = ModelKind::BoxZn;
    s.n = 2;
    s.N = 8;
    s.margin = -1;
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    GreensFunction greens(c.sub);
    auto exact = poisson_kernel(c.sub, greens, ctx.center());
    RatioReport rep;
    for (const auto& e : exact.entries) {
      auto cy = c.model.graph.coords_of(e.y);
      if (cy[0] != s.N + 1) continue;  // right face
      RatioPoint p;
      p.y = e.y;
      p.exact = e.p;
      p.estimate = central_exit_estimate(ctx, e.y).main;
      rep.add(p);
    }
    CHECK(rep.spread() <= 20.0);
    CHECK(rep.spread() == Approx(1.2124).epsilon(1e-2));  // derived fixture
  }
  SECTION("matches the cosine comparison target") {
    const double pi_c = std::numbers::pi;
    ModelSpec s;
    s.kind = ModelKind::BoxZn;
    s.n = 2;
    s.N = 8;
    s.margin = -1;
    Ctx c = Ctx::make(s);
    GreensFunction greens(c.sub);
    auto exact = poisson_kernel(c.sub, greens, at(c.model.graph, {0, 0}));
    double lo = 1e300, hi = 0.0;
    for (int n = -s.N; n <= s.N; ++n) {
      double shape = std::cos(pi_c * n / (2.0 * (s.N + 1))) / (s.N + 1);
      double r = exact.at(at(c.model.graph, {s.N + 1, n})) / shape;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi / lo <= 2.0);  // uniform band over the face
  }
  SECTION("half-edge variant and the sqrt(pi(U)) form") {
    ModelSpec s;
    s.kind = ModelKind::TriangleGame;
    s.N = 8;
    s.margin = 2;
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    const auto& he = c.model.domain.extended_boundary[3];
    auto est = central_exit_estimate(ctx, he);
    double ratio = est.main / est.sqrt_variant;
    CHECK(ratio == Approx(ctx.phi0_at_center() * std::sqrt(ctx.pi_of_u())));
  }
}

TEST_CASE("H function branches", "[estimates]") {
  ModelSpec s;
  s.kind = ModelKind::BoxZn;
  s.n = 2;
  s.N = 8;
  s.margin = 26;
  Ctx c = Ctx::make(s);
  EstimateContext ctx(c.sub, c.pair);
  int x = at(c.model.graph, {-2, 1});
  int z = at(c.model.graph, {1, 3});
  int d = ctx.inner_dist(x, z);
  REQUIRE(d == 5);
  long long d2 = d * d;
  long long r2 = static_cast<long long>(ctx.r_max()) * ctx.r_max();

  SECTION("flat before the diffusive time") {
    for (long long t = 1 + d; t < d2; t += 3) CHECK(h_function(ctx, t, x, z) == 1.0);
  }
  SECTION("jump ratios at the branch boundaries stay below 3") {
    CHECK(h_function(ctx, d2, x, z) / h_function(ctx, d2 - 1, x, z) <= 3.0);
    CHECK(h_function(ctx, r2 + 1, x, z) / h_function(ctx, r2, x, z) <= 3.0);
  }
  SECTION("monotone in t and at least 1") {
    double prev = 0.0;
    for (long long t = 1 + d; t < 3 * r2; t += 7) {
      double h = h_function(ctx, t, x, z);
      CHECK(h >= 1.0);
      CHECK(h >= prev - 1e-12);
      prev = h;
    }
  }
  SECTION("saturates at the T_U cap") {
    long long tu = static_cast<long long>(ctx.t_u());
    REQUIRE(ctx.t_u() > static_cast<double>(r2));  // lazy box: T_U above R^2
    CHECK(h_function(ctx, 5 * tu, x, z) == Approx(h_function(ctx, 10 * tu, x, z)));
    CHECK(h_function(ctx, 5 * tu, x, z) > h_function(ctx, r2, x, z));
  }
  SECTION("third-branch slope is the displayed one") {
    long long t0 = r2 + 4;
    double slope = h_function(ctx, t0 + 1, x, z) - h_function(ctx, t0, x, z);
    int xd = ctx.x_r(x, static_cast<double>(d));
    double pref = ctx.phi0(xd) * ctx.phi0(xd) * ctx.volume(x, d) / (1.0 + d * d);
    double expect = pref / (ctx.phi0_at_center() * ctx.phi0_at_center() * ctx.pi_of_u());
    CHECK(slope == Approx(expect).epsilon(1e-12));
  }
  SECTION("simplified regime keeps H of order one under fast volume growth") {
    int corner = at(c.model.graph, {7, 7});
    int zc = at(c.model.graph, {4, 6});
    REQUIRE(ctx.volume_growth_exponent(corner) >= 2.1);
    int dc = ctx.inner_dist(corner, zc);
    for (long long t = dc * dc; t <= r2; t += 11)
      CHECK(h_function(ctx, t, corner, zc) <= 8.0);
  }
}

TEST_CASE("global estimate", "[estimates]") {
  ModelSpec s;
  s.kind = ModelKind::TriangleGame;
  s.N = 12;
  s.margin = -1;
  Ctx c = Ctx::make(s);
  EstimateContext ctx(c.sub, c.pair);

  SECTION("t=1 forces x adjacent to the exit") {
    // pick a half-edge and its interior endpoint as the start
    const auto& he = c.model.domain.extended_boundary[0];
    auto est = global_estimate(ctx, 1, he.z, he);
    double exact = c.kernel.prob(he.z, he.y);
    CHECK(est.shape > 0.0);
    CHECK(exact / est.shape > 0.0);
    CHECK(exact / est.shape < 1e3);
  }
  SECTION("regime flags nest as the lemmas do") {
    const auto& he = c.model.domain.extended_boundary[5];
    int x = at(c.model.graph, {4, 4});
    int d = ctx.inner_dist(x, he.z);
    for (long long t : {1 + d, 2 * d, d * d + 1, 4 * d * d}) {
      auto f = classify_regime(ctx, t, d);
      if (f.z1) CHECK(f.z2);  // Z1 sits inside Z2
      if (f.z3) CHECK(f.z4);  // Z3 assumes the diffusive floor
    }
  }
  SECTION("caller constants scale the two sides") {
    const auto& he = c.model.domain.extended_boundary[2];
    int x = at(c.model.graph, {3, 5});
    int d = ctx.inner_dist(x, he.z);
    long long t = 2 * d * d + 3;
    auto est = global_estimate(ctx, t, x, he, {0.5, 2.0}, {4.0, 0.25});
    auto shape = global_estimate(ctx, t, x, he);
    CHECK(est.lower == Approx(0.5 * shape.shape * std::exp(-2.0 * d * d / static_cast<double>(t)) /
                              std::exp(-1.0 * d * d / static_cast<double>(t))));
    CHECK(est.upper > est.lower);
  }
  SECTION("tracks the exact finite-horizon exit within a band") {
    int x = at(c.model.graph, {4, 4});
    RatioReport rep;
    for (const auto& he : c.model.domain.extended_boundary) {
      int d = ctx.inner_dist(x, he.z);
      for (long long t : {d * d + 1, 2 * d * d + 1, 8 * d * d + 1}) {
        auto exact = exit_by_time(c.sub, x, t, BoundaryKind::Extended);
        RatioPoint p;
        p.exact = exact.at(he.y, he.z);
        p.estimate = global_estimate(ctx, t, x, he).shape;
        if (p.exact > 0) rep.add(p);
      }
    }
    CHECK(rep.min_ratio > 1e-3);
    CHECK(rep.max_ratio < 1e3);
  }
}

TEST_CASE("harmonic measure estimate", "[estimates]") {
  SECTION("central start reduces to the closed shape on the bottom side") {
    for (int N : {12, 24}) {
      ModelSpec s;
      s.kind = ModelKind::TriangleGame;
      s.N = N;
      s.margin = -1;
      Ctx c = Ctx::make(s);
      EstimateContext ctx(c.sub, c.pair);
      int x = at(c.model.graph, {N / 4, N / 4});
      double lo = 1e300, hi = 0.0;
      for (const auto& he : c.model.domain.extended_boundary) {
        auto cy = c.model.graph.coords_of(he.y);
        if (cy[1] != 0) continue;
        double y1 = cy[0];
        double shape = y1 * y1 * (N - y1) * (N - y1) / std::pow(static_cast<double>(N), 5.0);
        double r = harmonic_measure_estimate(ctx, x, he).value / shape;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      CHECK(hi / lo <= 25.0);  // uniform band, recorded
    }
  }
  SECTION("median-strip spread is scale-stable") {
    // x within one step of the median 2 x1 + x2 = N toward the bottom side
    double prev = 0.0;
    for (int N : {12, 24}) {
      ModelSpec s;
      s.kind = ModelKind::TriangleGame;
      s.N = N;
      s.margin = -1;
      Ctx c = Ctx::make(s);
      EstimateContext ctx(c.sub, c.pair);
      GreensFunction greens(c.sub);
      RatioReport rep;
      for (int i = 0; i < c.model.domain.size(); ++i) {
        auto cx = c.model.graph.coords_of(c.model.domain.u[i]);
        if (std::abs(2 * cx[0] + cx[1] - N) > 1) continue;
        int x = c.model.domain.u[i];
        auto exact = poisson_kernel(c.sub, greens, x, BoundaryKind::Extended);
        for (const auto& e : exact.entries) {
          if (c.model.graph.coords_of(e.y)[1] != 0) continue;
          Domain::HalfEdge he{e.z, e.y};
          RatioPoint p;
          p.exact = e.p;
          p.estimate = harmonic_measure_estimate(ctx, x, he).value;
          rep.add(p);
        }
      }
      if (prev > 0.0) CHECK(rep.spread() <= 1.5 * prev);
      prev = rep.spread();
    }
  }
  SECTION("the easy form discriminates by volume growth") {
    ModelSpec s;
    s.kind = ModelKind::BoxZn;
    s.n = 2;
    s.N = 8;
    s.margin = 40;  // corner-to-far-corner V(x,d) needs deep ambient padding
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    // phi0(x_r)^2 V(x,r) grows like r^6 from the corner but only r^2 from the
    // center, so the quasi-monotone volume hypothesis separates them
    CHECK(ctx.volume_growth_exponent(at(c.model.graph, {8, 8})) >= 2.1);
    CHECK(ctx.volume_growth_exponent(at(c.model.graph, {0, 0})) < 2.1);
    const auto& he = c.model.domain.extended_boundary[0];
    auto corner = harmonic_measure_estimate(ctx, at(c.model.graph, {8, 8}), he);
    auto center = harmonic_measure_estimate(ctx, at(c.model.graph, {0, 0}), he);
    CHECK(corner.easy_applicable);
    CHECK_FALSE(center.easy_applicable);
    CHECK(corner.easy_value > 0.0);
  }
}

TEST_CASE("GRP closed formula", "[estimates]") {
  SECTION("lower-left start falls off like y1^-4") {
    int N = 16;
    double lo = 1e300, hi = 0.0;
    for (int y1 = 1; y1 < N; ++y1) {
      double shape = (N - y1) * (N - y1) / (static_cast<double>(N) * N * std::pow(y1, 4.0));
      double r = grp_formula(N, {1, 1}, {y1, 0}) / shape;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi / lo <= 16.0);
  }
  SECTION("central start matches the N^-5 shape up to a stable band") {
    double prev = 0.0;
    for (int N : {16, 32}) {
      double lo = 1e300, hi = 0.0;
      for (int y1 = 1; y1 < N; ++y1) {
        double shape = static_cast<double>(y1) * y1 * (N - y1) * (N - y1) /
                       std::pow(static_cast<double>(N), 5.0);
        double r = grp_formula(N, {N / 4, N / 4}, {y1, 0}) / shape;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      CHECK(hi / lo <= 100.0);
      if (prev > 0.0) CHECK(hi / lo <= 1.5 * prev);
      prev = hi / lo;
    }
  }
  SECTION("upper-left start scales like N^-8, not the printed N^-6") {
    // the formula and the exact kernel both follow N^-8 at this corner, not
    // the N^-6 a naive two-factor reduction would suggest
    auto scaled = [](int N) {
      double y1 = N / 2;
      return grp_formula(N, {1, N - 2}, {N / 2, 0}) * std::pow(static_cast<double>(N), 8.0) /
             (y1 * y1 * (N - y1) * (N - y1));
    };
    double a = scaled(16), b = scaled(32);
    CHECK(b / a == Approx(1.0).margin(0.5));  // N^-6 scaling would drift 4x
  }
  SECTION("sector and side guards") {
    CHECK_THROWS_AS(grp_formula(16, {8, 4}, {3, 0}), error);   // 2x1+x2 > N
    CHECK_THROWS_AS(grp_formula(16, {1, 1}, {0, 0}), error);   // corner y
    CHECK_THROWS_AS(grp_formula(16, {0, 4}, {3, 0}), error);   // x on the side
  }
  SECTION("hex distance agrees with the inner metric on the triangle") {
    ModelSpec s;
    s.kind = ModelKind::TriangleGame;
    s.N = 12;
    s.margin = 2;
    Ctx c = Ctx::make(s);
    InnerMetric metric(c.model.domain);
    SplitMix64 rng(17);
    for (int t = 0; t < 40; ++t) {
      int a = c.model.domain.u[rng.below(c.model.domain.size())];
      int b = c.model.domain.u[rng.below(c.model.domain.size())];
      auto ca = c.model.graph.coords_of(a);
      auto cb = c.model.graph.coords_of(b);
      CHECK(metric.distance(a, b) == hex_distance(ca[0], ca[1], cb[0], cb[1]));
    }
  }
}

TEST_CASE("punctured cube shapes", "[estimates]") {
  SECTION("illustrative corner configuration") {
    // k coords of x at N+1-r, l face coords of y at N, the rest small,
    // |x-y| > N/2: shape ~ (1/(N+1))^{n-1+l} (r/(N+1))^k
    int N = 10, n = 3, r = 2;
    std::array<int, 3> x{N + 1 - r, 0, -3};
    std::array<int, 3> y{N, 0, N + 1};  // one face coord at N, top face
    double v = punctured_cube_estimate(n, N, x, y);
    double rough = std::pow(1.0 / (N + 1), n - 1 + 1) * std::pow(static_cast<double>(r) / (N + 1), 1);
    CHECK(v / rough > 2e-3);  // measured 0.0091 at this configuration
    CHECK(v / rough < 5e2);
  }
  SECTION("center exit in n=3 follows |x|^{-1}") {
    int N = 8;
    std::array<int, 3> y{0, 0, 0};
    std::array<int, 3> near{1, 0, 0}, far{4, 4, 4};
    double pn = punctured_cube_estimate(3, N, near, y);
    double pf = punctured_cube_estimate(3, N, far, y);
    CHECK(pn > pf);  // closer to the removed center exits there more often
  }
  SECTION("n=2 displays carry the logs") {
    int N = 8;
    std::array<int, 2> x{3, 2}, y0{0, 0}, yf{9, 1};
    double pc = punctured_cube_estimate(2, N, x, y0);
    double l1 = 5.0;
    double expect = (1 - 3.0 / 9) * (1 - 2.0 / 9) * (1 + std::log(1 + 16.0 / l1)) /
                    ((1 + std::log(8.0)) * (1 + std::log(1 + l1)));
    CHECK(pc == Approx(expect).epsilon(1e-12));
    CHECK(punctured_cube_estimate(2, N, x, yf) > 0.0);
  }
  SECTION("other faces are rejected") {
    std::array<int, 3> x{1, 1, 1}, y{-9, 0, 0};
    CHECK_THROWS_AS(punctured_cube_estimate(3, 8, x, y), error);
  }
  SECTION("S sum built from the context") {
    ModelSpec s;
    s.kind = ModelKind::PuncturedCube;
    s.n = 2;
    s.N = 6;
    s.margin = -1;
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    int x = at(c.model.graph, {3, 0});
    double s1 = punctured_cube_s_sum(ctx, x, 1, s.N);
    double s3 = punctured_cube_s_sum(ctx, x, 3, s.N);
    CHECK(s1 > s3);  // fewer terms as d grows
    CHECK(s3 > 0.0);
  }
}

TEST_CASE("Harnack harness", "[estimates]") {
  SECTION("lazy plane at two scales") {
    auto g = square_lattice_patch({-30, -30}, {30, 30}, 0.125);
    auto k = build_kernel(g);
    int x0 = at(g, {0, 0});
    auto r3 = harnack_cylinder(g, k, x0, 3);
    auto r5 = harnack_cylinder(g, k, x0, 5);
    CHECK(r3.const_function_ratio == Approx(0.5));
    CHECK(r3.constant == Approx(2415.3563).epsilon(1e-3));  // derived fixture
    CHECK(r5.constant == Approx(3919.8279).epsilon(1e-3));
    CHECK_FALSE(r3.unbounded);
    CHECK(r5.constant <= 2.0 * r3.constant);
  }
  SECTION("Doob chain of the triangle is Harnack at sampled scales") {
    ModelSpec s;
    s.kind = ModelKind::TriangleGame;
    s.N = 16;
    s.margin = 2;
    Ctx c = Ctx::make(s);
    DoobChain chain = doob_transform(c.sub, c.pair);
    WeightedGraph dg = chain.to_weighted_graph();
    auto dk = build_kernel(dg);
    int x0 = at(dg, {5, 5});
    auto rep = harnack_constant(dg, dk, {2, 3}, 0, {x0}, false);
    REQUIRE(rep.cylinders.size() == 2);
    for (const auto& cyl : rep.cylinders) {
      CHECK_FALSE(cyl.unbounded);
      CHECK(cyl.const_function_ratio <= 2.0);
    }
    CHECK(rep.cylinders[1].constant <= 2.0 * std::max(rep.cylinders[0].constant,
                                                      rep.cylinders[1].constant));
  }
  SECTION("cylinder cannot poke through the patch rim") {
    auto g = square_lattice_patch({-8, -8}, {8, 8}, 0.125);
    auto k = build_kernel(g);
    CHECK_THROWS_AS(harnack_cylinder(g, k, at(g, {0, 0}), 4), error);
  }
}

TEST_CASE("Gaussian heat kernel fit", "[estimates]") {
  SECTION("lazy plane band and residuals") {
    auto g = square_lattice_patch({-80, -80}, {80, 80}, 0.125);
    auto k = build_kernel(g);
    auto rep = gaussian_bound_fit(g, k, {at(g, {0, 0})}, {4, 9, 16, 25, 36, 49, 64}, 16);
    CHECK(rep.diag_min >= 1.0);   // derived band [1.44, 2.15]
    CHECK(rep.diag_max <= 3.0);
    CHECK(rep.upper_slope > 0.5);  // genuine Gaussian decay in d^2/t
    CHECK(rep.upper_slope < 4.0);
    CHECK(rep.upper_max_residual <= 2.0);   // derived: 1.27
    CHECK(rep.lower_max_residual <= 3.0);   // derived: 2.20
  }
  SECTION("bipartite parity needs the paired kernel") {
    auto g = square_lattice_patch({-60, -60}, {60, 60}, 0.25);
    auto k = build_kernel(g);
    auto rep = gaussian_bound_fit(g, k, {at(g, {0, 0})}, {9, 16, 25}, 6);
    int wrong_parity = 0;
    for (const auto& smp : rep.samples) {
      if ((smp.d + smp.t) % 2 == 1) {
        ++wrong_parity;
        CHECK(smp.k_t == 0.0);
      }
      CHECK(smp.k_pair > 0.0);
    }
    CHECK(wrong_parity > 0);
  }
  SECTION("wave must not reach the rim") {
    auto g = square_lattice_patch({-10, -10}, {10, 10}, 0.125);
    auto k = build_kernel(g);
    CHECK_THROWS_AS(gaussian_bound_fit(g, k, {at(g, {0, 0})}, {100}, 4), error);
  }
}

TEST_CASE("theta=2 cutoff function", "[estimates]") {
  auto g = square_lattice_patch({-40, -40}, {40, 40}, 0.125);
  int x = at(g, {0, 0});
  int r = 12;
  auto rep = cutoff_theta2(g, x, r);
  auto dist = bfs_distances(g, x, -1);

  SECTION("plateau and support") {
    for (int v = 0; v < g.size(); ++v) {
      if (dist[v] <= r / 2) CHECK(rep.phi[v] == 1.0);
      if (dist[v] >= r) CHECK(rep.phi[v] == 0.0);
      CHECK(rep.phi[v] >= 0.0);
      CHECK(rep.phi[v] <= 1.0);
    }
  }
  SECTION("Lipschitz bound 2 d(z,y)/r across edges") {
    for (int v = 0; v < g.size(); ++v)
      for (int w : g.neighbors(v))
        CHECK(std::abs(rep.phi[v] - rep.phi[w]) <= rep.lipschitz_bound + 1e-15);
  }
  SECTION("item (d) constant is modest") {
    CHECK(rep.c2_required > 0.0);
    CHECK(rep.c2_required <= 1.0);  // derived: 0.35-0.37 at r in {8,16}
  }
}

TEST_CASE("Carleson comparison", "[estimates]") {
  ModelSpec s;
  s.kind = ModelKind::TriangleGame;
  s.N = 16;
  s.margin = -1;
  Ctx c = Ctx::make(s);
  InnerPointIndex pts(c.model.domain, 0.25, 4.0);
  auto rep = carleson_report(c.sub, c.pair, pts, {2, 4}, c.model.domain.u);
  REQUIRE(rep.scales.size() == 2);
  for (const auto& sc : rep.scales) {
    CHECK(sc.max_phi_ratio >= 1.0 - 1e-12);
    CHECK(sc.vol_ratio_min > 0.0);
    CHECK(sc.vol_ratio_max < 10.0);
  }
  CHECK(rep.scales[1].max_phi_ratio <= 1.5 * rep.scales[0].max_phi_ratio);
}

TEST_CASE("eigenfunction ratio exponent stays bounded", "[estimates]") {
  double prev = 0.0;
  for (int N : {8, 16}) {
    ModelSpec s;
    s.kind = ModelKind::TriangleGame;
    s.N = N;
    s.margin = 2;
    Ctx c = Ctx::make(s);
    EstimateContext ctx(c.sub, c.pair);
    double e = phi_ratio_exponent(ctx, c.model.domain.u);
    CHECK(e < 4.0);
    if (prev > 0.0) CHECK(e <= 1.5 * prev);
    prev = e;
  }
}

TEST_CASE("central time estimate tracks the finite-horizon exit", "[estimates]") {
  ModelSpec s;
  s.kind = ModelKind::BoxZn;
  s.n = 2;
  s.N = 6;
  s.margin = -1;
  Ctx c = Ctx::make(s);
  EstimateContext ctx(c.sub, c.pair);
  const auto& he = c.model.domain.extended_boundary[4];
  long long r2 = static_cast<long long>(ctx.r_max()) * ctx.r_max();
  for (long long t : {r2, 2 * r2, 8 * r2}) {
    double exact = exit_by_time(c.sub, ctx.center(), t, BoundaryKind::Extended).at(he.y, he.z);
    double est = central_time_estimate(ctx, t, he);
    CHECK(exact / est > 1e-2);
    CHECK(exact / est < 1e2);
  }
}
