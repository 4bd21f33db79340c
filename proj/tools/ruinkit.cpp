// ruinkit command-line interface: model generation, exit distributions,
// eigenpairs, Doob transform, verification suites, simulation, and ratio
// reports, all as pure functions of their flags with file/stdin JSON plumbing.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ruinkit/estimates.hpp"
#include "ruinkit/json_io.hpp"
#include "ruinkit/montecarlo.hpp"
#include "ruinkit/threads.hpp"

namespace {

using namespace ruinkit;
using nlohmann::json;

constexpr const char* kSchema = "ruinkit/1";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_all(const std::string& path) {
  if (path == "-" || path.empty()) {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  require(in.good(), errc::bad_input, "cannot open input " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::string& path, const std::string& content) {
  if (path == "-" || path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  require(out.good(), errc::bad_input, "cannot open output " + path);
  out << content;
}

struct ModelArgs {
  std::string kind;
  int N = 8;
  int n = 2;
  int margin = -1;
  bool lazy = false;

  ModelSpec to_spec() const {
    ModelSpec s;
    if (kind == "line") {
      s.kind = ModelKind::Line;
    } else if (kind == "box2" || kind == "box") {
      s.kind = ModelKind::BoxZn;
      s.n = kind == "box2" ? 2 : n;
    } else if (kind == "triangle") {
      s.kind = ModelKind::TriangleGame;
    } else if (kind == "punctured-cube") {
      s.kind = ModelKind::PuncturedCube;
      s.n = n;
    } else {
      fail(errc::bad_input, "unknown model kind '" + kind + "'");
    }
    s.N = N;
    s.margin = margin;
    s.lazy = lazy;
    return s;
  }
};

struct LoadedProblem {
  WeightedGraph graph;
  Domain domain;

  LoadedProblem() = default;
  LoadedProblem(LoadedProblem&& o) noexcept
      : graph(std::move(o.graph)), domain(std::move(o.domain)) {
    domain.graph = &graph;
  }
  LoadedProblem& operator=(LoadedProblem&& o) noexcept {
    graph = std::move(o.graph);
    domain = std::move(o.domain);
    domain.graph = &graph;
    return *this;
  }
};

LoadedProblem load_problem(const ModelArgs& margs, const std::string& input) {
  LoadedProblem p;
  if (!margs.kind.empty()) {
    Model m = generate(margs.to_spec());
    p.graph = std::move(m.graph);
    std::vector<int> u(m.domain.u);
    p.domain = build_domain(p.graph, u);
    return p;
  }
  json doc = json::parse(read_all(input));
  const json& jg = doc.contains("graph") ? doc.at("graph") : doc;
  p.graph = graph_from_json(jg);
  require(doc.contains("domain"), errc::bad_input, "input JSON needs a 'domain' object");
  p.domain = domain_from_json(p.graph, doc.at("domain"));
  return p;
}

// --from names a vertex by coordinates ("3,3", or "3" on 1-D models) when the
// dimension matches, otherwise by external id.
int parse_from(const LoadedProblem& p, const std::string& from) {
  std::vector<int> coords;
  std::stringstream ss(from);
  std::string tok;
  while (std::getline(ss, tok, ',')) coords.push_back(std::stoi(tok));
  if (p.graph.coord_dim == static_cast<int>(coords.size())) {
    for (int v = 0; v < p.graph.size(); ++v) {
      auto c = p.graph.coords_of(v);
      bool eq = true;
      for (int i = 0; i < p.graph.coord_dim; ++i) eq = eq && c[i] == coords[i];
      if (eq) return v;
    }
    fail(errc::bad_input, "no vertex at coordinates " + from);
  }
  require(coords.size() == 1, errc::bad_input, "--from coordinate dimension mismatch");
  return p.graph.index_of(std::stoll(from));
}

std::string coords_csv(const WeightedGraph& g, int v) {
  std::string s;
  for (int c : g.coords_of(v)) {
    if (!s.empty()) s += ",";
    s += std::to_string(c);
  }
  return s;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_model(const ModelArgs& margs, const std::string& output) {
  Model m = generate(margs.to_spec());
  json out{{"schema", kSchema},
           {"graph", graph_to_json(m.graph)},
           {"domain", domain_to_json(m.domain)}};
  write_all(output, out.dump() + "\n");
  return 0;
}

int cmd_exit(const LoadedProblem& p, const std::string& from, long long t, bool extended,
             const std::string& format, const std::string& output) {
  MarkovKernel kernel = build_kernel(p.graph);
  SubKernel sub = restrict_kernel(kernel, p.domain);
  int x = parse_from(p, from);
  ExitDistribution dist;
  if (t >= 1) {
    dist = exit_by_time(sub, x, t, extended ? BoundaryKind::Extended : BoundaryKind::Outer);
  } else {
    GreensFunction greens(sub);
    dist = poisson_kernel(sub, greens, x, extended ? BoundaryKind::Extended : BoundaryKind::Outer);
  }
  if (format == "json") {
    json rows = json::array();
    for (const auto& e : dist.entries) {
      json r{{"y", p.graph.ids[e.y]}, {"P", e.p}, {"p_density", e.density}};
      if (extended) r["z"] = p.graph.ids[e.z];
      rows.push_back(r);
    }
    json out{{"schema", kSchema}, {"source", p.graph.ids[x]},
             {"horizon", t >= 1 ? json(t) : json(nullptr)}, {"exits", rows}};
    write_all(output, out.dump() + "\n");
    return 0;
  }
  std::string csv = extended ? "y_id,y_coords,z_id,P,p_density\n" : "y_id,y_coords,P,p_density\n";
  for (const auto& e : dist.entries) {
    csv += std::to_string(p.graph.ids[e.y]) + ",\"" + coords_csv(p.graph, e.y) + "\"";
    if (extended) csv += "," + std::to_string(p.graph.ids[e.z]);
    csv += "," + fmt17(e.p) + "," + fmt17(e.density) + "\n";
  }
  write_all(output, csv);
  return 0;
}

int cmd_eigen(const LoadedProblem& p, int top, bool full, const std::string& output) {
  MarkovKernel kernel = build_kernel(p.graph);
  SubKernel sub = restrict_kernel(kernel, p.domain);
  json out{{"schema", kSchema}};
  if (top <= 1 && !full) {
    PerronPair pair = perron_pair(sub);
    out["beta"] = json::array({pair.beta0});
    json phi0 = json::object();
    for (int i = 0; i < sub.size(); ++i)
      phi0[std::to_string(p.graph.ids[p.domain.u[i]])] = pair.phi0(i);
    out["phi0"] = phi0;
    out["T_U"] = pair.t_u;
  } else {
    EigenDecomposition dec = full_decomposition(sub);
    int count = full ? dec.size() : std::min(top, dec.size());
    json betas = json::array();
    for (int i = 0; i < count; ++i) betas.push_back(dec.betas(i));
    out["beta"] = betas;
    json phi0 = json::object();
    for (int i = 0; i < sub.size(); ++i)
      phi0[std::to_string(p.graph.ids[p.domain.u[i]])] = dec.phis(i, 0);
    out["phi0"] = phi0;
    if (full) {
      json phis = json::array();
      for (int j = 0; j < count; ++j) {
        json col = json::array();
        for (int i = 0; i < sub.size(); ++i) col.push_back(dec.phis(i, j));
        phis.push_back(col);
      }
      out["phi"] = phis;
    }
  }
  write_all(output, out.dump() + "\n");
  return 0;
}

int cmd_doob(const LoadedProblem& p, const std::string& output) {
  MarkovKernel kernel = build_kernel(p.graph);
  SubKernel sub = restrict_kernel(kernel, p.domain);
  PerronPair pair = perron_pair(sub);
  DoobChain chain = doob_transform(sub, pair);
  WeightedGraph dg = chain.to_weighted_graph();
  json out{{"schema", kSchema},
           {"beta0", pair.beta0},
           {"T_U", pair.t_u},
           {"graph", graph_to_json(dg)}};
  write_all(output, out.dump() + "\n");
  return 0;
}

json verify_doob_report(const LoadedProblem& p) {
  MarkovKernel kernel = build_kernel(p.graph);
  SubKernel sub = restrict_kernel(kernel, p.domain);
  PerronPair pair = perron_pair(sub);
  DoobChain chain = doob_transform(sub, pair);

  double row_sum_err = 0.0, rev_err = 0.0;
  for (int i = 0; i < chain.size(); ++i) {
    double rs = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.kernel, i); it;
         ++it) {
      rs += it.value();
      double fwd = chain.pi_phi(i) * it.value();
      double bwd = chain.pi_phi(it.col()) * chain.kernel.coeff(it.col(), i);
      rev_err = std::max(rev_err, std::abs(fwd - bwd));
    }
    row_sum_err = std::max(row_sum_err, std::abs(rs - 1.0));
  }

  // conjugation at a deterministic sample of (t, x, y)
  double conj_err = 0.0;
  const Domain& dom = p.domain;
  SplitMix64 rng(20240301ull);
  for (int s = 0; s < 20; ++s) {
    long long t = 1 + static_cast<long long>(rng.below(40));
    int x = dom.u[rng.below(static_cast<std::uint32_t>(dom.size()))];
    int y = dom.u[rng.below(static_cast<std::uint32_t>(dom.size()))];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dom.size());
    v(dom.local(x)) = 1.0;
    for (long long l = 0; l < t; ++l) v = sub.apply_transpose(v);
    double k_t_u = v(dom.local(y)) / sub.pi_u[dom.local(y)];
    double k_doob = doob_heat_kernel(chain, t, x, y);
    double rhs = std::pow(pair.beta0, static_cast<double>(t)) * pair.phi0(dom.local(x)) *
                 pair.phi0(dom.local(y)) * k_doob;
    conj_err = std::max(conj_err, std::abs(k_t_u - rhs));
  }

  double flux = flux_identity_check(sub, pair);

  GreensFunction greens(sub);
  double route_err = 0.0;
  int probe = std::max(1, dom.size() / 8);
  for (int i = 0; i < dom.size(); i += probe) {
    int x = dom.u[i];
    auto direct = poisson_kernel(sub, greens, x, BoundaryKind::Extended);
    auto via_doob = poisson_via_doob(chain, x, BoundaryKind::Extended);
    for (size_t e = 0; e < direct.entries.size(); ++e)
      route_err = std::max(route_err, std::abs(direct.entries[e].p - via_doob.entries[e].p));
  }

  return json{{"row_sum_err", row_sum_err},
              {"reversibility_err", rev_err},
              {"conjugation_err", conj_err},
              {"flux_residual", flux},
              {"route_agreement_err", route_err}};
}

int verify_fail(const std::string& invariant) {
  std::cerr << "violated invariant: " << invariant << "\n";
  return 1;
}

int cmd_verify(const std::string& suite, const LoadedProblem& p, const std::string& output,
               double alpha, double a_cap) {
  json out{{"schema", kSchema}, {"suite", suite}};

  if (suite == "inner-uniform") {
    auto rep = verify_inner_uniform(p.domain, alpha, a_cap);
    json jr{{"alpha", rep.alpha}, {"A", rep.a_cap}, {"holds", rep.holds}};
    if (rep.witness_failure) {
      jr["failure"] = json::array({p.graph.ids[rep.witness_failure->first],
                                   p.graph.ids[rep.witness_failure->second]});
    }
    out["inner_uniform"] = jr;
    write_all(output, out.dump() + "\n");
    return 0;
  }
  if (suite == "doob" || suite == "all") {
    json rep = verify_doob_report(p);
    out["doob"] = rep;
    if (suite == "all") {
      if (rep["row_sum_err"].get<double>() > 1e-12) return verify_fail("doob.row_sum");
      if (rep["reversibility_err"].get<double>() > 1e-12) return verify_fail("doob.reversibility");
      if (rep["conjugation_err"].get<double>() > 1e-10) return verify_fail("doob.conjugation");
      if (rep["route_agreement_err"].get<double>() > 1e-8) return verify_fail("doob.route_agreement");
    }
  }
  if (suite == "all" || suite == "graph") {
    MarkovKernel kernel = build_kernel(p.graph);
    double row_err = 0.0;
    for (int v = 0; v < p.graph.size(); ++v)
      row_err = std::max(row_err, std::abs(kernel.row_sum(v) - 1.0));
    out["graph"] = json{{"row_sum_err", row_err}, {"p_e", ellipticity(p.graph).p_e}};
    if (row_err > 1e-12) return verify_fail("graph.row_stochastic");
  }
  if (suite == "all") {
    MarkovKernel kernel = build_kernel(p.graph);
    SubKernel sub = restrict_kernel(kernel, p.domain);
    GreensFunction greens(sub);
    // Green density symmetry and certain exit on sampled sources
    double sym_err = 0.0, total_err = 0.0;
    int probe = std::max(1, p.domain.size() / 6);
    for (int i = 0; i < p.domain.size(); i += probe) {
      int x = p.domain.u[i];
      int z = p.domain.u[(i * 7 + 3) % p.domain.size()];
      sym_err = std::max(sym_err, std::abs(greens.density(x, z) - greens.density(z, x)));
      total_err =
          std::max(total_err, std::abs(poisson_kernel(sub, greens, x).total() - 1.0));
    }
    out["absorbing"] = json{{"green_symmetry_err", sym_err}, {"exit_total_err", total_err}};
    if (sym_err > 1e-10) return verify_fail("absorbing.green_symmetry");
    if (total_err > 1e-10) return verify_fail("absorbing.exit_total");
    // estimate normalization identity: sum of central estimates over dU
    PerronPair pair = perron_pair(sub);
    EstimateContext ctx(sub, pair);
    double total = 0.0;
    for (int y : p.domain.outer_boundary) total += central_exit_estimate(ctx, y).main;
    double expect = ctx.phi0_at_center() * pi_of_phi0(sub, pair);
    out["estimates"] = json{{"normalization_err", std::abs(total - expect)}};
    if (std::abs(total - expect) > 1e-10 * std::max(1.0, expect))
      return verify_fail("estimates.normalization_identity");
  }
  if (suite == "estimate" || suite == "carleson" || suite == "harnack" || suite == "heatkernel") {
    MarkovKernel kernel = build_kernel(p.graph);
    SubKernel sub = restrict_kernel(kernel, p.domain);
    PerronPair pair = perron_pair(sub);
    if (suite == "estimate") {
      EstimateContext ctx(sub, pair);
      GreensFunction greens(sub);
      auto exact = poisson_kernel(sub, greens, ctx.center());
      RatioReport rep;
      for (const auto& e : exact.entries) {
        RatioPoint pt;
        pt.y = e.y;
        pt.exact = e.p;
        pt.estimate = central_exit_estimate(ctx, e.y).main;
        rep.add(pt);
      }
      out["estimate"] = json{{"center", p.graph.ids[ctx.center()]},
                             {"R", ctx.r_max()},
                             {"T_U", ctx.t_u()},
                             {"ratio_min", rep.min_ratio},
                             {"ratio_max", rep.max_ratio},
                             {"spread", rep.spread()}};
    } else if (suite == "carleson") {
      InnerPointIndex pts(p.domain, 0.25, 4.0);
      auto rep = carleson_report(sub, pair, pts, {2, 4, 8}, p.domain.u);
      json scales = json::array();
      for (const auto& sc : rep.scales)
        scales.push_back(json{{"r", sc.radius},
                              {"carleson_max", sc.max_phi_ratio},
                              {"vol_ratio_min", sc.vol_ratio_min},
                              {"vol_ratio_max", sc.vol_ratio_max}});
      out["carleson"] = scales;
    } else if (suite == "harnack") {
      DoobChain chain = doob_transform(sub, pair);
      WeightedGraph dg = chain.to_weighted_graph();
      MarkovKernel dk = build_kernel(dg);
      InnerPointIndex pts(p.domain, 0.25, 4.0);
      int x0 = dg.index_of(p.graph.ids[pts.center()]);
      auto rep = harnack_constant(dg, dk, {2, 3}, 0, {x0}, false);
      json cyl = json::array();
      for (const auto& c : rep.cylinders)
        cyl.push_back(json{{"R", c.radius},
                           {"C_H", c.constant},
                           {"const_fn_ratio", c.const_function_ratio},
                           {"generators", c.generators}});
      out["harnack"] = cyl;
    } else {
      DoobChain chain = doob_transform(sub, pair);
      WeightedGraph dg = chain.to_weighted_graph();
      MarkovKernel dk = build_kernel(dg);
      InnerPointIndex pts(p.domain, 0.25, 4.0);
      int x0 = dg.index_of(p.graph.ids[pts.center()]);
      auto rep = gaussian_bound_fit(dg, dk, {x0}, {4, 8, 16, 32}, 4, false);
      out["heatkernel"] = json{{"upper_slope", rep.upper_slope},
                               {"upper_intercept", rep.upper_intercept},
                               {"upper_max_residual", rep.upper_max_residual},
                               {"lower_slope", rep.lower_slope},
                               {"lower_max_residual", rep.lower_max_residual},
                               {"diag_band", json::array({rep.diag_min, rep.diag_max})}};
    }
  }
  write_all(output, out.dump() + "\n");
  return 0;
}

int cmd_simulate(const ModelArgs& margs, const LoadedProblem* loaded, const std::string& from,
                 double samples, std::uint64_t seed, const std::string& record,
                 const std::string& output) {
  SimConfig cfg;
  cfg.samples = static_cast<long long>(samples);
  cfg.seed = seed;

  if (record == "first-elimination") {
    require(!margs.kind.empty() && margs.to_spec().kind == ModelKind::TriangleGame,
            errc::bad_input, "first-elimination needs --model triangle");
    int N = margs.N;
    std::array<int, 3> start{N / 4, N / 4, N / 2};
    if (!from.empty()) {
      std::stringstream ss(from);
      std::string tok;
      int i = 0;
      while (std::getline(ss, tok, ',') && i < 3) start[i++] = std::stoi(tok);
      start[2] = N - start[0] - start[1];
    }
    auto res = first_elimination(N, start, cfg);
    std::string csv = "label,count,frequency,wilson_lo,wilson_hi\n";
    const char* names[3] = {"A", "B", "C"};
    for (int i = 0; i < 3; ++i) {
      long long count = 0;
      for (const auto& c : res.raw.cells)
        if (c.label == names[i]) count += c.count;
      EmpiricalCell agg;
      agg.count = count;
      auto [lo, hi] = res.raw.wilson(agg);
      csv += std::string(names[i]) + "," + std::to_string(count) + "," +
             fmt17(res.p_first[i]) + "," + fmt17(lo) + "," + fmt17(hi) + "\n";
    }
    write_all(output, csv);
    std::cerr << json{{"samples", res.raw.samples}, {"censored", res.raw.censored}}.dump() << "\n";
    return 0;
  }

  require(loaded != nullptr, errc::bad_input, "simulate needs --model or --input");
  MarkovKernel kernel = build_kernel(loaded->graph);
  SubKernel sub = restrict_kernel(kernel, loaded->domain);
  PerronPair pair = perron_pair(sub);
  int x = parse_from(*loaded, from);

  cfg.record = record == "exit-half-edge" ? RecordKind::ExitHalfEdge
               : record == "exit-time"    ? RecordKind::ExitTime
                                          : RecordKind::ExitPoint;
  auto res = simulate_exits(kernel, loaded->domain, x, cfg, pair.t_u);
  if (cfg.record == RecordKind::ExitTime) {
    std::string csv = "t,count,cdf\n";
    long long acc = 0;
    for (size_t t = 0; t < res.tau_histogram.size(); ++t) {
      if (res.tau_histogram[t] == 0 && acc > 0 && acc == res.completed) break;
      acc += res.tau_histogram[t];
      if (res.tau_histogram[t] == 0) continue;
      csv += std::to_string(t) + "," + std::to_string(res.tau_histogram[t]) + "," +
             fmt17(static_cast<double>(acc) / res.completed) + "\n";
    }
    write_all(output, csv);
    std::cerr << json{{"samples", res.samples}, {"censored", res.censored}}.dump() << "\n";
    return 0;
  }
  std::string csv = cfg.record == RecordKind::ExitHalfEdge
                        ? "y_id,z_id,count,frequency,wilson_lo,wilson_hi\n"
                        : "y_id,count,frequency,wilson_lo,wilson_hi\n";
  for (const auto& c : res.cells) {
    auto [lo, hi] = res.wilson(c);
    csv += std::to_string(loaded->graph.ids[c.y]);
    if (cfg.record == RecordKind::ExitHalfEdge) csv += "," + std::to_string(loaded->graph.ids[c.z]);
    csv += "," + std::to_string(c.count) + "," + fmt17(c.frequency) + "," + fmt17(lo) + "," +
           fmt17(hi) + "\n";
  }
  write_all(output, csv);
  std::cerr << json{{"samples", res.samples}, {"censored", res.censored}}.dump() << "\n";
  return 0;
}

int cmd_report(const ModelArgs& margs, const std::string& kind, const std::string& output) {
  ModelSpec spec = margs.to_spec();
  Model m = generate(spec);
  MarkovKernel kernel = build_kernel(m.graph);
  SubKernel sub = restrict_kernel(kernel, m.domain);
  GreensFunction greens(sub);

  RatioReport rep;
  std::string csv;
  if (kind == "puo") {
    PerronPair pair = perron_pair(sub);
    EstimateContext ctx(sub, pair);
    auto exact = poisson_kernel(sub, greens, ctx.center());
    csv = "y_id,y_coords,exact,estimate,ratio\n";
    for (const auto& e : exact.entries) {
      RatioPoint pt;
      pt.y = e.y;
      pt.exact = e.p;
      pt.estimate = central_exit_estimate(ctx, e.y).main;
      rep.add(pt);
      csv += std::to_string(m.graph.ids[e.y]) + ",\"" + coords_csv(m.graph, e.y) + "\"," +
             fmt17(pt.exact) + "," + fmt17(pt.estimate) + "," + fmt17(pt.exact / pt.estimate) +
             "\n";
    }
  } else if (kind == "grp") {
    require(spec.kind == ModelKind::TriangleGame, errc::bad_input, "grp report needs triangle");
    int N = spec.N;
    csv = "x1,x2,y1,exact,estimate,ratio\n";
    for (int x1 = 1; x1 < N; ++x1) {
      for (int x2 = 1; x2 < N; ++x2) {
        if (x1 + x2 >= N || 2 * x1 + x2 > N) continue;
        auto exact = poisson_kernel(sub, greens, m.vertex_at({x1, x2}));
        for (int y1 = 1; y1 < N; ++y1) {
          RatioPoint pt;
          pt.exact = exact.at(m.vertex_at({y1, 0}));
          pt.estimate = grp_formula(N, {x1, x2}, {y1, 0});
          rep.add(pt);
          csv += std::to_string(x1) + "," + std::to_string(x2) + "," + std::to_string(y1) + "," +
                 fmt17(pt.exact) + "," + fmt17(pt.estimate) + "," + fmt17(pt.ratio) + "\n";
        }
      }
    }
  } else if (kind == "hmarb") {
    PerronPair pair = perron_pair(sub);
    EstimateContext ctx(sub, pair);
    csv = "x_id,y_id,z_id,exact,estimate,ratio\n";
    int probe = std::max(1, m.domain.size() / 16);
    for (int i = 0; i < m.domain.size(); i += probe) {
      int x = m.domain.u[i];
      auto exact = poisson_kernel(sub, greens, x, BoundaryKind::Extended);
      for (const auto& e : exact.entries) {
        Domain::HalfEdge he{e.z, e.y};
        RatioPoint pt;
        pt.x = x;
        pt.y = e.y;
        pt.z = e.z;
        pt.exact = e.p;
        pt.estimate = harmonic_measure_estimate(ctx, x, he).value;
        rep.add(pt);
        csv += std::to_string(m.graph.ids[x]) + "," + std::to_string(m.graph.ids[e.y]) + "," +
               std::to_string(m.graph.ids[e.z]) + "," + fmt17(pt.exact) + "," +
               fmt17(pt.estimate) + "," + fmt17(pt.ratio) + "\n";
      }
    }
  } else {
    fail(errc::bad_input, "unknown report kind '" + kind + "'");
  }
  write_all(output, csv);
  std::cerr << json{{"spread", rep.spread()},
                    {"ratio_min", rep.min_ratio},
                    {"ratio_max", rep.max_ratio},
                    {"points", rep.points.size()}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ruinkit: exit distributions of absorbed reversible chains"};
  app.require_subcommand(1);

  ModelArgs margs;
  std::string input = "-", output = "-", format = "csv", from, record = "exit-point";
  std::string suite = "all", report_kind = "puo";
  long long horizon = -1;
  bool extended = false, full = false;
  int top = 1;
  double samples = 10000;
  std::uint64_t seed = 0;

  auto add_model_flags = [&](CLI::App* cmd, bool positional) {
    if (positional)
      cmd->add_option("kind", margs.kind, "line|box2|box|triangle|punctured-cube")->required();
    else
      cmd->add_option("--model", margs.kind, "line|box2|box|triangle|punctured-cube");
    cmd->add_option("--N", margs.N, "size parameter");
    cmd->add_option("--n", margs.n, "dimension (box, punctured-cube)");
    cmd->add_option("--margin", margs.margin, "ambient padding (default 2N)");
    cmd->add_flag("--lazy", margs.lazy, "lazy line walk (mu = 1/4)");
  };

  auto* c_model = app.add_subcommand("model", "generate a model graph + domain as JSON");
  add_model_flags(c_model, true);
  c_model->add_option("--output", output);

  auto* c_exit = app.add_subcommand("exit", "exact exit distribution");
  c_exit->add_option("--input", input, "graph+domain JSON (default stdin)");
  add_model_flags(c_exit, false);
  c_exit->add_option("--from", from)->required();
  c_exit->add_option("--t", horizon, "finite horizon");
  c_exit->add_flag("--extended", extended, "over the extended boundary");
  c_exit->add_option("--format", format, "csv|json");
  c_exit->add_option("--output", output);

  auto* c_eigen = app.add_subcommand("eigen", "Perron pair / spectrum");
  c_eigen->add_option("--input", input);
  add_model_flags(c_eigen, false);
  c_eigen->add_option("--top", top, "number of eigenvalues");
  c_eigen->add_flag("--full", full, "full decomposition");
  c_eigen->add_option("--output", output);

  auto* c_doob = app.add_subcommand("doob", "Doob-transformed weighted graph");
  c_doob->add_option("--input", input);
  add_model_flags(c_doob, false);
  c_doob->add_option("--output", output);

  double alpha = 0.25, a_cap = 4.0;
  auto* c_verify = app.add_subcommand("verify", "verification suites");
  c_verify->add_option("suite", suite,
                       "all|graph|doob|estimate|harnack|heatkernel|carleson|inner-uniform");
  c_verify->add_option("--input", input);
  add_model_flags(c_verify, false);
  c_verify->add_option("--alpha", alpha, "inner-uniformity alpha");
  c_verify->add_option("--A", a_cap, "inner-uniformity A");
  c_verify->add_option("--output", output);

  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo exit sampling");
  c_sim->add_option("--input", input);
  add_model_flags(c_sim, false);
  c_sim->add_option("--from", from);
  c_sim->add_option("--samples", samples);
  c_sim->add_option("--seed", seed);
  c_sim->add_option("--record", record, "exit-point|exit-half-edge|first-elimination|exit-time");
  c_sim->add_option("--output", output);

  auto* c_report = app.add_subcommand("report", "exact-vs-estimate ratio CSV");
  add_model_flags(c_report, false);
  c_report->add_option("--kind", report_kind, "puo|grp|hmarb");
  c_report->add_option("--output", output);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_model->parsed()) return cmd_model(margs, output);
    if (c_exit->parsed() || c_eigen->parsed() || c_doob->parsed() || c_verify->parsed()) {
      LoadedProblem p = load_problem(margs, input);
      if (c_exit->parsed()) return cmd_exit(p, from, horizon, extended, format, output);
      if (c_eigen->parsed()) return cmd_eigen(p, top, full, output);
      if (c_doob->parsed()) return cmd_doob(p, output);
      return cmd_verify(suite, p, output, alpha, a_cap);
    }
    if (c_sim->parsed()) {
      if (record == "first-elimination") return cmd_simulate(margs, nullptr, from, samples, seed, record, output);
      LoadedProblem p = load_problem(margs, input);
      return cmd_simulate(margs, &p, from, samples, seed, record, output);
    }
    if (c_report->parsed()) return cmd_report(margs, report_kind, output);
  } catch (const ruinkit::error& e) {
    std::cerr << e.what() << "\n";
    return e.numerical() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
