#ifndef RUINKIT_DOOB_HPP
#define RUINKIT_DOOB_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ruinkit/absorbing.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/spectral.hpp"

namespace ruinkit {

// Doob transform chain on (U, E_U):
//   K_phi(x,y)  = beta0^{-1} phi0(x)^{-1} K_U(x,y) phi0(y)
//   pi_phi      = phi0^2 pi|_U            (a probability measure)
//   mu_phi_xy   = beta0^{-1} phi0(x) phi0(y) mu_xy
// Rows of K_phi sum to 1 up to the pointwise eigen-residual of the pair, and
// detailed balance w.r.t. pi_phi is inherited from K_U. The transform turns
// the killed chain into an ergodic one (irreducible; periodic when (U, E_U)
// is bipartite and nothing holds still, which is supported throughout).
struct DoobChain {
  const SubKernel* base = nullptr;
  PerronPair pair;
  Eigen::SparseMatrix<double, Eigen::RowMajor> kernel;  // K_phi, local indices
  Eigen::VectorXd pi_phi;

  int size() const { return base->size(); }

  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
    return Eigen::VectorXd(kernel.transpose() * v);
  }

  // The transformed chain as a weighted graph (U, E_U, mu_phi, pi_phi); used
  // by the Harnack harness, which works on any reversible chain.
  WeightedGraph to_weighted_graph() const {
    const Domain& dom = *base->dom;
    const WeightedGraph& g = *dom.graph;
    GraphBuilder b;
    for (int i = 0; i < dom.size(); ++i) {
      int v = dom.u[i];
      std::vector<int> coords(g.coords_of(v).begin(), g.coords_of(v).end());
      b.add_vertex(g.ids[v], pi_phi(i), coords);
    }
    for (int i = 0; i < dom.size(); ++i) {
      int v = dom.u[i];
      for (int w : g.neighbors(v)) {
        if (!dom.in_u[w] || w < v) continue;
        int j = dom.local_of[w];
        double mu_phi = pair.phi0(i) * pair.phi0(j) * g.mu(v, w) / pair.beta0;
        b.add_edge(i, j, mu_phi);
      }
    }
    return b.build();
  }
};

inline DoobChain doob_transform(const SubKernel& sub, const PerronPair& pair) {
  const int n = sub.size();
  require(pair.phi0.size() == n, errc::bad_input, "pair does not match the domain");
  for (int i = 0; i < n; ++i)
    require(pair.phi0(i) > 0.0, errc::non_positive_phi,
            "phi_0 must be strictly positive for the transform");

  DoobChain chain;
  chain.base = &sub;
  chain.pair = pair;
  chain.kernel = sub.matrix;
  for (int i = 0; i < n; ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.kernel, i); it;
         ++it) {
      it.valueRef() = it.value() * pair.phi0(it.col()) / (pair.beta0 * pair.phi0(i));
    }
  }
  chain.pi_phi.resize(n);
  for (int i = 0; i < n; ++i)
    chain.pi_phi(i) = pair.phi0(i) * pair.phi0(i) * sub.pi_u[i];
  return chain;
}

// k^t_phi(x,y) = K^t_phi(x,y) / pi_phi(y), by t row sweeps. Satisfies the
// conjugation identity k^t_U(x,y) = beta0^t phi0(x) phi0(y) k^t_phi(x,y)
// exactly (it telescopes for any positive phi, eigenpair or not).
inline double doob_heat_kernel(const DoobChain& chain, long long t, int x, int y) {
  require(t >= 0, errc::bad_input, "time must be nonnegative");
  const Domain& dom = *chain.base->dom;
  const int lx = dom.local(x), ly = dom.local(y);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(chain.size());
  v(lx) = 1.0;
  for (long long s = 0; s < t; ++s) v = chain.apply_transpose(v);
  return v(ly) / chain.pi_phi(ly);
}

// Poisson kernel through the transform:
//   p_U(x, y*_z) = phi0(x) phi0(z) (mu_zy / pi(y)) sum_t beta0^t k^t_phi(x,z)
// accumulated for every half-edge in one sweep per source. Truncation is
// certified: sup_z k^t_phi(x,z) is nonincreasing in t (each sweep averages
// against a stochastic row), so the geometric tail after step t is at most
// beta0^{t+1} sup_z k^t_phi / (1 - beta0), and summation stops once that tail
// is below `tail_tol` of every accumulated entry.
struct DoobSeriesOptions {
  double tail_tol = 1e-14;
  long long max_steps = -1;  // -1: 400 T_U + 4 |U| + 1000
};

// The weighted occupation series A_x(z) = sum_t beta0^t k^t_phi(x, z) for all
// z at once; symmetric in (x, z) by reversibility of the transform.
inline Eigen::VectorXd doob_series(const DoobChain& chain, int x, long long horizon = -1,
                                   const DoobSeriesOptions& opts = {}) {
  const Domain& dom = *chain.base->dom;
  const int n = chain.size();
  const double beta0 = chain.pair.beta0;

  long long cap = opts.max_steps;
  if (cap < 0)
    cap = static_cast<long long>(400.0 * chain.pair.t_u) + 4ll * n + 1000;

  Eigen::VectorXd walk = Eigen::VectorXd::Zero(n);  // K^t_phi(x, .)
  walk(dom.local(x)) = 1.0;
  Eigen::VectorXd series = Eigen::VectorXd::Zero(n);

  double beta_pow = 1.0;
  long long t = 0;
  for (;; ++t) {
    double sup_k = 0.0;
    for (int z = 0; z < n; ++z) {
      double k = walk(z) / chain.pi_phi(z);
      series(z) += beta_pow * k;
      sup_k = std::max(sup_k, k);
    }
    if (horizon >= 0 && t + 1 >= horizon) break;  // sum over l <= t = horizon-1
    if (horizon < 0) {
      double tail = beta_pow * beta0 * sup_k / (1.0 - beta0);
      double smallest = series.minCoeff();
      if (smallest > 0.0 && tail <= opts.tail_tol * smallest) break;
      require(t < cap, errc::truncation_budget_exceeded,
              "Doob series did not certify its tail within the step cap");
    }
    walk = chain.apply_transpose(walk);
    beta_pow *= beta0;
  }
  return series;
}

inline ExitDistribution poisson_via_doob(const DoobChain& chain, int x,
                                         BoundaryKind over = BoundaryKind::Extended,
                                         long long horizon = -1,
                                         const DoobSeriesOptions& opts = {}) {
  const SubKernel& sub = *chain.base;
  const Domain& dom = *sub.dom;
  const auto& g = *dom.graph;
  Eigen::VectorXd series = doob_series(chain, x, horizon, opts);

  ExitDistribution out;
  out.source = x;
  out.horizon = horizon;
  out.over = over;
  // p_U(x,y*_z) = phi0(x) phi0(z) series(z) mu_zy / pi(y); P_U = p_U pi(y).
  auto half_edge = [&](int z, int y) {
    int lz = dom.local_of[z];
    return chain.pair.phi0(dom.local(x)) * chain.pair.phi0(lz) * series(lz) * g.mu(z, y);
  };
  if (over == BoundaryKind::Extended) {
    for (const auto& he : dom.extended_boundary) {
      ExitEntry e;
      e.y = he.y;
      e.z = he.z;
      e.p = half_edge(he.z, he.y);
      e.density = e.p / g.pi[he.y];
      out.entries.push_back(e);
    }
  } else {
    for (int y : dom.outer_boundary) {
      double p = 0.0;
      for (int z : dom.nu(y)) p += half_edge(z, y);
      ExitEntry e;
      e.y = y;
      e.p = p;
      e.density = p / g.pi[y];
      out.entries.push_back(e);
    }
  }
  return out;
}

// Residual of the exact flux identity
//   sum_{y in dU} sum_{z in nu(y)} phi0(z) mu_zy = (1 - beta0) pi(phi0).
inline double flux_identity_check(const SubKernel& sub, const PerronPair& pair) {
  const Domain& dom = *sub.dom;
  const auto& g = *dom.graph;
  double lhs = 0.0;
  for (const auto& he : dom.extended_boundary)
    lhs += pair.phi0(dom.local_of[he.z]) * g.mu(he.z, he.y);
  double pi_phi0 = 0.0;
  for (int i = 0; i < sub.size(); ++i) pi_phi0 += pair.phi0(i) * sub.pi_u[i];
  double rhs = (1.0 - pair.beta0) * pi_phi0;
  return std::abs(lhs - rhs);
}

inline double pi_of_phi0(const SubKernel& sub, const PerronPair& pair) {
  double s = 0.0;
  for (int i = 0; i < sub.size(); ++i) s += pair.phi0(i) * sub.pi_u[i];
  return s;
}

}  // namespace ruinkit

#endif
