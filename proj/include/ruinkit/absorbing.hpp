#ifndef RUINKIT_ABSORBING_HPP
#define RUINKIT_ABSORBING_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ruinkit/domain.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"

namespace ruinkit {

// Killed kernel K_U(x,y) = K(x,y) 1_U(x) 1_U(y), stored sparse over the
// domain's local indices. Sub-Markovian: rows sum to <= 1, strictly below 1
// exactly on the intrinsic boundary. Detailed balance w.r.t. pi|_U carries
// over from the ambient kernel.
struct SubKernel {
  const Domain* dom = nullptr;
  const MarkovKernel* kernel = nullptr;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;  // |U| x |U|
  std::vector<double> defect;                           // 1 - row sum
  std::vector<double> pi_u;                             // pi per local index

  int size() const { return dom->size(); }

  double value(int x_local, int y_local) const { return matrix.coeff(x_local, y_local); }

  // v <- v K_U  (row-vector sweep, fixed summation order)
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
    return Eigen::VectorXd(matrix.transpose() * v);
  }
  // v <- K_U v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return matrix * v; }

  // Symmetrized matrix M = D^{1/2} K_U D^{-1/2}, D = diag(pi|_U); symmetric by
  // detailed balance, same spectrum as K_U.
  Eigen::SparseMatrix<double> symmetrized() const {
    std::vector<double> sqrt_pi(size());
    for (int i = 0; i < size(); ++i) sqrt_pi[i] = std::sqrt(pi_u[i]);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(matrix.nonZeros());
    for (int i = 0; i < size(); ++i) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix, i); it; ++it) {
        trips.emplace_back(i, static_cast<int>(it.col()),
                           it.value() * sqrt_pi[i] / sqrt_pi[it.col()]);
      }
    }
    Eigen::SparseMatrix<double> m(size(), size());
    m.setFromTriplets(trips.begin(), trips.end());
    // enforce exact symmetry against round-off in the scaling
    Eigen::SparseMatrix<double> mt = m.transpose();
    return 0.5 * (m + mt);
  }
};

inline SubKernel restrict_kernel(const MarkovKernel& kernel, const Domain& dom) {
  SubKernel sub;
  sub.dom = &dom;
  sub.kernel = &kernel;
  const auto& g = *dom.graph;
  const int n = dom.size();
  sub.pi_u.resize(n);
  sub.defect.assign(n, 0.0);

  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    int x = dom.u[i];
    sub.pi_u[i] = g.pi[x];
    double row = 0.0;
    kernel.for_each_entry(x, [&](int y, double p) {
      if (!dom.in_u[y]) return;
      trips.emplace_back(i, dom.local_of[y], p);
      row += p;
    });
    sub.defect[i] = 1.0 - row;
  }
  sub.matrix.resize(n, n);
  sub.matrix.setFromTriplets(trips.begin(), trips.end());
  sub.matrix.makeCompressed();
  return sub;
}

// G_U = sum_t K_U^t = (I - K_U)^{-1}, solved on the pi-symmetrized system,
// which is positive definite because the Perron-Frobenius eigenvalue of K_U
// is < 1. Direct sparse Cholesky up to `direct_cap` unknowns, conjugate
// gradients above. Columns are solved per source and cached.
class GreensFunction {
 public:
  explicit GreensFunction(const SubKernel& sub, int direct_cap = 4000, double cg_tol = 1e-12)
      : sub_(&sub), direct_(sub.size() <= direct_cap), cg_tol_(cg_tol) {
    const int n = sub.size();
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    system_ = identity - sub.symmetrized();
    sqrt_pi_.resize(n);
    for (int i = 0; i < n; ++i) sqrt_pi_(i) = std::sqrt(sub.pi_u[i]);
    if (direct_) {
      ldlt_.compute(system_);
      require(ldlt_.info() == Eigen::Success, errc::singular_system,
              "I - K_U failed to factorize; is the boundary empty?");
    } else {
      cg_.setTolerance(cg_tol_);
      cg_.setMaxIterations(10 * n);
      cg_.compute(system_);
      require(cg_.info() == Eigen::Success, errc::solver_failure, "CG setup failed");
    }
  }

  const SubKernel& sub() const { return *sub_; }

  // Row x of G_U over local indices; G is symmetric after unsymmetrizing only
  // in the density g, so rows are solved as columns of the symmetrized system.
  std::shared_ptr<const Eigen::VectorXd> row_local(int x_local) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(x_local);
      if (it != cache_.end()) return it->second;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sub_->size());
    rhs(x_local) = 1.0;
    Eigen::VectorXd sol;
    if (direct_) {
      sol = ldlt_.solve(rhs);
      require(ldlt_.info() == Eigen::Success, errc::solver_failure, "sparse solve failed");
    } else {
      sol = cg_.solve(rhs);
      require(cg_.info() == Eigen::Success, errc::solver_failure,
              "CG did not converge within the iteration cap");
    }
    // G(x, z) = sqrt(pi(x)) * Msol(z) / sqrt(pi(z))
    auto out = std::make_shared<Eigen::VectorXd>(sub_->size());
    for (int z = 0; z < sub_->size(); ++z)
      (*out)(z) = sqrt_pi_(x_local) * sol(z) / sqrt_pi_(z);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(x_local, std::move(out)).first->second;
  }

  double value(int x, int z) const {  // ambient indices
    const auto& d = *sub_->dom;
    return (*row_local(d.local(x)))(d.local(z));
  }
  double density(int x, int z) const {  // g_U = G_U / pi(z)
    const auto& d = *sub_->dom;
    return value(x, z) / sub_->pi_u[d.local(z)];
  }

 private:
  const SubKernel* sub_;
  bool direct_;
  double cg_tol_;
  Eigen::SparseMatrix<double> system_;
  Eigen::VectorXd sqrt_pi_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<int, std::shared_ptr<const Eigen::VectorXd>> cache_;
};

inline GreensFunction greens_function(const SubKernel& sub, int direct_cap = 4000) {
  return GreensFunction(sub, direct_cap);
}

enum class BoundaryKind { Outer, Extended };

struct ExitEntry {
  int y = -1;       // ambient boundary vertex
  int z = -1;       // interior endpoint for extended-boundary entries, else -1
  double p = 0.0;   // P_U
  double density = 0.0;  // p_U = P_U / pi(y)
};

struct ExitDistribution {
  int source = -1;
  long long horizon = -1;  // -1 means infinity
  BoundaryKind over = BoundaryKind::Outer;
  std::vector<ExitEntry> entries;

  double total() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.p;
    return s;
  }

  double at(int y, int z = -1) const {
    for (const auto& e : entries)
      if (e.y == y && (z < 0 || e.z == z)) return e.p;
    return 0.0;
  }

  // Sum extended-boundary exits over nu(y), reproducing the outer version.
  ExitDistribution contracted(const Domain& dom) const {
    require(over == BoundaryKind::Extended, errc::bad_input, "already over the outer boundary");
    ExitDistribution out;
    out.source = source;
    out.horizon = horizon;
    out.over = BoundaryKind::Outer;
    std::unordered_map<int, double> acc;
    for (const auto& e : entries) acc[e.y] += e.p;
    for (int y : dom.outer_boundary) {
      ExitEntry entry;
      entry.y = y;
      entry.p = acc.count(y) ? acc[y] : 0.0;
      entry.density = entry.p / dom.graph->pi[y];
      out.entries.push_back(entry);
    }
    return out;
  }
};

// Interior normal derivative of f at y in dU:
//   df/dnu(y) = sum_{x in nu(y)} (f(x) - f(y)) mu_xy / pi(y).
template <typename Fn>
double normal_derivative(const Domain& dom, Fn&& f, int y) {
  const auto& g = *dom.graph;
  double s = 0.0;
  double fy = f(y);
  for (int z : dom.nu(y)) s += (f(z) - fy) * g.mu(z, y) / g.pi[y];
  return s;
}

// Poisson kernel P_U(x, .) through the Green's function:
//   P_U(x,y) = sum_{z in nu(y)} G_U(x,z) K(z,y),
// cross-checked against the normal-derivative form
//   p_U(x,y) = d_y g_U(x,.)/dnu  (g_U vanishes on dU, so the derivative is a
// weighted sum over interior neighbors). Both routes must agree to 1e-12.
inline ExitDistribution poisson_kernel(const SubKernel& sub, const GreensFunction& greens, int x,
                                       BoundaryKind over = BoundaryKind::Outer) {
  const Domain& dom = *sub.dom;
  const auto& g = *dom.graph;
  auto row = greens.row_local(dom.local(x));

  ExitDistribution out;
  out.source = x;
  out.horizon = -1;
  out.over = over;

  auto half_edge_p = [&](int z, int y) {
    return (*row)(dom.local_of[z]) * sub.kernel->prob(z, y);
  };

  if (over == BoundaryKind::Extended) {
    for (const auto& he : dom.extended_boundary) {
      ExitEntry e;
      e.y = he.y;
      e.z = he.z;
      e.p = half_edge_p(he.z, he.y);
      e.density = e.p / g.pi[he.y];
      out.entries.push_back(e);
    }
    return out;
  }

  for (int y : dom.outer_boundary) {
    double p = 0.0;
    for (int z : dom.nu(y)) p += half_edge_p(z, y);
    // normal-derivative route: g_U(x,.) extended by zero on dU
    double nd = normal_derivative(
        dom, [&](int v) { return dom.in_u[v] ? (*row)(dom.local_of[v]) / g.pi[v] : 0.0; }, y);
    double p_via_nd = nd * g.pi[y];
    require(std::abs(p - p_via_nd) <= 1e-12 * std::max(1.0, std::abs(p)), errc::solver_failure,
            "Poisson kernel routes disagree beyond 1e-12");
    ExitEntry e;
    e.y = y;
    e.p = p;
    e.density = p / g.pi[y];
    out.entries.push_back(e);
  }
  return out;
}

// P_U(t,x,y) = sum_{z in nu(y)} sum_{l=0}^{t-1} K_U^l(x,z) K(z,y), computed by
// t-1 sparse row sweeps. Nondecreasing in t and -> P_U(x,y) as t -> infinity.
inline ExitDistribution exit_by_time(const SubKernel& sub, int x, long long t,
                                     BoundaryKind over = BoundaryKind::Outer) {
  require(t >= 1, errc::bad_input, "horizon must be >= 1");
  const Domain& dom = *sub.dom;
  const auto& g = *dom.graph;
  const int n = sub.size();

  Eigen::VectorXd occupation = Eigen::VectorXd::Zero(n);  // sum_{l<t} K_U^l(x, .)
  Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
  step(dom.local(x)) = 1.0;
  occupation += step;
  for (long long l = 1; l < t; ++l) {
    step = sub.apply_transpose(step);
    occupation += step;
  }

  ExitDistribution out;
  out.source = x;
  out.horizon = t;
  out.over = over;
  if (over == BoundaryKind::Extended) {
    for (const auto& he : dom.extended_boundary) {
      ExitEntry e;
      e.y = he.y;
      e.z = he.z;
      e.p = occupation(dom.local_of[he.z]) * sub.kernel->prob(he.z, he.y);
      e.density = e.p / g.pi[he.y];
      out.entries.push_back(e);
    }
  } else {
    for (int y : dom.outer_boundary) {
      double p = 0.0;
      for (int z : dom.nu(y)) p += occupation(dom.local_of[z]) * sub.kernel->prob(z, y);
      ExitEntry e;
      e.y = y;
      e.p = p;
      e.density = p / g.pi[y];
      out.entries.push_back(e);
    }
  }
  return out;
}

}  // namespace ruinkit

#endif
