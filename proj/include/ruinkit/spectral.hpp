#ifndef RUINKIT_SPECTRAL_HPP
#define RUINKIT_SPECTRAL_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ruinkit/absorbing.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/models.hpp"

namespace ruinkit {

// Full eigendecomposition of K_U. All eigen work happens on the symmetrized
// matrix M = D^{1/2} K_U D^{-1/2}; eigenvectors are mapped back through
// D^{-1/2}, which makes them pi-orthonormal automatically. Eigenvalues are
// stored in descending order beta_0 >= beta_1 >= ...; each eigenfunction's
// sign is fixed by making its largest-magnitude entry positive (phi_0 comes
// out positive everywhere).
struct EigenDecomposition {
  const SubKernel* sub = nullptr;
  Eigen::VectorXd betas;
  Eigen::MatrixXd phis;  // column i is phi_i over local indices

  int size() const { return static_cast<int>(betas.size()); }
  double beta0() const { return betas(0); }
  Eigen::VectorXd phi0() const { return phis.col(0); }
};

inline EigenDecomposition full_decomposition(const SubKernel& sub, int dense_cap = 4000) {
  const int n = sub.size();
  require(n <= dense_cap, errc::too_large_for_dense,
          "|U| = " + std::to_string(n) + " exceeds the dense cap " + std::to_string(dense_cap));

  Eigen::MatrixXd m = Eigen::MatrixXd(sub.symmetrized());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  require(solver.info() == Eigen::Success, errc::solver_failure, "dense eigensolve failed");

  EigenDecomposition out;
  out.sub = &sub;
  out.betas.resize(n);
  out.phis.resize(n, n);
  for (int i = 0; i < n; ++i) {
    int src = n - 1 - i;  // ascending -> descending
    out.betas(i) = solver.eigenvalues()(src);
    Eigen::VectorXd phi = solver.eigenvectors().col(src);
    for (int v = 0; v < n; ++v) phi(v) /= std::sqrt(sub.pi_u[v]);
    // deterministic sign: largest |entry| positive, lowest index on ties
    int arg = 0;
    for (int v = 1; v < n; ++v)
      if (std::abs(phi(v)) > std::abs(phi(arg))) arg = v;
    if (phi(arg) < 0) phi = -phi;
    out.phis.col(i) = phi;
  }
  require(out.betas(0) > 0.0 && out.betas(0) < 1.0, errc::solver_failure,
          "Perron-Frobenius eigenvalue outside (0,1)");
  return out;
}

// Perron-Frobenius pair by power iteration. The iteration runs on the
// half-shifted symmetrized operator (I + M)/2, whose top eigenpair matches M
// but whose spectrum is nonnegative, so bipartite domains (beta_min = -beta_0)
// converge too. Deterministic all-ones start, no randomization.
//
// Stopping requires both
//   (a) ||K_U phi - beta phi||_{L2(pi)} <= tol, and
//   (b) max_x |(K_U phi)(x) / (beta phi(x)) - 1| <= tol,
// the second being exactly the row-sum error of the Doob transform built from
// the pair, so corners with tiny phi_0 are resolved to relative accuracy.
struct PerronPair {
  double beta0 = 0.0;
  Eigen::VectorXd phi0;  // local indices, positive, pi(phi0^2) = 1
  double t_u = 0.0;      // T_U = 1/(1 - beta0)
  long long iterations = 0;
  double residual_l2 = 0.0;
  double residual_pointwise = 0.0;
};

struct PerronOptions {
  double tol = 1e-12;
  long long max_iterations = 500000;
};

inline PerronPair perron_pair(const SubKernel& sub, const PerronOptions& opts = {}) {
  const int n = sub.size();
  Eigen::SparseMatrix<double> m = sub.symmetrized();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v.normalize();

  double beta = 0.0;
  double res_l2 = 1.0, res_pw = 1.0;
  long long it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::VectorXd mv = m * v;
    beta = v.dot(mv);  // Rayleigh quotient
    if (it % 16 == 0 || it > opts.max_iterations - 2) {
      res_l2 = (mv - beta * v).norm();
      res_pw = 0.0;
      for (int i = 0; i < n; ++i)
        res_pw = std::max(res_pw, std::abs(mv(i) / (beta * v(i)) - 1.0));
      if (res_l2 <= opts.tol && res_pw <= opts.tol) break;
    }
    v = 0.5 * (v + mv);  // (I + M)/2 step
    v.normalize();
  }
  require(res_l2 <= opts.tol && res_pw <= opts.tol, errc::no_convergence,
          "power iteration hit the cap with L2 residual " + std::to_string(res_l2) +
              " and pointwise residual " + std::to_string(res_pw) +
              "; beta_1 is likely within that distance of beta_0");

  PerronPair out;
  out.beta0 = beta;
  out.iterations = it;
  out.residual_l2 = res_l2;
  out.residual_pointwise = res_pw;
  out.t_u = 1.0 / (1.0 - beta);
  out.phi0.resize(n);
  for (int i = 0; i < n; ++i) out.phi0(i) = v(i) / std::sqrt(sub.pi_u[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += out.phi0(i) * out.phi0(i) * sub.pi_u[i];
  out.phi0 /= std::sqrt(s);
  if (out.phi0(0) < 0) out.phi0 = -out.phi0;
  for (int i = 0; i < n; ++i)
    require(out.phi0(i) > 0.0, errc::non_positive_phi, "phi_0 must be strictly positive");
  return out;
}

// k_U^t(x,y) = sum_i beta_i^t phi_i(x) phi_i(y); at t = 0 this collapses to
// the delta kernel 1/pi(x) by completeness.
inline double spectral_heat_kernel(const EigenDecomposition& d, long long t, int x, int y) {
  const Domain& dom = *d.sub->dom;
  int lx = dom.local(x), ly = dom.local(y);
  double s = 0.0;
  for (int i = d.size() - 1; i >= 0; --i)
    s += std::pow(d.betas(i), static_cast<double>(t)) * d.phis(lx, i) * d.phis(ly, i);
  return s;
}

// g_U(x,y) = sum_i (1-beta_i)^{-1} phi_i(x) phi_i(y). Positivity of g_U is
// invisible term by term here; most terms oscillate. The formula exists to be
// checked against the direct solve, not to replace it.
inline double spectral_greens(const EigenDecomposition& d, int x, int y) {
  const Domain& dom = *d.sub->dom;
  int lx = dom.local(x), ly = dom.local(y);
  double s = 0.0;
  for (int i = d.size() - 1; i >= 0; --i)
    s += d.phis(lx, i) * d.phis(ly, i) / (1.0 - d.betas(i));
  return s;
}

// Literal evaluation of the lazy-box spectral Poisson kernel double sum for a
// boundary point y = (N+1, y2) on the right face:
//   P((x1,x2),(N+1,y2)) = 1/(4(N+1)^2) sum_{a,b=1}^{2N+1}
//       psi_a(x1) psi_b(x2) psi_b(y2) psi_a(N)
//       / (1 - (cos(a pi / (2(N+1))) + cos(b pi / (2(N+1))))/2)
// with psi_a = cos(a k pi / (2(N+1))) for odd a and sin(...) for even a.
// The partial sums oscillate; their largest magnitude is reported so the
// cancellation is visible.
struct BoxSpectralValue {
  double value = 0.0;
  double max_partial_magnitude = 0.0;
};

inline BoxSpectralValue box_poisson_spectral(const Model& model, std::span<const int> x,
                                             std::span<const int> y) {
  require(model.spec.kind == ModelKind::BoxZn && model.spec.n == 2, errc::bad_input,
          "spectral box formula is for the 2-dimensional box");
  const int N = model.spec.N;
  require(x.size() == 2 && y.size() == 2, errc::bad_input, "need 2-d coordinates");
  require(y[0] == N + 1 && std::abs(y[1]) <= N, errc::unsupported_face,
          "boundary point must lie on the right face (N+1, y2)");

  const double pi_c = std::numbers::pi;
  const double h = 2.0 * (N + 1);
  auto psi = [&](int a, int k) {
    double arg = a * k * pi_c / h;
    return (a % 2 == 1) ? std::cos(arg) : std::sin(arg);
  };

  BoxSpectralValue out;
  double sum = 0.0;
  for (int a = 1; a <= 2 * N + 1; ++a) {
    for (int b = 1; b <= 2 * N + 1; ++b) {
      double denom = 1.0 - 0.5 * (std::cos(a * pi_c / h) + std::cos(b * pi_c / h));
      sum += psi(a, x[0]) * psi(b, x[1]) * psi(b, y[1]) * psi(a, N) / denom;
      out.max_partial_magnitude = std::max(out.max_partial_magnitude, std::abs(sum));
    }
  }
  double scale = 1.0 / (4.0 * (N + 1) * (N + 1));
  out.value = scale * sum;
  out.max_partial_magnitude *= scale;
  return out;
}

}  // namespace ruinkit

#endif
