#ifndef RUINKIT_MODELS_HPP
#define RUINKIT_MODELS_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruinkit/domain.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"

namespace ruinkit {

enum class ModelKind { Line, BoxZn, TriangleGame, PuncturedCube };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Line: return "line";
    case ModelKind::BoxZn: return "box";
    case ModelKind::TriangleGame: return "triangle";
    case ModelKind::PuncturedCube: return "punctured-cube";
  }
  return "?";
}

struct ModelSpec {
  ModelKind kind = ModelKind::Line;
  int n = 1;           // dimension (BoxZn, PuncturedCube)
  int N = 2;           // size parameter
  int margin = -1;     // ambient padding beyond dU; -1 means the default 2N
  bool lazy = false;   // Line only: mu = 1/4 (lazy) vs 1/2 (non-lazy)

  int effective_margin() const { return margin < 0 ? 2 * N : margin; }

  // N is a half-width for the box models ({-N..N}^n is nonempty from N = 1)
  // and the total stake for the line and triangle, which need room for a
  // nonempty interior.
  void validate() const {
    require(n >= 1, errc::spec_invalid, "dimension must be >= 1");
    require(effective_margin() >= 1, errc::spec_invalid, "margin must be >= 1");
    switch (kind) {
      case ModelKind::Line:
        require(N >= 2, errc::spec_invalid, "line needs N >= 2");
        break;
      case ModelKind::TriangleGame:
        require(N >= 3, errc::spec_invalid, "triangle needs N >= 3");
        break;
      case ModelKind::BoxZn:
        require(N >= 1, errc::spec_invalid, "box needs N >= 1");
        break;
      case ModelKind::PuncturedCube:
        require(N >= 1 && n >= 2, errc::spec_invalid, "punctured cube needs N >= 1, n >= 2");
        break;
    }
  }
};

struct Model {
  ModelSpec spec;
  WeightedGraph graph;
  Domain domain;

  // The domain points at this model's graph; moves re-seat that pointer.
  Model() = default;
  Model(Model&& o) noexcept
      : spec(o.spec), graph(std::move(o.graph)), domain(std::move(o.domain)) {
    domain.graph = &graph;
  }
  Model& operator=(Model&& o) noexcept {
    spec = o.spec;
    graph = std::move(o.graph);
    domain = std::move(o.domain);
    domain.graph = &graph;
    return *this;
  }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  int vertex_at(std::span<const int> coords) const {
    require(static_cast<int>(coords.size()) == graph.coord_dim, errc::bad_input,
            "coordinate dimension mismatch");
    for (int v = 0; v < graph.size(); ++v) {
      auto c = graph.coords_of(v);
      bool eq = true;
      for (int i = 0; i < graph.coord_dim; ++i) eq = eq && c[i] == coords[i];
      if (eq) return v;
    }
    fail(errc::bad_input, "no vertex at the given coordinates");
  }
  int vertex_at(std::initializer_list<int> coords) const {
    return vertex_at(std::span<const int>(coords.begin(), coords.size()));
  }
};

// ---------------------------------------------------------------------------
// Lattice patches
// ---------------------------------------------------------------------------

// n-dimensional box patch [lo_i, hi_i] of Z^n with nearest-neighbor edges,
// pi == 1 and constant edge weight. Border flags mark the patch rim.
inline WeightedGraph square_lattice_patch(const std::vector<int>& lo, const std::vector<int>& hi,
                                          double mu_edge) {
  const int n = static_cast<int>(lo.size());
  std::vector<std::int64_t> stride(n, 1);
  std::vector<int> extent(n);
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) {
    extent[i] = hi[i] - lo[i] + 1;
    require(extent[i] >= 1, errc::bad_input, "empty patch extent");
    stride[i] = total;
    total *= extent[i];
  }
  GraphBuilder b;
  std::vector<int> c(n);
  for (std::int64_t id = 0; id < total; ++id) {
    std::int64_t rest = id;
    bool rim = false;
    for (int i = 0; i < n; ++i) {
      c[i] = lo[i] + static_cast<int>(rest % extent[i]);
      rest /= extent[i];
      rim = rim || c[i] == lo[i] || c[i] == hi[i];
    }
    int v = b.add_vertex(id, 1.0, c);
    if (rim) b.set_border(v);
  }
  for (std::int64_t id = 0; id < total; ++id) {
    std::int64_t rest = id;
    for (int i = 0; i < n; ++i) {
      int ci = lo[i] + static_cast<int>(rest % extent[i]);
      rest /= extent[i];
      if (ci < hi[i]) b.add_edge(static_cast<int>(id), static_cast<int>(id + stride[i]), mu_edge);
    }
  }
  return b.build();
}

// Triangular (6-neighbor) lattice patch on the coordinate box [lo, hi]^2 with
// step offsets (1,0), (0,1), (1,-1); pi == 1.
inline WeightedGraph triangular_lattice_patch(int lo, int hi, double mu_edge) {
  const int extent = hi - lo + 1;
  GraphBuilder b;
  auto id_of = [&](int x, int y) {
    return static_cast<std::int64_t>(x - lo) * extent + (y - lo);
  };
  for (int x = lo; x <= hi; ++x) {
    for (int y = lo; y <= hi; ++y) {
      int v = b.add_vertex(id_of(x, y), 1.0, {x, y});
      if (x == lo || x == hi || y == lo || y == hi) b.set_border(v);
    }
  }
  for (int x = lo; x <= hi; ++x) {
    for (int y = lo; y <= hi; ++y) {
      int v = static_cast<int>(id_of(x, y));
      if (x < hi) b.add_edge(v, static_cast<int>(id_of(x + 1, y)), mu_edge);
      if (y < hi) b.add_edge(v, static_cast<int>(id_of(x, y + 1)), mu_edge);
      if (x < hi && y > lo) b.add_edge(v, static_cast<int>(id_of(x + 1, y - 1)), mu_edge);
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// Model generation
// ---------------------------------------------------------------------------

inline Model generate(const ModelSpec& spec) {
  spec.validate();
  const int N = spec.N;
  const int margin = spec.effective_margin();
  Model m;
  m.spec = spec;

  switch (spec.kind) {
    case ModelKind::Line: {
      double mu = spec.lazy ? 0.25 : 0.5;
      m.graph = square_lattice_patch({-margin}, {N + margin}, mu);
      std::vector<int> u;
      for (int v = 0; v < m.graph.size(); ++v) {
        int x = m.graph.coords_of(v)[0];
        if (x >= 1 && x <= N - 1) u.push_back(v);
      }
      m.domain = build_domain(m.graph, u);
      break;
    }
    case ModelKind::BoxZn: {
      double mu = 1.0 / (4.0 * spec.n);
      std::vector<int> lo(spec.n, -(N + margin)), hi(spec.n, N + margin);
      m.graph = square_lattice_patch(lo, hi, mu);
      std::vector<int> u;
      for (int v = 0; v < m.graph.size(); ++v) {
        auto c = m.graph.coords_of(v);
        bool inside = true;
        for (int i = 0; i < spec.n; ++i) inside = inside && std::abs(c[i]) <= N;
        if (inside) u.push_back(v);
      }
      m.domain = build_domain(m.graph, u);
      break;
    }
    case ModelKind::TriangleGame: {
      m.graph = triangular_lattice_patch(-margin, N + margin, 1.0 / 6.0);
      std::vector<int> u;
      for (int v = 0; v < m.graph.size(); ++v) {
        auto c = m.graph.coords_of(v);
        if (c[0] > 0 && c[1] > 0 && c[0] + c[1] < N) u.push_back(v);
      }
      m.domain = build_domain(m.graph, u);
      break;
    }
    case ModelKind::PuncturedCube: {
      double mu = 1.0 / (4.0 * spec.n);
      std::vector<int> lo(spec.n, -(N + margin)), hi(spec.n, N + margin);
      m.graph = square_lattice_patch(lo, hi, mu);
      std::vector<int> u;
      for (int v = 0; v < m.graph.size(); ++v) {
        auto c = m.graph.coords_of(v);
        bool inside = true, center = true;
        for (int i = 0; i < spec.n; ++i) {
          inside = inside && std::abs(c[i]) <= N;
          center = center && c[i] == 0;
        }
        if (inside && !center) u.push_back(v);
      }
      m.domain = build_domain(m.graph, u);
      break;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Closed-form Perron-Frobenius eigenpairs
// ---------------------------------------------------------------------------

struct ClosedFormEigen {
  double beta0 = 0.0;
  Eigen::VectorXd phi0;  // over the domain's local indices, pi(phi0^2) = 1
  bool valid = false;
};

namespace detail {
inline Eigen::VectorXd normalize_pi(const Domain& dom, Eigen::VectorXd v) {
  double s = 0.0;
  for (int i = 0; i < dom.size(); ++i) s += v(i) * v(i) * dom.graph->pi[dom.u[i]];
  v /= std::sqrt(s);
  if (v(0) < 0) v = -v;
  return v;
}
}  // namespace detail

// The printed normalizing constants are for continuum-periodic extensions;
// the eigenfunction is renormalized numerically so pi(phi0^2) = 1 exactly.
inline ClosedFormEigen closed_form_eigen(const ModelSpec& spec, const Model& model) {
  const double pi_c = std::numbers::pi;
  const int N = spec.N;
  ClosedFormEigen out;
  Eigen::VectorXd phi(model.domain.size());
  switch (spec.kind) {
    case ModelKind::Line: {
      double beta_nonlazy = std::cos(pi_c / N);
      out.beta0 = spec.lazy ? 0.5 * (1.0 + beta_nonlazy) : beta_nonlazy;
      for (int i = 0; i < model.domain.size(); ++i) {
        int x = model.graph.coords_of(model.domain.u[i])[0];
        phi(i) = std::sin(pi_c * x / N);
      }
      break;
    }
    case ModelKind::BoxZn: {
      out.beta0 = 0.5 * (1.0 + std::cos(pi_c / (2.0 * (N + 1))));
      for (int i = 0; i < model.domain.size(); ++i) {
        auto c = model.graph.coords_of(model.domain.u[i]);
        double p = 1.0;
        for (int k = 0; k < spec.n; ++k) p *= std::cos(pi_c * c[k] / (2.0 * (N + 1)));
        phi(i) = p;
      }
      break;
    }
    case ModelKind::TriangleGame: {
      out.beta0 = (1.0 + 2.0 * std::cos(2.0 * pi_c / N)) / 3.0;
      for (int i = 0; i < model.domain.size(); ++i) {
        auto c = model.graph.coords_of(model.domain.u[i]);
        phi(i) = std::sin(2.0 * pi_c * c[0] / N) + std::sin(2.0 * pi_c * c[1] / N) -
                 std::sin(2.0 * pi_c * (c[0] + c[1]) / N);
      }
      break;
    }
    case ModelKind::PuncturedCube:
      fail(errc::no_closed_form, "punctured cube has no closed-form eigenpair");
  }
  out.phi0 = detail::normalize_pi(model.domain, phi);
  out.valid = true;
  return out;
}

// ---------------------------------------------------------------------------
// Eigenfunction surrogates (two-sided comparison shapes, never eigenfunctions)
// ---------------------------------------------------------------------------

inline double phi0_surrogate(const ModelSpec& spec, std::span<const int> x) {
  const int N = spec.N;
  switch (spec.kind) {
    case ModelKind::TriangleGame: {
      require(x.size() == 2, errc::bad_input, "triangle surrogate needs 2 coordinates");
      double x1 = x[0], x2 = x[1];
      return std::pow(static_cast<double>(N), -7.0) * x1 * x2 * (x1 + x2) * (N - x1) * (N - x2) *
             (N - (x1 + x2));
    }
    case ModelKind::PuncturedCube: {
      require(static_cast<int>(x.size()) == spec.n, errc::bad_input,
              "surrogate coordinate dimension mismatch");
      double l1 = 0.0, prod = 1.0;
      for (int i = 0; i < spec.n; ++i) {
        l1 += std::abs(x[i]);
        prod *= 1.0 - std::abs(x[i]) / (N + 1.0);
      }
      if (spec.n >= 3) {
        return std::pow(static_cast<double>(N), -spec.n / 2.0) *
               (1.0 - std::pow(1.0 + l1, 2.0 - spec.n)) * prod;
      }
      // n = 2 carries a logarithmic correction
      return (1.0 / N) * prod * std::log(1.0 + l1) / std::log(1.0 + N);
    }
    default:
      fail(errc::no_surrogate, "no surrogate for this model");
  }
}

inline double phi0_surrogate(const ModelSpec& spec, std::initializer_list<int> x) {
  return phi0_surrogate(spec, std::span<const int>(x.begin(), x.size()));
}

}  // namespace ruinkit

#endif
