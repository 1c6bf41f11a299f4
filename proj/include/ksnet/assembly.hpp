#pragma once

// Assembly of the lumped mass, stiffness and upwind convection operators of
// the continuous P1 space on a metric graph, the patch-averaging
// quasi-interpolant, and the norms used by diagnostics.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ksnet/errors.hpp"
#include "ksnet/expr.hpp"
#include "ksnet/graph.hpp"
#include "ksnet/sparse.hpp"

namespace ksnet {

/// Model coefficients, constant on one edge.
struct EdgeCoefficients {
  double alpha = 1.0;  ///< diffusivity of u
  double beta = 1.0;   ///< diffusivity of c
  double gamma = 0.0;  ///< decay of c
  double delta = 0.0;  ///< production of c by u
  double chi = 0.0;    ///< chemotactic sensitivity

  friend bool operator==(const EdgeCoefficients&, const EdgeCoefficients&) = default;
};

class EdgeParams {
 public:
  EdgeParams() = default;
  explicit EdgeParams(std::vector<EdgeCoefficients> per_edge) : edges_(std::move(per_edge)) {}
  EdgeParams(std::size_t num_edges, EdgeCoefficients all) : edges_(num_edges, all) {}

  std::size_t size() const noexcept { return edges_.size(); }
  const EdgeCoefficients& operator[](std::size_t e) const { return edges_.at(e); }
  EdgeCoefficients& operator[](std::size_t e) { return edges_.at(e); }

  /// One coefficient for every edge, e.g. field(&EdgeCoefficients::alpha).
  std::vector<double> field(double EdgeCoefficients::*member) const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const auto& c : edges_) out.push_back(c.*member);
    return out;
  }

  /// Throws ValidationError unless alpha, beta > 0, gamma, delta >= 0 and chi finite.
  void validate(const MetricGraph& graph) const {
    if (edges_.size() != graph.num_edges()) throw ValidationError("parameter count does not match edge count");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& c = edges_[e];
      const std::string& id = graph.edge(e).id;
      if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw ValidationError("alpha must be positive on edge '" + id + "'");
      if (!(c.beta > 0.0) || !std::isfinite(c.beta)) throw ValidationError("beta must be positive on edge '" + id + "'");
      if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) throw ValidationError("gamma must be nonnegative on edge '" + id + "'");
      if (!(c.delta >= 0.0) || !std::isfinite(c.delta)) throw ValidationError("delta must be nonnegative on edge '" + id + "'");
      if (!std::isfinite(c.chi)) throw ValidationError("chi must be finite on edge '" + id + "'");
    }
  }

  friend bool operator==(const EdgeParams&, const EdgeParams&) = default;

 private:
  std::vector<EdgeCoefficients> edges_;
};

/// Continuous piecewise-linear function given by its nodal values.
class FEFunction {
 public:
  FEFunction() = default;
  explicit FEFunction(std::shared_ptr<const DofMap> dofs, double value = 0.0)
      : dofs_(std::move(dofs)), values_(dofs_->size(), value) {}
  FEFunction(std::shared_ptr<const DofMap> dofs, std::vector<double> values)
      : dofs_(std::move(dofs)), values_(std::move(values)) {
    if (values_.size() != dofs_->size()) throw DimensionMismatch("coefficient vector does not match dof count");
  }

  const DofMap& dofs() const { return *dofs_; }
  const std::shared_ptr<const DofMap>& dofs_ptr() const noexcept { return dofs_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Value at edge-local node k of edge e.
  double node_value(std::size_t e, std::size_t k) const { return values_[dofs_->node_dof(e, k)]; }

 private:
  std::shared_ptr<const DofMap> dofs_;
  std::vector<double> values_;
};

namespace detail {
inline void check_edge_field(const DofMap& dofs, std::span<const double> field) {
  if (field.size() != dofs.mesh().num_edges()) throw DimensionMismatch("per-edge coefficient has wrong length");
}
}  // namespace detail

/// Trapezoidal-rule mass matrix M(eta): entry i collects eta_e * h_e / 2 from
/// every element touching node i.
inline DiagonalMatrix lumped_mass(const DofMap& dofs, std::span<const double> eta) {
  detail::check_edge_field(dofs, eta);
  const Mesh& mesh = dofs.mesh();
  DiagonalMatrix m(dofs.size(), 0.0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double w = 0.5 * eta[e] * mesh.element_size(e);
    for (std::size_t k = 0; k < mesh.elements(e); ++k) {
      auto [a, b] = dofs.element_dofs(e, k);
      m[a] += w;
      m[b] += w;
    }
  }
  return m;
}

inline DiagonalMatrix lumped_mass(const DofMap& dofs) {
  std::vector<double> one(dofs.mesh().num_edges(), 1.0);
  return lumped_mass(dofs, one);
}

/// K(eta) from element matrices (eta_e / h_e) [[1, -1], [-1, 1]].
inline SparseMatrix stiffness(const DofMap& dofs, std::span<const double> eta) {
  detail::check_edge_field(dofs, eta);
  const Mesh& mesh = dofs.mesh();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(4 * mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double k_e = eta[e] / mesh.element_size(e);
    for (std::size_t k = 0; k < mesh.elements(e); ++k) {
      auto [a, b] = dofs.element_dofs(e, k);
      t.push_back({a, a, k_e});
      t.push_back({a, b, -k_e});
      t.push_back({b, a, -k_e});
      t.push_back({b, b, k_e});
    }
  }
  return SparseMatrix::from_triplets(dofs.size(), std::move(t));
}

/// Upwind convection matrix C with C_ij = <chi * upwind(phi_j) * c', phi_i'>.
///
/// On T = [x_k, x_l] (tail to head) the drift a_T = chi_e (c_l - c_k) / h_e is
/// constant. The convected value is taken from x_k if a_T >= 0 and from x_l
/// otherwise, which gives the element matrices
///   a_T >= 0:  [[-a_T, 0], [a_T, 0]]      a_T < 0:  [[0, -a_T], [0, a_T]]
/// (rows i, columns j in {k, l}). Every column of C sums to zero.
///
/// The full 2x2 pattern is emitted on every element so that the sparsity does
/// not depend on c_prev.
inline SparseMatrix upwind_convection(const DofMap& dofs, std::span<const double> chi, const FEFunction& c_prev) {
  detail::check_edge_field(dofs, chi);
  if (c_prev.size() != dofs.size()) throw DimensionMismatch("c_prev does not live on this dof map");
  const Mesh& mesh = dofs.mesh();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(4 * mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double h = mesh.element_size(e);
    for (std::size_t k = 0; k < mesh.elements(e); ++k) {
      auto [a, b] = dofs.element_dofs(e, k);
      const double drift = chi[e] * (c_prev[b] - c_prev[a]) / h;
      if (drift >= 0.0) {
        t.push_back({a, a, -drift});
        t.push_back({b, a, drift});
        t.push_back({a, b, 0.0});
        t.push_back({b, b, 0.0});
      } else {
        t.push_back({a, b, -drift});
        t.push_back({b, b, drift});
        t.push_back({a, a, 0.0});
        t.push_back({b, a, 0.0});
      }
    }
  }
  return SparseMatrix::from_triplets(dofs.size(), std::move(t));
}

/// Composite Simpson rule with four panels on [a, b].
template <class F>
double simpson4(F&& f, double a, double b) {
  const double h = b - a;
  const double q = 0.25 * h;
  return h / 12.0 * (f(a) + 4.0 * f(a + q) + 2.0 * f(a + 2.0 * q) + 4.0 * f(a + 3.0 * q) + f(b));
}

/// Patch-averaging quasi-interpolant: node i receives the mean of f over the
/// union of all elements containing x_i, across every incident edge.
/// `f(e, x)` evaluates the data at edge-local coordinate x of edge e.
template <class EdgeFunction>
  requires std::invocable<EdgeFunction&, std::size_t, double>
FEFunction quasi_interpolate(std::shared_ptr<const DofMap> dofs, EdgeFunction&& f) {
  const Mesh& mesh = dofs->mesh();
  std::vector<double> integral(dofs->size(), 0.0);
  std::vector<double> measure(dofs->size(), 0.0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double h = mesh.element_size(e);
    auto on_edge = [&](double x) { return f(e, x); };
    for (std::size_t k = 0; k < mesh.elements(e); ++k) {
      auto [a, b] = dofs->element_dofs(e, k);
      const double x0 = mesh.node_coordinate(e, k);
      const double x1 = mesh.node_coordinate(e, k + 1);
      const double q = simpson4(on_edge, x0, x1);
      integral[a] += q;
      integral[b] += q;
      measure[a] += h;
      measure[b] += h;
    }
  }
  for (std::size_t i = 0; i < integral.size(); ++i) integral[i] /= measure[i];
  return FEFunction(std::move(dofs), std::move(integral));
}

/// Overload for one expression per edge.
inline FEFunction quasi_interpolate(std::shared_ptr<const DofMap> dofs, const std::vector<Expression>& per_edge) {
  if (per_edge.size() != dofs->mesh().num_edges()) throw DimensionMismatch("one expression per edge required");
  return quasi_interpolate(std::move(dofs), [&](std::size_t e, double x) { return per_edge[e](x); });
}

struct Norms {
  double lumped = 0.0;       ///< sqrt(v^T M(1) v)
  double l2 = 0.0;           ///< exact L2 norm of the P1 function
  double h1 = 0.0;           ///< sqrt(l2^2 + h1_seminorm^2)
  double h1_seminorm = 0.0;  ///< L2 norm of the piecewise-constant derivative
  double linf_nodal = 0.0;   ///< max |v_i|
  double total_mass = 0.0;   ///< integral of v over the network
};

inline Norms norms(const DofMap& dofs, std::span<const double> v) {
  if (v.size() != dofs.size()) throw DimensionMismatch("vector does not match dof map");
  const Mesh& mesh = dofs.mesh();
  double lumped2 = 0.0, l2sq = 0.0, semi2 = 0.0, mass = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double h = mesh.element_size(e);
    for (std::size_t k = 0; k < mesh.elements(e); ++k) {
      auto [i, j] = dofs.element_dofs(e, k);
      const double a = v[i], b = v[j];
      lumped2 += 0.5 * h * (a * a + b * b);
      l2sq += h / 3.0 * (a * a + a * b + b * b);
      semi2 += (b - a) * (b - a) / h;
      mass += 0.5 * h * (a + b);
    }
  }
  Norms n;
  n.lumped = std::sqrt(lumped2);
  n.l2 = std::sqrt(std::max(l2sq, 0.0));
  n.h1_seminorm = std::sqrt(semi2);
  n.h1 = std::sqrt(n.l2 * n.l2 + semi2);
  for (double x : v) n.linf_nodal = std::max(n.linf_nodal, std::abs(x));
  n.total_mass = mass;
  return n;
}

inline Norms norms(const FEFunction& v) { return norms(v.dofs(), v.values()); }

}  // namespace ksnet
