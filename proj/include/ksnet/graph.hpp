#pragma once

// Directed metric graphs, uniform edge meshes and the global P1 dof numbering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ksnet/errors.hpp"

namespace ksnet {

struct EdgeSpec {
  std::string id;
  std::string tail;
  std::string head;
  double length = 1.0;
};

struct Edge {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  double length = 1.0;
};

/// Finite, connected, directed graph whose edges carry positive lengths.
/// Each edge is identified with [0, length], running from tail to head.
class MetricGraph {
 public:
  MetricGraph() = default;

  /// Validates the input and classifies vertices into boundary (degree 1)
  /// and interior (degree >= 2) sets.
  static MetricGraph build(std::vector<std::string> vertex_ids, const std::vector<EdgeSpec>& edges) {
    MetricGraph g;
    g.vertex_ids_ = std::move(vertex_ids);
    if (g.vertex_ids_.empty()) throw ValidationError("graph has no vertices");
    if (edges.empty()) throw ValidationError("graph has no edges");
    for (std::size_t v = 0; v < g.vertex_ids_.size(); ++v) {
      if (!g.vertex_index_.emplace(g.vertex_ids_[v], v).second)
        throw ValidationError("duplicate vertex '" + g.vertex_ids_[v] + "'");
    }
    g.incident_.resize(g.vertex_ids_.size());
    std::unordered_map<std::string, std::size_t> edge_ids;
    for (const auto& spec : edges) {
      if (!edge_ids.emplace(spec.id, g.edges_.size()).second)
        throw ValidationError("duplicate edge '" + spec.id + "'");
      auto tail = g.vertex_index_.find(spec.tail);
      auto head = g.vertex_index_.find(spec.head);
      if (tail == g.vertex_index_.end())
        throw DanglingEndpoint("edge '" + spec.id + "' references undeclared vertex '" + spec.tail + "'");
      if (head == g.vertex_index_.end())
        throw DanglingEndpoint("edge '" + spec.id + "' references undeclared vertex '" + spec.head + "'");
      if (!(spec.length > 0.0) || !std::isfinite(spec.length))
        throw NonpositiveLength("edge '" + spec.id + "' has nonpositive length");
      if (tail->second == head->second)
        throw ValidationError("edge '" + spec.id + "' is a self-loop");
      g.incident_[tail->second].push_back(g.edges_.size());
      g.incident_[head->second].push_back(g.edges_.size());
      g.edges_.push_back(Edge{spec.id, tail->second, head->second, spec.length});
    }
    g.edge_index_ = std::move(edge_ids);
    g.check_connected();
    return g;
  }

  std::size_t num_vertices() const noexcept { return vertex_ids_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::string& vertex_id(std::size_t v) const { return vertex_ids_.at(v); }
  const std::vector<std::string>& vertex_ids() const noexcept { return vertex_ids_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t vertex_index(const std::string& id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) throw ValidationError("unknown vertex '" + id + "'");
    return it->second;
  }
  bool has_vertex(const std::string& id) const { return vertex_index_.count(id) != 0; }

  std::size_t edge_index(const std::string& id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw ValidationError("unknown edge '" + id + "'");
    return it->second;
  }
  bool has_edge(const std::string& id) const { return edge_index_.count(id) != 0; }

  /// Edges starting or ending at v.
  const std::vector<std::size_t>& edges_at(std::size_t v) const { return incident_.at(v); }
  std::size_t degree(std::size_t v) const { return incident_.at(v).size(); }
  bool is_boundary(std::size_t v) const { return degree(v) == 1; }

  /// n_e(v): -1 at the tail, +1 at the head, 0 if v is not an endpoint of e.
  int incidence(std::size_t e, std::size_t v) const {
    const Edge& ed = edges_.at(e);
    if (v == ed.tail) return -1;
    if (v == ed.head) return 1;
    return 0;
  }

  std::vector<std::size_t> boundary_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < num_vertices(); ++v)
      if (is_boundary(v)) out.push_back(v);
    return out;
  }

  std::vector<std::size_t> interior_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < num_vertices(); ++v)
      if (!is_boundary(v)) out.push_back(v);
    return out;
  }

  double total_length() const {
    return std::accumulate(edges_.begin(), edges_.end(), 0.0,
                           [](double s, const Edge& e) { return s + e.length; });
  }

  friend bool operator==(const MetricGraph& a, const MetricGraph& b) {
    if (a.vertex_ids_ != b.vertex_ids_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t e = 0; e < a.edges_.size(); ++e) {
      const Edge& x = a.edges_[e];
      const Edge& y = b.edges_[e];
      if (x.id != y.id || x.tail != y.tail || x.head != y.head || x.length != y.length) return false;
    }
    return true;
  }

 private:
  void check_connected() const {
    std::vector<bool> seen(num_vertices(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t e : incident_[v]) {
        std::size_t w = edges_[e].tail == v ? edges_[e].head : edges_[e].tail;
        if (!seen[w]) {
          seen[w] = true;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    if (reached != num_vertices()) throw DisconnectedGraph("graph is not connected");
  }

  std::vector<std::string> vertex_ids_;
  std::unordered_map<std::string, std::size_t> vertex_index_;
  std::unordered_map<std::string, std::size_t> edge_index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

/// Uniform subdivision of every edge; N_e elements of size length/N_e.
class Mesh {
 public:
  Mesh() = default;
  Mesh(MetricGraph graph, std::vector<std::size_t> elements_per_edge)
      : graph_(std::move(graph)), elements_(std::move(elements_per_edge)) {
    if (elements_.size() != graph_.num_edges())
      throw ValidationError("element counts do not match the number of edges");
    for (std::size_t n : elements_)
      if (n == 0) throw ValidationError("every edge needs at least one element");
  }

  const MetricGraph& graph() const noexcept { return graph_; }
  std::size_t num_edges() const noexcept { return elements_.size(); }
  std::size_t elements(std::size_t e) const { return elements_.at(e); }
  const std::vector<std::size_t>& element_counts() const noexcept { return elements_; }
  double element_size(std::size_t e) const {
    return graph_.edge(e).length / static_cast<double>(elements_.at(e));
  }

  /// Global mesh size max_e h_e.
  double h() const {
    double out = 0.0;
    for (std::size_t e = 0; e < num_edges(); ++e) out = std::max(out, element_size(e));
    return out;
  }

  /// Edge-local coordinate of node k in [0, N_e]. Written as (length*k)/N_e so
  /// that refined coordinates coincide bit-for-bit with the coarse ones.
  double node_coordinate(std::size_t e, std::size_t k) const {
    return graph_.edge(e).length * static_cast<double>(k) / static_cast<double>(elements_.at(e));
  }

  std::size_t num_elements() const {
    return std::accumulate(elements_.begin(), elements_.end(), std::size_t{0});
  }

 private:
  MetricGraph graph_;
  std::vector<std::size_t> elements_;
};

/// N_e = ceil(length / target_h) on every edge.
inline Mesh uniform_mesh(const MetricGraph& graph, double target_h) {
  if (!(target_h > 0.0) || !std::isfinite(target_h)) throw ValidationError("target mesh size must be positive");
  std::vector<std::size_t> counts;
  counts.reserve(graph.num_edges());
  for (const Edge& e : graph.edges()) {
    double ratio = e.length / target_h;
    auto n = static_cast<std::size_t>(std::ceil(ratio));
    // ceil of a ratio that is an integer up to roundoff
    if (n > 1 && std::abs(ratio - static_cast<double>(n - 1)) <= 1e-12 * ratio) --n;
    counts.push_back(std::max<std::size_t>(n, 1));
  }
  return Mesh(graph, std::move(counts));
}

inline Mesh refine(const Mesh& mesh) {
  std::vector<std::size_t> counts = mesh.element_counts();
  for (auto& n : counts) n *= 2;
  return Mesh(mesh.graph(), std::move(counts));
}

/// Global numbering of the continuous P1 space: graph vertices take indices
/// [0, |V|), followed by the interior nodes of each edge in declaration order.
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(Mesh mesh) : mesh_(std::move(mesh)) {
    const std::size_t nv = mesh_.graph().num_vertices();
    offsets_.resize(mesh_.num_edges());
    std::size_t next = nv;
    for (std::size_t e = 0; e < mesh_.num_edges(); ++e) {
      offsets_[e] = next;
      next += mesh_.elements(e) - 1;
    }
    num_dofs_ = next;
  }

  const Mesh& mesh() const noexcept { return mesh_; }
  const MetricGraph& graph() const noexcept { return mesh_.graph(); }
  std::size_t size() const noexcept { return num_dofs_; }

  /// Global index of node k (0 = tail, N_e = head) on edge e.
  std::size_t node_dof(std::size_t e, std::size_t k) const {
    const Edge& ed = graph().edge(e);
    const std::size_t n = mesh_.elements(e);
    if (k == 0) return ed.tail;
    if (k == n) return ed.head;
    return offsets_[e] + k - 1;
  }

  std::size_t vertex_dof(std::size_t v) const noexcept { return v; }

  /// Element k of edge e spans nodes k and k+1.
  std::pair<std::size_t, std::size_t> element_dofs(std::size_t e, std::size_t k) const {
    return {node_dof(e, k), node_dof(e, k + 1)};
  }

  /// Edge-local position of a dof; vertex dofs report their first incident edge.
  std::pair<std::size_t, double> location(std::size_t dof) const {
    if (dof < graph().num_vertices()) {
      std::size_t e = graph().edges_at(dof).front();
      return {e, dof == graph().edge(e).tail ? 0.0 : graph().edge(e).length};
    }
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), dof);
    // edges without interior nodes share their offset with the next edge, so
    // the last edge whose offset is <= dof is the owner
    auto e = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
    return {e, mesh_.node_coordinate(e, dof - offsets_[e] + 1)};
  }

 private:
  Mesh mesh_;
  std::vector<std::size_t> offsets_;
  std::size_t num_dofs_ = 0;
};

inline DofMap dof_map(const Mesh& mesh) { return DofMap(mesh); }

}  // namespace ksnet
