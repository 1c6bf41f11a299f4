#pragma once

// Nested-refinement error estimation and invariant reporting.
//
// The error of level k is measured against level k+1 (h and tau both halved)
// by injecting the coarse solution exactly into the fine P1 space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ksnet/assembly.hpp"
#include "ksnet/errors.hpp"
#include "ksnet/graph.hpp"
#include "ksnet/stepping.hpp"

namespace ksnet {

namespace detail {

/// Element-count ratio fine/coarse, which must be the same power of two 2^m on
/// every edge; returns m.
inline std::size_t refinement_depth(const Mesh& coarse, const Mesh& fine) {
  if (!(coarse.graph() == fine.graph())) throw MeshNotNested("meshes live on different graphs");
  std::optional<std::size_t> depth;
  for (std::size_t e = 0; e < coarse.num_edges(); ++e) {
    const std::size_t nc = coarse.elements(e), nf = fine.elements(e);
    if (nf % nc != 0) throw MeshNotNested("fine mesh is not a refinement of the coarse mesh");
    const std::size_t r = nf / nc;
    if ((r & (r - 1)) != 0) throw MeshNotNested("refinement ratio is not a power of two");
    std::size_t m = 0;
    while ((std::size_t{1} << m) < r) ++m;
    if (depth && *depth != m) throw MeshNotNested("edges are refined by different ratios");
    depth = m;
  }
  return depth.value_or(0);
}

inline std::vector<double> bisect(const Mesh& coarse, const DofMap& coarse_dofs, const DofMap& fine_dofs,
                                  const std::vector<double>& v) {
  std::vector<double> out(fine_dofs.size(), 0.0);
  for (std::size_t i = 0; i < coarse.graph().num_vertices(); ++i) out[i] = v[i];
  for (std::size_t e = 0; e < coarse.num_edges(); ++e) {
    for (std::size_t k = 0; k < coarse.elements(e); ++k) {
      const double a = v[coarse_dofs.node_dof(e, k)];
      const double b = v[coarse_dofs.node_dof(e, k + 1)];
      out[fine_dofs.node_dof(e, 2 * k)] = a;
      out[fine_dofs.node_dof(e, 2 * k + 1)] = 0.5 * (a + b);
    }
  }
  return out;
}

}  // namespace detail

/// Represents `coarse` exactly in the space of a nested finer mesh (refined
/// by 2^m, m >= 0). Injection through intermediate meshes gives bitwise the
/// same nodal values as a direct injection.
inline FEFunction nested_inject(const FEFunction& coarse, std::shared_ptr<const DofMap> fine) {
  const std::size_t depth = detail::refinement_depth(coarse.dofs().mesh(), fine->mesh());
  std::vector<double> values = coarse.values();
  Mesh mesh = coarse.dofs().mesh();
  DofMap current = coarse.dofs();
  for (std::size_t level = 0; level < depth; ++level) {
    Mesh finer = refine(mesh);
    DofMap next(finer);
    values = detail::bisect(mesh, current, next, values);
    mesh = std::move(finer);
    current = std::move(next);
  }
  return FEFunction(std::move(fine), std::move(values));
}

/// Accumulates max_k |w_H(t_k) - w_h(t_k)|_{L2} and the composite trapezoid
/// approximation of int |w_H - w_h|_{H1}^2 dt over coarse time nodes.
class RefinementError {
 public:
  explicit RefinementError(double coarse_tau) : tau_(coarse_tau) {}

  /// Call once per coarse time node, in time order.
  void add(const FEFunction& coarse, const FEFunction& fine) {
    FEFunction injected = nested_inject(coarse, fine.dofs_ptr());
    std::vector<double>& d = injected.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= fine[i];
    add_difference(injected);
  }

  void add_difference(const FEFunction& diff) {
    const Norms n = norms(diff);
    linf_l2_ = std::max(linf_l2_, n.l2);
    const double h1sq = n.h1 * n.h1;
    if (count_ == 0) first_ = h1sq;
    last_ = h1sq;
    sum_ += h1sq;
    ++count_;
  }

  double linf_l2() const noexcept { return linf_l2_; }
  double l2_h1() const {
    if (count_ < 2) return 0.0;
    return std::sqrt(std::max(0.0, tau_ * (sum_ - 0.5 * first_ - 0.5 * last_)));
  }
  std::size_t nodes() const noexcept { return count_; }

 private:
  double tau_;
  double linf_l2_ = 0.0;
  double first_ = 0.0, last_ = 0.0, sum_ = 0.0;
  std::size_t count_ = 0;
};

struct ComponentError {
  double linf_l2 = 0.0;
  double l2_h1 = 0.0;
};

struct PairError {
  ComponentError u;
  ComponentError c;
};

/// Error between two traces of the same scenario on nested meshes, the fine
/// one with half the time step. Both traces need snapshots at every coarse
/// time node.
inline PairError pair_error(const Trace& fine, const Trace& coarse) {
  const double tau_h = fine.scenario.discretization.tau;
  const double tau_H = coarse.scenario.discretization.tau;
  if (std::abs(tau_H - 2.0 * tau_h) > 1e-12 * tau_H) throw MeshNotNested("coarse time step must be twice the fine one");
  const std::size_t steps = coarse.scenario.num_steps();

  auto find = [](const Trace& t, std::size_t n) -> const Snapshot& {
    auto it = std::lower_bound(t.snapshots.begin(), t.snapshots.end(), n,
                               [](const Snapshot& s, std::size_t key) { return s.n < key; });
    if (it == t.snapshots.end() || it->n != n)
      throw MissingSnapshot("no snapshot at step " + std::to_string(n));
    return *it;
  };

  RefinementError eu(tau_H), ec(tau_H);
  for (std::size_t k = 0; k <= steps; ++k) {
    const Snapshot& sc = find(coarse, k);
    const Snapshot& sf = find(fine, 2 * k);
    eu.add(FEFunction(coarse.dofs, sc.u), FEFunction(fine.dofs, sf.u));
    ec.add(FEFunction(coarse.dofs, sc.c), FEFunction(fine.dofs, sf.c));
  }
  return {{eu.linf_l2(), eu.l2_h1()}, {ec.linf_l2(), ec.l2_h1()}};
}

struct ConvergenceRow {
  double h = 0.0;    ///< fine mesh size of the pair
  double tau = 0.0;  ///< fine time step of the pair
  double err_linf_l2 = 0.0;
  double err_l2_h1 = 0.0;
  std::optional<double> eoc_linf;
  std::optional<double> eoc_h1;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> u;
  std::vector<ConvergenceRow> c;
};

inline double eoc(double err_prev, double err_cur) { return std::log2(err_prev / err_cur); }

/// Runs levels 0..L of the scenario, level k using refine^k of the scenario
/// mesh and tau / 2^k. All levels advance together so that only the current
/// state of each level is held in memory; every level is simulated once.
inline ConvergenceTable convergence_study(const Scenario& scenario, std::size_t levels) {
  if (levels < 1) throw ValidationError("a convergence study needs at least one refinement");
  scenario.validate();
  const double tau0 = scenario.discretization.tau;
  const std::size_t steps0 = scenario.num_steps();

  std::vector<Simulator> sims;
  Mesh mesh = uniform_mesh(scenario.graph, scenario.discretization.h);
  for (std::size_t k = 0; k <= levels; ++k) {
    sims.emplace_back(scenario, mesh, tau0 / static_cast<double>(std::size_t{1} << k));
    mesh = refine(mesh);
  }
  std::vector<SimState> states;
  for (auto& s : sims) states.push_back(s.initial_state());

  std::vector<RefinementError> err_u, err_c;
  for (std::size_t k = 0; k < levels; ++k) {
    err_u.emplace_back(sims[k].tau());
    err_c.emplace_back(sims[k].tau());
    err_u[k].add(states[k].u, states[k + 1].u);
    err_c[k].add(states[k].c, states[k + 1].c);
  }

  const std::size_t finest_steps = steps0 << levels;
  for (std::size_t m = 1; m <= finest_steps; ++m) {
    for (std::size_t k = 0; k <= levels; ++k) {
      if (m % (std::size_t{1} << (levels - k)) == 0) states[k] = sims[k].step(states[k]);
    }
    for (std::size_t k = 0; k < levels; ++k) {
      if (m % (std::size_t{1} << (levels - k)) == 0) {
        err_u[k].add(states[k].u, states[k + 1].u);
        err_c[k].add(states[k].c, states[k + 1].c);
      }
    }
  }

  ConvergenceTable table;
  for (std::size_t k = 0; k < levels; ++k) {
    const double h = sims[k + 1].dofs().mesh().h();
    const double tau = sims[k + 1].tau();
    table.u.push_back({h, tau, err_u[k].linf_l2(), err_u[k].l2_h1(), std::nullopt, std::nullopt});
    table.c.push_back({h, tau, err_c[k].linf_l2(), err_c[k].l2_h1(), std::nullopt, std::nullopt});
  }
  for (auto* rows : {&table.u, &table.c}) {
    for (std::size_t k = 1; k < rows->size(); ++k) {
      (*rows)[k].eoc_linf = eoc((*rows)[k - 1].err_linf_l2, (*rows)[k].err_linf_l2);
      (*rows)[k].eoc_h1 = eoc((*rows)[k - 1].err_l2_h1, (*rows)[k].err_l2_h1);
    }
  }
  return table;
}

struct InvariantCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct InvariantReport {
  enum class MassMode { Conservation, InfluxBalance };

  MassMode mode = MassMode::Conservation;
  double max_mass_defect = 0.0;  ///< relative drift, or relative per-step balance defect
  double min_u = 0.0;
  double min_c = 0.0;
  double max_l2_u = 0.0;
  double dissipation_u = 0.0;
  std::vector<InvariantCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
  }
};

inline constexpr double kMassTolerance = 1e-10;

inline InvariantReport invariant_report(const Trace& trace) {
  InvariantReport r;
  const auto& diag = trace.diagnostics;
  r.mode = trace.scenario.has_influx() ? InvariantReport::MassMode::InfluxBalance
                                       : InvariantReport::MassMode::Conservation;

  r.checks.push_back({"completed", !trace.error, trace.error.value_or("")});

  std::size_t worst_step = 0;
  if (!diag.empty()) {
    const double m0 = diag.front().mass_u;
    for (std::size_t n = 1; n < diag.size(); ++n) {
      double defect = 0.0;
      if (r.mode == InvariantReport::MassMode::Conservation) {
        const double scale = m0 != 0.0 ? std::abs(m0) : 1.0;
        defect = std::abs(diag[n].mass_u - m0) / scale;
      } else {
        const double scale = diag[n].mass_u != 0.0 ? std::abs(diag[n].mass_u) : 1.0;
        defect = std::abs(diag[n].mass_u - diag[n - 1].mass_u - diag[n].influx_u) / scale;
      }
      if (defect > r.max_mass_defect) {
        r.max_mass_defect = defect;
        worst_step = n;
      }
    }
  }
  {
    const bool conservation = r.mode == InvariantReport::MassMode::Conservation;
    std::string detail = (conservation ? "max relative drift " : "max relative balance defect ") +
                         std::to_string(r.max_mass_defect);
    if (r.max_mass_defect > kMassTolerance) detail += " at step " + std::to_string(worst_step);
    r.checks.push_back({conservation ? "mass conservation" : "influx balance",
                        r.max_mass_defect <= kMassTolerance, detail});
  }

  // positivity over every step, then located over the stored snapshots
  r.min_u = std::numeric_limits<double>::infinity();
  r.min_c = std::numeric_limits<double>::infinity();
  std::string where;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& d : diag) {
    r.min_u = std::min(r.min_u, d.min_u);
    r.min_c = std::min(r.min_c, d.min_c);
    if (std::min(d.min_u, d.min_c) < worst) {
      worst = std::min(d.min_u, d.min_c);
      where = "step " + std::to_string(d.n);
    }
  }
  for (const auto& s : trace.snapshots) {
    for (int comp = 0; comp < 2; ++comp) {
      const auto& vals = comp == 0 ? s.u : s.c;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        double& m = comp == 0 ? r.min_u : r.min_c;
        m = std::min(m, vals[i]);
        if (vals[i] < worst) {
          worst = vals[i];
          auto [e, x] = trace.dofs->location(i);
          where = std::string(comp == 0 ? "u" : "c") + " at t=" + std::to_string(s.t) + " on edge '" +
                  trace.scenario.graph.edge(e).id + "' x=" + std::to_string(x);
        }
      }
    }
  }
  {
    const bool ok = r.min_u >= -kPositivityTolerance && r.min_c >= -kPositivityTolerance;
    std::string detail = "min u " + std::to_string(r.min_u) + ", min c " + std::to_string(r.min_c);
    if (!ok) detail += "; worst value " + std::to_string(worst) + " (" + where + ")";
    r.checks.push_back({"positivity", ok, detail});
  }

  bool finite = true;
  for (const auto& d : diag) {
    r.max_l2_u = std::max(r.max_l2_u, d.l2_u);
    r.dissipation_u = d.cumulative_dissipation_u;
    finite = finite && std::isfinite(d.mass_u) && std::isfinite(d.mass_c) && std::isfinite(d.l2_u) &&
             std::isfinite(d.h1_seminorm_c) && std::isfinite(d.cumulative_dissipation_u);
  }
  r.checks.push_back({"bounded energy", finite,
                      "max |u|_L2 " + std::to_string(r.max_l2_u) + ", sum tau |u|_H1^2 " +
                          std::to_string(r.dissipation_u)});
  return r;
}

}  // namespace ksnet
