#pragma once

// Implicit Euler time stepping of the chemotaxis system on a metric graph with
// lumped mass and upwind convection. Every step solves
//
//   [M/tau + K(alpha) - C(c^{n-1})] u^n = M/tau u^{n-1} + g_u(u^{n-1})
//   [M/tau + K(beta) + M(gamma)]    c^n = M/tau c^{n-1} + M(delta) u^n + g_c(c^{n-1})
//
// where g_u, g_c are nodal boundary influx terms (zero for closed networks).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ksnet/assembly.hpp"
#include "ksnet/errors.hpp"
#include "ksnet/expr.hpp"
#include "ksnet/graph.hpp"
#include "ksnet/linsolve.hpp"
#include "ksnet/sparse.hpp"

namespace ksnet {

/// Nodal values above this threshold count as nonnegative.
inline constexpr double kPositivityTolerance = 1e-13;

/// Influx laws at one boundary vertex, as functions of the local trace w.
/// A vertex without laws is closed (zero flux).
struct BoundaryCondition {
  std::optional<Expression> influx_u;
  std::optional<Expression> influx_c;

  friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

struct Discretization {
  double h = 0.0;
  double tau = 0.0;
  double t_end = 0.0;

  friend bool operator==(const Discretization&, const Discretization&) = default;
};

struct Scenario {
  MetricGraph graph;
  EdgeParams params;
  std::vector<Expression> initial_u;  ///< one expression in x per edge
  std::vector<Expression> initial_c;
  std::map<std::size_t, BoundaryCondition> boundary;  ///< keyed by vertex index
  Discretization discretization;
  std::optional<std::size_t> stride;  ///< snapshot stride in steps

  /// round(t_end / tau).
  std::size_t num_steps() const {
    return static_cast<std::size_t>(std::llround(discretization.t_end / discretization.tau));
  }

  /// Explicit stride, or ceil(N / 10) with a minimum of 1.
  std::size_t snapshot_stride() const {
    if (stride) return *stride;
    return std::max<std::size_t>(1, (num_steps() + 9) / 10);
  }

  bool has_influx() const {
    return std::any_of(boundary.begin(), boundary.end(),
                       [](const auto& kv) { return kv.second.influx_u || kv.second.influx_c; });
  }

  /// Throws ValidationError on hard violations; returns warnings for initial
  /// data that is negative somewhere (sampled at 101 points per edge).
  std::vector<std::string> validate() const {
    params.validate(graph);
    if (initial_u.size() != graph.num_edges() || initial_c.size() != graph.num_edges())
      throw ValidationError("initial data must be given on every edge");
    const auto& d = discretization;
    if (!(d.h > 0.0) || !std::isfinite(d.h)) throw ValidationError("h must be positive");
    if (!(d.tau > 0.0) || !std::isfinite(d.tau)) throw ValidationError("tau must be positive");
    if (!(d.t_end >= 0.0) || !std::isfinite(d.t_end)) throw ValidationError("t_end must be nonnegative");
    const double ratio = d.t_end / d.tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) throw ValidationError("t_end must be an integer multiple of tau");
    if (stride && *stride == 0) throw ValidationError("stride must be positive");
    for (const auto& [v, bc] : boundary) {
      if (v >= graph.num_vertices()) throw ValidationError("boundary condition at unknown vertex");
      if (!graph.is_boundary(v))
        throw ValidationError("boundary condition at interior vertex '" + graph.vertex_id(v) + "'");
    }
    std::vector<std::string> warnings;
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      const double len = graph.edge(e).length;
      for (int k = 0; k <= 100; ++k) {
        const double x = len * k / 100.0;
        if (initial_u[e](x) < 0.0) {
          warnings.push_back("initial u is negative on edge '" + graph.edge(e).id + "'");
          break;
        }
      }
      for (int k = 0; k <= 100; ++k) {
        const double x = len * k / 100.0;
        if (initial_c[e](x) < 0.0) {
          warnings.push_back("initial c is negative on edge '" + graph.edge(e).id + "'");
          break;
        }
      }
    }
    return warnings;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct SimState {
  std::size_t n = 0;
  double t = 0.0;
  FEFunction u;
  FEFunction c;
};

/// Monitored quantities after one step.
struct DiagnosticsRecord {
  std::size_t n = 0;
  double t = 0.0;
  double mass_u = 0.0;
  double mass_c = 0.0;
  double min_u = 0.0;
  double min_c = 0.0;
  double l2_u = 0.0;
  double h1_seminorm_c = 0.0;
  double cumulative_dissipation_u = 0.0;  ///< sum_k tau * |u^k|_{H1}^2, k = 1..n
  double influx_u = 0.0;                  ///< mass added to u during this step (tau * sum g_u)
  double influx_c = 0.0;
};

/// Nodal right-hand-side contributions from the boundary laws, evaluated at
/// the previous time level.
struct InfluxTerms {
  std::vector<std::pair<std::size_t, double>> u;  ///< (dof, rate)
  std::vector<std::pair<std::size_t, double>> c;
  double total_u = 0.0;
  double total_c = 0.0;
};

inline InfluxTerms boundary_influx(const SimState& state, const Scenario& scenario) {
  InfluxTerms out;
  const DofMap& dofs = state.u.dofs();
  for (const auto& [v, bc] : scenario.boundary) {
    const std::size_t dof = dofs.vertex_dof(v);
    if (bc.influx_u) {
      const double g = (*bc.influx_u)(state.u[dof]);
      out.u.emplace_back(dof, g);
      out.total_u += g;
    }
    if (bc.influx_c) {
      const double g = (*bc.influx_c)(state.c[dof]);
      out.c.emplace_back(dof, g);
      out.total_c += g;
    }
  }
  return out;
}

struct Snapshot {
  std::size_t n = 0;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> c;
};

struct Trace {
  Scenario scenario;
  std::shared_ptr<const DofMap> dofs;
  std::size_t stride = 1;
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRecord> diagnostics;  ///< entry 0 is the initial state
  std::optional<SimState> final_state;
  std::vector<std::string> warnings;
  std::optional<std::string> error;  ///< set when the run aborted early
};

/// Owns the time-independent operators of one discretization of a scenario.
class Simulator {
 public:
  explicit Simulator(const Scenario& scenario)
      : Simulator(scenario, uniform_mesh(scenario.graph, scenario.discretization.h), scenario.discretization.tau) {}

  Simulator(const Scenario& scenario, Mesh mesh, double tau)
      : scenario_(scenario), tau_(tau), dofs_(std::make_shared<const DofMap>(std::move(mesh))) {
    if (!(tau_ > 0.0)) throw ValidationError("tau must be positive");
    const DofMap& d = *dofs_;
    mass_ = lumped_mass(d);
    mass_gamma_ = lumped_mass(d, scenario_.params.field(&EdgeCoefficients::gamma));
    mass_delta_ = lumped_mass(d, scenario_.params.field(&EdgeCoefficients::delta));
    k_alpha_ = stiffness(d, scenario_.params.field(&EdgeCoefficients::alpha));
    chi_ = scenario_.params.field(&EdgeCoefficients::chi);
    const SparseMatrix k_beta = stiffness(d, scenario_.params.field(&EdgeCoefficients::beta));
    const SparseMatrix m_gamma = SparseMatrix::from_diagonal(mass_gamma_);
    s_c_ = compose(mass_, tau_, {Term{1.0, k_beta}, Term{1.0, m_gamma}});
    lu_c_.factorize(s_c_);
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  double tau() const noexcept { return tau_; }
  const DofMap& dofs() const noexcept { return *dofs_; }
  const std::shared_ptr<const DofMap>& dofs_ptr() const noexcept { return dofs_; }
  const DiagonalMatrix& mass() const noexcept { return mass_; }
  const SparseMatrix& system_c() const noexcept { return s_c_; }

  /// u^0, c^0 by quasi-interpolation of the initial expressions.
  SimState initial_state() const {
    SimState s;
    s.u = quasi_interpolate(dofs_, scenario_.initial_u);
    s.c = quasi_interpolate(dofs_, scenario_.initial_c);
    return s;
  }

  /// S_u = M/tau + K(alpha) - C(c_prev).
  SparseMatrix system_u(const FEFunction& c_prev) const {
    const SparseMatrix conv = upwind_convection(*dofs_, chi_, c_prev);
    return compose(mass_, tau_, {Term{1.0, k_alpha_}, Term{-1.0, conv}});
  }

  /// Advances one step. `influx` receives the boundary terms that were applied.
  SimState step(const SimState& prev, InfluxTerms* influx = nullptr) {
    InfluxTerms g = boundary_influx(prev, scenario_);

    lu_u_.factorize(system_u(prev.c));
    std::vector<double> rhs_u(dofs_->size());
    for (std::size_t i = 0; i < rhs_u.size(); ++i) rhs_u[i] = mass_[i] / tau_ * prev.u[i];
    for (const auto& [dof, rate] : g.u) rhs_u[dof] += rate;
    FEFunction u(dofs_, lu_u_.solve(rhs_u));

    std::vector<double> rhs_c(dofs_->size());
    for (std::size_t i = 0; i < rhs_c.size(); ++i) rhs_c[i] = mass_[i] / tau_ * prev.c[i] + mass_delta_[i] * u[i];
    for (const auto& [dof, rate] : g.c) rhs_c[dof] += rate;
    FEFunction c(dofs_, lu_c_.solve(rhs_c));

    clamp_roundoff(u);
    clamp_roundoff(c);

    SimState next;
    next.n = prev.n + 1;
    next.t = static_cast<double>(next.n) * tau_;
    next.u = std::move(u);
    next.c = std::move(c);
    if (influx) *influx = std::move(g);
    return next;
  }

  /// Diagnostics of `state`; `previous` carries the running dissipation sum.
  DiagnosticsRecord diagnose(const SimState& state, const DiagnosticsRecord* previous,
                             const InfluxTerms* influx) const {
    DiagnosticsRecord r;
    r.n = state.n;
    r.t = state.t;
    const Norms nu = norms(state.u);
    const Norms nc = norms(state.c);
    r.mass_u = nu.total_mass;
    r.mass_c = nc.total_mass;
    r.min_u = *std::min_element(state.u.values().begin(), state.u.values().end());
    r.min_c = *std::min_element(state.c.values().begin(), state.c.values().end());
    r.l2_u = nu.l2;
    r.h1_seminorm_c = nc.h1_seminorm;
    r.cumulative_dissipation_u = previous ? previous->cumulative_dissipation_u + tau_ * nu.h1_seminorm * nu.h1_seminorm : 0.0;
    if (influx) {
      r.influx_u = tau_ * influx->total_u;
      r.influx_c = tau_ * influx->total_c;
    }
    return r;
  }

 private:
  static void clamp_roundoff(FEFunction& f) {
    for (double& v : f.values())
      if (v < 0.0 && v > -kPositivityTolerance) v = 0.0;
  }

  Scenario scenario_;
  double tau_;
  std::shared_ptr<const DofMap> dofs_;
  DiagonalMatrix mass_, mass_gamma_, mass_delta_;
  SparseMatrix k_alpha_;
  std::vector<double> chi_;
  SparseMatrix s_c_;
  SparseLU lu_c_;
  SparseLU lu_u_;
};

inline SimState init_state(const Simulator& sim) { return sim.initial_state(); }

struct SimulateOptions {
  std::optional<std::size_t> stride;  ///< overrides the scenario stride
};

/// Runs the scenario from t = 0 to t_end. Library errors raised after
/// validation end the run early; the partial trace carries the message.
inline Trace simulate(const Scenario& scenario, const SimulateOptions& options = {}) {
  Trace trace;
  trace.scenario = scenario;
  trace.warnings = scenario.validate();
  trace.stride = options.stride.value_or(scenario.snapshot_stride());

  Simulator sim(scenario);
  trace.dofs = sim.dofs_ptr();
  const std::size_t steps = scenario.num_steps();

  SimState state = sim.initial_state();
  trace.diagnostics.push_back(sim.diagnose(state, nullptr, nullptr));
  trace.snapshots.push_back({0, 0.0, state.u.values(), state.c.values()});
  try {
    for (std::size_t n = 1; n <= steps; ++n) {
      InfluxTerms influx;
      state = sim.step(state, &influx);
      trace.diagnostics.push_back(sim.diagnose(state, &trace.diagnostics.back(), &influx));
      if (n % trace.stride == 0) trace.snapshots.push_back({n, state.t, state.u.values(), state.c.values()});
    }
  } catch (const Error& e) {
    trace.error = e.what();
  }
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace ksnet
