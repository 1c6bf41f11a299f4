#pragma once

// Command implementations behind the `ksnet` executable. Each returns the
// process exit code: 0 success, 1 error, 2 invariant violation.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ksnet/errors.hpp"
#include "ksnet/scenario_io.hpp"
#include "ksnet/stepping.hpp"
#include "ksnet/study.hpp"

namespace ksnet {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitViolation = 2 };

/// One row per mesh node per snapshot, traversing each edge from tail to head.
/// Vertex values therefore appear once per incident edge.
inline void write_snapshots_csv(std::ostream& out, const Trace& trace) {
  out << "time,edge,x,u,c\n";
  const DofMap& dofs = *trace.dofs;
  const Mesh& mesh = dofs.mesh();
  for (const Snapshot& s : trace.snapshots) {
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      const std::string& id = mesh.graph().edge(e).id;
      for (std::size_t k = 0; k <= mesh.elements(e); ++k) {
        const std::size_t i = dofs.node_dof(e, k);
        out << fmt::format("{},{},{},{},{}\n", s.t, id, mesh.node_coordinate(e, k), s.u[i], s.c[i]);
      }
    }
  }
}

inline void write_diagnostics_csv(std::ostream& out, const Trace& trace) {
  out << "step,time,mass_u,mass_c,min_u,min_c,l2_u,h1_seminorm_c,cumulative_dissipation_u,influx_u,influx_c\n";
  for (const auto& d : trace.diagnostics)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", d.n, d.t, d.mass_u, d.mass_c, d.min_u, d.min_c, d.l2_u,
                       d.h1_seminorm_c, d.cumulative_dissipation_u, d.influx_u, d.influx_c);
}

/// Table layout: h, tau, err_linf_l2, eoc, err_l2_h1, eoc; eoc empty in the first row.
inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "h,tau,err_linf_l2,eoc,err_l2_h1,eoc\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.h, r.tau, r.err_linf_l2,
                       r.eoc_linf ? fmt::format("{}", *r.eoc_linf) : std::string(), r.err_l2_h1,
                       r.eoc_h1 ? fmt::format("{}", *r.eoc_h1) : std::string());
  }
}

inline void print_convergence_table(std::ostream& out, const std::string& name,
                                    const std::vector<ConvergenceRow>& rows) {
  out << fmt::format("{:>10} {:>10} {:>14} {:>6} {:>14} {:>6}\n", "h", "tau",
                     "|" + name + "|Linf(L2)", "eoc", "|" + name + "|L2(H1)", "eoc");
  auto eoc_text = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string("--"); };
  for (const auto& r : rows)
    out << fmt::format("{:>10.6g} {:>10.6g} {:>14.6g} {:>6} {:>14.6g} {:>6}\n", r.h, r.tau, r.err_linf_l2,
                       eoc_text(r.eoc_linf), r.err_l2_h1, eoc_text(r.eoc_h1));
}

inline void print_report(std::ostream& out, const InvariantReport& report) {
  for (const auto& c : report.checks)
    out << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
}

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  return f;
}
}  // namespace detail

inline int cmd_simulate(const std::string& scenario_path, const std::filesystem::path& out_dir, std::ostream& out,
                        std::ostream& err) {
  try {
    const Scenario scenario = parse_scenario(scenario_path);
    const Trace trace = simulate(scenario);
    for (const auto& w : trace.warnings) err << "warning: " << w << "\n";

    std::filesystem::create_directories(out_dir);
    {
      auto f = detail::open_output(out_dir / "snapshots.csv");
      write_snapshots_csv(f, trace);
    }
    {
      auto f = detail::open_output(out_dir / "diagnostics.csv");
      write_diagnostics_csv(f, trace);
    }

    const auto& last = trace.diagnostics.back();
    out << fmt::format("dofs {}  steps {}  tau {}  h {}\n", trace.dofs->size(), last.n,
                       scenario.discretization.tau, trace.dofs->mesh().h());
    out << fmt::format("t {}  mass_u {:.12g}  mass_c {:.12g}  min_u {:.6g}  min_c {:.6g}\n", last.t, last.mass_u,
                       last.mass_c, last.min_u, last.min_c);
    if (trace.error) {
      err << "error: " << *trace.error << "\n";
      return kExitError;
    }
    const InvariantReport report = invariant_report(trace);
    print_report(out, report);
    return report.passed() ? kExitOk : kExitViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

inline int cmd_converge(const std::string& scenario_path, std::size_t levels, const std::filesystem::path& out_dir,
                        std::ostream& out, std::ostream& err) {
  try {
    if (levels < 2) throw ValidationError("--levels must be at least 2");
    const Scenario scenario = parse_scenario(scenario_path);
    const ConvergenceTable table = convergence_study(scenario, levels);
    std::filesystem::create_directories(out_dir);
    {
      auto f = detail::open_output(out_dir / "convergence_u.csv");
      write_convergence_csv(f, table.u);
    }
    {
      auto f = detail::open_output(out_dir / "convergence_c.csv");
      write_convergence_csv(f, table.c);
    }
    print_convergence_table(out, "u_h-u_H", table.u);
    out << "\n";
    print_convergence_table(out, "c_h-c_H", table.c);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

inline int cmd_check(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  try {
    const Scenario scenario = parse_scenario(scenario_path);
    const Trace trace = simulate(scenario);
    for (const auto& w : trace.warnings) err << "warning: " << w << "\n";
    const InvariantReport report = invariant_report(trace);
    print_report(out, report);
    return report.passed() ? kExitOk : kExitViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace ksnet
