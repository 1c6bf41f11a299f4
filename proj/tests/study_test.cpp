#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ksnet/study.hpp"
#include "test_support.hpp"

using namespace ksnet;
using testing_support::make_dofs;
using testing_support::tripod_scenario;

TEST(NestedInject, LinearOnSingleEdge) {
  const Mesh coarse(testing_support::single_edge(), {1});
  const FEFunction v(make_dofs(coarse), std::vector<double>{0.0, 1.0});
  auto fine = make_dofs(refine(refine(coarse)));
  const FEFunction w = nested_inject(v, fine);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_DOUBLE_EQ(w.node_value(0, k), 0.25 * k);
}

TEST(NestedInject, IdentityAndRejection) {
  const Mesh m = uniform_mesh(testing_support::tripod(), 0.25);
  std::mt19937 rng(1);
  const FEFunction v(make_dofs(m), testing_support::random_vector(rng, DofMap(m).size(), -1.0, 1.0));
  EXPECT_EQ(nested_inject(v, make_dofs(m)).values(), v.values());
  EXPECT_THROW(nested_inject(v, make_dofs(uniform_mesh(testing_support::tripod(), 0.2))), MeshNotNested);
  EXPECT_THROW(nested_inject(v, make_dofs(Mesh(m.graph(), {8, 8, 16}))), MeshNotNested);
}

TEST(NestedInject, CompositionIsBitwiseDirect) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const MetricGraph g = testing_support::random_small_graph(rng, trial);
    const Mesh m0 = testing_support::random_mesh(rng, g, 5);
    const Mesh m1 = refine(m0), m2 = refine(m1), m3 = refine(m2);
    auto d0 = make_dofs(m0), d1 = make_dofs(m1), d3 = make_dofs(m3);
    const FEFunction v(d0, testing_support::random_vector(rng, d0->size(), -2.0, 2.0));
    const FEFunction direct = nested_inject(v, d3);
    const FEFunction twice = nested_inject(nested_inject(v, d1), d3);
    EXPECT_EQ(direct.values(), twice.values());
    // injection preserves the function, so its norms are unchanged
    EXPECT_NEAR(norms(direct).l2, norms(v).l2, 1e-12);
    EXPECT_NEAR(norms(direct).h1_seminorm, norms(v).h1_seminorm, 1e-10);
  }
}

TEST(RefinementError, TrapezoidInTime) {
  auto d = make_dofs(Mesh(testing_support::single_edge(), {1}));
  RefinementError err(0.5);
  // constant differences 1, 2, 3 at t = 0, 0.5, 1 have |.|_H1^2 = 1, 4, 9
  for (double c : {1.0, 2.0, 3.0}) err.add_difference(FEFunction(d, std::vector<double>{c, c}));
  EXPECT_EQ(err.nodes(), 3u);
  EXPECT_DOUBLE_EQ(err.linf_l2(), 3.0);
  EXPECT_DOUBLE_EQ(err.l2_h1(), std::sqrt(0.5 * (0.5 + 4.0 + 4.5)));
}

TEST(PairError, IdenticalSolutionsGiveZero) {
  Scenario s = tripod_scenario(0.25, 0.1, 0.2);
  s.initial_c.assign(3, Expression::parse("0"));
  s.params = EdgeParams(3, {1.0, 1.0, 0.0, 0.0, 0.0});  // stationary u = 4, c = 0
  Scenario fine = s;
  fine.discretization = {0.125, 0.05, 0.2};
  const Trace tc = simulate(s, {1});
  const Trace tf = simulate(fine, {1});
  const PairError e = pair_error(tf, tc);
  EXPECT_NEAR(e.u.linf_l2, 0.0, 1e-13);
  EXPECT_NEAR(e.u.l2_h1, 0.0, 1e-12);
  EXPECT_EQ(e.c.linf_l2, 0.0);
}

TEST(PairError, RequiresSnapshotsAtCoarseNodes) {
  Scenario s = tripod_scenario(0.25, 0.1, 0.4);
  Scenario fine = s;
  fine.discretization = {0.125, 0.05, 0.4};
  const Trace tc = simulate(s, {1});
  const Trace tf = simulate(fine, {4});
  EXPECT_THROW(pair_error(tf, tc), MissingSnapshot);
  const Trace same_tau = simulate(s, {1});
  EXPECT_THROW(pair_error(same_tau, tc), MeshNotNested);
}

TEST(Convergence, EocFormula) {
  EXPECT_NEAR(eoc(0.096656, 0.049195), 0.974, 1e-3);
  EXPECT_DOUBLE_EQ(eoc(1.0, 0.25), 2.0);
}

TEST(Convergence, StudyMatchesPairwiseTraces) {
  const Scenario s = tripod_scenario(0.25, 0.05, 0.2);
  const ConvergenceTable table = convergence_study(s, 2);
  ASSERT_EQ(table.u.size(), 2u);
  EXPECT_FALSE(table.u[0].eoc_linf);
  ASSERT_TRUE(table.u[1].eoc_linf);
  EXPECT_DOUBLE_EQ(table.u[0].h, 0.125);
  EXPECT_DOUBLE_EQ(table.u[1].tau, 0.0125);

  Scenario s1 = s, s2 = s;
  s1.discretization = {0.125, 0.025, 0.2};
  s2.discretization = {0.0625, 0.0125, 0.2};
  const Trace t0 = simulate(s, {1}), t1 = simulate(s1, {1}), t2 = simulate(s2, {1});
  const PairError e0 = pair_error(t1, t0), e1 = pair_error(t2, t1);
  EXPECT_NEAR(table.u[0].err_linf_l2, e0.u.linf_l2, 1e-14);
  EXPECT_NEAR(table.u[1].err_l2_h1, e1.u.l2_h1, 1e-14);
  EXPECT_NEAR(table.c[0].err_l2_h1, e0.c.l2_h1, 1e-14);
  EXPECT_NEAR(table.c[1].err_linf_l2, e1.c.linf_l2, 1e-14);
  EXPECT_NEAR(*table.c[1].eoc_h1, eoc(e0.c.l2_h1, e1.c.l2_h1), 1e-10);
}

TEST(Convergence, SingleLevelHasNoRates) {
  const ConvergenceTable table = convergence_study(tripod_scenario(0.25, 0.05, 0.1), 1);
  ASSERT_EQ(table.u.size(), 1u);
  EXPECT_FALSE(table.u[0].eoc_linf);
  EXPECT_FALSE(table.c[0].eoc_h1);
  EXPECT_GT(table.u[0].err_linf_l2, 0.0);
  EXPECT_THROW(convergence_study(tripod_scenario(0.25, 0.05, 0.1), 0), ValidationError);
}

TEST(InvariantReport, PassesOnTripod) {
  const InvariantReport r = invariant_report(simulate(tripod_scenario(0.125, 0.01, 0.5)));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.mode, InvariantReport::MassMode::Conservation);
  EXPECT_LE(r.max_mass_defect, kMassTolerance);
  EXPECT_GE(r.min_u, 0.0);
  EXPECT_GT(r.dissipation_u, 0.0);
  ASSERT_EQ(r.checks.size(), 4u);
}

TEST(InvariantReport, LocatesNegativeSnapshotValue) {
  Trace t = simulate(tripod_scenario(0.25, 0.1, 0.3), {1});
  Snapshot& s = t.snapshots[2];
  for (double& v : s.u) v = -v;
  const InvariantReport r = invariant_report(t);
  EXPECT_FALSE(r.passed());
  bool found = false;
  for (const auto& c : r.checks) {
    if (c.name != "positivity") continue;
    found = true;
    EXPECT_FALSE(c.passed);
    EXPECT_NE(c.detail.find("u at t=0.2"), std::string::npos) << c.detail;
  }
  EXPECT_TRUE(found);
}

TEST(Convergence, ConcentrationErrorsBelowDensityErrors) {
  const ConvergenceTable table = convergence_study(tripod_scenario(0.0625, 0.0078125, 1.0), 2);
  for (std::size_t k = 0; k < table.u.size(); ++k) {
    EXPECT_LT(table.c[k].err_linf_l2, table.u[k].err_linf_l2);
    EXPECT_LT(table.c[k].err_l2_h1, table.u[k].err_l2_h1);
  }
}
