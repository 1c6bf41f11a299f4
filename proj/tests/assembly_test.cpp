#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "ksnet/assembly.hpp"
#include "test_support.hpp"

using namespace ksnet;
using testing_support::make_dofs;

namespace {

void expect_dense_near(const DenseMatrix& a, const DenseMatrix& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[i][j], b[i][j], tol) << "entry " << i << "," << j;
}

// single edge of length 1 split into two elements; dofs 0, 1 are the ends, 2 the midpoint
std::shared_ptr<const DofMap> two_elements() {
  return make_dofs(Mesh(testing_support::single_edge(), {2}));
}

}  // namespace

TEST(Assembly, HandComputedMassAndStiffness) {
  auto d = two_elements();
  const DiagonalMatrix m = lumped_mass(*d);
  EXPECT_EQ(m.entries(), (std::vector<double>{0.25, 0.25, 0.5}));

  const std::vector<double> eta{3.0};
  const DiagonalMatrix m3 = lumped_mass(*d, eta);
  EXPECT_EQ(m3.entries(), (std::vector<double>{0.75, 0.75, 1.5}));

  const DenseMatrix k = stiffness(*d, std::vector<double>{1.0}).to_dense();
  expect_dense_near(k, {{2, 0, -2}, {0, 2, -2}, {-2, -2, 4}}, 0.0);
}

TEST(Assembly, HandComputedUpwind) {
  auto d = two_elements();
  const FEFunction c(d, std::vector<double>{0.0, 1.0, 0.5});
  const std::vector<double> chi{1.0};
  expect_dense_near(upwind_convection(*d, chi, c).to_dense(), {{-1, 0, 0}, {0, 0, 1}, {1, 0, -1}}, 1e-15);

  // reversed gradient takes the head-side value
  const FEFunction r(d, std::vector<double>{1.0, 0.0, 0.5});
  expect_dense_near(upwind_convection(*d, chi, r).to_dense(), {{0, 0, 1}, {0, -1, 0}, {0, 1, -1}}, 1e-15);
}

TEST(Assembly, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const MetricGraph g = testing_support::random_small_graph(rng, trial);
    auto d = make_dofs(testing_support::random_mesh(rng, g, 4));
    const auto eta = testing_support::random_vector(rng, g.num_edges(), 0.1, 5.0);
    const auto chi = testing_support::random_vector(rng, g.num_edges(), -3.0, 3.0);
    const auto cv = testing_support::random_vector(rng, d->size(), 0.0, 2.0);
    const FEFunction c(d, cv);

    expect_dense_near(lumped_mass(*d, eta).to_dense(), oracle::lumped_mass(*d, eta), 1e-13);
    expect_dense_near(stiffness(*d, eta).to_dense(), oracle::stiffness(*d, eta), 1e-11);
    expect_dense_near(upwind_convection(*d, chi, c).to_dense(), oracle::upwind_convection(*d, chi, cv), 1e-10);
  }
}

TEST(Assembly, SignAndSumProperties) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const MetricGraph g = testing_support::random_small_graph(rng, trial);
    auto d = make_dofs(testing_support::random_mesh(rng, g, 5));
    const auto eta = testing_support::random_vector(rng, g.num_edges(), 0.1, 5.0);
    const auto chi = testing_support::random_vector(rng, g.num_edges(), -3.0, 3.0);
    const FEFunction c(d, testing_support::random_vector(rng, d->size(), -1.0, 2.0));

    const DiagonalMatrix m = lumped_mass(*d, eta);
    for (double v : m.entries()) EXPECT_GT(v, 0.0);

    const SparseMatrix k = stiffness(*d, eta);
    for (double s : k.row_sums()) EXPECT_NEAR(s, 0.0, 1e-10);
    k.for_each([&](std::size_t i, std::size_t j, double v) {
      if (i == j) EXPECT_GT(v, 0.0);
      else EXPECT_LE(v, 0.0);
      EXPECT_EQ(v, k.at(j, i));
    });

    const SparseMatrix cm = upwind_convection(*d, chi, c);
    for (double s : cm.column_sums()) EXPECT_NEAR(s, 0.0, 1e-10);
    cm.for_each([](std::size_t i, std::size_t j, double v) {
      if (i == j) EXPECT_LE(v, 0.0);
      else EXPECT_GE(v, 0.0);
    });
  }
}

TEST(Assembly, RejectsWrongSizes) {
  auto d = two_elements();
  EXPECT_THROW(lumped_mass(*d, std::vector<double>{1.0, 2.0}), DimensionMismatch);
  EXPECT_THROW(stiffness(*d, std::vector<double>{}), DimensionMismatch);
  auto other = make_dofs(Mesh(testing_support::single_edge(), {3}));
  EXPECT_THROW(upwind_convection(*d, std::vector<double>{1.0}, FEFunction(other)), DimensionMismatch);
  EXPECT_THROW(FEFunction(d, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(QuasiInterpolation, ReproducesConstants) {
  auto d = make_dofs(uniform_mesh(testing_support::tripod(), 0.25));
  const FEFunction u = quasi_interpolate(d, std::vector<Expression>(3, Expression::parse("4")));
  for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 4.0);
}

TEST(QuasiInterpolation, LinearFunctionOnSingleEdge) {
  // patch averages of x on [0,1] with h = 1/4: ends 1/8 and 7/8, interior nodes exact
  auto d = make_dofs(uniform_mesh(testing_support::single_edge(), 0.25));
  const FEFunction u = quasi_interpolate(d, std::vector<Expression>{Expression::parse("x")});
  EXPECT_NEAR(u[d->vertex_dof(0)], 0.125, 1e-15);
  EXPECT_NEAR(u[d->vertex_dof(1)], 0.875, 1e-15);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(u.node_value(0, k), 0.25 * k, 1e-15);
}

TEST(QuasiInterpolation, CosineBumpOnTripod) {
  auto d = make_dofs(uniform_mesh(testing_support::tripod(), 0.0625));
  const std::vector<Expression> c0{Expression::parse("0"), Expression::parse("0"), Expression::parse("1-cos(pi*x)")};
  const FEFunction c = quasi_interpolate(d, c0);
  const double h = 0.0625;
  const double pi = std::numbers::pi;
  // exact patch average of 1 - cos(pi x) over [1-h, 1] at v3
  const double v3 = 1.0 + std::sin(pi * (1.0 - h)) / (pi * h);
  EXPECT_NEAR(c[d->vertex_dof(2)], v3, 1e-7);
  // the junction averages one element of the bump with five elements of zero data
  const double bump_first = h - std::sin(pi * h) / pi;
  EXPECT_NEAR(c[d->vertex_dof(3)], bump_first / (3.0 * h), 1e-7);
  EXPECT_EQ(c[d->vertex_dof(0)], 0.0);
  for (double v : c.values()) EXPECT_GE(v, 0.0);
}

TEST(Norms, HandValues) {
  auto d = two_elements();
  const Norms n = norms(*d, std::vector<double>{0.0, 1.0, 0.5});
  EXPECT_NEAR(n.l2, std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(n.h1_seminorm, 1.0, 1e-15);
  EXPECT_NEAR(n.h1, std::sqrt(4.0 / 3.0), 1e-15);
  EXPECT_NEAR(n.total_mass, 0.5, 1e-15);
  EXPECT_NEAR(n.lumped, std::sqrt(0.25 * 1.0 + 0.5 * 0.25), 1e-15);
  EXPECT_EQ(n.linf_nodal, 1.0);
}

TEST(Norms, LumpedAndExactL2AreEquivalent) {
  // on P1 functions: |v|_L2 <= |v|_h <= sqrt(3) |v|_L2
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const MetricGraph g = testing_support::random_small_graph(rng, trial);
    auto d = make_dofs(testing_support::random_mesh(rng, g, 6));
    const auto v = testing_support::random_vector(rng, d->size(), -1.0, 1.0);
    const Norms n = norms(*d, v);
    EXPECT_LE(n.l2, n.lumped * (1.0 + 1e-12));
    EXPECT_LE(n.lumped, std::sqrt(3.0) * n.l2 * (1.0 + 1e-12));
  }
}

TEST(Norms, MassEqualsLumpedMassWeightedSum) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const MetricGraph g = testing_support::random_small_graph(rng, trial);
    auto d = make_dofs(testing_support::random_mesh(rng, g, 6));
    const auto v = testing_support::random_vector(rng, d->size(), 0.0, 3.0);
    const DiagonalMatrix m = lumped_mass(*d);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += m[i] * v[i];
    EXPECT_NEAR(norms(*d, v).total_mass, s, 1e-12 * std::max(1.0, s));
  }
}
